#include "totsched/genai.hpp"

#include <cmath>

#include "totsched/errors.hpp"

namespace totsched::genai {

namespace {

struct Line {
  double slope;
  double intercept;
};

// OLS on centred data; rejects designs with fewer than two distinct x.
Line ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw SingularityError("fit needs at least two samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-12 * (1.0 + mx * mx) * n)) throw SingularityError("fit needs at least two distinct token counts");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

void ServerProfile::validate() const {
  if (!(sigma > 0.0 && rho > 0.0 && eta > 0.0 && psi >= 0.0 && score_max > 0.0))
    throw ConfigError("server profile needs sigma, rho, eta, score_max > 0 and psi >= 0");
}

ServerProfile sample_sp_profile(const ProfileRanges& r, Rng& rng, double score_max) {
  ServerProfile p;
  p.score_max = score_max;
  p.sigma = uniform(rng, r.sigma_lo, r.sigma_hi);
  p.rho = uniform(rng, r.rho_lo, r.rho_hi);
  p.eta = uniform(rng, r.eta_lo, r.eta_hi);
  p.psi = uniform(rng, r.psi_lo, r.psi_hi);
  p.role = ServerRole::service_provider;
  return p;
}

double gen_quality(const ServerProfile& p, double tokens) {
  return p.score_max - p.sigma * std::exp(-p.rho * tokens);
}

double gen_delay(const ServerProfile& p, double tokens) { return p.eta * tokens + p.psi; }

QualityFit fit_quality(const std::vector<FitSample>& samples, double score_max) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (!(s.tokens > 0.0)) throw FitDomainError("token counts must be positive");
    if (s.value >= score_max) throw FitDomainError("score at or above score_max cannot be linearised");
    x.push_back(s.tokens);
    y.push_back(std::log(score_max - s.value));
  }
  const Line line = ordinary_least_squares(x, y);
  QualityFit fit;
  fit.sigma = std::exp(line.intercept);
  fit.rho = -line.slope;
  if (!(fit.rho > 0.0)) throw FitDomainError("scores do not increase with token count");
  ServerProfile p;
  p.score_max = score_max;
  p.sigma = fit.sigma;
  p.rho = fit.rho;
  double sse = 0.0;
  for (const auto& s : samples) {
    const double r = s.value - gen_quality(p, s.tokens);
    sse += r * r;
  }
  fit.rmse = std::sqrt(sse / static_cast<double>(samples.size()));
  return fit;
}

DelayFit fit_delay(const std::vector<FitSample>& samples) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (!(s.tokens > 0.0)) throw FitDomainError("token counts must be positive");
    x.push_back(s.tokens);
    y.push_back(s.value);
  }
  const Line line = ordinary_least_squares(x, y);
  DelayFit fit{line.slope, line.intercept, 0.0};
  double sse = 0.0;
  for (const auto& s : samples) {
    const double r = s.value - (fit.eta * s.tokens + fit.psi);
    sse += r * r;
  }
  fit.rmse = std::sqrt(sse / static_cast<double>(samples.size()));
  return fit;
}

}  // namespace totsched::genai
