#pragma once

#include <vector>

#include "totsched/random.hpp"

namespace totsched::genai {

enum class ServerRole { base_station, service_provider };

/// Fitted token -> (quality, delay) constants of one server.
struct ServerProfile {
  double score_max = 10.0;
  double sigma = 50.0;  // initial score deficit
  double rho = 0.085;   // quality improvement rate per token
  double eta = 0.05;    // seconds per token
  double psi = 0.1;     // base overhead, seconds
  ServerRole role = ServerRole::base_station;

  /// Throws ConfigError unless sigma, rho, eta, score_max > 0 and psi >= 0.
  void validate() const;
};

/// Open intervals the SP constants are drawn from.
struct ProfileRanges {
  double sigma_lo = 30.0, sigma_hi = 55.0;
  double rho_lo = 0.035, rho_hi = 0.055;
  double eta_lo = 0.02, eta_hi = 0.04;
  double psi_lo = 0.05, psi_hi = 0.15;
};

ServerProfile sample_sp_profile(const ProfileRanges& ranges, Rng& rng, double score_max = 10.0);

/// score_max - sigma * exp(-rho * C). Not clamped.
double gen_quality(const ServerProfile& p, double tokens);

/// eta * C + psi.
double gen_delay(const ServerProfile& p, double tokens);

struct FitSample {
  double tokens = 0.0;
  double value = 0.0;  // observed score or observed delay in seconds
};

struct QualityFit {
  double sigma = 0.0;
  double rho = 0.0;
  double rmse = 0.0;  // in score units, on the original scale
};

struct DelayFit {
  double eta = 0.0;
  double psi = 0.0;
  double rmse = 0.0;
};

/// Least squares on log(score_max - score) = log(sigma) - rho * C.
QualityFit fit_quality(const std::vector<FitSample>& samples, double score_max = 10.0);

/// Ordinary least squares line through (C, delay).
DelayFit fit_delay(const std::vector<FitSample>& samples);

}  // namespace totsched::genai
