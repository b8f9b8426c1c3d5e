#include "totsched/channel.hpp"

#include <cmath>

#include "totsched/errors.hpp"

namespace totsched::channel {

std::string to_string(DistanceUnit u) { return u == DistanceUnit::kilometers ? "km" : "m"; }

DistanceUnit distance_unit_from_string(const std::string& s) {
  if (s == "km") return DistanceUnit::kilometers;
  if (s == "m") return DistanceUnit::meters;
  throw ConfigError("distance unit must be 'km' or 'm', got '" + s + "'");
}

double path_loss_db(double distance) {
  if (!(distance > 0.0)) throw DomainError("path loss needs a positive distance");
  return 127.0 + 30.0 * std::log10(distance);
}

double sample_fading(Rng& rng) {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform01(rng));
}

double link_rate(const LinkParams& params, double gain, double distance) {
  if (!(params.bandwidth_hz > 0.0 && params.power_w > 0.0 && params.noise_psd > 0.0))
    throw ConfigError("link parameters must be strictly positive");
  if (gain < 0.0) throw DomainError("fading gain must be non-negative");
  const double pl = path_loss_db(distance);
  const double h = gain / std::pow(10.0, pl / 10.0);
  const double snr = params.power_w * h / (params.bandwidth_hz * params.noise_psd);
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

double tx_time(double bits, double rate) {
  if (bits <= 0.0) return 0.0;
  if (!(rate > 0.0)) throw UnreachableLinkError("positive payload over a zero-rate link");
  return bits / rate;
}

double distance(const NodePosition& a, const NodePosition& b, DistanceUnit unit) {
  const double meters = std::hypot(a.x - b.x, a.y - b.y);
  return unit == DistanceUnit::kilometers ? meters / 1000.0 : meters;
}

}  // namespace totsched::channel
