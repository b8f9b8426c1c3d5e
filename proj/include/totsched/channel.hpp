#pragma once

#include <string>

#include "totsched/random.hpp"

namespace totsched::channel {

struct NodePosition {
  double x = 0.0;  // meters
  double y = 0.0;
};

enum class DistanceUnit { kilometers, meters };

std::string to_string(DistanceUnit u);
DistanceUnit distance_unit_from_string(const std::string& s);

struct LinkParams {
  double bandwidth_hz = 2e6;
  double power_w = 1.0;
  double noise_psd = 4e-21;  // W/Hz
};

/// Large-scale path loss in dB, 127 + 30 log10(d). Throws DomainError for d <= 0.
double path_loss_db(double distance);

/// |g|^2 for g ~ CN(0, 1), i.e. Exp(1).
double sample_fading(Rng& rng);

/// Achievable rate in bit/s: B log2(1 + p h / (B N0)), h = |g|^2 / 10^(PL/10).
double link_rate(const LinkParams& params, double gain, double distance);

/// Seconds needed to push `bits` through a link of `rate` bit/s.
double tx_time(double bits, double rate);

/// Distance between two positions expressed in `unit` (positions are meters).
double distance(const NodePosition& a, const NodePosition& b, DistanceUnit unit);

}  // namespace totsched::channel
