#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "uavfog/error.hpp"
#include "uavfog/geometry.hpp"

namespace uavfog {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Gamma-density share P = β^α/(α−1)! · s^(α−1) · e^(−βs) at normalised size s.
inline double channel_share(double s, int alpha = 2, double beta = 2.0) {
  if (s < 0.0 || alpha < 1 || !(beta > 0.0)) throw DomainError("invalid channel-share input");
  double fact = 1.0;
  for (int k = 2; k < alpha; ++k) fact *= k;
  return std::pow(beta, alpha) / fact * std::pow(s, alpha - 1) * std::exp(-beta * s);
}

class AdmissionError : public Error {
public:
  AdmissionError(const std::string& what, std::vector<int> deferred)
      : Error("admission", what), deferred_(std::move(deferred)) {}
  const std::vector<int>& deferred() const noexcept { return deferred_; }

private:
  std::vector<int> deferred_;
};

struct ChannelAllocation {
  std::vector<double> share;  // P_j
  std::vector<int> channels;  // C_j
  int total = 0;              // N_c
  int used() const { return std::accumulate(channels.begin(), channels.end(), 0); }
};

/// C_j = round(N_c·P_j) for active devices, at least one channel each; when the
/// sum exceeds N_c it is rescaled proportionally with largest-remainder
/// rounding. Inactive devices get zero channels.
inline ChannelAllocation allocate_channels(const std::vector<double>& shares,
                                           const std::vector<bool>& active, int n_channels) {
  if (shares.size() != active.size()) throw DomainError("shares/active size mismatch");
  if (n_channels < 1) throw DomainError("need at least one channel");
  const std::size_t n = shares.size();
  ChannelAllocation out{shares, std::vector<int>(n, 0), n_channels};
  std::vector<int> act;
  for (std::size_t j = 0; j < n; ++j)
    if (active[j]) act.push_back(static_cast<int>(j));
  if (static_cast<int>(act.size()) > n_channels) {
    // admit the largest shares, defer the rest
    std::vector<int> order = act;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return shares[a] > shares[b]; });
    std::vector<int> deferred(order.begin() + n_channels, order.end());
    std::sort(deferred.begin(), deferred.end());
    std::string list;
    for (int d : deferred) list += (list.empty() ? "" : ",") + std::to_string(d);
    throw AdmissionError("more active devices than channels; deferred: " + list, deferred);
  }
  long sum = 0;
  for (int j : act) {
    out.channels[j] = std::max(1, static_cast<int>(std::lround(n_channels * shares[j])));
    sum += out.channels[j];
  }
  if (sum <= n_channels) return out;

  std::vector<double> rem(n, 0.0);
  long fixed = 0;
  for (int j : act) {
    const double q = static_cast<double>(n_channels) * out.channels[j] / static_cast<double>(sum);
    out.channels[j] = std::max(1, static_cast<int>(std::floor(q)));
    rem[j] = q - std::floor(q);
    fixed += out.channels[j];
  }
  // index order breaks remainder ties
  std::vector<int> by_rem = act;
  std::stable_sort(by_rem.begin(), by_rem.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; fixed < n_channels; k = (k + 1) % by_rem.size(), ++fixed)
    ++out.channels[by_rem[k]];
  for (std::size_t k = by_rem.size(); fixed > n_channels;) {
    k = (k == 0 ? by_rem.size() : k) - 1;
    if (out.channels[by_rem[k]] > 1) {
      --out.channels[by_rem[k]];
      --fixed;
    }
  }
  return out;
}

/// P^LoS = 1 / (1 + ζ·exp(−(θ − ζ))).
inline double los_probability(double theta, double zeta) {
  if (!std::isfinite(theta) || !std::isfinite(zeta)) throw DomainError("non-finite LoS input");
  return 1.0 / (1.0 + zeta * std::exp(-(theta - zeta)));
}

/// Elevation of `high` seen from `low`, in [0, π/2].
inline double elevation_angle(const Vec3& low, const Vec3& high) {
  const double h = std::hypot(high.x - low.x, high.y - low.y);
  return std::clamp(std::atan2(high.z - low.z, h), 0.0, std::numbers::pi / 2);
}

/// L = P^LoS · (4π f_c / c · d), linear in distance.
inline double path_loss(double p_los, double carrier_freq, double d) {
  return p_los * (4.0 * std::numbers::pi * carrier_freq / kSpeedOfLight * d);
}

inline double sinr(double power, double loss, double interference, double noise) {
  return power / (loss * (interference + noise));
}

inline double shannon_rate(double bandwidth, double xi) { return bandwidth * std::log2(1.0 + xi); }

struct LinkEndpoints {
  double distance = 0.0;
  double elevation = 0.0;
  double obstruction = 0.5;  // ζ
  bool line_of_sight = false;  // forces P^LoS = 1
};

struct LinkBudget {
  double power = 0.0;
  double bandwidth = 0.0;
  double noise = 0.0;
  double interference = 0.0;
};

struct LinkResult {
  double p_los = 0.0, loss = 0.0, sinr = 0.0, rate = 0.0;
};

inline LinkResult link_rate(const LinkEndpoints& e, const LinkBudget& b, double carrier_freq) {
  if (!(e.distance > 0.0)) throw DomainError("degenerate link geometry: zero distance");
  if (!(b.bandwidth > 0.0)) throw DomainError("link bandwidth must be positive");
  LinkResult r;
  r.p_los = e.line_of_sight ? 1.0 : los_probability(e.elevation, e.obstruction);
  r.loss = path_loss(r.p_los, carrier_freq, e.distance);
  r.sinr = sinr(b.power, r.loss, b.interference, b.noise);
  r.rate = shannon_rate(b.bandwidth, r.sinr);
  return r;
}

}  // namespace uavfog
