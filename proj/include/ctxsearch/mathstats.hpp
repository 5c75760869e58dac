#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <utility>

#include "ctxsearch/errors.hpp"

namespace ctxsearch {

using Vector = Eigen::VectorXd;

/// SplitMix64 finalizer. Used to derive engine seeds and substream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Seedable random stream. A (seed, stream_id) pair fully determines the
/// sequence of draws, so independent trials can run on any thread in any
/// order and still reproduce bit-for-bit. Not thread-safe; one owner only.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(combine_seed(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  /// Fresh stream keyed off this one's identity; does not advance this stream.
  RngStream substream(std::uint64_t id) const {
    return RngStream(seed_, combine_seed(stream_id_, id));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(double p) const noexcept { return lower <= p && p <= upper; }
  double center() const noexcept { return 0.5 * (lower + upper); }
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

/// Uniform draw from the closed unit ball in R^d: a Gaussian direction scaled
/// by U^(1/d).
inline Vector sample_uniform_ball(std::size_t d, RngStream& rng) {
  if (d == 0) throw InvalidArgument("sample_uniform_ball: dimension must be >= 1");
  Vector x(static_cast<Eigen::Index>(d));
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    norm2 = x.squaredNorm();
  } while (norm2 == 0.0);
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  x *= radius / std::sqrt(norm2);
  return x;
}

/// Anytime Hoeffding interval around successes/trials with half-width
/// sqrt(ln(8 n^2 / delta) / (2 trials)), n being the run-wide step count.
/// Endpoints are deliberately left unclipped.
inline ConfidenceInterval hoeffding_interval(std::size_t successes, std::size_t trials,
                                             std::size_t global_n, double delta_s) {
  if (trials == 0) throw InvalidArgument("hoeffding_interval: zero trials");
  if (global_n == 0) throw InvalidArgument("hoeffding_interval: global_n must be >= 1");
  if (!(delta_s > 0.0 && delta_s < 1.0))
    throw InvalidArgument("hoeffding_interval: delta_s must lie in (0, 1)");
  if (successes > trials) throw InvalidArgument("hoeffding_interval: successes > trials");
  const double n = static_cast<double>(global_n);
  const double t = static_cast<double>(trials);
  const double center = static_cast<double>(successes) / t;
  const double half = std::sqrt(std::log(8.0 * n * n / delta_s) / (2.0 * t));
  return {center - half, center + half};
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// OLS of ln(err) on ln(n).
inline LogLogFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  std::set<double> distinct;
  for (const auto& [n, err] : points) {
    if (!(n >= 1.0)) throw InvalidArgument("fit_loglog_slope: n must be >= 1");
    if (!(err > 0.0)) throw InvalidArgument("fit_loglog_slope: errors must be positive");
    distinct.insert(n);
  }
  if (distinct.size() < 2) throw DegenerateFit("fit_loglog_slope: need at least two distinct n");

  const double count = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, err] : points) {
    mx += std::log(n);
    my += std::log(err);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, err] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err) - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Smallest angle between two directions, in [0, pi].
inline double angle_between(const Vector& w1, const Vector& w2) {
  if (w1.size() != w2.size()) throw InvalidArgument("angle_between: dimension mismatch");
  const double n1 = w1.norm();
  const double n2 = w2.norm();
  if (n1 == 0.0 || n2 == 0.0) throw InvalidArgument("angle_between: zero vector");
  const double c = std::clamp(w1.dot(w2) / (n1 * n2), -1.0, 1.0);
  return std::acos(c);
}

template <typename Range>
double median(Range values) {
  if (values.empty()) throw InvalidArgument("median of empty range");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// ceil() that ignores round-off just above an integer, e.g. 20/0.1.
inline std::size_t ceil_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace ctxsearch
