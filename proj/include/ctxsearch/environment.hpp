#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "ctxsearch/classifier.hpp"
#include "ctxsearch/errors.hpp"
#include "ctxsearch/mathstats.hpp"

namespace ctxsearch {

/// v(x) = <x, w> - mu.
struct LinearUtility {
  Vector w;
  double mu = 0.0;

  double value(const Vector& x) const { return x.dot(w) - mu; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(w.size()); }
};

/// Median-zero noise with a closed-form CDF.
class NoiseDistribution {
 public:
  enum class Kind { UniformSymmetric, Logistic, Gaussian };

  static NoiseDistribution uniform_symmetric(double half_width) {
    return NoiseDistribution(Kind::UniformSymmetric, half_width, "half_width");
  }
  static NoiseDistribution logistic(double scale) {
    return NoiseDistribution(Kind::Logistic, scale, "scale");
  }
  static NoiseDistribution gaussian(double sigma) {
    return NoiseDistribution(Kind::Gaussian, sigma, "sigma");
  }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double cdf(double t) const {
    switch (kind_) {
      case Kind::UniformSymmetric:
        return std::clamp((t + param_) / (2.0 * param_), 0.0, 1.0);
      case Kind::Logistic:
        return 1.0 / (1.0 + std::exp(-t / param_));
      case Kind::Gaussian:
        return 0.5 * std::erfc(-t / (param_ * std::numbers::sqrt2));
    }
    return 0.0;
  }

  double sample(RngStream& rng) const {
    switch (kind_) {
      case Kind::UniformSymmetric:
        return param_ * (2.0 * rng.uniform() - 1.0);
      case Kind::Logistic: {
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        return param_ * std::log(u / (1.0 - u));
      }
      case Kind::Gaussian:
        return param_ * rng.normal();
    }
    return 0.0;
  }

  /// Constants (c, C) with c|D| <= |phi(D)| for |D| <= 2 and |phi(D)| <= C|D|
  /// everywhere. All supported densities are symmetric unimodal, so C is the
  /// density at zero and c = phi(2)/2.
  std::pair<double, double> density_bounds() const {
    double peak = 0.0;
    switch (kind_) {
      case Kind::UniformSymmetric: peak = 1.0 / (2.0 * param_); break;
      case Kind::Logistic: peak = 1.0 / (4.0 * param_); break;
      case Kind::Gaussian: peak = 1.0 / (param_ * std::sqrt(2.0 * std::numbers::pi)); break;
    }
    const double lower = (cdf(0.0) - cdf(-2.0)) / 2.0;
    return {lower, peak};
  }

 private:
  NoiseDistribution(Kind kind, double param, const char* name) : kind_(kind), param_(param) {
    if (!(param > 0.0) || !std::isfinite(param))
      throw InvalidArgument(std::string("noise ") + name + " must be positive and finite");
  }

  Kind kind_;
  double param_;
};

/// phi(D) = F(0) - F(-D); eta_b(x) - 1/2 = phi(v(x) - b).
inline double phi(const NoiseDistribution& noise, double delta) {
  return noise.cdf(0.0) - noise.cdf(-delta);
}

/// Context law on the unit ball: uniform, or uniform reweighted by
/// g(x) = 1 + t*x_1 with t picked so that c_x <= g <= C_x.
class ContextDistribution {
 public:
  enum class Kind { UniformBall, DensityTilted };

  static ContextDistribution uniform_ball(std::size_t d) {
    return ContextDistribution(Kind::UniformBall, d, 0.0);
  }

  static ContextDistribution density_tilted(std::size_t d, double c_x, double C_x) {
    if (!(c_x > 0.0 && c_x <= 1.0 && C_x >= 1.0 && std::isfinite(C_x)))
      throw InvalidArgument("density_tilted: need 0 < c_x <= 1 <= C_x");
    return ContextDistribution(Kind::DensityTilted, d, std::min(1.0 - c_x, C_x - 1.0));
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return d_; }
  double tilt() const noexcept { return tilt_; }

  /// f_x(x) / f_u(x).
  double density_ratio(const Vector& x) const {
    return kind_ == Kind::UniformBall ? 1.0 : 1.0 + tilt_ * x[0];
  }

  Vector sample(RngStream& rng) const {
    if (kind_ == Kind::UniformBall) return sample_uniform_ball(d_, rng);
    for (;;) {
      Vector x = sample_uniform_ball(d_, rng);
      if (rng.uniform() * (1.0 + tilt_) <= density_ratio(x)) return x;
    }
  }

 private:
  ContextDistribution(Kind kind, std::size_t d, double tilt) : kind_(kind), d_(d), tilt_(tilt) {
    if (d == 0) throw InvalidArgument("context dimension must be >= 1");
  }

  Kind kind_;
  std::size_t d_;
  double tilt_;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// The synthetic world. Contexts and feedback come only from here; every
/// drawn context bumps samples_seen and every query bumps labels_used.
///
/// The diagnostics (win_rate, excess_error) read the ground truth directly,
/// run on their own substream and leave the counters untouched.
class Environment {
 public:
  static constexpr double kDefaultBound = 5.0;

  Environment(LinearUtility truth, NoiseDistribution noise, ContextDistribution contexts,
              RngStream rng, double bound = kDefaultBound,
              std::optional<std::size_t> label_cap = std::nullopt)
      : truth_(std::move(truth)),
        noise_(noise),
        contexts_(contexts),
        rng_(rng),
        diag_rng_(rng.substream(kDiagnosticsStream)),
        bound_(bound),
        label_cap_(label_cap) {
    if (truth_.dim() != contexts_.dim())
      throw InvalidArgument("environment: utility and context dimensions differ");
    if (truth_.w.norm() > bound_ || std::abs(truth_.mu) > bound_)
      throw InvalidArgument("environment: ground truth violates the parameter bound");
  }

  std::size_t dim() const noexcept { return truth_.dim(); }
  const LinearUtility& truth() const noexcept { return truth_; }
  const NoiseDistribution& noise() const noexcept { return noise_; }
  const ContextDistribution& contexts() const noexcept { return contexts_; }
  double bound() const noexcept { return bound_; }
  std::size_t labels_used() const noexcept { return labels_used_; }
  std::size_t samples_seen() const noexcept { return samples_seen_; }

  void set_label_cap(std::optional<std::size_t> cap) noexcept { label_cap_ = cap; }

  Vector next_context() {
    ++samples_seen_;
    return contexts_.sample(rng_);
  }

  /// Act at b on context x; +1 iff v(x) + xi >= b.
  Label query(const Vector& x, double b) {
    if (labels_used_ >= samples_seen_)
      throw InvalidArgument("query: every query must follow a fresh next_context()");
    if (label_cap_ && labels_used_ >= *label_cap_)
      throw BudgetExhausted("environment label cap of " + std::to_string(*label_cap_) +
                            " reached");
    ++labels_used_;
    const double u = truth_.value(x) + noise_.sample(rng_);
    return sign_label(u - b);
  }

  double eta(const Vector& x, double b) const { return 0.5 + phi(noise_, truth_.value(x) - b); }

  /// Pr[y = +1 | b] averaged over fresh contexts.
  MonteCarloEstimate win_rate_estimate(double b, std::size_t n_mc) {
    if (n_mc == 0) throw InvalidArgument("win_rate: n_mc must be >= 1");
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const double e = eta(contexts_.sample(diag_rng_), b);
      sum += e;
      sum2 += e * e;
    }
    return summarize(sum, sum2, n_mc);
  }

  double win_rate(double b, std::size_t n_mc) { return win_rate_estimate(b, n_mc).value; }

  /// err_b(cand) - err_b(Bayes), integrating the noise out analytically:
  /// E_x[|2 eta_b(x) - 1| * 1{cand and Bayes disagree}].
  MonteCarloEstimate excess_error_estimate(const UnitClassifier& cand, double b,
                                           std::size_t n_mc) {
    if (n_mc == 0) throw InvalidArgument("excess_error: n_mc must be >= 1");
    if (static_cast<std::size_t>(cand.w.size()) != dim())
      throw InvalidArgument("excess_error: dimension mismatch");
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const Vector x = contexts_.sample(diag_rng_);
      const double margin = truth_.value(x) - b;
      if (cand.predict(x) != sign_label(margin)) {
        const double g = 2.0 * std::abs(phi(noise_, margin));
        sum += g;
        sum2 += g * g;
      }
    }
    return summarize(sum, sum2, n_mc);
  }

  double excess_error(const UnitClassifier& cand, double b, std::size_t n_mc) {
    return excess_error_estimate(cand, b, n_mc).value;
  }

  /// Normalized Bayes rule at action b, when w* != 0.
  UnitClassifier bayes_classifier(double b) const {
    return UnitClassifier::normalized(truth_.w, truth_.mu + b);
  }

 private:
  static constexpr std::uint64_t kDiagnosticsStream = 0xd1a6'0000'0000'0001ULL;

  static MonteCarloEstimate summarize(double sum, double sum2, std::size_t n) {
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    const double var = n > 1 ? std::max(0.0, (sum2 - dn * mean * mean) / (dn - 1.0)) : 0.0;
    return {mean, std::sqrt(var / dn)};
  }

  LinearUtility truth_;
  NoiseDistribution noise_;
  ContextDistribution contexts_;
  RngStream rng_;
  RngStream diag_rng_;
  double bound_;
  std::optional<std::size_t> label_cap_;
  std::size_t labels_used_ = 0;
  std::size_t samples_seen_ = 0;
};

/// w* = (2/sqrt(d), ..., 2/sqrt(d)), mu* = -2.5, uniform ball contexts and
/// U[-half_width, half_width] noise.
inline LinearUtility default_truth(std::size_t d) {
  if (d == 0) throw InvalidArgument("dimension must be >= 1");
  return {Vector::Constant(static_cast<Eigen::Index>(d), 2.0 / std::sqrt(static_cast<double>(d))),
          -2.5};
}

inline Environment make_default_environment(std::size_t d, RngStream rng,
                                            double noise_half_width = 1.0) {
  return Environment(default_truth(d), NoiseDistribution::uniform_symmetric(noise_half_width),
                     ContextDistribution::uniform_ball(d), rng);
}

}  // namespace ctxsearch
