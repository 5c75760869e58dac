#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include "ctxsearch/classifier.hpp"
#include "ctxsearch/errors.hpp"

namespace ctxsearch {

inline constexpr double kDefaultRidge = 1e-6;

struct LogisticOptions {
  double ridge = kDefaultRidge;
  double grad_tol = 1e-8;
  std::size_t max_iter = 500;
};

namespace detail {

inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

struct LogisticFit {
  UnitClassifier classifier;
  std::size_t iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// Ridge-penalized logistic regression over (w, beta), then projected onto
/// ||w|| = 1. Objective:
///
///   (1/N) sum log(1 + exp(-y (<x,w> - beta))) + ridge (||w||^2 + beta^2) / 2
///
/// solved by damped Newton with Armijo backtracking.
inline LogisticFit fit_logistic_detailed(const LabeledSet& data, const LogisticOptions& opt = {}) {
  if (data.empty()) throw InvalidArgument("fit_logistic: empty data");
  if (opt.ridge < 0.0) throw InvalidArgument("fit_logistic: ridge must be non-negative");

  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.dim());
  Eigen::MatrixXd z(n, d + 1);
  Eigen::VectorXd y(n);
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    z.row(i).head(d) = s.x.transpose();
    z(i, d) = -1.0;
    y[i] = to_int(s.y);
    (s.y == Label::Positive ? has_pos : has_neg) = true;
  }
  if (opt.ridge == 0.0 && !(has_pos && has_neg))
    throw SeparationDivergence("fit_logistic: single-label data has no finite minimizer without ridge");

  const double inv_n = 1.0 / static_cast<double>(n);
  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd t = y.cwiseProduct(z * theta);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += detail::softplus(-t[i]);
    return loss * inv_n + 0.5 * opt.ridge * theta.squaredNorm();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd grad(d + 1), weights(n), coef(n);
  Eigen::MatrixXd hess(d + 1, d + 1);
  double f = objective(theta);
  bool converged = false;

  auto newton_step = [&]() -> bool {
    const Eigen::VectorXd t = y.cwiseProduct(z * theta);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = detail::sigmoid(-t[i]);
      coef[i] = -y[i] * s;
      weights[i] = s * (1.0 - s);
    }
    grad = z.transpose() * coef * inv_n + opt.ridge * theta;
    if (grad.norm() <= opt.grad_tol) return false;
    hess = z.transpose() * weights.asDiagonal() * z * inv_n;
    hess.diagonal().array() += opt.ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd dir = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || grad.dot(dir) >= 0.0) {
      hess.diagonal().array() += 1e-10 + 1e-8 * hess.diagonal().maxCoeff();
      dir = hess.ldlt().solve(-grad);
      if (!dir.allFinite() || grad.dot(dir) >= 0.0) dir = -grad;
    }

    double step = 1.0;
    const double slope = grad.dot(dir);
    // Inside the quadratic region the predicted decrease drops below the
    // round-off of the averaged objective and Armijo becomes a coin flip.
    if (-slope < 1e-10 * (1.0 + std::abs(f))) {
      theta += dir;
      f = objective(theta);
      return true;
    }
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Eigen::VectorXd cand = theta + step * dir;
      const double fc = objective(cand);
      if (fc <= f + 1e-4 * step * slope) {
        theta = cand;
        f = fc;
        return true;
      }
    }
    // No decrease representable in floating point: we are at the minimum.
    return false;
  };

  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    if (!newton_step()) {
      converged = true;
      break;
    }
  }
  // One extra full step after the tolerance is met tightens the iterate to
  // round-off, which makes the output independent of the row order.
  if (converged) newton_step();

  return {UnitClassifier::normalized(theta.head(d), theta[d]), it, converged, grad.norm()};
}

inline UnitClassifier fit_logistic(const LabeledSet& data, const LogisticOptions& opt = {}) {
  return fit_logistic_detailed(data, opt).classifier;
}

inline UnitClassifier fit_logistic(const LabeledSet& data, double ridge) {
  LogisticOptions opt;
  opt.ridge = ridge;
  return fit_logistic(data, opt);
}

namespace detail {

struct BruteCandidate {
  std::size_t errors = 0;
  double beta = 0.0;
  Vector w;
  bool valid = false;

  // Fewer errors, then smaller |beta|, then lexicographically smaller w.
  bool better_than(const BruteCandidate& other) const {
    if (!other.valid) return true;
    if (errors != other.errors) return errors < other.errors;
    if (std::abs(beta) != std::abs(other.beta)) return std::abs(beta) < std::abs(other.beta);
    return std::lexicographical_compare(w.data(), w.data() + w.size(), other.w.data(),
                                        other.w.data() + other.w.size());
  }
};

/// Best beta on the grid for a fixed direction, by sweeping sorted projections.
inline BruteCandidate best_intercept(const LabeledSet& data, const Vector& w,
                                     const std::vector<double>& beta_grid,
                                     std::vector<std::pair<double, Label>>& scratch) {
  scratch.clear();
  std::size_t neg_total = 0;
  for (const auto& s : data) {
    scratch.emplace_back(s.x.dot(w), s.y);
    if (s.y == Label::Negative) ++neg_total;
  }
  std::sort(scratch.begin(), scratch.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  BruteCandidate best;
  best.w = w;
  std::size_t k = 0, pos_below = 0, neg_below = 0;
  for (double beta : beta_grid) {
    // Points with projection < beta are predicted negative.
    while (k < scratch.size() && scratch[k].first < beta) {
      (scratch[k].second == Label::Positive ? pos_below : neg_below) += 1;
      ++k;
    }
    const std::size_t errors = pos_below + (neg_total - neg_below);
    if (!best.valid || errors < best.errors ||
        (errors == best.errors && std::abs(beta) < std::abs(best.beta))) {
      best.errors = errors;
      best.beta = beta;
      best.valid = true;
    }
  }
  return best;
}

inline Vector direction_from_angles(std::size_t d, double a, double b) {
  Vector w(static_cast<Eigen::Index>(d));
  if (d == 2) {
    w << std::cos(a), std::sin(a);
  } else {
    w << std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a);
  }
  return w;
}

}  // namespace detail

/// Exhaustive empirical 0/1-risk minimizer over unit directions and
/// |beta| <= beta_0, for d <= 3 at oracle scale.
///
/// Directions: d = 1 uses {-1, +1}; d = 2 uses grid_steps equally spaced
/// angles; d = 3 uses a (grid_steps + 1) x grid_steps polar/azimuth grid.
/// With `refine`, a second grid of the same resolution is laid over one
/// coarse cell on either side of the best coarse direction. Off by default:
/// the window depends on the data, so refined results need not improve
/// monotonically as grid_steps doubles. Intercepts come
/// from grid_steps + 1 equally spaced values on [-beta_0, beta_0], so grids
/// nest when grid_steps doubles.
inline UnitClassifier fit_zero_one_brute(const LabeledSet& data, double beta_0,
                                         std::size_t grid_steps, bool refine = false) {
  if (data.empty()) throw InvalidArgument("fit_zero_one_brute: empty data");
  const std::size_t d = data.dim();
  if (d > 3) throw UnsupportedDimension("fit_zero_one_brute: only d <= 3 is supported");
  if (grid_steps < 8) throw InvalidArgument("fit_zero_one_brute: grid_steps must be >= 8");
  if (!(beta_0 >= 0.0)) throw InvalidArgument("fit_zero_one_brute: beta_0 must be non-negative");

  std::vector<double> beta_grid(grid_steps + 1);
  for (std::size_t j = 0; j <= grid_steps; ++j)
    beta_grid[j] = -beta_0 + 2.0 * beta_0 * static_cast<double>(j) / static_cast<double>(grid_steps);

  std::vector<std::pair<double, Label>> scratch;
  scratch.reserve(data.size());
  detail::BruteCandidate best;
  double best_a = 0.0, best_b = 0.0;

  auto consider = [&](const Vector& w, double a, double b) {
    auto cand = detail::best_intercept(data, w, beta_grid, scratch);
    if (cand.better_than(best)) {
      best = std::move(cand);
      best_a = a;
      best_b = b;
    }
  };

  const double g = static_cast<double>(grid_steps);
  if (d == 1) {
    consider(Vector::Constant(1, -1.0), 0.0, 0.0);
    consider(Vector::Constant(1, 1.0), 0.0, 0.0);
  } else if (d == 2) {
    const double step = 2.0 * std::numbers::pi / g;
    for (std::size_t i = 0; i < grid_steps; ++i) {
      const double a = step * static_cast<double>(i);
      consider(detail::direction_from_angles(2, a, 0.0), a, 0.0);
    }
    if (refine) {
      const double center = best_a;
      const double fine = 2.0 * step / g;
      for (std::size_t i = 0; i <= grid_steps; ++i) {
        const double a = center - step + fine * static_cast<double>(i);
        consider(detail::direction_from_angles(2, a, 0.0), a, 0.0);
      }
    }
  } else {
    const double polar_step = std::numbers::pi / g;
    const double azimuth_step = 2.0 * std::numbers::pi / g;
    for (std::size_t i = 0; i <= grid_steps; ++i) {
      const double a = polar_step * static_cast<double>(i);
      for (std::size_t j = 0; j < grid_steps; ++j) {
        const double b = azimuth_step * static_cast<double>(j);
        consider(detail::direction_from_angles(3, a, b), a, b);
      }
    }
    if (refine) {
      const double ca = best_a, cb = best_b;
      for (std::size_t i = 0; i <= grid_steps; ++i) {
        const double a = ca - polar_step + 2.0 * polar_step * static_cast<double>(i) / g;
        for (std::size_t j = 0; j <= grid_steps; ++j) {
          const double b = cb - azimuth_step + 2.0 * azimuth_step * static_cast<double>(j) / g;
          consider(detail::direction_from_angles(3, a, b), a, b);
        }
      }
    }
  }
  return {best.w, best.beta};
}

}  // namespace ctxsearch
