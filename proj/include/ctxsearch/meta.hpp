#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "ctxsearch/environment.hpp"
#include "ctxsearch/erm.hpp"
#include "ctxsearch/margin_al.hpp"
#include "ctxsearch/run_record.hpp"
#include "ctxsearch/trisection.hpp"

namespace ctxsearch {

struct ParameterOverrides {
  std::optional<double> eps_s;
  std::optional<double> delta_s;
  std::optional<double> eps_a;
  std::optional<double> delta_a;
  std::optional<double> eps_0;
};

struct ResolvedParameters {
  double eps_s = 0.0;
  double delta_s = 0.0;
  double eps_a = 0.0;
  double delta_a = 0.0;
  double eps_0 = 0.0;
};

struct MetaConfig {
  double eps = 0.1;
  double delta = 0.1;
  double kappa_m = 1.0;
  double kappa_n = 10.0;
  double kappa_eps = 1.0;
  double beta_0 = 1.0;
  ParameterOverrides overrides;

  double b_bound = Environment::kDefaultBound;
  FitMode fit_mode = FitMode::LogisticSurrogate;
  // Learning-phase labels shared by the two runs at b1 and b2. Trisection
  // labels come on top. When unset the margin runs follow the eps_a schedule.
  std::optional<std::size_t> label_budget;
  // Skippable contexts shared by the two margin runs.
  std::optional<std::size_t> unlabeled_budget;
  double ridge = kDefaultRidge;
  std::size_t brute_grid_steps = 64;
  std::size_t max_trisection_labels = 10'000'000;
  // Exploration only: combine both learned directions in the reconstruction.
  bool average_directions = false;

  void validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("meta: eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("meta: delta must lie in (0, 1)");
    if (!(kappa_m > 0.0 && kappa_n > 0.0 && kappa_eps > 0.0 && beta_0 > 0.0))
      throw InvalidArgument("meta: kappa_m, kappa_n, kappa_eps and beta_0 must be positive");
  }

  /// Defaults: eps_s = 0.1/sqrt(d-1), delta_s = delta/3,
  /// eps_a = kappa_eps eps^2 / ln^2(1/eps), delta_a = delta/3, eps_0 = sqrt(eps_a).
  ResolvedParameters resolve(std::size_t d) const {
    validate();
    ResolvedParameters r;
    r.eps_s = d > 1 ? 0.1 / std::sqrt(static_cast<double>(d - 1)) : 0.1;
    r.delta_s = delta / 3.0;
    const double l = std::log(1.0 / eps);
    r.eps_a = kappa_eps * eps * eps / (l * l);
    r.delta_a = delta / 3.0;
    r.eps_0 = std::sqrt(r.eps_a);
    if (overrides.eps_s) r.eps_s = *overrides.eps_s;
    if (overrides.delta_s) r.delta_s = *overrides.delta_s;
    if (overrides.eps_a) r.eps_a = *overrides.eps_a;
    if (overrides.delta_a) r.delta_a = *overrides.delta_a;
    if (overrides.eps_0) r.eps_0 = *overrides.eps_0;
    return r;
  }

  TrisectionConfig trisection_config(std::size_t d) const {
    const auto r = resolve(d);
    TrisectionConfig t;
    t.eps_s = r.eps_s;
    t.delta_s = r.delta_s;
    t.b_bound = b_bound;
    t.max_labels = max_trisection_labels;
    return t;
  }

  MarginALConfig margin_config(std::size_t d) const {
    const auto r = resolve(d);
    MarginALConfig m;
    m.eps_a = std::min(r.eps_a, r.eps_0);
    m.delta_a = r.delta_a;
    m.kappa_m = kappa_m;
    m.kappa_n = kappa_n;
    m.eps_0 = r.eps_0;
    m.beta_0 = beta_0;
    m.fit_mode = fit_mode;
    m.ridge = ridge;
    m.brute_grid_steps = brute_grid_steps;
    return m;
  }
};

/// Experimental setting: eps_s = 0.5, delta_s = 0.1, eps_0 = 0.2,
/// kappa_m = 1 and kappa_n = d + ln(n) with n the learning-phase label budget.
inline MetaConfig preset_experimental(std::size_t d, std::size_t label_budget) {
  if (label_budget < 2) throw InvalidArgument("experimental preset: label budget must be >= 2");
  MetaConfig c;
  c.kappa_m = 1.0;
  c.kappa_n = static_cast<double>(d) + std::log(static_cast<double>(label_budget));
  c.overrides.eps_s = 0.5;
  c.overrides.delta_s = 0.1;
  c.overrides.eps_0 = 0.2;
  c.label_budget = label_budget;
  return c;
}

/// Asymptotic scalings: kappa_m = 1, kappa_n = d + ln ln(1/eps) + ln(1/delta),
/// kappa_eps = 1/d, beta_0 = 1/sqrt(d). Every other parameter keeps its
/// derived default.
inline MetaConfig preset_asymptotic(std::size_t d, double eps, double delta) {
  MetaConfig c;
  c.eps = eps;
  c.delta = delta;
  c.validate();
  const double dd = static_cast<double>(d);
  c.kappa_m = 1.0;
  c.kappa_n = dd + std::max(0.0, std::log(std::log(1.0 / eps))) + std::log(1.0 / delta);
  c.kappa_eps = 1.0 / dd;
  c.beta_0 = 1.0 / std::sqrt(dd);
  return c;
}

struct UtilityEstimate {
  LinearUtility v_hat;
  double alpha_hat = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  UnitClassifier c1;
  UnitClassifier c2;
};

/// Undo the classification scale: alpha = (b2 - b1)/(beta2 - beta1),
/// w = alpha w1, mu = alpha beta1 - b1.
inline UtilityEstimate reconstruct(double b1, double b2, const UnitClassifier& c1,
                                   const UnitClassifier& c2) {
  if (b1 == b2) throw InvalidArgument("reconstruct: b1 and b2 must differ");
  if (c1.w.size() != c2.w.size()) throw InvalidArgument("reconstruct: dimension mismatch");
  const double gap = c2.beta - c1.beta;
  if (std::abs(gap) < 1e-12)
    throw DegenerateReconstruction("reconstruct: learned intercepts are indistinguishable");
  UtilityEstimate e;
  e.alpha_hat = (b2 - b1) / gap;
  e.v_hat.w = e.alpha_hat * c1.w;
  e.v_hat.mu = e.alpha_hat * c1.beta - b1;
  e.b1 = b1;
  e.b2 = b2;
  e.c1 = c1;
  e.c2 = c2;
  return e;
}

/// Variant that uses both learned directions. Not part of the reference
/// pipeline.
inline UtilityEstimate reconstruct_averaged(double b1, double b2, const UnitClassifier& c1,
                                            const UnitClassifier& c2) {
  UtilityEstimate e = reconstruct(b1, b2, c1, c2);
  Vector dir = c1.w + c2.w;
  if (dir.norm() > 0.0) dir.normalize();
  e.v_hat.w = e.alpha_hat * dir;
  e.v_hat.mu = e.alpha_hat * 0.5 * (c1.beta + c2.beta) - 0.5 * (b1 + b2);
  return e;
}

/// ||w_hat - w*|| + |mu_hat - mu*|.
inline double estimation_error(const UtilityEstimate& est, const LinearUtility& truth) {
  if (est.v_hat.w.size() != truth.w.size())
    throw InvalidArgument("estimation_error: dimension mismatch");
  return (est.v_hat.w - truth.w).norm() + std::abs(est.v_hat.mu - truth.mu);
}

struct RunOutcome {
  UtilityEstimate estimate;
  RunRecord record;
  TrisectionResult trisection;
  std::size_t samples_al1 = 0;
  std::size_t samples_al2 = 0;
  // Filled by run_active only.
  std::optional<MarginALResult> al1;
  std::optional<MarginALResult> al2;
};

namespace detail {

inline void finish_record(RunOutcome& out, const Environment& env, Algo algo,
                          std::size_t labels0, std::size_t samples0) {
  RunRecord& r = out.record;
  r.algo = algo;
  r.d = env.dim();
  r.n_labeled = env.labels_used() - labels0;
  r.m_total = env.samples_seen() - samples0;
  r.b1 = out.trisection.b1;
  r.b2 = out.trisection.b2;
  r.labels_trisection = out.trisection.labels_used;
  r.err = estimation_error(out.estimate, env.truth());
}

}  // namespace detail

/// Trisection, margin-based active learning at b1 and at b2, reconstruction.
inline RunOutcome run_active(Environment& env, const MetaConfig& cfg) {
  const std::size_t d = env.dim();
  const std::size_t labels0 = env.labels_used(), samples0 = env.samples_seen();
  RunOutcome out;
  out.trisection = trisection_search(env, cfg.trisection_config(d));
  const double b1 = out.trisection.b1, b2 = out.trisection.b2;

  MarginALConfig m1 = cfg.margin_config(d);
  MarginALConfig m2 = m1;
  if (cfg.label_budget) {
    m1.label_budget = *cfg.label_budget / 2;
    m2.label_budget = *cfg.label_budget - *m1.label_budget;
  }
  if (cfg.unlabeled_budget) m1.unlabeled_budget = *cfg.unlabeled_budget / 2;

  out.al1 = margin_based_active_learning(env, b1, m1);
  if (cfg.unlabeled_budget) m2.unlabeled_budget = *cfg.unlabeled_budget - out.al1->skipped;
  out.al2 = margin_based_active_learning(env, b2, m2);

  out.estimate = cfg.average_directions
                     ? reconstruct_averaged(b1, b2, out.al1->classifier, out.al2->classifier)
                     : reconstruct(b1, b2, out.al1->classifier, out.al2->classifier);
  out.record.labels_al1 = out.al1->labels_used;
  out.record.labels_al2 = out.al2->labels_used;
  out.samples_al1 = out.al1->samples_seen;
  out.samples_al2 = out.al2->samples_seen;
  detail::finish_record(out, env, Algo::Active, labels0, samples0);
  return out;
}

/// Baseline: same trisection, then the label budget is split in two halves,
/// each labeling every incoming context at b1 (resp. b2), fit by logistic
/// regression and reconstructed as in run_active. `label_budget` counts the
/// learning-phase labels only.
inline RunOutcome run_passive(Environment& env, const MetaConfig& cfg, std::size_t label_budget) {
  if (label_budget < 2) throw InvalidArgument("run_passive: label budget must be >= 2");
  const std::size_t d = env.dim();
  const std::size_t labels0 = env.labels_used(), samples0 = env.samples_seen();
  RunOutcome out;
  out.trisection = trisection_search(env, cfg.trisection_config(d));
  const double b1 = out.trisection.b1, b2 = out.trisection.b2;

  auto passive_half = [&](double b, std::size_t n) {
    LabeledSet data;
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vector x = env.next_context();
      const Label y = env.query(x, b);
      data.add(std::move(x), y);
    }
    return fit_logistic(data, cfg.ridge);
  };
  const std::size_t n1 = label_budget / 2, n2 = label_budget - n1;
  const UnitClassifier c1 = passive_half(b1, n1);
  const UnitClassifier c2 = passive_half(b2, n2);

  out.estimate = cfg.average_directions ? reconstruct_averaged(b1, b2, c1, c2)
                                        : reconstruct(b1, b2, c1, c2);
  out.record.labels_al1 = n1;
  out.record.labels_al2 = n2;
  out.samples_al1 = n1;
  out.samples_al2 = n2;
  detail::finish_record(out, env, Algo::Passive, labels0, samples0);
  return out;
}

}  // namespace ctxsearch
