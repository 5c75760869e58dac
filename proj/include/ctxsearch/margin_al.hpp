#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctxsearch/classifier.hpp"
#include "ctxsearch/environment.hpp"
#include "ctxsearch/erm.hpp"

namespace ctxsearch {

enum class FitMode { LogisticSurrogate, ZeroOneBrute };

struct MarginALConfig {
  double eps_a = 0.0125;
  double delta_a = 0.1;
  double kappa_m = 1.0;
  double kappa_n = 10.0;
  double eps_0 = 0.2;
  double beta_0 = 1.0;
  // Contexts the filter may skip before it is switched off for the rest of
  // the run. Unset means unlimited.
  std::optional<std::size_t> unlabeled_budget;
  FitMode fit_mode = FitMode::LogisticSurrogate;

  // Fixed-budget mode: pick the epoch count so the run labels exactly this
  // many contexts (the last epoch absorbs the remainder). eps_a is ignored.
  std::optional<std::size_t> label_budget;

  double ridge = kDefaultRidge;
  std::size_t brute_grid_steps = 64;
  // Keep each epoch's labeled set in the trace, for auditing.
  bool record_data = false;
  // Stall guard: consecutive filtered contexts tolerated before giving up.
  // Only reachable when the previous hyperplane misses the ball.
  std::size_t max_consecutive_skips = 10'000'000;

  void validate() const {
    if (!(kappa_m > 0.0)) throw InvalidArgument("margin AL: kappa_m must be positive");
    if (!(kappa_n > 0.0)) throw InvalidArgument("margin AL: kappa_n must be positive");
    if (!(delta_a > 0.0 && delta_a < 1.0)) throw InvalidArgument("margin AL: delta_a must lie in (0, 1)");
    if (!(eps_0 > 0.0 && eps_0 <= 1.0)) throw InvalidArgument("margin AL: eps_0 must lie in (0, 1]");
    if (!label_budget && !(eps_a > 0.0 && eps_a <= eps_0))
      throw InvalidArgument("margin AL: need 0 < eps_a <= eps_0");
    if (max_consecutive_skips == 0) throw InvalidArgument("margin AL: max_consecutive_skips must be >= 1");
    if (fit_mode == FitMode::ZeroOneBrute && !(beta_0 > 0.0))
      throw InvalidArgument("margin AL: beta_0 must be positive");
  }
};

struct EpochPlan {
  std::size_t k = 0;
  double eps_k = 0.0;
  double m_k = 0.0;
  std::size_t n_k = 0;
};

struct EpochSchedule {
  std::size_t n_0 = 0;
  std::size_t k_0 = 0;
  std::vector<EpochPlan> epochs;  // k = 1..k_0

  std::size_t total_labels() const {
    std::size_t total = n_0;
    for (const auto& e : epochs) total += e.n_k;
    return total;
  }
};

inline EpochPlan epoch_plan(const MarginALConfig& cfg, std::size_t d, std::size_t k) {
  const double eps_k = std::ldexp(cfg.eps_0, -static_cast<int>(k));
  return {k, eps_k, cfg.kappa_m * std::sqrt(eps_k),
          ceil_count(cfg.kappa_n * static_cast<double>(d) / eps_k)};
}

/// n_0 = ceil(kappa_n / eps_0^2), k_0 = min{k >= 1 : 2^-k eps_0 <= eps_a},
/// and for k = 1..k_0: eps_k = 2^-k eps_0, m_k = kappa_m sqrt(eps_k),
/// n_k = ceil(kappa_n d / eps_k).
inline EpochSchedule epoch_schedule(const MarginALConfig& cfg, std::size_t d) {
  cfg.validate();
  if (d == 0) throw InvalidArgument("epoch_schedule: dimension must be >= 1");
  EpochSchedule s;
  s.n_0 = ceil_count(cfg.kappa_n / (cfg.eps_0 * cfg.eps_0));
  std::size_t k = 1;
  s.epochs.push_back(epoch_plan(cfg, d, k));
  while (s.epochs.back().eps_k > cfg.eps_a * (1.0 + 1e-12)) s.epochs.push_back(epoch_plan(cfg, d, ++k));
  s.k_0 = k;
  return s;
}

/// The same dyadic schedule truncated so its label total equals `budget`:
/// as many whole epochs as fit, with the last one taking what is left.
inline EpochSchedule budget_schedule(const MarginALConfig& cfg, std::size_t d,
                                     std::size_t budget) {
  MarginALConfig one_epoch = cfg;
  one_epoch.label_budget.reset();
  one_epoch.eps_a = cfg.eps_0 / 2.0;
  EpochSchedule s = epoch_schedule(one_epoch, d);
  if (budget <= s.n_0)
    throw BudgetExhausted("margin AL: label budget " + std::to_string(budget) +
                          " does not exceed the warm-up size " + std::to_string(s.n_0));
  s.epochs.clear();
  std::size_t remaining = budget - s.n_0;
  for (std::size_t k = 1;; ++k) {
    EpochPlan p = epoch_plan(cfg, d, k);
    // The following epoch is at least as large as this one, so the check
    // below cannot overflow before it terminates.
    if (remaining < p.n_k + epoch_plan(cfg, d, k + 1).n_k) {
      p.n_k = remaining;
      s.epochs.push_back(p);
      break;
    }
    remaining -= p.n_k;
    s.epochs.push_back(p);
  }
  s.k_0 = s.epochs.size();
  return s;
}

struct EpochTrace {
  std::size_t k = 0;                                             // 0 = warm-up
  double eps_k = 0.0;
  double m_k = std::numeric_limits<double>::infinity();          // infinite = no filter
  std::size_t n_k = 0;
  std::size_t labels_used = 0;   // labels this epoch
  std::size_t samples_seen = 0;  // contexts drawn this epoch
  bool filter_disabled = false;  // unlabeled budget ran out by the end of the epoch
  UnitClassifier classifier;
  std::optional<LabeledSet> data;
};

struct MarginALResult {
  UnitClassifier classifier;
  std::vector<EpochTrace> trace;
  EpochSchedule schedule;
  std::size_t labels_used = 0;
  std::size_t samples_seen = 0;
  std::size_t skipped = 0;
};

class MarginBudgetExhausted : public BudgetExhausted {
 public:
  MarginBudgetExhausted(const std::string& what, std::vector<EpochTrace> partial)
      : BudgetExhausted(what), partial_(std::move(partial)) {}
  const std::vector<EpochTrace>& partial() const noexcept { return partial_; }

 private:
  std::vector<EpochTrace> partial_;
};

inline UnitClassifier fit_epoch(const LabeledSet& data, const MarginALConfig& cfg) {
  if (cfg.fit_mode == FitMode::ZeroOneBrute)
    return fit_zero_one_brute(data, cfg.beta_0, cfg.brute_grid_steps);
  return fit_logistic(data, cfg.ridge);
}

/// Margin-based active learning of sgn(<x,w> - beta) at a fixed action b.
///
/// The warm-up labels the first n_0 contexts unconditionally. Epoch k then
/// streams fresh contexts, labels only those within m_k of the previous
/// hyperplane until n_k labels are in hand, and refits on that epoch's data
/// alone. Rejected contexts are gone for good. Once the unlabeled budget is
/// used up every further context is labeled.
inline MarginALResult margin_based_active_learning(Environment& env, double b,
                                                   const MarginALConfig& cfg) {
  cfg.validate();
  const std::size_t d = env.dim();
  MarginALResult out;
  out.schedule = cfg.label_budget ? budget_schedule(cfg, d, *cfg.label_budget) : epoch_schedule(cfg, d);
  bool filter_on = !(cfg.unlabeled_budget && *cfg.unlabeled_budget == 0);

  auto run_epoch = [&](EpochTrace& tr, const UnitClassifier* prev) {
    LabeledSet data;
    data.reserve(tr.n_k);
    std::size_t run = 0;
    while (data.size() < tr.n_k) {
      Vector x = env.next_context();
      ++tr.samples_seen;
      ++out.samples_seen;
      if (prev && filter_on && !margin_filter(*prev, x, tr.m_k)) {
        ++out.skipped;
        if (cfg.unlabeled_budget && out.skipped >= *cfg.unlabeled_budget) filter_on = false;
        if (++run >= cfg.max_consecutive_skips)
          throw BudgetExhausted("margin AL: epoch " + std::to_string(tr.k) + " stalled after " +
                                std::to_string(run) + " consecutive filtered contexts");
        continue;
      }
      run = 0;
      const Label y = env.query(x, b);
      ++tr.labels_used;
      ++out.labels_used;
      data.add(std::move(x), y);
    }
    tr.filter_disabled = !filter_on;
    tr.classifier = fit_epoch(data, cfg);
    if (cfg.record_data) tr.data = std::move(data);
  };

  try {
    EpochTrace warm;
    warm.k = 0;
    warm.eps_k = cfg.eps_0;
    warm.n_k = out.schedule.n_0;
    run_epoch(warm, nullptr);
    out.trace.push_back(std::move(warm));

    for (const auto& plan : out.schedule.epochs) {
      EpochTrace tr;
      tr.k = plan.k;
      tr.eps_k = plan.eps_k;
      tr.m_k = plan.m_k;
      tr.n_k = plan.n_k;
      const UnitClassifier prev = out.trace.back().classifier;
      run_epoch(tr, &prev);
      out.trace.push_back(std::move(tr));
    }
  } catch (const BudgetExhausted& e) {
    throw MarginBudgetExhausted(e.what(), out.trace);
  }

  out.classifier = out.trace.back().classifier;
  return out;
}

}  // namespace ctxsearch
