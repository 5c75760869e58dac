#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "ctxsearch/environment.hpp"
#include "ctxsearch/mathstats.hpp"

namespace ctxsearch {

struct TrisectionConfig {
  double eps_s = 0.5;
  double delta_s = 0.1;
  double b_bound = Environment::kDefaultBound;
  std::optional<std::size_t> max_labels = 10'000'000;

  void validate() const {
    if (!(b_bound > 0.0)) throw InvalidArgument("trisection: b_bound must be positive");
    if (!(eps_s > 0.0 && eps_s < 2.0 * b_bound))
      throw InvalidArgument("trisection: eps_s must lie in (0, 2*b_bound)");
    if (!(delta_s > 0.0 && delta_s < 1.0))
      throw InvalidArgument("trisection: delta_s must lie in (0, 1)");
  }
};

struct TrisectionResult {
  double b1 = 0.0;
  double b2 = 0.0;
  std::size_t labels_used = 0;
  std::size_t samples_seen = 0;
  std::size_t iterations = 0;
};

/// State after one paired query inside the inner loop.
struct TrisectionStep {
  std::size_t iteration = 0;
  double b3 = 0.0;
  double b4 = 0.0;
  ConfidenceInterval ci3;
  ConfidenceInterval ci4;
  std::size_t local_n = 0;
  std::size_t global_n = 0;
};

using TrisectionObserver = std::function<void(const TrisectionStep&)>;

class TrisectionBudgetExhausted : public BudgetExhausted {
 public:
  TrisectionBudgetExhausted(const std::string& what, TrisectionResult partial)
      : BudgetExhausted(what), partial_(partial) {}
  const TrisectionResult& partial() const noexcept { return partial_; }

 private:
  TrisectionResult partial_;
};

/// Shrinks [-B, B] by a third per round until it is at most eps_s wide,
/// keeping the action with label rate 1/2 inside.
///
/// Each round probes the two interior third-points with one fresh context
/// apiece until 1/2 falls outside either Hoeffding interval. If either lower
/// endpoint is above 1/2 the left third is dropped (b1 <- b3), otherwise the
/// right third is (b2 <- b4). The b1 <- b3 move is also taken when only the
/// b4 test fired, even though b4 would be a valid new left end.
inline TrisectionResult trisection_search(Environment& env, const TrisectionConfig& cfg,
                                          const TrisectionObserver& observer = {}) {
  cfg.validate();
  TrisectionResult out;
  out.b1 = -cfg.b_bound;
  out.b2 = cfg.b_bound;
  std::size_t global_n = 0;

  while (out.b2 - out.b1 > cfg.eps_s) {
    const double third = (out.b2 - out.b1) / 3.0;
    const double b3 = out.b1 + third;
    const double b4 = out.b2 - third;
    std::size_t local_n = 0, wins3 = 0, wins4 = 0;
    ConfidenceInterval ci3{0.0, 1.0}, ci4{0.0, 1.0};

    while (ci3.contains(0.5) && ci4.contains(0.5)) {
      if (cfg.max_labels && out.labels_used + 2 > *cfg.max_labels)
        throw TrisectionBudgetExhausted("trisection: label cap reached", out);
      const Vector x3 = env.next_context();
      const Label y3 = env.query(x3, b3);
      const Vector x4 = env.next_context();
      const Label y4 = env.query(x4, b4);
      out.labels_used += 2;
      out.samples_seen += 2;
      ++global_n;
      ++local_n;
      if (y3 == Label::Positive) ++wins3;
      if (y4 == Label::Positive) ++wins4;
      ci3 = hoeffding_interval(wins3, local_n, global_n, cfg.delta_s);
      ci4 = hoeffding_interval(wins4, local_n, global_n, cfg.delta_s);
      if (observer) observer({out.iterations, b3, b4, ci3, ci4, local_n, global_n});
    }

    if (ci3.lower > 0.5 || ci4.lower > 0.5)
      out.b1 = b3;
    else
      out.b2 = b4;
    ++out.iterations;
  }
  return out;
}

}  // namespace ctxsearch
