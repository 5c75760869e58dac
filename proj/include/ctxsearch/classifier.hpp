#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ctxsearch/mathstats.hpp"

namespace ctxsearch {

enum class Label : std::int8_t { Negative = -1, Positive = 1 };

constexpr int to_int(Label y) noexcept { return static_cast<int>(y); }
constexpr Label flip(Label y) noexcept {
  return y == Label::Positive ? Label::Negative : Label::Positive;
}
/// sgn with sgn(0) = +1.
constexpr Label sign_label(double s) noexcept { return s >= 0.0 ? Label::Positive : Label::Negative; }

/// Linear rule sgn(<x, w> - beta) with ||w|| = 1.
struct UnitClassifier {
  Vector w;
  double beta = 0.0;

  double score(const Vector& x) const { return x.dot(w) - beta; }
  Label predict(const Vector& x) const { return sign_label(score(x)); }

  /// Rescales an arbitrary (w, beta) pair onto the unit sphere. The decision
  /// rule is unchanged.
  static UnitClassifier normalized(const Vector& w, double beta) {
    const double n = w.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw DegenerateFit("cannot normalize a classifier with zero or non-finite weights");
    return {w / n, beta / n};
  }
};

struct LabeledSample {
  Vector x;
  Label y;
};

/// Labeled contexts, all of one dimension and inside the unit ball.
class LabeledSet {
 public:
  LabeledSet() = default;

  void add(Vector x, Label y) {
    if (!items_.empty() && x.size() != items_.front().x.size())
      throw InvalidArgument("LabeledSet: dimension mismatch");
    if (x.norm() > 1.0 + 1e-12) throw InvalidArgument("LabeledSet: context outside the unit ball");
    items_.push_back({std::move(x), y});
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t dim() const noexcept {
    return items_.empty() ? 0 : static_cast<std::size_t>(items_.front().x.size());
  }
  void reserve(std::size_t n) { items_.reserve(n); }

  const LabeledSample& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

 private:
  std::vector<LabeledSample> items_;
};

/// |<x, w> - beta| <= m.
inline bool margin_filter(const UnitClassifier& c, const Vector& x, double m) {
  return std::abs(c.score(x)) <= m;
}

/// Number of misclassified items, sgn(0) = +1.
inline std::size_t training_error(const UnitClassifier& c, const LabeledSet& data) {
  std::size_t errors = 0;
  for (const auto& s : data) {
    if (s.x.size() != c.w.size()) throw InvalidArgument("training_error: dimension mismatch");
    if (c.predict(s.x) != s.y) ++errors;
  }
  return errors;
}

}  // namespace ctxsearch
