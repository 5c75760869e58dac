#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace ctxsearch::test_support {

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson to relative tolerance `rel_tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-8) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = rel_tol * std::max(std::abs(whole), 1e-300);
  return detail::simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Bounds on Pr[x_1 in [a, b]] for x uniform on the unit d-ball, valid for
/// slabs inside [-1/sqrt 2, 1/sqrt 2]:
/// sqrt((d+1)/(16 pi)) I <= Pr <= sqrt((d+1)/(2 pi)) I, I = int_a^b exp(-(d-1)u^2/2) du.
struct SlabBounds {
  double lower;
  double upper;
};

inline SlabBounds ball_slab_bounds(std::size_t d, double a, double b) {
  const double dd = static_cast<double>(d);
  const double integral =
      integrate([dd](double u) { return std::exp(-(dd - 1.0) * u * u / 2.0); }, a, b);
  return {std::sqrt((dd + 1.0) / (16.0 * std::numbers::pi)) * integral,
          std::sqrt((dd + 1.0) / (2.0 * std::numbers::pi)) * integral};
}

}  // namespace ctxsearch::test_support
