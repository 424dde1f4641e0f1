#ifndef BUBBLELAB_TESTS_ORACLE_HPP
#define BUBBLELAB_TESTS_ORACLE_HPP

// Test-only reference integrator, independent of the grid quadrature it is
// used to check: adaptive Simpson in the log variable on (0, infinity).

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& g, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = g(lm), frm = g(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// int_0^inf f(r) r dr computed as int g dx, g = f(e^x) e^{2x}
inline double integral_rdr(const std::function<double(double)>& f,
                           double x_lo = -40.0, double x_hi = 18.0,
                           double tol = 1e-13) {
  auto g = [&](double x) {
    double r = std::exp(x);
    return f(r) * r * r;
  };
  // split at x = 0 to help the recursion
  double fa = g(x_lo), f0 = g(0.0), fb = g(x_hi);
  double m1 = g(0.5 * (x_lo + 0.0)), m2 = g(0.5 * (0.0 + x_hi));
  double w1 = (0.0 - x_lo) / 6.0 * (fa + 4.0 * m1 + f0);
  double w2 = (x_hi - 0.0) / 6.0 * (f0 + 4.0 * m2 + fb);
  return simpson_rec(g, x_lo, 0.0, fa, m1, f0, w1, tol, 48) +
         simpson_rec(g, 0.0, x_hi, f0, m2, fb, w2, tol, 48);
}

}  // namespace oracle

#endif
