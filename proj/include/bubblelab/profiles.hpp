#ifndef BUBBLELAB_PROFILES_HPP
#define BUBBLELAB_PROFILES_HPP

// The ground state Q = 2 arctan(r^k), its scaling derivatives, the structural
// constants (rho_k, gamma_k, q_k), and the correction profiles A, B, Btilde
// obtained by solving L phi = F against the kernel Lambda Q with a double
// variation-of-constants quadrature.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bubblelab/fit.hpp"
#include "bubblelab/radial.hpp"

namespace bubblelab {

// ---------------------------------------------------------------------------
// ground state closed forms

inline double ground_state(int k, double r) {
  if (r <= 1.0) return 2.0 * std::atan(std::pow(r, k));
  return kPi - 2.0 * std::atan(std::pow(r, -k));
}

// Lambda Q = k sin Q = 2k r^k/(1+r^{2k})
inline double lambda_q(int k, double r) { return k * sinQ(k, r); }

// Lambda_0 Lambda Q = (1 + r d/dr) Lambda Q = Lambda Q (1 + k cos Q)
inline double lambda0_lambda_q(int k, double r) {
  return lambda_q(k, r) * (1.0 + k * cosQ(k, r));
}

// sin(2Q) - 4 r^k and sin(2Q) + 4 r^{-k}. Each is written cancellation-free
// on the side where the two terms nearly annihilate.
inline double sin2q_minus_4rk(int k, double r) {
  if (r <= 1.0) {
    double u = std::pow(r, 2 * k), rk = std::pow(r, k);
    return -4.0 * rk * u * (3.0 + u) / ((1.0 + u) * (1.0 + u));
  }
  return 2.0 * sinQ(k, r) * cosQ(k, r) - 4.0 * std::pow(r, k);
}

inline double sin2q_plus_4rmk(int k, double r) {
  if (r >= 1.0) {
    double v = std::pow(r, -2 * k), rmk = std::pow(r, -k);
    return 4.0 * rmk * v * (3.0 + v) / ((1.0 + v) * (1.0 + v));
  }
  return 2.0 * sinQ(k, r) * cosQ(k, r) + 4.0 * std::pow(r, -k);
}

// ---------------------------------------------------------------------------
// constants

struct Constants {
  int k = 0;
  double rho_k = 0;
  double gamma_k = 0;
  double q_k = 0;
  double lamQ_L2sq = 0;  // |Lambda Q|_{L^2}^2 in the r dr convention
};

struct UnsupportedEquivariance : std::invalid_argument {
  UnsupportedEquivariance()
      : std::invalid_argument("profiles require equivariance index k >= 4") {}
};

inline Constants constants(int k) {
  if (k < 4) throw UnsupportedEquivariance();
  Constants c;
  c.k = k;
  double kd = k;
  c.rho_k = std::sqrt(8.0 * kd / kPi * std::sin(kPi / kd));
  c.gamma_k = 0.5 * kd * c.rho_k * c.rho_k;
  c.q_k = std::pow(0.5 * (kd - 2.0) * c.rho_k, -2.0 / (kd - 2.0));
  c.lamQ_L2sq = 16.0 * kd / (c.rho_k * c.rho_k);  // = 2 pi / sin(pi/k)
  return c;
}

// ---------------------------------------------------------------------------
// cumulative quadrature (4th order, uniform parameter)

namespace detail {

// I[i] = head + int_{r_0}^{r_i} F dr for integrand samples F_i (plain dr
// measure); head models F ~ F(r_0)(r/r_0)^p (log 1/r)^m below the grid.
inline std::vector<double> cumulative_from_zero(const RadialGrid& g,
                                                const std::vector<double>& F,
                                                double p, int m) {
  int n = g.size();
  std::vector<double> gs(n), I(n);
  for (int i = 0; i < n; ++i) gs[i] = F[i] * g.drds(i);
  double head = 0.0;
  if (F[0] != 0.0 && p > -0.9) {
    double r0 = g.r(0), q = p + 1.0;
    head = F[0] * r0 / q;
    if (m > 0 && r0 < 1.0) {
      double L = std::log(1.0 / r0), s = 0.0, fact = 1.0, Lp = 1.0;
      for (int j = 0; j <= m; ++j) {
        s += fact / (std::pow(q, j + 1) * Lp);
        fact *= (m - j);
        Lp *= L;
      }
      head = F[0] * r0 * s;
    }
  }
  I[0] = head;
  auto seg = [&](int i) {  // int over [s_i, s_{i+1}]
    if (i == 0) return (9 * gs[0] + 19 * gs[1] - 5 * gs[2] + gs[3]) / 24.0;
    if (i == n - 2)
      return (9 * gs[n - 1] + 19 * gs[n - 2] - 5 * gs[n - 3] + gs[n - 4]) / 24.0;
    return (-gs[i - 1] + 13 * gs[i] + 13 * gs[i + 1] - gs[i + 2]) / 24.0;
  };
  for (int i = 0; i + 1 < n; ++i) I[i + 1] = I[i] + seg(i);
  return I;
}

// J[i] = int_{r_i}^{infinity} F dr, with the far tail modeled by the declared
// exponent q < -1.
inline std::vector<double> cumulative_to_inf(const RadialGrid& g,
                                             const std::vector<double>& F,
                                             double q) {
  int n = g.size();
  std::vector<double> gs(n), J(n);
  for (int i = 0; i < n; ++i) gs[i] = F[i] * g.drds(i);
  double tail = 0.0;
  if (F[n - 1] != 0.0 && q < -1.1)
    tail = -F[n - 1] * g.r(n - 1) / (q + 1.0);
  J[n - 1] = tail;
  auto seg = [&](int i) {
    if (i == 0) return (9 * gs[0] + 19 * gs[1] - 5 * gs[2] + gs[3]) / 24.0;
    if (i == n - 2)
      return (9 * gs[n - 1] + 19 * gs[n - 2] - 5 * gs[n - 3] + gs[n - 4]) / 24.0;
    return (-gs[i - 1] + 13 * gs[i] + 13 * gs[i + 1] - gs[i + 2]) / 24.0;
  };
  for (int i = n - 2; i >= 0; --i) J[i] = J[i + 1] + seg(i);
  return J;
}

// C-infinity step: 1 for r <= 1, 0 for r >= 2
inline double chi_le1(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double t = 2.0 - r;  // in (0,1)
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// point evaluation with endpoint extension (cubic interpolation in log r on
// log grids; used to place profiles on arbitrary radii / other grids)

inline double eval_fn(const RadialFn& f, double r) {
  const RadialGrid& g = *f.grid;
  if (g.kind() != GridKind::Log)
    throw std::logic_error("eval_fn requires a log grid");
  double h = g.h();
  double x0 = std::log(g.r(0));
  double x = std::log(r);
  double t = (x - x0) / h;
  int n = g.size();
  if (t < 0.0) {  // power-law extension below the grid
    double v0 = f.v[0], r0 = g.r(0);
    double val = v0 * std::pow(r / r0, f.a0.p);
    if (f.a0.logs > 0 && r0 < 1.0 && r < 1.0)
      val *= std::pow(std::log(1.0 / r) / std::log(1.0 / r0), f.a0.logs);
    return val;
  }
  if (t > n - 1.0) {
    double vN = f.v[n - 1], rN = g.r(n - 1);
    return vN * std::pow(r / rN, f.ainf.p);
  }
  int j = static_cast<int>(t);
  j = std::max(1, std::min(n - 3, j));
  double u = t - j;
  double wm1 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  double w0 = (u * u - 1.0) * (u - 2.0) / 2.0;
  double w1 = -u * (u + 1.0) * (u - 2.0) / 2.0;
  double w2 = u * (u * u - 1.0) / 6.0;
  return wm1 * f.v[j - 1] + w0 * f.v[j] + w1 * f.v[j + 1] + w2 * f.v[j + 2];
}

// exact rescaling by integer log-grid shifts: returns f(./lambda) (H scaling)
// or lambda^{-1} f(./lambda) (L^2 scaling) with lambda = exp(h*shift)
inline RadialFn shift_scale(const RadialFn& f, int shift, bool l2) {
  const RadialGrid& g = *f.grid;
  if (g.kind() != GridKind::Log)
    throw std::logic_error("shift_scale requires a log grid");
  double lam = std::exp(g.h() * shift);
  RadialFn out(f.grid, f.a0, f.ainf);
  int n = g.size();
  for (int i = 0; i < n; ++i) {
    int j = i - shift;
    double val;
    if (j >= 0 && j < n) {
      val = f.v[j];
    } else {
      val = eval_fn(f, g.r(i) / lam);
    }
    out.v[i] = l2 ? val / lam : val;
  }
  return out;
}

inline int snap_shift(const RadialGrid& g, double lam) {
  return static_cast<int>(std::lround(std::log(lam) / g.h()));
}
inline double snap_scale(const RadialGrid& g, double lam) {
  return std::exp(g.h() * snap_shift(g, lam));
}

// ---------------------------------------------------------------------------
// linearized solver (variation of constants, twice)

struct SolvabilityViolation : std::runtime_error {
  explicit SolvabilityViolation(double v)
      : std::runtime_error("source is not orthogonal to the kernel, <F|LamQ> = " +
                           std::to_string(v)) {}
};

// Solve L phi = alpha LamQ + S with <phi | LamQ> = 0. S carries its own
// endpoint exponents; alpha is the coefficient of the kernel-direction part
// of the source (0 for a generic orthogonal source).
inline RadialFn solve_linearized(const EquivClass& k, const RadialFn& S,
                                 double alpha, double solv_tol = 1e-7) {
  const GridPtr grid = S.grid;
  const RadialGrid& g = *grid;
  int n = g.size();
  int kk = k.k;

  RadialFn LQ = make_fn(grid, [kk](double r) { return lambda_q(kk, r); },
                        {double(kk), 0}, {double(-kk), 0});
  double lq2 = inner(LQ, LQ);

  // solvability of the full source
  double sv = alpha * lq2 + inner(S, LQ);
  double scale = std::abs(alpha) * lq2 + norm_L2(S) * std::sqrt(lq2);
  if (std::abs(sv) > solv_tol * std::max(scale, 1e-300))
    throw SolvabilityViolation(sv);

  // first pass: B* G = F via G = (r LamQ)^{-1} int_0^r F LamQ rho drho,
  // split into the kernel part and the remainder, each with an inner
  // (from 0) and outer (to infinity) cumulative so that the outer form is
  // used where the inner one would cancel catastrophically.
  std::vector<double> lq2_integrand(n), s_integrand(n);
  for (int i = 0; i < n; ++i) {
    double r = g.r(i);
    lq2_integrand[i] = LQ.v[i] * LQ.v[i] * r;
    s_integrand[i] = S.v[i] * LQ.v[i] * r;
  }
  auto Ig = detail::cumulative_from_zero(g, lq2_integrand, 2.0 * kk + 1.0, 0);
  auto Tg = detail::cumulative_to_inf(g, lq2_integrand, -2.0 * kk + 1.0);
  auto Is = detail::cumulative_from_zero(g, s_integrand, S.a0.p + kk + 1.0,
                                         S.a0.logs);
  auto Ts = detail::cumulative_to_inf(g, s_integrand, S.ainf.p - kk + 1.0);

  // second pass: phi1 = -LamQ * H with H' = G/LamQ, assembled from the four
  // pieces weighted by the smooth partition chi_{<=1}.
  std::vector<double> p1(n), p2(n), p3(n);  // integrands of the H pieces
  for (int i = 0; i < n; ++i) {
    double r = g.r(i);
    double chi = detail::chi_le1(r);
    double rlq = r * LQ.v[i];
    double g_in_gamma = alpha * Ig[i] / rlq;
    double g_in_s = Is[i] / rlq;
    double g_out = (-alpha * Tg[i] - Ts[i]) / rlq;
    p1[i] = chi * g_in_gamma / LQ.v[i];
    p2[i] = chi * g_in_s / LQ.v[i];
    p3[i] = (1.0 - chi) * g_out / LQ.v[i];
  }
  // piece exponents near the relevant integration endpoint
  auto H1 = detail::cumulative_from_zero(g, p1, 1.0, 0);
  auto H2 = detail::cumulative_to_inf(g, p2, -100.0);  // chi cuts this off
  auto H3 = detail::cumulative_from_zero(g, p3, 1.0, 0);

  RadialFn phi(grid, {double(kk), S.a0.logs}, {double(-kk + 2), 0});
  for (int i = 0; i < n; ++i)
    phi.v[i] = -LQ.v[i] * (H1[i] - H2[i] + H3[i]);

  // project out the kernel
  double c = inner(phi, LQ) / lq2;
  for (int i = 0; i < n; ++i) phi.v[i] -= c * LQ.v[i];
  return phi;
}

inline RadialFn solve_linearized(const EquivClass& k, const RadialFn& F) {
  return solve_linearized(k, F, 0.0);
}

// ---------------------------------------------------------------------------
// the profile set

struct Profile {
  RadialFn f;    // the profile itself
  RadialFn Lf;   // Lambda f
  RadialFn LLf;  // Lambda Lambda f
  double eval(double r) const { return eval_fn(f, r); }
  double eval_L(double r) const { return eval_fn(Lf, r); }
  double eval_L0(double r) const { return eval_fn(f, r) + eval_fn(Lf, r); }
  double eval_L0L(double r) const { return eval_fn(Lf, r) + eval_fn(LLf, r); }
};

struct ProfileSet {
  EquivClass k;
  GridPtr grid;
  Constants c;
  Profile A, B, Bt;
  double gamma_tilde_num = 0;  // solvability constant of the Btilde source
  double gamma_num = 0;        // solvability constant of the B source
};

inline Profile finish_profile(const RadialFn& f) {
  Profile p;
  p.f = f;
  p.Lf = apply_Lambda(f);
  p.LLf = apply_Lambda(p.Lf);
  return p;
}

inline ProfileSet build_profiles(const EquivClass& k, GridPtr grid) {
  ProfileSet ps{k, grid, constants(k.k), {}, {}, {}, 0, 0};
  int kk = k.k;
  const Constants& c = ps.c;

  RadialFn srcA = make_fn(grid,
                          [kk](double r) { return -lambda0_lambda_q(kk, r); },
                          {double(kk), 0}, {double(-kk), 0});
  RadialFn srcB = make_fn(grid,
                          [kk](double r) {
                            double lq = lambda_q(kk, r);
                            return -4.0 * std::pow(r, kk - 2) * lq * lq;
                          },
                          {3.0 * kk - 2.0, 0}, {double(-kk - 2), 0});
  RadialFn srcBt = make_fn(grid,
                           [kk](double r) {
                             double lq = lambda_q(kk, r);
                             return 4.0 * std::pow(r, -kk - 2) * lq * lq;
                           },
                           {double(kk - 2), 0}, {-3.0 * kk - 2.0, 0});

  RadialFn LQ = make_fn(grid, [kk](double r) { return lambda_q(kk, r); },
                        {double(kk), 0}, {double(-kk), 0});
  double lq2 = inner(LQ, LQ);
  ps.gamma_num = -inner(srcB, LQ) / lq2;
  ps.gamma_tilde_num = inner(srcBt, LQ) / lq2;

  RadialFn fA = solve_linearized(k, srcA, 0.0);
  RadialFn fB = solve_linearized(k, srcB, c.gamma_k);
  RadialFn fBt = solve_linearized(k, srcBt, -c.gamma_k);
  fBt.a0.logs = 1;  // r^k |log r| class near the origin

  ps.A = finish_profile(fA);
  ps.B = finish_profile(fB);
  ps.Bt = finish_profile(fBt);
  return ps;
}

}  // namespace bubblelab

#endif  // BUBBLELAB_PROFILES_HPP
