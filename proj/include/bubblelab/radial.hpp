#ifndef BUBBLELAB_RADIAL_HPP
#define BUBBLELAB_RADIAL_HPP

// Radial grids on (0, r_max], quadrature for the r dr measure, differentiation
// stencils, Sobolev-type norms and the linearized operators used everywhere
// else. Grids are uniform in an internal parameter s with an analytic map
// r(s); all derivatives are taken in s and converted through the metric, and
// all integrals are trapezoid sums in s with analytic tail corrections driven
// by each function's declared endpoint exponents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bubblelab {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct EquivClass {
  int k;
  explicit EquivClass(int kk) : k(kk) {
    if (kk < 4) throw std::invalid_argument("equivariance index must be >= 4");
  }
  double kd() const { return static_cast<double>(k); }
};

enum class GridKind { Log, Sinh };

// Strictly increasing nodes with positive quadrature weights for f -> int f r dr.
class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> logarithmic(double r_min = 1e-6,
                                                       double r_max = 1e3,
                                                       int n = 4096) {
    auto g = std::make_shared<RadialGrid>();
    g->kind_ = GridKind::Log;
    g->n_ = n;
    g->r_min_ = r_min;
    g->r_max_ = r_max;
    g->h_ = std::log(r_max / r_min) / (n - 1);
    g->build();
    return g;
  }

  // Near-uniform spacing rc*h below rc, logarithmic with increment h beyond:
  // r(s) = rc*sinh(h*(s+1)), s = 0..n-1. Used by the wave evolver where the
  // CFL bound rules out log spacing down to tiny radii.
  static std::shared_ptr<const RadialGrid> stretched(double rc, double r_max,
                                                     int n) {
    auto g = std::make_shared<RadialGrid>();
    g->kind_ = GridKind::Sinh;
    g->n_ = n;
    g->rc_ = rc;
    g->r_max_ = r_max;
    g->h_ = std::asinh(r_max / rc) / n;
    g->r_min_ = rc * std::sinh(g->h_);
    g->build();
    return g;
  }

  int size() const { return n_; }
  double r(int i) const { return r_[i]; }
  const std::vector<double>& nodes() const { return r_; }
  double drds(int i) const { return m1_[i]; }
  double d2rds2(int i) const { return m2_[i]; }
  const std::vector<double>& weights() const { return w_; }
  double weight(int i) const { return w_[i]; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double h() const { return h_; }
  GridKind kind() const { return kind_; }
  double rc() const { return rc_; }
  double tolerance() const { return tol_; }

  bool same_as(const RadialGrid& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && r_min_ == o.r_min_ &&
           r_max_ == o.r_max_ && rc_ == o.rc_;
  }

  // index of first node with r >= x (clamped)
  int index_at(double x) const {
    auto it = std::lower_bound(r_.begin(), r_.end(), x);
    if (it == r_.end()) return n_ - 1;
    return static_cast<int>(it - r_.begin());
  }

  void build() {
    r_.resize(n_);
    m1_.resize(n_);
    m2_.resize(n_);
    w_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      if (kind_ == GridKind::Log) {
        r_[i] = r_min_ * std::exp(h_ * i);
        m1_[i] = h_ * r_[i];
        m2_[i] = h_ * h_ * r_[i];
      } else {
        double xi = h_ * (i + 1);
        r_[i] = rc_ * std::sinh(xi);
        m1_[i] = h_ * std::sqrt(rc_ * rc_ + r_[i] * r_[i]);
        m2_[i] = h_ * h_ * r_[i];
      }
    }
    // trapezoid in s with the r dr Jacobian folded in
    for (int i = 0; i < n_; ++i) {
      double c = (i == 0 || i == n_ - 1) ? 0.5 : 1.0;
      w_[i] = c * r_[i] * m1_[i];
    }
  }

 private:
  GridKind kind_ = GridKind::Log;
  int n_ = 0;
  double r_min_ = 0, r_max_ = 0, rc_ = 0, h_ = 0;
  double tol_ = 1e-8;
  std::vector<double> r_, m1_, m2_, w_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

struct GridMismatch : std::runtime_error {
  GridMismatch() : std::runtime_error("radial functions live on different grids") {}
};
struct NumericalDerivativeError : std::runtime_error {
  NumericalDerivativeError() : std::runtime_error("non-finite value in derivative") {}
};

// Declared endpoint behavior |f| ~ C r^p (log(1/r))^logs near 0 (and r^p at
// infinity, no logs there). Drives the analytic tail corrections and the
// exponent-fit validators.
struct Asym {
  double p = 0.0;
  int logs = 0;
};

struct RadialFn {
  GridPtr grid;
  std::vector<double> v;
  Asym a0;    // r -> 0
  Asym ainf;  // r -> infinity

  RadialFn() = default;
  RadialFn(GridPtr g, Asym a, Asym ai)
      : grid(std::move(g)), v(grid->size(), 0.0), a0(a), ainf(ai) {}

  double operator[](int i) const { return v[i]; }
  double& operator[](int i) { return v[i]; }
  int size() const { return static_cast<int>(v.size()); }
};

struct PairFn {
  RadialFn pos;
  RadialFn vel;
};

template <class F>
RadialFn make_fn(const GridPtr& g, F&& f, Asym a0 = {}, Asym ainf = {}) {
  RadialFn out(g, a0, ainf);
  for (int i = 0; i < g->size(); ++i) out.v[i] = f(g->r(i));
  return out;
}

inline void check_same_grid(const RadialFn& f, const RadialFn& g) {
  if (!f.grid || !g.grid || !f.grid->same_as(*g.grid)) throw GridMismatch();
}

// ---------------------------------------------------------------------------
// quadrature

// integral over (0, r0] of C r^p (log 1/r)^m r dr, anchored to the value f0
// at the first grid node r0. Assumes p > -2 (guarded).
inline double head_tail_integral(double f0, double r0, double p, int m) {
  if (f0 == 0.0 || p <= -1.9) return 0.0;
  double base = f0 * r0 * r0;
  double q = p + 2.0;
  if (m <= 0 || r0 >= 1.0) return base / q;
  double L = std::log(1.0 / r0);
  // int_0^{r0} r^{q-1} L(r)^m dr with L(r)=log(1/r), normalized by L(r0)^m
  double s = 0.0, fact = 1.0, Lp = 1.0;
  for (int j = 0; j <= m; ++j) {
    s += fact / (std::pow(q, j + 1) * Lp);
    fact *= (m - j);
    Lp *= L;
  }
  return base * s;
}

// integral over [rN, infinity) of C r^q r dr anchored at the last node.
inline double far_tail_integral(double fN, double rN, double q) {
  if (fN == 0.0 || q >= -2.1) return 0.0;
  return -fN * rN * rN / (q + 2.0);
}

// int f r dr with endpoint corrections from the declared exponents.
inline double quadrature(const RadialFn& f) {
  const RadialGrid& g = *f.grid;
  double s = 0.0;
  const auto& w = g.weights();
  for (int i = 0; i < g.size(); ++i) s += w[i] * f.v[i];
  s += head_tail_integral(f.v.front(), g.r(0), f.a0.p, f.a0.logs);
  s += far_tail_integral(f.v.back(), g.r(g.size() - 1), f.ainf.p);
  return s;
}

// <f|g> = int f g r dr (the 2*pi-free radial convention)
inline double inner(const RadialFn& f, const RadialFn& g) {
  check_same_grid(f, g);
  const RadialGrid& gr = *f.grid;
  double s = 0.0;
  const auto& w = gr.weights();
  for (int i = 0; i < gr.size(); ++i) s += w[i] * f.v[i] * g.v[i];
  s += head_tail_integral(f.v.front() * g.v.front(), gr.r(0),
                          f.a0.p + g.a0.p, f.a0.logs + g.a0.logs);
  s += far_tail_integral(f.v.back() * g.v.back(), gr.r(gr.size() - 1),
                         f.ainf.p + g.ainf.p);
  return s;
}

// L^2(R^2) convention, with the angular factor kept explicit
inline double inner_2pi(const RadialFn& f, const RadialFn& g) {
  return 2.0 * kPi * inner(f, g);
}

// ---------------------------------------------------------------------------
// differentiation in the uniform grid parameter (4th order)

namespace detail {

inline void deriv_s(const std::vector<double>& f, std::vector<double>& out) {
  int n = static_cast<int>(f.size());
  out.resize(n);
  auto at = [&](int i) { return f[i]; };
  out[0] = (-25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4)) / 12.0;
  out[1] = (-3 * at(0) - 10 * at(1) + 18 * at(2) - 6 * at(3) + at(4)) / 12.0;
  for (int i = 2; i < n - 2; ++i)
    out[i] = (at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2)) / 12.0;
  out[n - 2] = (3 * at(n - 1) + 10 * at(n - 2) - 18 * at(n - 3) + 6 * at(n - 4) - at(n - 5)) / 12.0;
  out[n - 1] = (25 * at(n - 1) - 48 * at(n - 2) + 36 * at(n - 3) - 16 * at(n - 4) + 3 * at(n - 5)) / 12.0;
}

inline void deriv2_s(const std::vector<double>& f, std::vector<double>& out) {
  int n = static_cast<int>(f.size());
  out.resize(n);
  auto at = [&](int i) { return f[i]; };
  out[0] = (45 * at(0) - 154 * at(1) + 214 * at(2) - 156 * at(3) + 61 * at(4) - 10 * at(5)) / 12.0;
  out[1] = (10 * at(0) - 15 * at(1) - 4 * at(2) + 14 * at(3) - 6 * at(4) + at(5)) / 12.0;
  for (int i = 2; i < n - 2; ++i)
    out[i] = (-at(i - 2) + 16 * at(i - 1) - 30 * at(i) + 16 * at(i + 1) - at(i + 2)) / 12.0;
  out[n - 2] = (10 * at(n - 1) - 15 * at(n - 2) - 4 * at(n - 3) + 14 * at(n - 4) - 6 * at(n - 5) + at(n - 6)) / 12.0;
  out[n - 1] = (45 * at(n - 1) - 154 * at(n - 2) + 214 * at(n - 3) - 156 * at(n - 4) + 61 * at(n - 5) - 10 * at(n - 6)) / 12.0;
}

inline void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalDerivativeError();
}

}  // namespace detail

// d/dr
inline RadialFn d_r(const RadialFn& f) {
  RadialFn out(f.grid, {f.a0.p - 1.0, f.a0.logs}, {f.ainf.p - 1.0, 0});
  std::vector<double> fs;
  detail::deriv_s(f.v, fs);
  for (int i = 0; i < f.size(); ++i) out.v[i] = fs[i] / f.grid->drds(i);
  detail::check_finite(out.v);
  return out;
}

// Lambda = r d/dr  (H scaling generator)
inline RadialFn apply_Lambda(const RadialFn& f) {
  RadialFn out(f.grid, f.a0, f.ainf);
  std::vector<double> fs;
  detail::deriv_s(f.v, fs);
  for (int i = 0; i < f.size(); ++i)
    out.v[i] = f.grid->r(i) * fs[i] / f.grid->drds(i);
  detail::check_finite(out.v);
  return out;
}

// Lambda_0 = 1 + r d/dr  (L^2 scaling generator)
inline RadialFn apply_Lambda0(const RadialFn& f) {
  RadialFn out = apply_Lambda(f);
  for (int i = 0; i < f.size(); ++i) out.v[i] += f.v[i];
  return out;
}

// 2d radial Laplacian f'' + f'/r
inline RadialFn laplacian(const RadialFn& f) {
  RadialFn out(f.grid, {f.a0.p - 2.0, f.a0.logs}, {f.ainf.p - 2.0, 0});
  std::vector<double> f1, f2;
  detail::deriv_s(f.v, f1);
  detail::deriv2_s(f.v, f2);
  const RadialGrid& g = *f.grid;
  for (int i = 0; i < f.size(); ++i) {
    double m1 = g.drds(i), m2 = g.d2rds2(i);
    double fr = f1[i] / m1;
    double frr = (f2[i] - f1[i] * m2 / m1) / (m1 * m1);
    out.v[i] = frr + fr / g.r(i);
  }
  detail::check_finite(out.v);
  return out;
}

// ---------------------------------------------------------------------------
// ground-state potential pieces (closed forms, stable on both sides of r=1)

// sin Q(y), Q = 2 arctan(y^k)
inline double sinQ(int k, double y) {
  if (y <= 1.0) {
    double yk = std::pow(y, k);
    return 2.0 * yk / (1.0 + yk * yk);
  }
  double yk = std::pow(y, -k);
  return 2.0 * yk / (1.0 + yk * yk);
}

inline double cosQ(int k, double y) {
  if (y <= 1.0) {
    double u = std::pow(y, 2 * k);
    return (1.0 - u) / (1.0 + u);
  }
  double u = std::pow(y, -2 * k);
  return (u - 1.0) / (u + 1.0);
}

// P(r) = r^{-2}(f'(Q) - k^2) = -2 k^2 sin^2 Q / r^2
inline double potential_P(int k, double r) {
  double s = sinQ(k, r);
  return -2.0 * k * k * s * s / (r * r);
}

// log-parameter derivatives of P: P_x and P_xx with x = log r (closed forms)
inline void potential_P_logderivs(int k, double r, double& P, double& Px,
                                  double& Pxx) {
  double u = (r <= 1.0) ? std::pow(r, 2 * k) : std::pow(r, -2 * k);
  double frac = (r <= 1.0) ? u / (1.0 + u) : 1.0 / (1.0 + u);  // r^{2k}/(1+r^{2k})
  P = potential_P(k, r);
  double a = (2.0 * k - 2.0) - 4.0 * k * frac;     // dlogP/dx
  double fracx = 2.0 * k * frac * (1.0 - frac);    // d frac/dx
  Px = P * a;
  Pxx = Px * a + P * (-4.0 * k * fracx);
}

// ---------------------------------------------------------------------------
// linearized operators

// L0 f = -Lap f + k^2 f / r^2
inline RadialFn apply_L0(const EquivClass& k, const RadialFn& f) {
  RadialFn lap = laplacian(f);
  RadialFn out(f.grid, {f.a0.p - 2.0, f.a0.logs}, {f.ainf.p - 2.0, 0});
  double k2 = k.kd() * k.kd();
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i);
    out.v[i] = -lap.v[i] + k2 * f.v[i] / (r * r);
  }
  return out;
}

// L_lambda f = L0 f + P(r/lambda)/lambda^2 f ; lambda=1 is the operator about Q
inline RadialFn apply_Llam(const EquivClass& k, double lam, const RadialFn& f) {
  RadialFn out = apply_L0(k, f);
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i);
    out.v[i] += potential_P(k.k, r / lam) / (lam * lam) * f.v[i];
  }
  return out;
}

inline RadialFn apply_L(const EquivClass& k, const RadialFn& f) {
  return apply_Llam(k, 1.0, f);
}

// L_Phi f = -Lap f + k^2 cos(2 Phi)/r^2 f for a given background profile
inline RadialFn apply_LPhi(const EquivClass& k, const RadialFn& Phi,
                           const RadialFn& f) {
  check_same_grid(Phi, f);
  RadialFn lap = laplacian(f);
  RadialFn out(f.grid, {f.a0.p - 2.0, f.a0.logs}, {f.ainf.p - 2.0, 0});
  double k2 = k.kd() * k.kd();
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i);
    out.v[i] = -lap.v[i] + k2 * std::cos(2.0 * Phi.v[i]) / (r * r) * f.v[i];
  }
  return out;
}

// K w = 2 P L0 w - 2 P' w' + (P^2 - Lap P) w, so that L^2 = L0^2 + K.
inline RadialFn apply_K(const EquivClass& k, double lam, const RadialFn& f) {
  RadialFn l0 = apply_L0(k, f);
  RadialFn fr = d_r(f);
  RadialFn out(f.grid, {f.a0.p - 2.0, f.a0.logs}, {f.ainf.p - 4.0, 0});
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i), y = r / lam;
    double P, Px, Pxx;
    potential_P_logderivs(k.k, y, P, Px, Pxx);
    P /= lam * lam;
    Px /= lam * lam;
    Pxx /= lam * lam;
    double Pr = Px / r;          // dP/dr
    double lapP = Pxx / (r * r); // P'' + P'/r
    out.v[i] = 2.0 * P * l0.v[i] - 2.0 * Pr * fr.v[i] + (P * P - lapP) * f.v[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// norms

inline double norm_L2(const RadialFn& f) {
  RadialFn sq(f.grid, {2 * f.a0.p, 2 * f.a0.logs}, {2 * f.ainf.p, 0});
  for (int i = 0; i < f.size(); ++i) sq.v[i] = f.v[i] * f.v[i];
  return std::sqrt(quadrature(sq));
}

inline double norm_H_sq(const EquivClass& k, const RadialFn& f) {
  RadialFn fr = d_r(f);
  RadialFn integ(f.grid, {2 * f.a0.p - 2, 2 * f.a0.logs}, {2 * f.ainf.p - 2, 0});
  double k2 = k.kd() * k.kd();
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i);
    integ.v[i] = fr.v[i] * fr.v[i] + k2 * f.v[i] * f.v[i] / (r * r);
  }
  return quadrature(integ);
}

inline double norm_H(const EquivClass& k, const RadialFn& f) {
  return std::sqrt(norm_H_sq(k, f));
}

inline double norm_pair_H(const EquivClass& k, const PairFn& w) {
  double a = norm_H_sq(k, w.pos);
  double b = norm_L2(w.vel);
  return std::sqrt(a + b * b);
}

inline double norm_H2(const EquivClass& k, const RadialFn& f) {
  RadialFn l0 = apply_L0(k, f);
  return norm_L2(l0);
}

inline double norm_pair_H2(const EquivClass& k, const PairFn& w) {
  double a = norm_H2(k, w.pos);
  double b = norm_H(k, w.vel);
  return std::sqrt(a * a + b * b);
}

// |(Lambda w, Lambda_0 wdot)|_H-pair
inline double norm_LamInvH(const EquivClass& k, const PairFn& w) {
  RadialFn lw = apply_Lambda(w.pos);
  RadialFn l0v = apply_Lambda0(w.vel);
  double a = norm_H_sq(k, lw);
  double b = norm_L2(l0v);
  return std::sqrt(a + b * b);
}

inline double norm_Linf(const RadialFn& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace bubblelab

#endif  // BUBBLELAB_RADIAL_HPP
