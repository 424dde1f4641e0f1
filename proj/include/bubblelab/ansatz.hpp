#ifndef BUBBLELAB_ANSATZ_HPP
#define BUBBLELAB_ANSATZ_HPP

// The refined two-bubble configuration (Phi, Phidot) built from the ground
// state and the correction profiles, the two residual fields entering the
// error equation, and the refined distance to the two-bubble family.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bubblelab/modulation.hpp"
#include "bubblelab/profiles.hpp"
#include "bubblelab/radial.hpp"

namespace bubblelab {

struct BubblesNotSeparated : std::runtime_error {
  explicit BubblesNotSeparated(double nu)
      : std::runtime_error("scale ratio too large for the ansatz: nu = " +
                           std::to_string(nu)) {}
};

inline constexpr double kNuMax = 0.3;

struct Ansatz {
  RadialFn phi;
  RadialFn phidot;
  ModState state;
};

// f(u) = k^2 sin(2u)/2
inline double f_nonlin(int k, double u) { return 0.5 * k * k * std::sin(2.0 * u); }
inline double fprime_nonlin(int k, double u) { return k * k * std::cos(2.0 * u); }

// sin(x) - x without cancellation for small x
inline double sin_minus_x(double x) {
  if (std::abs(x) > 0.5) return std::sin(x) - x;
  double x2 = x * x;
  return -x * x2 / 6.0 *
         (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
}

// ---------------------------------------------------------------------------
// per-node profile values at both bubble scales

struct TermCache {
  // at y = r/lam
  double LQl, L0LQl;
  double Al, LAl, L0Al, L0LAl;
  double Bl, LBl, L0Bl, L0LBl;
  // at z = r/mu
  double LQm, L0LQm;
  double Am, LAm, L0Am, L0LAm;
  double Btm, LBtm, L0Btm, L0LBtm;
  double Ql, Qm;  // ground state values
};

inline TermCache term_cache(const ProfileSet& ps, double r, double lam,
                            double mu) {
  int k = ps.k.k;
  double y = r / lam, z = r / mu;
  TermCache t;
  t.Ql = ground_state(k, y);
  t.Qm = ground_state(k, z);
  t.LQl = lambda_q(k, y);
  t.LQm = lambda_q(k, z);
  t.L0LQl = lambda0_lambda_q(k, y);
  t.L0LQm = lambda0_lambda_q(k, z);
  t.Al = ps.A.eval(y);
  t.LAl = ps.A.eval_L(y);
  t.L0Al = t.Al + t.LAl;
  t.L0LAl = ps.A.eval_L0L(y);
  t.Bl = ps.B.eval(y);
  t.LBl = ps.B.eval_L(y);
  t.L0Bl = t.Bl + t.LBl;
  t.L0LBl = ps.B.eval_L0L(y);
  t.Am = ps.A.eval(z);
  t.LAm = ps.A.eval_L(z);
  t.L0Am = t.Am + t.LAm;
  t.L0LAm = ps.A.eval_L0L(z);
  t.Btm = ps.Bt.eval(z);
  t.LBtm = ps.Bt.eval_L(z);
  t.L0Btm = t.Btm + t.LBtm;
  t.L0LBtm = ps.Bt.eval_L0L(z);
  return t;
}

// ---------------------------------------------------------------------------
// the velocity-component manifest: 12 summands, each an underline-scaled
// profile times a state coefficient. Kept as a table so a test can check the
// transcription term by term.

struct PhidotTerm {
  const char* label;
  bool at_lambda;  // scale of the underline factor
  double (*pick)(const TermCache&);
  double (*coeff)(const ModState&, const Constants&);
};

inline const std::array<PhidotTerm, 12>& phidot_manifest() {
  static const std::array<PhidotTerm, 12> terms = {{
      {"b LamQ_ul", true, [](const TermCache& t) { return t.LQl; },
       [](const ModState& s, const Constants&) { return s.b; }},
      {"b^3 LamA_ul", true, [](const TermCache& t) { return t.LAl; },
       [](const ModState& s, const Constants&) { return s.b * s.b * s.b; }},
      {"-2 gam b nu^k A_ul", true, [](const TermCache& t) { return t.Al; },
       [](const ModState& s, const Constants& c) {
         return -2.0 * c.gamma_k * s.b * std::pow(s.nu(), c.k);
       }},
      {"b nu^k LamB_ul", true, [](const TermCache& t) { return t.LBl; },
       [](const ModState& s, const Constants& c) {
         return s.b * std::pow(s.nu(), c.k);
       }},
      {"-k b nu^k B_ul", true, [](const TermCache& t) { return t.Bl; },
       [](const ModState& s, const Constants& c) {
         return -c.k * s.b * std::pow(s.nu(), c.k);
       }},
      {"-k a nu^{k+1} B_ul", true, [](const TermCache& t) { return t.Bl; },
       [](const ModState& s, const Constants& c) {
         return -c.k * s.a * std::pow(s.nu(), c.k + 1);
       }},
      {"a LamQ_um", false, [](const TermCache& t) { return t.LQm; },
       [](const ModState& s, const Constants&) { return s.a; }},
      {"a^3 LamA_um", false, [](const TermCache& t) { return t.LAm; },
       [](const ModState& s, const Constants&) { return s.a * s.a * s.a; }},
      {"+2 gam a nu^k A_um", false, [](const TermCache& t) { return t.Am; },
       [](const ModState& s, const Constants& c) {
         return 2.0 * c.gamma_k * s.a * std::pow(s.nu(), c.k);
       }},
      {"a nu^k LamBt_um", false, [](const TermCache& t) { return t.LBtm; },
       [](const ModState& s, const Constants& c) {
         return s.a * std::pow(s.nu(), c.k);
       }},
      {"k b nu^{k-1} Bt_um", false, [](const TermCache& t) { return t.Btm; },
       [](const ModState& s, const Constants& c) {
         return c.k * s.b * std::pow(s.nu(), c.k - 1);
       }},
      {"k a nu^k Bt_um", false, [](const TermCache& t) { return t.Btm; },
       [](const ModState& s, const Constants& c) {
         return c.k * s.a * std::pow(s.nu(), c.k);
       }},
  }};
  return terms;
}

// ---------------------------------------------------------------------------
// assembly

inline Ansatz assemble(const ProfileSet& ps, const ModState& s,
                       const GridPtr& grid) {
  double nu = s.nu();
  if (!(nu > 0.0) || nu >= kNuMax) throw BubblesNotSeparated(nu);
  int k = ps.k.k;
  const Constants& c = ps.c;
  double nuk = std::pow(nu, k);

  Ansatz out;
  out.state = s;
  out.phi = RadialFn(grid, {double(k), 0}, {double(-k + 2), 0});
  out.phidot = RadialFn(grid, {double(k), 0}, {double(-k + 2), 0});
  const auto& manifest = phidot_manifest();
  for (int i = 0; i < grid->size(); ++i) {
    double r = grid->r(i);
    TermCache t = term_cache(ps, r, s.lam, s.mu);
    out.phi.v[i] = (t.Ql + s.b * s.b * t.Al + nuk * t.Bl) -
                   (t.Qm + s.a * s.a * t.Am + nuk * t.Btm);
    double pd = 0.0;
    for (const auto& term : manifest) {
      double scale = term.at_lambda ? s.lam : s.mu;
      pd += term.coeff(s, c) * term.pick(t) / scale;
    }
    out.phidot.v[i] = pd;
  }
  return out;
}

// time derivatives of the parameters, supplied by the caller
struct ModRate {
  double mu_dot = 0, lam_dot = 0, a_dot = 0, b_dot = 0;
};

inline ModRate formal_rate(const ModState& s, const Constants& c) {
  auto d = mod_rhs(s, c);
  return {d[0], d[1], d[2], d[3]};
}

// Phidot - dPhi/dt via the bracketed combination; vanishes bracket-by-bracket
// when the rate equals the formal system.
inline RadialFn psi1(const ProfileSet& ps, const ModState& s,
                     const ModRate& dt, const GridPtr& grid) {
  int k = ps.k.k;
  const Constants& c = ps.c;
  double nu = s.nu(), nuk = std::pow(nu, k);
  double cb = dt.b_dot + c.gamma_k * nuk / s.lam;
  double ca = dt.a_dot + c.gamma_k * nuk / s.mu;
  double cl = s.b + dt.lam_dot;
  double cm = s.a - dt.mu_dot;

  RadialFn out(grid, {double(k), 0}, {double(-k + 2), 0});
  for (int i = 0; i < grid->size(); ++i) {
    double r = grid->r(i);
    TermCache t = term_cache(ps, r, s.lam, s.mu);
    double ul = 1.0 / s.lam, um = 1.0 / s.mu;
    double v = 0.0;
    v += cl * t.LQl * ul;
    v += s.b * s.b * cl * t.LAl * ul;
    v += -2.0 * s.b * s.lam * cb * t.Al * ul;
    v += nuk * cl * t.LBl * ul;
    v += -k * nuk * cl * t.Bl * ul;
    v += -k * nu * nuk * cm * t.Bl * ul;
    v += cm * t.LQm * um;
    v += s.a * s.a * cm * t.LAm * um;
    v += 2.0 * s.a * s.mu * ca * t.Am * um;
    v += nuk * cm * t.LBtm * um;
    v += k * (nuk / nu) * cl * t.Btm * um;
    v += k * nuk * cm * t.Btm * um;
    out.v[i] = v;
  }
  return out;
}

// the three nonlinear remainder groups of the field equation applied to the
// ansatz, evaluated in cancellation-free form; returns their sum at radius r
inline double nonlinear_remainders(const ProfileSet& ps, const ModState& s,
                                   double r, const TermCache& t) {
  int k = ps.k.k;
  double k2 = double(k) * k;
  double nuk = std::pow(s.nu(), k);
  double y = r / s.lam, z = r / s.mu;

  // interaction of the two bare bubbles minus its leading monomials
  double g6 = sin2q_minus_4rk(k, z) * t.LQl * t.LQl -
              sin2q_plus_4rmk(k, y) * t.LQm * t.LQm;

  // quadratic-profile remainder about the bare two-bubble
  double bTl = s.b * s.b * t.Al + nuk * t.Bl;
  double aTm = s.a * s.a * t.Am + nuk * t.Btm;
  double delta = bTl - aTm;
  double qq = t.Ql - t.Qm;
  double s2qq = std::sin(2.0 * qq), c2qq = std::cos(2.0 * qq);
  double sd = std::sin(delta);
  double g7 = k2 * (-s2qq * sd * sd + 0.5 * c2qq * sin_minus_x(2.0 * delta));

  // cross-potential remainder; the smallness sits in the sinQ factors and
  // the profile prefactors, so plain evaluation of the mixed angles is safe
  double sl = sinQ(k, y);
  double sm = sinQ(k, z);
  double sin_2l_m = std::sin(2.0 * t.Ql - t.Qm);
  double sin_2m_l = std::sin(2.0 * t.Qm - t.Ql);
  double g8 = 2.0 * k2 * (bTl * sin_2l_m * sm - aTm * sl * sin_2m_l);

  return -(g6 + g7 + g8) / (r * r);
}

// Full residual of the configuration under the field equation,
// -d/dt Phidot + Lap Phi - f(Phi)/r^2, through the closed combination.
inline RadialFn psi2(const ProfileSet& ps, const ModState& s,
                     const ModRate& dt, const GridPtr& grid) {
  int k = ps.k.k;
  double kd = k;
  const Constants& c = ps.c;
  double g = c.gamma_k;
  double nu = s.nu();
  double nuk = std::pow(nu, k);
  double lam = s.lam, mu = s.mu, a = s.a, b = s.b;
  double cb = dt.b_dot + g * nuk / lam;
  double ca = dt.a_dot + g * nuk / mu;
  double cl = b + dt.lam_dot;
  double cm = a - dt.mu_dot;

  RadialFn out(grid, {double(k) - 2.0, 0}, {double(-k), 0});
  for (int i = 0; i < grid->size(); ++i) {
    double r = grid->r(i);
    TermCache t = term_cache(ps, r, lam, mu);
    double ul = 1.0 / lam, um = 1.0 / mu;
    double v = 0.0;

    // bracket multiplying (b' + gam nu^k / lam)
    v += cb * (-t.LQl * ul - 3.0 * b * b * t.LAl * ul + 2.0 * g * nuk * t.Al * ul -
               nuk * t.LBl * ul + kd * nuk * t.Bl * ul -
               kd * (nuk / nu) * t.Btm * um);
    // bracket multiplying (a' + gam nu^k / mu)
    v += ca * (-t.LQm * um - 3.0 * a * a * t.LAm * um - 2.0 * g * nuk * t.Am * um +
               nuk * t.LBtm * um + kd * nu * nuk * t.Bl * ul -
               kd * nuk * t.Btm * um);
    // bracket multiplying (b + lam')
    v += cl * ((b / lam) * t.L0LQl * ul + (b * b * b / lam) * t.L0LAl * ul -
               2.0 * g * (b * nuk / lam) * t.L0Al * ul -
               kd * (b * nuk / lam) * t.L0Bl * ul +
               (b * nuk / lam) * t.L0LBl * ul +
               2.0 * kd * g * (b * nuk / lam) * t.Al * ul -
               kd * (b * nuk / lam) * t.LBl * ul +
               kd * kd * (b * nuk / lam) * t.Bl * ul -
               2.0 * kd * g * (a * nuk / lam) * t.Am * um -
               kd * (a * nuk / lam) * t.LBtm * um -
               kd * (kd - 1.0) * (b * nuk / (nu * lam)) * t.Btm * um +
               kd * (kd + 1.0) * (a * nu * nuk / lam) * t.Bl * ul -
               kd * (a * nu * nuk / lam) * t.L0Bl * ul -
               kd * kd * (a * nuk / lam) * t.Btm * um);
    // bracket multiplying (a - mu')
    v += cm * (-(a / mu) * t.L0LQm * um -
               (a * a * a * nu / lam) * t.L0LAm * um -
               2.0 * g * (a * nu * nuk / lam) * t.L0Am * um -
               (a * nu * nuk / lam) * t.L0LBtm * um -
               kd * (b * nuk / lam) * t.L0Btm * um +
               2.0 * kd * g * (b * nu * nuk / lam) * t.Al * ul -
               kd * (b * nu * nuk / lam) * t.LBl * ul +
               kd * kd * (b * nu * nuk / lam) * t.Bl * ul -
               2.0 * kd * g * (a * nu * nuk / lam) * t.Am * um -
               kd * (a * nu * nuk / lam) * t.LBtm * um -
               kd * (kd - 1.0) * (b * nuk / lam) * t.Btm * um +
               kd * (kd + 1.0) * (a * nu * nu * nuk / lam) * t.Bl * ul -
               kd * kd * (a * nu * nuk / lam) * t.Btm * um -
               kd * (a * nu * nuk / lam) * t.L0Btm * um);

    // standalone profile terms
    double nu2k = nuk * nuk;
    v += 3.0 * g * (nuk / lam) * b * b * t.LAl * ul;
    v += -(b * b * b * b / lam) * t.L0LAl * ul;
    v += -2.0 * g * g * (nu2k / lam) * t.Al * ul;
    v += 2.0 * g * (b * b * nuk / lam) * t.L0Al * ul;
    v += g * (nu2k / lam) * t.LBl * ul;
    v += -2.0 * kd * g * (b * b * nuk / lam) * t.Al * ul;
    v += -2.0 * kd * g * (a * b * nu * nuk / lam) * t.Al * ul;
    v += kd * (b * b * nuk / lam) * t.LBl * ul;
    v += kd * (a * b * nu * nuk / lam) * t.LBl * ul;
    v += -(b * b * nuk / lam) * t.L0LBl * ul;
    v += -kd * (nu2k / lam) * t.Bl * ul;
    v += kd * (b * b * nuk / lam) * t.L0Bl * ul;
    v += -kd * kd * (b * b * nuk / lam) * t.Bl * ul;
    v += -kd * kd * (a * b * nu * nuk / lam) * t.Bl * ul;
    v += -kd * (kd + 1.0) * a * b * (nu * nuk / lam) * t.Bl * ul;
    v += kd * a * b * (nu * nuk / lam) * t.L0Bl * ul;
    v += -kd * (kd + 1.0) * a * a * (nu * nu * nuk / lam) * t.Bl * ul;
    v += -kd * g * (nu * nu * nu2k / lam) * t.Bl * ul;

    v += 3.0 * g * (a * a * nuk / mu) * t.LAm * um;
    v += (a * a * a * a * nu / lam) * t.L0LAm * um;
    v += 2.0 * g * g * (nu * nu2k / lam) * t.Am * um;
    v += 2.0 * kd * g * (a * b * nuk / lam) * t.Am * um;
    v += 2.0 * kd * g * (a * a * nu * nuk / lam) * t.Am * um;
    v += 2.0 * g * (a * a * nu * nuk / lam) * t.L0Am * um;
    v += -g * (nu * nu2k / lam) * t.LBtm * um;
    v += kd * (a * b * nuk / lam) * t.LBtm * um;
    v += kd * (a * a * nu * nuk / lam) * t.LBtm * um;
    v += (a * a * nu * nuk / lam) * t.L0LBtm * um;
    v += kd * g * (nu2k / (nu * lam)) * t.Btm * um;
    v += kd * g * (nu * nu2k / lam) * t.Btm * um;
    v += kd * kd * a * b * (nuk / lam) * t.Btm * um;
    v += kd * (kd - 1.0) * (b * b * nuk / (nu * lam)) * t.Btm * um;
    v += kd * (kd - 1.0) * (a * b * nuk / lam) * t.Btm * um;
    v += kd * (a * b * nuk / lam) * t.L0Btm * um;
    v += kd * kd * a * a * (nu * nuk / lam) * t.Btm * um;
    v += kd * a * a * (nu * nuk / lam) * t.L0Btm * um;

    // nonlinear remainders
    v += nonlinear_remainders(ps, s, r, t);

    out.v[i] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// conserved energy of a configuration (2 pi convention)

inline double energy(const EquivClass& k, const RadialFn& u, const RadialFn& ut) {
  RadialFn ur = d_r(u);
  RadialFn integ(u.grid, {2.0 * u.a0.p - 2.0, 0}, {2.0 * u.ainf.p - 2.0, 0});
  double k2 = k.kd() * k.kd();
  for (int i = 0; i < u.size(); ++i) {
    double r = u.grid->r(i);
    double su = std::sin(u.v[i]);
    integ.v[i] = 0.5 * (ut.v[i] * ut.v[i] + ur.v[i] * ur.v[i] +
                        k2 * su * su / (r * r));
  }
  return 2.0 * kPi * quadrature(integ);
}

// ---------------------------------------------------------------------------
// refined distance to the two-bubble family

struct DistanceResult {
  double value = 0;
  ModState argmin;
  bool hit_box = false;
};

// objective of the refined distance at fixed parameters
inline double distance_objective(const EquivClass& k, const RadialFn& u,
                                 const RadialFn& u_r, const RadialFn& ut,
                                 double lam, double mu, double a, double b) {
  int kk = k.k;
  double k2 = k.kd() * k.kd();
  double nu = lam / mu;
  const RadialGrid& g = *u.grid;
  double hsq = 0.0, vsq = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double r = g.r(i), w = g.weight(i);
    double y = r / lam, z = r / mu;
    double dpos = u.v[i] - (ground_state(kk, y) - ground_state(kk, z));
    double dder = u_r.v[i] - (lambda_q(kk, y) - lambda_q(kk, z)) / r;
    hsq += w * (dder * dder + k2 * dpos * dpos / (r * r));
    double dvel = ut.v[i] - b * lambda_q(kk, y) / lam - a * lambda_q(kk, z) / mu;
    vsq += w * dvel * dvel;
  }
  double nk2 = std::pow(nu, -0.5 * kk);
  return std::sqrt(hsq) + nk2 * std::sqrt(vsq) + std::pow(nu, kk) +
         a * a * (1.0 + std::abs(a) * nk2) + b * b * (1.0 + std::abs(b) * nk2);
}

// Multistart coordinate descent over (log lam, log mu, a, b) within a box of
// half-widths `box` (in the log variables for the scales) around the seed.
inline DistanceResult distance_plus(const EquivClass& k, const PairFn& field,
                                    const ModState& seed,
                                    double box = 0.7, int sweeps = 40) {
  RadialFn u_r = d_r(field.pos);
  auto obj = [&](const std::array<double, 4>& p) {
    return distance_objective(k, field.pos, u_r, field.vel,
                              std::exp(p[0]), std::exp(p[1]), p[2], p[3]);
  };

  auto golden = [&](std::array<double, 4> p, int ci, double lo, double hi) {
    const double gr = 0.6180339887498949;
    double a1 = hi - gr * (hi - lo), b1 = lo + gr * (hi - lo);
    auto at = [&](double x) {
      auto q = p;
      q[ci] = x;
      return obj(q);
    };
    double fa = at(a1), fb = at(b1);
    for (int it = 0; it < 40 && hi - lo > 1e-9; ++it) {
      if (fa < fb) {
        hi = b1;
        b1 = a1;
        fb = fa;
        a1 = hi - gr * (hi - lo);
        fa = at(a1);
      } else {
        lo = a1;
        a1 = b1;
        fa = fb;
        b1 = lo + gr * (hi - lo);
        fb = at(b1);
      }
    }
    return 0.5 * (lo + hi);
  };

  double vb = std::max({0.05, 2.0 * std::abs(seed.a), 2.0 * std::abs(seed.b)});
  std::array<double, 4> lo{std::log(seed.lam) - box, std::log(seed.mu) - box,
                           seed.a - vb, seed.b - vb};
  std::array<double, 4> hi{std::log(seed.lam) + box, std::log(seed.mu) + box,
                           seed.a + vb, seed.b + vb};

  std::array<double, 4> best{std::log(seed.lam), std::log(seed.mu), seed.a,
                             seed.b};
  double fbest = obj(best);
  // a few jittered starts around the seed
  const std::array<std::array<double, 4>, 3> starts = {{
      best,
      {best[0] + 0.08, best[1] - 0.05, best[2], best[3]},
      {best[0] - 0.08, best[1] + 0.05, best[2], best[3]},
  }};
  for (auto start : starts) {
    auto p = start;
    double span = 0.25 * box;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      for (int ci = 0; ci < 4; ++ci) {
        double w = (ci < 2) ? span : std::max(0.05 * vb, span * vb);
        double l = std::max(lo[ci], p[ci] - w), h = std::min(hi[ci], p[ci] + w);
        p[ci] = golden(p, ci, l, h);
      }
      span *= 0.6;
      if (span < 1e-8) break;
    }
    double f = obj(p);
    if (f < fbest) {
      fbest = f;
      best = p;
    }
  }
  DistanceResult res;
  res.value = fbest;
  res.argmin = ModState{0.0, std::exp(best[1]), std::exp(best[0]), best[2],
                        best[3]};
  for (int ci = 0; ci < 2; ++ci)
    if (std::abs(best[ci] - (ci == 0 ? std::log(seed.lam) : std::log(seed.mu))) >
        0.98 * box)
      res.hit_box = true;
  return res;
}

}  // namespace bubblelab

#endif  // BUBBLELAB_ANSATZ_HPP
