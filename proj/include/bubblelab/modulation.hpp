#ifndef BUBBLELAB_MODULATION_HPP
#define BUBBLELAB_MODULATION_HPP

// The finite-dimensional parameter dynamics: the first-order system for
// (mu, lambda, a, b), its explicit power-law approximant, and an adaptive
// embedded Runge-Kutta integrator (Dormand-Prince 5(4), long double state so
// that deviations of relative size ~1e-17 remain resolvable).

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bubblelab/profiles.hpp"

namespace bubblelab {

struct ModState {
  double t = 0;
  double mu = 1;
  double lam = 0;
  double a = 0;
  double b = 0;
  double nu() const { return lam / mu; }
};

struct Trajectory {
  std::vector<ModState> states;
  double tol = 0;
  long accepted = 0;
  long rejected = 0;
  bool lambda_hit_zero = false;
};

struct StiffFailure : std::runtime_error {
  StiffFailure() : std::runtime_error("step size underflow in the parameter system") {}
};

// (mu', lam', a', b') = (a, -b, -gamma lam^k mu^{-k-1}, -gamma lam^{k-1} mu^{-k})
inline std::array<double, 4> mod_rhs(const ModState& s, const Constants& c) {
  if (s.lam <= 0.0) return {s.a, -s.b, 0.0, 0.0};
  double lk1 = std::pow(s.lam, c.k - 1);
  double mk = std::pow(s.mu, -c.k);
  return {s.a, -s.b, -c.gamma_k * lk1 * s.lam * mk / s.mu,
          -c.gamma_k * lk1 * mk};
}

// explicit approximant: lam = q_k t^{-2/(k-2)}, b = rho_k lam^{k/2},
// mu = 1 - k/(2(k+2)) lam^2, a = k/(k+2) rho_k lam^{k/2+1}
inline ModState analytic_approx(double t, const Constants& c) {
  if (t <= 0.0) throw std::invalid_argument("approximant needs t > 0");
  double kd = c.k;
  ModState s;
  s.t = t;
  s.lam = c.q_k * std::pow(t, -2.0 / (kd - 2.0));
  s.b = c.rho_k * std::pow(s.lam, kd / 2.0);
  s.mu = 1.0 - kd / (2.0 * (kd + 2.0)) * s.lam * s.lam;
  s.a = kd / (kd + 2.0) * c.rho_k * std::pow(s.lam, kd / 2.0 + 1.0);
  return s;
}

// conserved along the flow: (a^2 + b^2)/2 - (gamma/k) lam^k mu^{-k}
inline double mod_invariant(const ModState& s, const Constants& c) {
  return 0.5 * (s.a * s.a + s.b * s.b) -
         c.gamma_k / c.k * std::pow(s.lam / s.mu, c.k);
}

namespace detail {

using Vec4 = std::array<long double, 4>;  // (mu, lam, a, b)

inline Vec4 rhs_ld(const Vec4& y, const Constants& c) {
  long double mu = y[0], lam = y[1], a = y[2], b = y[3];
  if (lam <= 0.0L) return {a, -b, 0.0L, 0.0L};
  long double lk1 = powl(lam, c.k - 1);
  long double mk = powl(mu, -c.k);
  long double g = (long double)c.gamma_k;
  return {a, -b, -g * lk1 * lam * mk / mu, -g * lk1 * mk};
}

struct Dopri5 {
  const Constants& c;
  long accepted = 0, rejected = 0;

  // one adaptive step from (t, y); h carries the sign of integration
  bool step(long double& t, Vec4& y, long double& h, long double rtol) {
    static constexpr long double a21 = 1.0L / 5;
    static constexpr long double a31 = 3.0L / 40, a32 = 9.0L / 40;
    static constexpr long double a41 = 44.0L / 45, a42 = -56.0L / 15, a43 = 32.0L / 9;
    static constexpr long double a51 = 19372.0L / 6561, a52 = -25360.0L / 2187,
                                 a53 = 64448.0L / 6561, a54 = -212.0L / 729;
    static constexpr long double a61 = 9017.0L / 3168, a62 = -355.0L / 33,
                                 a63 = 46732.0L / 5247, a64 = 49.0L / 176,
                                 a65 = -5103.0L / 18656;
    static constexpr long double b1 = 35.0L / 384, b3 = 500.0L / 1113,
                                 b4 = 125.0L / 192, b5 = -2187.0L / 6784,
                                 b6 = 11.0L / 84;
    static constexpr long double e1 = 35.0L / 384 - 5179.0L / 57600,
                                 e3 = 500.0L / 1113 - 7571.0L / 16695,
                                 e4 = 125.0L / 192 - 393.0L / 640,
                                 e5 = -2187.0L / 6784 + 92097.0L / 339200,
                                 e6 = 11.0L / 84 - 187.0L / 2100,
                                 e7 = -1.0L / 40;
    auto f = [&](const Vec4& v) { return rhs_ld(v, c); };
    auto axpy = [](const Vec4& y0, std::initializer_list<std::pair<long double, const Vec4*>> terms,
                   long double h) {
      Vec4 out = y0;
      for (auto& [cf, k] : terms)
        for (int i = 0; i < 4; ++i) out[i] += h * cf * (*k)[i];
      return out;
    };
    Vec4 k1 = f(y);
    Vec4 k2 = f(axpy(y, {{a21, &k1}}, h));
    Vec4 k3 = f(axpy(y, {{a31, &k1}, {a32, &k2}}, h));
    Vec4 k4 = f(axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
    Vec4 k5 = f(axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
    Vec4 k6 = f(axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
    Vec4 y5 = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
    Vec4 k7 = f(y5);

    long double err = 0.0L;
    for (int i = 0; i < 4; ++i) {
      long double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);
      long double sc = 1e-60L + rtol * std::max(fabsl(y[i]), fabsl(y5[i]));
      err = std::max(err, fabsl(e) / sc);
    }
    if (err <= 1.0L) {
      t += h;
      y = y5;
      ++accepted;
      h *= std::min(5.0L, std::max(0.2L, 0.9L * powl(err > 0 ? 1.0L / err : 1e10L, 0.2L)));
      return true;
    }
    ++rejected;
    h *= std::max(0.1L, 0.9L * powl(1.0L / err, 0.2L));
    return false;
  }
};

}  // namespace detail

// Adaptive integration from s0 to t_end (either direction). Local relative
// error <= tol per step; terminates early with a flag if lambda reaches 0.
inline Trajectory integrate(const Constants& c, const ModState& s0,
                            double t_end, double tol,
                            std::vector<double> sample_times = {}) {
  detail::Dopri5 stepper{c};
  long double t = s0.t;
  detail::Vec4 y{s0.mu, s0.lam, s0.a, s0.b};
  double dir = (t_end >= s0.t) ? 1.0 : -1.0;

  std::sort(sample_times.begin(), sample_times.end());
  if (dir < 0) std::reverse(sample_times.begin(), sample_times.end());
  size_t next_sample = 0;

  Trajectory out;
  out.tol = tol;
  auto push = [&](long double tt, const detail::Vec4& yy) {
    out.states.push_back(ModState{(double)tt, (double)yy[0], (double)yy[1],
                                  (double)yy[2], (double)yy[3]});
  };
  push(t, y);

  long double h = dir * std::max(1e-6L * fabsl((long double)t_end - t),
                                 1e-9L * (fabsl(t) + 1.0L));
  while (dir * (t_end - (double)t) > 0) {
    if (fabsl(h) < 1e-13L * (fabsl(t) + 1.0L)) throw StiffFailure();
    bool clipped = false;
    long double h_try = h;
    if (dir * ((double)(t + h_try) - t_end) > 0) {
      h_try = (long double)t_end - t;
      clipped = true;
    }
    // land exactly on the next requested sample time
    while (next_sample < sample_times.size() &&
           dir * (sample_times[next_sample] - (double)t) <= 0)
      ++next_sample;
    if (next_sample < sample_times.size() &&
        dir * ((double)(t + h_try) - sample_times[next_sample]) > 0) {
      h_try = (long double)sample_times[next_sample] - t;
      clipped = true;
    }
    long double h_next = h_try;
    if (stepper.step(t, y, h_next, (long double)tol)) {
      if (y[1] <= 0.0L) {
        out.lambda_hit_zero = true;
        push(t, y);
        break;
      }
      bool is_sample = next_sample < sample_times.size() &&
                       fabsl(t - (long double)sample_times[next_sample]) <=
                           1e-10L * (fabsl(t) + 1.0L);
      if (is_sample || sample_times.empty()) push(t, y);
      if (is_sample) ++next_sample;
      h = clipped ? dir * std::max(fabsl(h), fabsl(h_next)) : h_next;
    } else {
      h = h_next;
    }
  }
  if (out.states.back().t != (double)t) push(t, y);
  out.accepted = stepper.accepted;
  out.rejected = stepper.rejected;
  return out;
}

// The corrected parameter branch: seed the approximant at a large anchor time
// and integrate backward; the seeding error decays faster than the returned
// correction. Samples are returned at the requested times.
inline std::vector<ModState> anchored_branch(const Constants& c,
                                             std::vector<double> times,
                                             double t_anchor = 1e8,
                                             double tol = 1e-14) {
  std::sort(times.begin(), times.end());
  double t_lo = times.front();
  Trajectory tr = integrate(c, analytic_approx(t_anchor, c), t_lo, tol, times);
  std::vector<ModState> out;
  for (double t : times) {
    const ModState* best = nullptr;
    for (const auto& s : tr.states)
      if (!best || std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
    out.push_back(*best);
  }
  return out;
}

}  // namespace bubblelab

#endif  // BUBBLELAB_MODULATION_HPP
