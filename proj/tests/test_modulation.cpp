#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bubblelab/fit.hpp"
#include "bubblelab/modulation.hpp"

using namespace bubblelab;

TEST_CASE("right-hand side values and the vanishing-lambda limit") {
  Constants c = constants(4);
  ModState s{0.0, 1.0, 0.01, 0.0, 0.0};
  auto d = mod_rhs(s, c);
  REQUIRE(d[0] == 0.0);
  REQUIRE(d[1] == 0.0);
  // b' = -gamma_4 * 1e-6
  REQUIRE(d[3] == Catch::Approx(-1.4405061058513697e-5).epsilon(1e-12));
  ModState z{0.0, 1.0, 0.0, 0.3, 0.2};
  auto dz = mod_rhs(z, c);
  REQUIRE(dz[2] == 0.0);
  REQUIRE(dz[3] == 0.0);
}

TEST_CASE("approximant identities as functions of t") {
  Constants c = constants(4);
  double kd = 4.0;
  for (double t : {10.0, 100.0, 1e4, 1e7}) {
    ModState s = analytic_approx(t, c);
    // b = -dlam/dt requires q^{(k-2)/2} = 2/((k-2) rho)
    double lamdot = -2.0 / (kd - 2.0) * s.lam / t;
    REQUIRE(s.b == Catch::Approx(-lamdot).epsilon(1e-12));
    // b' + gamma lam^{k-1} = 0
    double bdot = c.rho_k * (kd / 2.0) * std::pow(s.lam, kd / 2.0 - 1.0) * lamdot;
    REQUIRE(bdot == Catch::Approx(-c.gamma_k * std::pow(s.lam, kd - 1.0)).epsilon(1e-12));
    // a = mu' and a' + gamma lam^k = 0
    double mudot = -kd / (kd + 2.0) * s.lam * lamdot;
    REQUIRE(s.a == Catch::Approx(mudot).epsilon(1e-12));
    double adot = kd / (kd + 2.0) * c.rho_k * (kd / 2.0 + 1.0) *
                  std::pow(s.lam, kd / 2.0) * lamdot;
    REQUIRE(adot == Catch::Approx(-c.gamma_k * std::pow(s.lam, kd)).epsilon(1e-12));
  }
  ModState s100 = analytic_approx(100.0, c);
  REQUIRE(s100.lam == Catch::Approx(3.7261252235727256e-3).epsilon(1e-12));
}

TEST_CASE("integration is reversible") {
  Constants c = constants(4);
  ModState s0 = analytic_approx(50.0, c);
  double tol = 1e-11;
  Trajectory fwd = integrate(c, s0, 200.0, tol);
  Trajectory back = integrate(c, fwd.states.back(), 50.0, tol);
  const ModState& r = back.states.back();
  REQUIRE(r.lam == Catch::Approx(s0.lam).epsilon(10 * tol));
  REQUIRE(r.mu == Catch::Approx(s0.mu).epsilon(10 * tol));
  REQUIRE(r.b == Catch::Approx(s0.b).epsilon(10 * tol));
  REQUIRE(r.a == Catch::Approx(s0.a).margin(10 * tol * std::abs(s0.a) + 1e-14));
}

TEST_CASE("first integral is conserved and matches finite differences") {
  Constants c = constants(4);
  ModState s0 = analytic_approx(30.0, c);
  s0.b *= 1.11;  // move off the special branch
  double tol = 1e-11;
  std::vector<double> ts;
  for (double t = 30.0; t <= 120.0; t += 3.0) ts.push_back(t);
  Trajectory tr = integrate(c, s0, 120.0, tol, ts);
  double h0 = mod_invariant(tr.states.front(), c);
  double scale = 0.5 * (s0.a * s0.a + s0.b * s0.b) +
                 c.gamma_k / c.k * std::pow(s0.lam, c.k);
  for (const auto& s : tr.states)
    REQUIRE(mod_invariant(s, c) == Catch::Approx(h0).margin(100 * tol * scale));

  // d/dt of the invariant from the trajectory by centered differences
  for (size_t i = 1; i + 1 < tr.states.size(); ++i) {
    double dt = tr.states[i + 1].t - tr.states[i - 1].t;
    double fd = (mod_invariant(tr.states[i + 1], c) -
                 mod_invariant(tr.states[i - 1], c)) / dt;
    REQUIRE(std::abs(fd) < 100 * tol * scale);
  }
}

TEST_CASE("lambda collapse is reported, not fatal") {
  Constants c = constants(4);
  // strongly inward-moving state: lambda reaches zero in finite time
  ModState s0{0.0, 1.0, 0.05, 0.0, 0.08};
  Trajectory tr = integrate(c, s0, 10.0, 1e-10);
  REQUIRE(tr.lambda_hit_zero);
  REQUIRE(tr.states.back().t < 10.0);
}

TEST_CASE("backward-anchored branch deviates from the approximant at second order") {
  Constants c = constants(4);
  std::vector<double> times;
  for (double t = 1e4; t < 1.001e8; t *= 1.3) times.push_back(t);
  auto branch = anchored_branch(c, times, 1e8, 1e-14);
  std::vector<double> lams, devs;
  for (const auto& s : branch) {
    ModState app = analytic_approx(s.t, c);
    double dev = std::abs(s.lam / app.lam - 1.0);
    if (dev < 1e-11) continue;  // below the integrator noise floor (1000x tol)
    lams.push_back(app.lam);
    devs.push_back(dev);
  }
  REQUIRE(lams.size() >= 5);
  LineFit f = fit_loglog(lams, devs);
  REQUIRE(f.slope == Catch::Approx(2.0).margin(0.2));
}

TEST_CASE("sign structure along the constructed branch") {
  Constants c = constants(4);
  auto branch = anchored_branch(c, {20, 40, 80, 160, 320}, 1e8, 1e-12);
  double prev_lam = 1e9;
  for (const auto& s : branch) {
    // returned in increasing t; lambda decreasing, velocities positive
    REQUIRE(s.lam < prev_lam);
    prev_lam = s.lam;
    REQUIRE(s.b > 0.0);
    REQUIRE(s.a > 0.0);
    REQUIRE(s.mu == Catch::Approx(1.0).margin(0.01));
  }
}
