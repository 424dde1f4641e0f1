#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bubblelab/fit.hpp"
#include "bubblelab/profiles.hpp"
#include "bubblelab/radial.hpp"
#include "oracle.hpp"

using namespace bubblelab;

namespace {

GridPtr grid() {
  static GridPtr g = RadialGrid::logarithmic();
  return g;
}

const ProfileSet& profiles4() {
  static ProfileSet ps = build_profiles(EquivClass(4), grid());
  return ps;
}

RadialFn lamq_fn(int k) {
  return make_fn(grid(), [k](double r) { return lambda_q(k, r); },
                 {double(k), 0}, {double(-k), 0});
}

}  // namespace

TEST_CASE("structural constants match the frozen high-precision values") {
  Constants c4 = constants(4);
  REQUIRE(c4.rho_k == Catch::Approx(2.6837530678616557).epsilon(1e-13));
  REQUIRE(c4.gamma_k == Catch::Approx(14.405061058513697).epsilon(1e-13));
  REQUIRE(c4.q_k == Catch::Approx(0.37261252235727256).epsilon(1e-13));
  Constants c5 = constants(5);
  REQUIRE(c5.rho_k == Catch::Approx(2.7356743721263889).epsilon(1e-13));
  REQUIRE(c5.q_k == Catch::Approx(0.39014815664424209).epsilon(1e-13));
  Constants c8 = constants(8);
  REQUIRE(c8.gamma_k == Catch::Approx(31.183851468941845).epsilon(1e-13));
  REQUIRE_THROWS_AS(constants(3), UnsupportedEquivariance);
}

TEST_CASE("constants tie to the measured kernel norm") {
  for (int k : {4, 5, 6, 8}) {
    Constants c = constants(k);
    auto lq = lamq_fn(k);
    double lq2 = inner(lq, lq);
    REQUIRE(c.rho_k * c.rho_k * lq2 == Catch::Approx(16.0 * k).epsilon(1e-8));
    REQUIRE(c.gamma_k == Catch::Approx(8.0 * k * k / lq2).epsilon(1e-8));
  }
}

TEST_CASE("ground state point values and monotonicity") {
  REQUIRE(ground_state(4, 1.0) == Catch::Approx(kPi / 2).epsilon(1e-14));
  REQUIRE(lambda_q(4, 1.0) == Catch::Approx(4.0).epsilon(1e-14));
  REQUIRE(ground_state(4, 1e9) == Catch::Approx(kPi).margin(1e-8));
  double prev = -1.0;
  for (double r = 1e-3; r < 1e3; r *= 1.7) {
    double q = ground_state(4, r);
    REQUIRE(q > prev);
    prev = q;
  }
}

TEST_CASE("weighted cubic integrals of the kernel") {
  for (int k : {4, 6}) {
    auto in1 = make_fn(grid(),
                       [k](double r) {
                         double lq = lambda_q(k, r);
                         return lq * lq * lq * std::pow(r, k - 2);
                       },
                       {4.0 * k - 2.0, 0}, {-2.0 * k - 2.0, 0});
    REQUIRE(quadrature(in1) == Catch::Approx(2.0 * k * k).epsilon(1e-8));
    auto in2 = make_fn(grid(),
                       [k](double r) {
                         double lq = lambda_q(k, r);
                         return lq * lq * lq * std::pow(r, -k - 2);
                       },
                       {2.0 * k - 2.0, 0}, {-4.0 * k - 2.0, 0});
    REQUIRE(quadrature(in2) == Catch::Approx(2.0 * k * k).epsilon(1e-8));
  }
}

TEST_CASE("scaling derivative closed form") {
  EquivClass k(4);
  auto lq = lamq_fn(4);
  auto l0lq_num = apply_Lambda0(lq);
  for (int i = 50; i < lq.size() - 50; i += 97) {
    double r = grid()->r(i);
    REQUIRE(l0lq_num.v[i] ==
            Catch::Approx(lambda0_lambda_q(4, r)).margin(1e-8 * (1 + std::abs(l0lq_num.v[i]))));
  }
}

TEST_CASE("solvability constants for both weighted sources") {
  const ProfileSet& ps = profiles4();
  REQUIRE(ps.gamma_num == Catch::Approx(ps.c.gamma_k).epsilon(1e-8));
  REQUIRE(ps.gamma_tilde_num == Catch::Approx(ps.c.gamma_k).epsilon(1e-8));
}

TEST_CASE("profile A solves its equation and is kernel-orthogonal") {
  EquivClass k(4);
  const ProfileSet& ps = profiles4();
  auto lq = lamq_fn(4);
  auto res = apply_L(k, ps.A.f);
  for (int i = 0; i < res.size(); ++i)
    res.v[i] += lambda0_lambda_q(4, grid()->r(i));
  REQUIRE(norm_L2(res) < 1e-5);
  REQUIRE(std::abs(inner(ps.A.f, lq)) < 1e-8 * norm_L2(ps.A.f) * norm_L2(lq));
  REQUIRE(fit_exponent_origin(ps.A.f) == Catch::Approx(4.0).margin(0.05));
  REQUIRE(fit_exponent_tail(ps.A.f) == Catch::Approx(-2.0).margin(0.05));
}

TEST_CASE("profile B solves its equation with the right asymptotics") {
  EquivClass k(4);
  const ProfileSet& ps = profiles4();
  auto lq = lamq_fn(4);
  auto res = apply_L(k, ps.B.f);
  for (int i = 0; i < res.size(); ++i) {
    double r = grid()->r(i), lqv = lq.v[i];
    res.v[i] -= ps.c.gamma_k * lqv - 4.0 * std::pow(r, 2) * lqv * lqv;
  }
  REQUIRE(norm_L2(res) < 1e-5);
  REQUIRE(std::abs(inner(ps.B.f, lq)) < 1e-8 * norm_L2(ps.B.f) * norm_L2(lq));
  REQUIRE(fit_exponent_origin(ps.B.f) == Catch::Approx(4.0).margin(0.05));
  REQUIRE(fit_exponent_tail(ps.B.f) == Catch::Approx(-2.0).margin(0.05));
}

TEST_CASE("profile Btilde carries the logarithmic origin correction") {
  EquivClass k(4);
  const ProfileSet& ps = profiles4();
  auto lq = lamq_fn(4);
  auto res = apply_L(k, ps.Bt.f);
  for (int i = 0; i < res.size(); ++i) {
    double r = grid()->r(i), lqv = lq.v[i];
    res.v[i] -= -ps.c.gamma_k * lqv + 4.0 * std::pow(r, -6) * lqv * lqv;
  }
  REQUIRE(norm_L2(res) < 1e-5);
  REQUIRE(std::abs(inner(ps.Bt.f, lq)) < 1e-8 * norm_L2(ps.Bt.f) * norm_L2(lq));
  REQUIRE(fit_exponent_origin(ps.Bt.f, 1) == Catch::Approx(4.0).margin(0.05));
  REQUIRE(fit_exponent_tail(ps.Bt.f) == Catch::Approx(-2.0).margin(0.05));
}

TEST_CASE("profiles and their scaling derivatives stay square integrable") {
  EquivClass k(4);
  const ProfileSet& ps = profiles4();
  for (const Profile* p : {&ps.A, &ps.B, &ps.Bt}) {
    REQUIRE(std::isfinite(norm_L2(p->f)));
    REQUIRE(std::isfinite(norm_L2(p->Lf)));
    RadialFn l0l(grid(), p->Lf.a0, p->Lf.ainf);
    for (int i = 0; i < l0l.size(); ++i) l0l.v[i] = p->Lf.v[i] + p->LLf.v[i];
    REQUIRE(std::isfinite(norm_L2(l0l)));
    REQUIRE(norm_L2(p->f) > 0.0);
  }
}

TEST_CASE("a non-orthogonal source is rejected") {
  EquivClass k(4);
  auto lq = lamq_fn(4);
  REQUIRE_THROWS_AS(solve_linearized(k, lq), SolvabilityViolation);
}

TEST_CASE("interpolated evaluation matches closed forms off the nodes") {
  auto lq = lamq_fn(4);
  for (double r : {1.37e-4, 0.0213, 0.77, 3.9, 212.0}) {
    REQUIRE(eval_fn(lq, r) == Catch::Approx(lambda_q(4, r)).epsilon(5e-8));
  }
  // extension below / above the grid follows the declared powers
  REQUIRE(eval_fn(lq, 2e-7) == Catch::Approx(lambda_q(4, 2e-7)).epsilon(1e-4));
  REQUIRE(eval_fn(lq, 5e3) == Catch::Approx(lambda_q(4, 5e3)).epsilon(1e-4));
}

TEST_CASE("kernel pairings at separated scales") {
  EquivClass k(4);
  auto lq = lamq_fn(4);
  double lq2 = inner(lq, lq);

  // scale invariance of the L^2-normalized pairing
  for (double lam : {0.25, 0.03}) {
    int s = snap_shift(*grid(), lam);
    auto a = shift_scale(lq, s, true);
    REQUIRE(inner(a, a) == Catch::Approx(lq2).epsilon(1e-9));
  }

  // cross pairing decays like nu^{k-1}
  std::vector<double> nus, ratios;
  for (double nu : {0.3, 0.1, 0.03, 0.01}) {
    int s = snap_shift(*grid(), nu);
    double nu_s = snap_scale(*grid(), nu);
    auto a = shift_scale(lq, s, true);
    double v = std::abs(inner(a, lq));
    nus.push_back(nu_s);
    ratios.push_back(v / std::pow(nu_s, 3));
  }
  LineFit lf = fit_loglog(nus, ratios);
  REQUIRE(std::abs(lf.slope) < 0.3);
}
