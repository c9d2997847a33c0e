/*
 Copyright 2026 The hocp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <cmath>
#include <random>

#include <doctest.h>

#include "test_helpers.hpp"

namespace hocp {
namespace {

using testing::ViewFixture;
using testing::constant_control;
using testing::random_control;

// Test-local root oracle: plain bisection on the naive cubic form of
// mu -> K(0, G, mu) = mu^3 - |d - mu|^3 + d^3 - c with d = b - G, written
// independently of the library kernel.
double bisect_initial_multiplier(double G, double b, double c) {
  const double d = b - G;
  const auto f = [&](double mu) {
    return mu * mu * mu - std::pow(std::abs(d - mu), 3) + d * d * d - c;
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Independent safeguarded Newton (bisection fallback) on the same function.
double newton_initial_multiplier(double G, double b, double c) {
  const double d = b - G;
  const auto f = [&](double mu) {
    return mu * mu * mu - std::pow(std::abs(d - mu), 3) + d * d * d - c;
  };
  const auto fp = [&](double mu) {
    const double t = d - mu;
    return 3.0 * mu * mu + 3.0 * t * std::abs(t);
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) <= 0.0) hi *= 2.0;
  double mu = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const double val = f(mu);
    if (val <= 0.0) lo = mu; else hi = mu;
    const double deriv = fp(mu);
    double next = deriv > 0.0 ? mu - val / deriv : mu;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - mu) < 1e-16) return next;
    mu = next;
  }
  return mu;
}

Vector start_point(const HomotopyMap& map) { return map.initial_point(); }

TEST_SUITE("homotopy") {

TEST_CASE("deformed complementarity row at the anchor values") {
  // lambda = 0, mu = 0, G < b: the kernel vanishes against itself and only
  // the offset survives: K = -c.
  CHECK(K_scalar(0.0, -1.0, 0.0, 1.0, 1.0) == -1.0);
  CHECK(K_scalar(0.0, -0.3, 0.0, 2.0, 0.25) == -0.25);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double b = dist(rng);
    const double c = dist(rng);
    const double G = b - dist(rng) - 0.1;  // strictly below b
    CHECK(K_scalar(0.0, G, 0.0, b, c) == doctest::Approx(-c).epsilon(1e-12));
  }
}

TEST_CASE("at lambda = 1 the K row reduces to the first-order row") {
  // The b and c offsets carry a (1 - lambda) factor, so at lambda = 1 the
  // row must coincide with the complementarity kernel at d = -G bitwise.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double G = dist(rng), mu = dist(rng);
    const double K = K_scalar(1.0, G, mu, pos(rng), pos(rng));
    CHECK(K == complementarity_kernel(mu, -G));
  }
}

TEST_CASE("initial multiplier for the unit instance matches the oracle") {
  // G = -1, b = c = 1: root of mu^3 - |2 - mu|^3 + 8 - 1 = 0.
  const double oracle = bisect_initial_multiplier(-1.0, 1.0, 1.0);
  CHECK(oracle == doctest::Approx(0.08700881654174739).epsilon(1e-12));
  CHECK(K_scalar(0.0, -1.0, oracle, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-10));
  // Sanity brackets: negative at 0, positive at 0.1.
  CHECK(K_scalar(0.0, -1.0, 0.0, 1.0, 1.0) < 0.0);
  CHECK(K_scalar(0.0, -1.0, 0.1, 1.0, 1.0) > 0.0);
  CHECK(K_scalar(0.0, -1.0, 0.1, 1.0, 1.0) == doctest::Approx(0.142).epsilon(1e-2));
}

TEST_CASE("solve_initial_multipliers meets its postconditions") {
  ViewFixture fx;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(*fx.view, u0, 1.0, 1.0);
  const Vector mu0 = solve_initial_multipliers(*fx.view, params);
  REQUIRE(mu0.size() == 119);
  CHECK(mu0.minCoeff() > 0.0);
  const Vector G = fx.view->constraints(0.0, u0);
  double worst_K = 0.0;
  double worst_dev = 0.0;
  for (int i = 0; i < 119; ++i) {
    worst_K = std::max(worst_K, std::abs(K_scalar(0.0, G(i), mu0(i), 1.0, 1.0)));
    const double bis = bisect_initial_multiplier(G(i), 1.0, 1.0);
    const double newt = newton_initial_multiplier(G(i), 1.0, 1.0);
    CHECK(std::abs(bis - newt) <= 1e-10);
    worst_dev = std::max(worst_dev, std::abs(mu0(i) - bis));
  }
  CHECK(worst_K <= 1e-12);
  CHECK(worst_dev <= 1e-10);
}

TEST_CASE("initial multipliers vanish as the c offset vanishes") {
  ViewFixture fx;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  HomotopyParams params = make_params(*fx.view, u0, 1.0, 1.0);
  double prev = solve_initial_multipliers(*fx.view, params).maxCoeff();
  for (double c : {1e-2, 1e-5, 1e-9}) {
    params.c0 = Vector::Constant(fx.view->s(), c);
    const double cur = solve_initial_multipliers(*fx.view, params).maxCoeff();
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev <= 1e-8);
}

TEST_CASE("K is strictly increasing in mu left of the barrier") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.05, 3.0);
  int tested = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double lambda = lam(rng);
    const double b = pos(rng), c = pos(rng);
    const double slack = pos(rng);
    const double G = (1.0 - lambda) * b - slack;  // G < (1 - lambda) b
    const double mu = dist(rng);
    const double dKdmu = K_scalar_dmu(lambda, G, mu, b);
    const double here = K_scalar(lambda, G, mu, b, c);
    const double ahead = K_scalar(lambda, G, mu + 1e-3, b, c);
    if (!(dKdmu > 0.0) || !(ahead > here)) {
      CAPTURE(lambda); CAPTURE(G); CAPTURE(mu); CAPTURE(b); CAPTURE(c);
      REQUIRE(false);
    }
    ++tested;
  }
  CHECK(tested == 10000);
}

TEST_CASE("K is negative outside the admissible wedge") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.05, 3.0);
  std::uniform_real_distribution<double> any(-3.0, 3.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double lambda = lam(rng);
    const double b = pos(rng), c = pos(rng);
    double G, mu;
    if (trial % 2 == 0) {
      mu = -pos(rng);                       // mu < 0
      G = any(rng);
    } else {
      G = (1.0 - lambda) * b + pos(rng);    // (1 - lambda) b - G < 0
      mu = any(rng);
    }
    const double K = K_scalar(lambda, G, mu, b, c);
    if (!(K < 0.0)) {
      CAPTURE(lambda); CAPTURE(G); CAPTURE(mu); CAPTURE(b); CAPTURE(c);
      REQUIRE(false);
    }
  }
}

TEST_CASE("partial of K in mu matches the two-sided closed forms") {
  // Branch t = (1 - lambda) b - G - mu < 0: 3 mu^2 - 3 (mu + G - (1-lambda)b)^2.
  const double lambda = 0.3, b = 1.0, G = 0.5, mu = 2.0;
  const double t = (1.0 - lambda) * b - G - mu;
  REQUIRE(t < 0.0);
  const double expected = 3.0 * mu * mu - 3.0 * (mu + G - (1.0 - lambda) * b) *
                                              (mu + G - (1.0 - lambda) * b);
  CHECK(K_scalar_dmu(lambda, G, mu, b) == doctest::Approx(expected).epsilon(1e-14));

  // Branch t >= 0: 3 mu^2 + 3 t^2.
  const double mu2 = 0.1;
  const double t2 = (1.0 - lambda) * b - G - mu2;
  REQUIRE(t2 >= 0.0);
  CHECK(K_scalar_dmu(lambda, G, mu2, b) ==
        doctest::Approx(3.0 * mu2 * mu2 + 3.0 * t2 * t2).epsilon(1e-14));

  // Finite differences across random points away from the kink.
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double l = 0.5 * (dist(rng) + 2.0) / 2.0;
    const double bb = std::abs(dist(rng)) + 0.1;
    const double GG = dist(rng), mm = dist(rng);
    if (std::abs((1.0 - l) * bb - GG - mm) < 1e-4) continue;
    const double h = 1e-6;
    const double fd = (K_scalar(l, GG, mm + h, bb, 1.0) -
                       K_scalar(l, GG, mm - h, bb, 1.0)) / (2.0 * h);
    CHECK(K_scalar_dmu(l, GG, mm, bb) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("rho blends the optimality block with the pull to the anchor") {
  ViewFixture fx;
  const NlpView& view = *fx.view;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(view, u0, 1.0, 1.0);

  std::mt19937 rng(23);
  const StackedControl u = random_control(20, 2, rng);
  Vector w(1 + 40 + 119);
  w(0) = 0.0;
  w.segment(1, 40) = u.vec();
  w.tail(119).setConstant(0.2);

  // lambda = 0: the first block is exactly u - u0.
  const Vector r0 = rho(view, params, w);
  CHECK((r0.head(40) - (u.vec() - u0.vec())).cwiseAbs().maxCoeff() == 0.0);

  // K_component agrees with the stacked rows.
  for (int i : {0, 38, 77, 118}) {
    CHECK(r0(40 + i) ==
          doctest::Approx(K_component(view, params, i, 0.0, u,
                                      w.tail(119))).epsilon(1e-15));
  }

  // The start point built from the solved multipliers is on the curve.
  const HomotopyMap map(view, params);
  const Vector w0 = start_point(map);
  CHECK(w0(0) == 0.0);
  CHECK((map.unpack_u(w0).vec() - u0.vec()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rho(view, params, w0).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(map.residual(w0).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(map.curve_margin(w0) > 0.0);
  CHECK(map.dim() == 159);
}

TEST_CASE("at the far end rho coincides with the first-order residual") {
  ViewFixture fx;
  const NlpView& view = *fx.view;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(view, u0, 1.0, 1.0);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> mdist(-1.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const StackedControl u = random_control(20, 2, rng, 1.5);
    Vector mu(119);
    for (int i = 0; i < 119; ++i) mu(i) = mdist(rng);
    Vector w(160);
    w(0) = 1.0;
    w.segment(1, 40) = u.vec();
    w.tail(119) = mu;
    const Vector lhs = rho(view, params, w);
    const Vector rhs = view.kkt_residual(1.0, u, mu);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("rho jacobian matches central finite differences") {
  ViewFixture fx;
  const NlpView& view = *fx.view;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(view, u0, 1.0, 1.0);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> lam(0.05, 0.95);
  std::uniform_real_distribution<double> mdist(0.0, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Vector w(160);
    w(0) = lam(rng);
    w.segment(1, 40) = random_control(20, 2, rng).vec();
    for (int i = 0; i < 119; ++i) w(41 + i) = mdist(rng);

    const Matrix J = rho_jacobian(view, params, w);
    REQUIRE(J.rows() == 159);
    REQUIRE(J.cols() == 160);
    const double h = 1e-6;
    for (int col = 0; col < 160; ++col) {
      Vector wp = w, wm = w;
      wp(col) += h;
      wm(col) -= h;
      const Vector fd = (rho(view, params, wp) - rho(view, params, wm)) / (2.0 * h);
      const double scale = 1.0 + std::max(fd.cwiseAbs().maxCoeff(),
                                          J.col(col).cwiseAbs().maxCoeff());
      worst = std::max(worst, (J.col(col) - fd).cwiseAbs().maxCoeff() / scale);
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("rho jacobian control block is the identity at lambda = 0") {
  ViewFixture fx;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(*fx.view, u0, 1.0, 1.0);
  std::mt19937 rng(37);
  Vector w(160);
  w(0) = 0.0;
  w.segment(1, 40) = random_control(20, 2, rng).vec();
  w.tail(119).setConstant(0.1);
  const Matrix J = rho_jacobian(*fx.view, params, w);
  CHECK((J.block(0, 1, 40, 40) - Matrix::Identity(40, 40)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rho is linear in the anchor control and the c offset") {
  // These are the two sub-blocks whose full column rank makes the start
  // point regular: d rho / d u0 = -(1 - lambda) [I; 0] and
  // d rho / d c0 = -(1 - lambda) [0; I]. Both dependences are exactly
  // linear, so one forward difference recovers them to rounding.
  ViewFixture fx;
  const NlpView& view = *fx.view;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(view, u0, 1.0, 1.0);

  std::mt19937 rng(41);
  Vector w(160);
  for (double lambda : {0.0, 0.25, 0.8, 0.99}) {
    w(0) = lambda;
    w.segment(1, 40) = random_control(20, 2, rng).vec();
    w.tail(119).setConstant(0.3);
    const Vector base = rho(view, params, w);

    const double h = 0.5;
    for (int j : {0, 17, 39}) {
      HomotopyParams bumped = params;
      bumped.u0.vec()(j) += h;
      const Vector diff = (rho(view, bumped, w) - base) / h;
      Vector expected = Vector::Zero(159);
      expected(j) = -(1.0 - lambda);
      CHECK((diff - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
    for (int i : {0, 58, 118}) {
      HomotopyParams bumped = params;
      bumped.c0(i) += h;
      const Vector diff = (rho(view, bumped, w) - base) / h;
      Vector expected = Vector::Zero(159);
      expected(40 + i) = -(1.0 - lambda);
      CHECK((diff - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("parameter validation catches every precondition breach") {
  ViewFixture fx;
  const NlpView& view = *fx.view;
  const StackedControl u0 = straight_guess(testing::benchmark_config());

  HomotopyParams good = make_params(view, u0, 1.0, 1.0);
  CHECK(params_violations(view, good).empty());
  CHECK(good.b0.size() == 119);
  CHECK((good.b0.array() == 1.0).all());
  CHECK((good.c0.array() == 1.0).all());

  HomotopyParams bad = good;
  bad.b0(5) = 0.0;
  auto v = params_violations(view, bad);
  REQUIRE(!v.empty());
  CHECK(v.front().row == 5);
  CHECK(v.front().what == "b0 must be positive");
  CHECK_THROWS_WITH_AS(check_params(view, bad), doctest::Contains("b0 must be positive"),
                       std::invalid_argument);

  bad = good;
  bad.c0(7) = -0.2;
  v = params_violations(view, bad);
  REQUIRE(!v.empty());
  CHECK(v.front().what == "c0 must be positive");

  // b0 below G(0, u0) on some row: the box rows of the straight guess sit at
  // -0.5, so b = 0.4 > 0 still satisfies G < b, but an infeasible u0 cannot.
  bad = good;
  bad.u0.vec().setConstant(3.0);  // outside the control box
  v = params_violations(view, bad);
  REQUIRE(!v.empty());
  bool saw_feasibility = false;
  for (const auto& violation : v) {
    if (violation.what.find("strictly feasible") != std::string::npos)
      saw_feasibility = true;
  }
  CHECK(saw_feasibility);

  // Negative-but-tiny b0 on a row where G is far below zero still violates
  // positivity; shape errors are reported before anything else.
  HomotopyParams short_params = good;
  short_params.b0 = Vector::Ones(3);
  v = params_violations(view, short_params);
  REQUIRE(v.size() == 1);
  CHECK(v.front().what == "b0/c0 have wrong length");
}

TEST_CASE("homotopy map wrapper round trips points") {
  ViewFixture fx;
  const StackedControl u0 = straight_guess(testing::benchmark_config());
  const HomotopyParams params = make_params(*fx.view, u0, 1.0, 1.0);
  const HomotopyMap map(*fx.view, params);

  const Vector w0 = map.initial_point();
  REQUIRE(w0.size() == 160);
  CHECK((map.initial_multipliers() - w0.tail(119)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(43);
  Vector w(160);
  w(0) = 0.4;
  w.segment(1, 40) = random_control(20, 2, rng).vec();
  w.tail(119).setConstant(0.25);
  CHECK((map.residual(w) - rho(*fx.view, params, w)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((map.jacobian(w) - rho_jacobian(*fx.view, params, w)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((map.unpack_u(w).vec() - w.segment(1, 40)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((map.unpack_mu(w) - w.tail(119)).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

}  // namespace
}  // namespace hocp
