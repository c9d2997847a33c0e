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
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "hocp/diagnostics.hpp"
#include "hocp/pathplan.hpp"
#include "test_helpers.hpp"

namespace hocp {
namespace {

using testing::ViewFixture;

// A solved benchmark shared across the serialization cases.
struct BenchmarkRun {
  ViewFixture fx;
  HomotopyParams params;
  SolveResult result;

  BenchmarkRun()
      : params(make_params(*fx.view,
                           find_initial_guess(testing::benchmark_config(),
                                              GuessStrategy::ThreeLeg),
                           1.0, 1.0)) {
    TrackerConfig config;
    config.step_size = 0.4;
    result = track(*fx.view, params, config);
  }
};

const BenchmarkRun& benchmark_run() {
  static const BenchmarkRun run;
  return run;
}

TEST_SUITE("pathplan") {

TEST_CASE("the default instance transcribes with the documented shape") {
  const PathPlanConfig config = PathPlanConfig::defaults();
  CHECK(config.x0 == Eigen::Vector2d(0.0, 0.0));
  CHECK(config.target == Eigen::Vector2d(5.0, 5.0));
  REQUIRE(config.obstacles.size() == 2);
  CHECK(config.obstacles[0].center == Eigen::Vector2d(3.5, 2.5));
  CHECK(config.obstacles[1].center == Eigen::Vector2d(2.5, 3.5));
  CHECK(config.obstacles[0].radius == 1.4);
  CHECK(config.obstacles[1].radius == 1.4);
  CHECK(config.epsilon == 0.1);
  CHECK(config.horizon == 20);
  CHECK(config.u_max == 1.0);
  CHECK(config.gain == 0.5);

  // The two discs overlap, so no straight route between the centers stays
  // clear of both.
  const double center_gap =
      (config.obstacles[0].center - config.obstacles[1].center).norm();
  CHECK(center_gap < config.obstacles[0].radius + config.obstacles[1].radius);

  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);
  CHECK(view.s() == 119);

  REQUIRE(problem.state_families().size() == 3);
  CHECK(problem.state_families()[0].name == "obstacle_1");
  CHECK(problem.state_families()[1].name == "obstacle_2");
  CHECK(problem.state_families()[2].name == "terminal_ball");
  CHECK(!problem.state_families()[0].convex_in_u);
  CHECK(!problem.state_families()[1].convex_in_u);
  CHECK(problem.state_families()[2].convex_in_u);
  CHECK(problem.state_families()[0].times.size() == 19);
  CHECK(problem.state_families()[2].times == std::vector<int>{20});

  REQUIRE(problem.input_families().size() == 4);
  CHECK(problem.input_families()[0].name == "box_u1_plus");
  CHECK(problem.input_families()[1].name == "box_u1_minus");
  CHECK(problem.input_families()[2].name == "box_u2_plus");
  CHECK(problem.input_families()[3].name == "box_u2_minus");
  for (const auto& fam : problem.input_families()) {
    CHECK(fam.convex_in_u);
    CHECK(fam.times.size() == 20);
  }

  // Flat ordering: obstacle rows first, terminal ball, then the box rows.
  const auto& map = view.index_map();
  CHECK(map.entry(0).kind == ConstraintKind::State);
  CHECK(map.entry(0).family == 0);
  CHECK(map.entry(0).time == 1);
  CHECK(map.entry(37).family == 1);
  CHECK(map.entry(37).time == 19);
  CHECK(map.entry(38).family == 2);
  CHECK(map.entry(38).time == 20);
  CHECK(map.entry(39).kind == ConstraintKind::Input);
  CHECK(map.entry(39).family == 0);
  CHECK(map.entry(39).time == 0);
  CHECK(map.entry(118).family == 3);
  CHECK(map.entry(118).time == 19);
}

TEST_CASE("config validation names the offending field") {
  const PathPlanConfig good = PathPlanConfig::defaults();
  CHECK_NOTHROW(good.validate());

  PathPlanConfig bad = good;
  bad.epsilon = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("epsilon"),
                       std::invalid_argument);
  bad = good;
  bad.epsilon = -0.1;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("epsilon"),
                       std::invalid_argument);
  bad = good;
  bad.u_max = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("u_max"),
                       std::invalid_argument);
  bad = good;
  bad.gain = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("gain"),
                       std::invalid_argument);
  bad = good;
  bad.horizon = 0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("'N'"),
                       std::invalid_argument);
  bad = good;
  bad.horizon = 1;  // obstacles need at least one interior point
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains(">= 2"),
                       std::invalid_argument);
  bad = good;
  bad.obstacles[0].radius = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("obstacles[0].r"),
                       std::invalid_argument);
  bad = good;
  // Both centers are within 1.5 of this point; obstacle 0 is reported first.
  bad.target = bad.obstacles[1].center;
  CHECK_THROWS_WITH_AS(bad.validate(),
                       doctest::Contains("target ball overlaps obstacle 0"),
                       std::invalid_argument);
  bad = good;
  bad.x0 = bad.obstacles[0].center;
  CHECK_THROWS_WITH_AS(bad.validate(),
                       doctest::Contains("start coincides with the center"),
                       std::invalid_argument);

  // build_problem re-validates so a bad config cannot slip through.
  bad = good;
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(build_problem(bad), std::invalid_argument);
}

TEST_CASE("the straight guess reaches the target in equal steps") {
  const PathPlanConfig config = PathPlanConfig::defaults();
  const StackedControl straight = straight_guess(config);
  REQUIRE(straight.horizon() == 20);
  for (int k = 0; k < 20; ++k) {
    CHECK(straight.control(k)(0) == 0.5);
    CHECK(straight.control(k)(1) == 0.5);
  }

  // 0.25-sized steps are exact dyadics, so the endpoint lands exactly.
  const OcpProblem problem = build_problem(config);
  const StateTrajectory traj = rollout(problem, straight);
  CHECK(traj.at(20)(0) == 5.0);
  CHECK(traj.at(20)(1) == 5.0);

  // Seed zero keeps the plain straight route.
  const StackedControl via_finder =
      find_initial_guess(config, GuessStrategy::Straight, 0);
  CHECK(via_finder.vec() == straight.vec());
}

TEST_CASE("seeded straight guesses bow off the symmetric diagonal") {
  const PathPlanConfig config = PathPlanConfig::defaults();
  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);

  const StackedControl bowed =
      find_initial_guess(config, GuessStrategy::Straight, 1);
  CHECK(bowed.vec() != straight_guess(config).vec());

  // The route peaks off the diagonal mid-way and still ends at the target.
  const StateTrajectory traj = rollout(problem, bowed);
  CHECK(std::abs(traj.at(10)(0) - traj.at(10)(1)) > 1.0);
  CHECK((Eigen::Vector2d(traj.at(20)) - config.target).norm() < 1e-9);

  // Strict feasibility of the relaxed rows and the box margin hold.
  const Vector G = view.constraints(0.0, bowed);
  CHECK(G.maxCoeff() < 0.0);
  CHECK(bowed.vec().lpNorm<Eigen::Infinity>() <= config.u_max - 0.05);

  // Deterministic per seed, different across seeds.
  const StackedControl again =
      find_initial_guess(config, GuessStrategy::Straight, 1);
  CHECK(again.vec() == bowed.vec());
  const StackedControl other =
      find_initial_guess(config, GuessStrategy::Straight, 2);
  CHECK(other.vec() != bowed.vec());
}

TEST_CASE("leg routes are strictly feasible at lambda zero") {
  const PathPlanConfig config = PathPlanConfig::defaults();
  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);

  for (GuessStrategy strategy : {GuessStrategy::TwoLeg, GuessStrategy::ThreeLeg}) {
    for (unsigned seed : {0u, 1u, 2u}) {
      CAPTURE(to_string(strategy));
      CAPTURE(seed);
      const StackedControl guess = find_initial_guess(config, strategy, seed);
      const Vector G = view.constraints(0.0, guess);
      CHECK(G.maxCoeff() < 0.0);
      CHECK(guess.vec().lpNorm<Eigen::Infinity>() <= config.u_max - 0.05);
      const StateTrajectory traj = rollout(problem, guess);
      CHECK((Eigen::Vector2d(traj.at(20)) - config.target).norm() < 1e-9);
    }
  }
}

TEST_CASE("only the widest detour clears the fully inflated obstacles") {
  const PathPlanConfig config = PathPlanConfig::defaults();
  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);

  // The three-leg canonical route is feasible even at lambda = 1, so the
  // curve it starts has a feasible anchor at both ends.
  const StackedControl three =
      find_initial_guess(config, GuessStrategy::ThreeLeg, 0);
  CHECK(check_feasible(view, 1.0, three));

  // The straight and two-leg routes are only feasible for the relaxed
  // obstacles; at lambda = 1 they cut through a disc.
  const StackedControl straight = straight_guess(config);
  CHECK(check_feasible(view, 0.0, straight));
  CHECK(!check_feasible(view, 1.0, straight));
  const StackedControl two =
      find_initial_guess(config, GuessStrategy::TwoLeg, 0);
  CHECK(check_feasible(view, 0.0, two));
  CHECK(!check_feasible(view, 1.0, two));
}

TEST_CASE("guesses that violate a row are rejected with its name") {
  // A route that passes exactly through an obstacle center is not strictly
  // feasible even for the relaxed rows. Dyadic coordinates make the hit
  // exact: steps of 0.25 reach (2.5, 2.5) at k = 10.
  PathPlanConfig through = PathPlanConfig::defaults();
  through.obstacles = {{{2.5, 2.5}, 1.0}};
  CHECK_THROWS_WITH_AS(
      find_initial_guess(through, GuessStrategy::Straight, 0),
      doctest::Contains("not strictly feasible"), std::runtime_error);
  try {
    find_initial_guess(through, GuessStrategy::Straight, 0);
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("obstacle_1") != std::string::npos);
    CHECK(msg.find("k = 10") != std::string::npos);
  }

  // A box too tight for the required per-step control is reported as such.
  PathPlanConfig tight = PathPlanConfig::defaults();
  tight.u_max = 0.5;
  CHECK_THROWS_WITH_AS(find_initial_guess(tight, GuessStrategy::Straight, 0),
                       doctest::Contains("control box"), std::runtime_error);

  // Horizons shorter than the leg count cannot host the route.
  PathPlanConfig short_horizon = PathPlanConfig::defaults();
  short_horizon.horizon = 2;
  CHECK_THROWS_WITH_AS(
      find_initial_guess(short_horizon, GuessStrategy::ThreeLeg, 0),
      doctest::Contains("horizon too short"), std::runtime_error);
}

TEST_CASE("guess strategy names round trip") {
  CHECK(guess_strategy_from_string("straight") == GuessStrategy::Straight);
  CHECK(guess_strategy_from_string("two-leg") == GuessStrategy::TwoLeg);
  CHECK(guess_strategy_from_string("three-leg") == GuessStrategy::ThreeLeg);
  for (GuessStrategy strategy :
       {GuessStrategy::Straight, GuessStrategy::TwoLeg, GuessStrategy::ThreeLeg}) {
    CHECK(guess_strategy_from_string(to_string(strategy)) == strategy);
  }
  CHECK_THROWS_WITH_AS(guess_strategy_from_string("diagonal"),
                       doctest::Contains("unknown guess strategy"),
                       std::invalid_argument);
}

TEST_CASE("config json round trips every field") {
  PathPlanConfig config;
  config.x0 = {-1.0, 0.5};
  config.target = {4.0, 3.0};
  config.obstacles = {{{2.0, 1.0}, 0.8}};
  config.epsilon = 0.2;
  config.horizon = 15;
  config.u_max = 2.0;
  config.gain = 0.7;
  config.validate();

  // Through the object and through a serialized string.
  for (const nlohmann::json& j :
       {config.to_json(), nlohmann::json::parse(config.to_json().dump())}) {
    const PathPlanConfig back = PathPlanConfig::from_json(j);
    CHECK(back.x0 == config.x0);
    CHECK(back.target == config.target);
    REQUIRE(back.obstacles.size() == 1);
    CHECK(back.obstacles[0].center == config.obstacles[0].center);
    CHECK(back.obstacles[0].radius == config.obstacles[0].radius);
    CHECK(back.epsilon == config.epsilon);
    CHECK(back.horizon == config.horizon);
    CHECK(back.u_max == config.u_max);
    CHECK(back.gain == config.gain);
  }

  const nlohmann::json j = PathPlanConfig::defaults().to_json();
  for (const char* key : {"x0", "xN", "obstacles", "epsilon", "N", "u_max", "gain"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("config json errors name the field") {
  const nlohmann::json good = PathPlanConfig::defaults().to_json();

  nlohmann::json j = good;
  j.erase("x0");
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("'x0' is missing"),
                       std::invalid_argument);
  j = good;
  j.erase("xN");
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("'xN' is missing"),
                       std::invalid_argument);
  j = good;
  j["x0"] = {1.0, 2.0, 3.0};
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("array of two numbers"),
                       std::invalid_argument);
  j = good;
  j["obstacles"] = 7;
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("'obstacles' must be an array"),
                       std::invalid_argument);
  j = good;
  j["obstacles"][0].erase("m");
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("obstacles[].m"),
                       std::invalid_argument);
  j = good;
  j["obstacles"][0].erase("r");
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("obstacles[].r"),
                       std::invalid_argument);
  j = good;
  j["N"] = 2.5;
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("'N' must be an integer"),
                       std::invalid_argument);
  j = good;
  j["u_max"] = "big";
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("'u_max' must be a number"),
                       std::invalid_argument);
  // from_json validates, so semantically bad values are caught too.
  j = good;
  j["epsilon"] = -1.0;
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(j),
                       doctest::Contains("epsilon"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(PathPlanConfig::from_json(nlohmann::json::array()),
                       doctest::Contains("must be a JSON object"),
                       std::invalid_argument);
}

TEST_CASE("the result summary serializes the solved instance") {
  const BenchmarkRun& run = benchmark_run();
  REQUIRE(run.result.status == SolveStatus::Converged);
  const PathPlanConfig config = testing::benchmark_config();
  const nlohmann::json j = result_to_json(config, *run.fx.view, run.result);

  CHECK(j["status"] == "Converged");
  CHECK(j["lambda_final"].get<double>() == 1.0);
  CHECK(j["cost"].get<double>() == doctest::Approx(6.819).epsilon(1e-2));
  for (const char* key : {"stationarity", "primal", "complementarity", "dual"}) {
    CHECK(j["kkt"][key].get<double>() <= 1e-6);
  }
  CHECK(j["steps"].get<int>() >= 1);
  CHECK(j["tangent_warnings"].get<int>() == 0);

  // The endpoint satisfies the original constraints within tolerance.
  CHECK(j["min_obstacle_margin"].get<double>() >= -1e-6);
  CHECK(j["terminal_error"].get<double>() <= config.epsilon + 1e-8);

  REQUIRE(j["u_star"].is_array());
  REQUIRE(j["u_star"].size() == 20);
  for (const auto& u : j["u_star"]) {
    REQUIRE(u.size() == 2);
    CHECK(std::abs(u[0].get<double>()) <= config.u_max + 1e-8);
    CHECK(std::abs(u[1].get<double>()) <= config.u_max + 1e-8);
  }
  REQUIRE(j["trajectory"].is_array());
  REQUIRE(j["trajectory"].size() == 21);
  CHECK(j["trajectory"][0][0].get<double>() == 0.0);
  CHECK(j["trajectory"][0][1].get<double>() == 0.0);
}

TEST_CASE("an obstacle-free instance solves and reports a null margin") {
  PathPlanConfig config;
  config.x0 = {0.0, 0.0};
  config.target = {1.0, 1.0};
  config.obstacles = {};
  config.epsilon = 0.1;
  config.horizon = 4;
  config.u_max = 1.0;
  config.gain = 0.5;
  config.validate();

  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);
  const StackedControl guess =
      find_initial_guess(config, GuessStrategy::Straight, 0);
  const HomotopyParams params = make_params(view, guess, 1.0, 1.0);
  TrackerConfig tracker;
  tracker.step_size = 0.2;
  const SolveResult result = track(view, params, tracker);
  REQUIRE(result.status == SolveStatus::Converged);

  const nlohmann::json j = result_to_json(config, view, result);
  CHECK(j["min_obstacle_margin"].is_null());
  CHECK(j["terminal_error"].get<double>() <= config.epsilon + 1e-8);
  // Pulling back to the ball boundary beats flying straight to the center.
  CHECK(j["cost"].get<double>() < 0.5 * guess.vec().squaredNorm());
}

}  // TEST_SUITE

}  // namespace
}  // namespace hocp
