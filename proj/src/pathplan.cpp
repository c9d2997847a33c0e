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

#include "hocp/pathplan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hocp {

namespace {

constexpr double kBoxMargin = 0.05;

Eigen::Vector2d vec2_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("config field '" + field +
                                "' must be an array of two numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

double number_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number())
    throw std::invalid_argument("config field '" + field + "' must be a number");
  return j.get<double>();
}

}  // namespace

PathPlanConfig PathPlanConfig::defaults() {
  PathPlanConfig config;
  config.obstacles = {{{3.5, 2.5}, 1.4}, {{2.5, 3.5}, 1.4}};
  return config;
}

PathPlanConfig PathPlanConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  PathPlanConfig config;
  config.obstacles.clear();

  if (!j.contains("x0")) throw std::invalid_argument("config field 'x0' is missing");
  config.x0 = vec2_from_json(j.at("x0"), "x0");
  if (!j.contains("xN")) throw std::invalid_argument("config field 'xN' is missing");
  config.target = vec2_from_json(j.at("xN"), "xN");

  if (j.contains("obstacles")) {
    if (!j.at("obstacles").is_array())
      throw std::invalid_argument("config field 'obstacles' must be an array");
    for (const auto& entry : j.at("obstacles")) {
      Obstacle obs;
      if (!entry.contains("m"))
        throw std::invalid_argument("config field 'obstacles[].m' is missing");
      obs.center = vec2_from_json(entry.at("m"), "obstacles[].m");
      if (!entry.contains("r"))
        throw std::invalid_argument("config field 'obstacles[].r' is missing");
      obs.radius = number_from_json(entry.at("r"), "obstacles[].r");
      config.obstacles.push_back(obs);
    }
  }
  if (j.contains("epsilon"))
    config.epsilon = number_from_json(j.at("epsilon"), "epsilon");
  if (j.contains("N")) {
    if (!j.at("N").is_number_integer())
      throw std::invalid_argument("config field 'N' must be an integer");
    config.horizon = j.at("N").get<int>();
  }
  if (j.contains("u_max"))
    config.u_max = number_from_json(j.at("u_max"), "u_max");
  if (j.contains("gain"))
    config.gain = number_from_json(j.at("gain"), "gain");

  config.validate();
  return config;
}

nlohmann::json PathPlanConfig::to_json() const {
  nlohmann::json obstacle_array = nlohmann::json::array();
  for (const auto& obs : obstacles)
    obstacle_array.push_back(
        {{"m", {obs.center(0), obs.center(1)}}, {"r", obs.radius}});
  return {{"x0", {x0(0), x0(1)}},
          {"xN", {target(0), target(1)}},
          {"obstacles", obstacle_array},
          {"epsilon", epsilon},
          {"N", horizon},
          {"u_max", u_max},
          {"gain", gain}};
}

void PathPlanConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(epsilon > 0.0)) fail("config field 'epsilon' must be > 0");
  if (horizon < 1) fail("config field 'N' must be >= 1");
  if (!obstacles.empty() && horizon < 2)
    fail("config field 'N' must be >= 2 when obstacles are present");
  if (!(u_max > 0.0)) fail("config field 'u_max' must be > 0");
  if (gain == 0.0 || !std::isfinite(gain))
    fail("config field 'gain' must be a nonzero number");
  for (size_t i = 0; i < obstacles.size(); ++i) {
    const auto& obs = obstacles[i];
    if (!(obs.radius > 0.0))
      fail("config field 'obstacles[" + std::to_string(i) + "].r' must be > 0");
    const double target_dist = (target - obs.center).norm();
    if (!(target_dist > obs.radius + epsilon))
      fail("target ball overlaps obstacle " + std::to_string(i) +
           " (distance " + std::to_string(target_dist) + ", needs > " +
           std::to_string(obs.radius + epsilon) + ")");
    if ((x0 - obs.center).norm() == 0.0)
      fail("start coincides with the center of obstacle " + std::to_string(i));
  }
}

OcpProblem build_problem(const PathPlanConfig& config) {
  config.validate();
  const int N = config.horizon;
  const double gain = config.gain;
  const double u_max = config.u_max;

  DynamicsModel dynamics;
  dynamics.f = [gain](const Vector& x, const Vector& u) -> Vector {
    return x + gain * u;
  };
  dynamics.dfdx = [](const Vector&, const Vector&) -> Matrix {
    return Matrix::Identity(2, 2);
  };
  dynamics.dfdu = [gain](const Vector&, const Vector&) -> Matrix {
    return gain * Matrix::Identity(2, 2);
  };
  dynamics.linear = true;

  RunningCost running;
  running.value = [](const Vector&, const Vector& u) { return 0.5 * u.squaredNorm(); };
  running.grad_x = [](const Vector&, const Vector&) -> Vector {
    return Vector::Zero(2);
  };
  running.grad_u = [](const Vector&, const Vector& u) -> Vector { return u; };

  TerminalCost terminal;
  terminal.value = [](const Vector&) { return 0.0; };
  terminal.grad_x = [](const Vector&) -> Vector { return Vector::Zero(2); };

  std::vector<StateConstraintFamily> state_families;

  // Obstacles inflate with lambda: -||x - m||^2 + lambda r^2 <= 0. At
  // lambda = 0 only the center itself is excluded.
  std::vector<int> interior_times;
  for (int k = 1; k < N; ++k) interior_times.push_back(k);
  for (size_t i = 0; i < config.obstacles.size(); ++i) {
    const Eigen::Vector2d m = config.obstacles[i].center;
    const double r2 = config.obstacles[i].radius * config.obstacles[i].radius;
    StateConstraintFamily fam;
    fam.name = "obstacle_" + std::to_string(i + 1);
    fam.value = [m, r2](double lambda, const Vector& x) {
      return -(x - m).squaredNorm() + lambda * r2;
    };
    fam.grad_x = [m](double, const Vector& x) -> Vector { return -2.0 * (x - m); };
    fam.dvalue_dlambda = [r2](double, const Vector&) { return r2; };
    fam.dgrad_x_dlambda = [](double, const Vector&) -> Vector {
      return Vector::Zero(2);
    };
    fam.hess_x = [](double, const Vector&) -> Matrix {
      return -2.0 * Matrix::Identity(2, 2);
    };
    fam.times = interior_times;
    fam.convex_in_u = false;
    state_families.push_back(std::move(fam));
  }

  {
    const Eigen::Vector2d target = config.target;
    const double eps2 = config.epsilon * config.epsilon;
    StateConstraintFamily fam;
    fam.name = "terminal_ball";
    fam.value = [target, eps2](double, const Vector& x) {
      return (x - target).squaredNorm() - eps2;
    };
    fam.grad_x = [target](double, const Vector& x) -> Vector {
      return 2.0 * (x - target);
    };
    fam.dvalue_dlambda = [](double, const Vector&) { return 0.0; };
    fam.dgrad_x_dlambda = [](double, const Vector&) -> Vector {
      return Vector::Zero(2);
    };
    fam.hess_x = [](double, const Vector&) -> Matrix {
      return 2.0 * Matrix::Identity(2, 2);
    };
    fam.times = {N};
    fam.convex_in_u = true;
    state_families.push_back(std::move(fam));
  }

  // ||u||_inf <= u_max as four affine rows: +/- each coordinate.
  std::vector<InputConstraintFamily> input_families;
  std::vector<int> all_controls;
  for (int k = 0; k < N; ++k) all_controls.push_back(k);
  for (int coord = 0; coord < 2; ++coord) {
    for (double sign : {1.0, -1.0}) {
      InputConstraintFamily fam;
      fam.name = "box_u" + std::to_string(coord + 1) +
                 (sign > 0 ? "_plus" : "_minus");
      fam.value = [coord, sign, u_max](double, const Vector& u) {
        return sign * u(coord) - u_max;
      };
      fam.grad_u = [coord, sign](double, const Vector&) -> Vector {
        Vector g = Vector::Zero(2);
        g(coord) = sign;
        return g;
      };
      fam.dvalue_dlambda = [](double, const Vector&) { return 0.0; };
      fam.dgrad_u_dlambda = [](double, const Vector&) -> Vector {
        return Vector::Zero(2);
      };
      fam.hess_u = [](double, const Vector&) -> Matrix {
        return Matrix::Zero(2, 2);
      };
      fam.times = all_controls;
      fam.convex_in_u = true;
      input_families.push_back(std::move(fam));
    }
  }

  Vector x0(2);
  x0 << config.x0(0), config.x0(1);
  return OcpProblem(2, 2, N, std::move(x0), std::move(dynamics),
                    std::move(running), std::move(terminal),
                    std::move(state_families), std::move(input_families));
}

GuessStrategy guess_strategy_from_string(const std::string& name) {
  if (name == "straight") return GuessStrategy::Straight;
  if (name == "two-leg") return GuessStrategy::TwoLeg;
  if (name == "three-leg") return GuessStrategy::ThreeLeg;
  throw std::invalid_argument("unknown guess strategy '" + name +
                              "' (expected straight, two-leg or three-leg)");
}

const char* to_string(GuessStrategy strategy) {
  switch (strategy) {
    case GuessStrategy::Straight: return "straight";
    case GuessStrategy::TwoLeg: return "two-leg";
    case GuessStrategy::ThreeLeg: return "three-leg";
  }
  return "unknown";
}

StackedControl straight_guess(const PathPlanConfig& config) {
  const int N = config.horizon;
  const Eigen::Vector2d step =
      (config.target - config.x0) / (static_cast<double>(N) * config.gain);
  Vector stacked(2 * N);
  for (int k = 0; k < N; ++k) stacked.segment(2 * k, 2) = step;
  return StackedControl(std::move(stacked), 2);
}

namespace {

// Controls following the piecewise-linear path through `points`
// (points.front() = x0, points.back() = target), constant within each leg.
// Steps are allocated to legs proportionally to leg length and then adjusted
// so that the largest per-step control stays minimal.
StackedControl route_controls(const PathPlanConfig& config,
                              const std::vector<Eigen::Vector2d>& points) {
  const int N = config.horizon;
  const int legs = static_cast<int>(points.size()) - 1;
  if (N < legs)
    throw std::runtime_error("horizon too short for a " + std::to_string(legs) +
                             "-leg route");

  std::vector<Eigen::Vector2d> deltas(static_cast<size_t>(legs));
  std::vector<double> weights(static_cast<size_t>(legs));
  double total_weight = 0.0;
  for (int l = 0; l < legs; ++l) {
    deltas[static_cast<size_t>(l)] = points[static_cast<size_t>(l) + 1] -
                                     points[static_cast<size_t>(l)];
    weights[static_cast<size_t>(l)] =
        std::max(deltas[static_cast<size_t>(l)].norm(), 1e-12);
    total_weight += weights[static_cast<size_t>(l)];
  }

  // Energy-balanced allocation: one step per leg, then fill by deficit
  // against the proportional quota.
  std::vector<int> steps(static_cast<size_t>(legs), 1);
  for (int assigned = legs; assigned < N; ++assigned) {
    int best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < legs; ++l) {
      const double quota = N * weights[static_cast<size_t>(l)] / total_weight;
      const double deficit = quota - steps[static_cast<size_t>(l)];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = l;
      }
    }
    ++steps[static_cast<size_t>(best)];
  }

  const auto leg_norm = [&](int l, int count) {
    return deltas[static_cast<size_t>(l)].lpNorm<Eigen::Infinity>() /
           (std::abs(config.gain) * count);
  };

  // Reduce the worst per-step control by moving steps between legs while it
  // helps.
  for (int round = 0; round < 2 * legs + 4; ++round) {
    int worst = 0;
    double worst_norm = -1.0;
    for (int l = 0; l < legs; ++l) {
      const double norm = leg_norm(l, steps[static_cast<size_t>(l)]);
      if (norm > worst_norm) {
        worst_norm = norm;
        worst = l;
      }
    }
    int donor = -1;
    double best_new_max = worst_norm;
    for (int l = 0; l < legs; ++l) {
      if (l == worst || steps[static_cast<size_t>(l)] <= 1) continue;
      double new_max = 0.0;
      for (int k = 0; k < legs; ++k) {
        int count = steps[static_cast<size_t>(k)];
        if (k == l) --count;
        if (k == worst) ++count;
        new_max = std::max(new_max, leg_norm(k, count));
      }
      if (new_max < best_new_max) {
        best_new_max = new_max;
        donor = l;
      }
    }
    if (donor < 0) break;
    --steps[static_cast<size_t>(donor)];
    ++steps[static_cast<size_t>(worst)];
  }

  Vector stacked(2 * N);
  int k = 0;
  for (int l = 0; l < legs; ++l) {
    const Eigen::Vector2d u = deltas[static_cast<size_t>(l)] /
                              (config.gain * steps[static_cast<size_t>(l)]);
    for (int i = 0; i < steps[static_cast<size_t>(l)]; ++i, ++k)
      stacked.segment(2 * k, 2) = u;
  }
  return StackedControl(std::move(stacked), 2);
}

std::vector<Eigen::Vector2d> route_waypoints(const PathPlanConfig& config,
                                             GuessStrategy strategy,
                                             unsigned seed) {
  const Eigen::Vector2d span = config.target - config.x0;
  const double length = span.norm();
  const Eigen::Vector2d dir =
      length > 0.0 ? Eigen::Vector2d(span / length) : Eigen::Vector2d(1.0, 0.0);
  const Eigen::Vector2d perp(dir(1), -dir(0));

  // Waypoints as (fraction along the route, perpendicular offset fraction).
  std::vector<std::pair<double, double>> fractions;
  if (strategy == GuessStrategy::TwoLeg)
    fractions = {{0.5, 0.4}};
  else
    fractions = {{0.54, 0.38}, {0.745, 0.245}};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);

  std::vector<Eigen::Vector2d> points{config.x0};
  for (const auto& [along, offset] : fractions) {
    Eigen::Vector2d w = config.x0 + along * span + offset * length * perp;
    if (seed != 0)
      w += Eigen::Vector2d(jitter(rng) * length, jitter(rng) * length);
    points.push_back(w);
  }
  points.push_back(config.target);
  return points;
}

// Straight route with a gentle one-sided bow (hat profile peaking at the
// route midpoint). The side and a small amplitude jitter come from the seed.
StackedControl bowed_straight_controls(const PathPlanConfig& config,
                                       unsigned seed) {
  const int N = config.horizon;
  const Eigen::Vector2d span = config.target - config.x0;
  const double length = span.norm();
  const Eigen::Vector2d dir =
      length > 0.0 ? Eigen::Vector2d(span / length) : Eigen::Vector2d(1.0, 0.0);
  const Eigen::Vector2d perp(dir(1), -dir(0));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  const double side = (rng() & 1u) ? 1.0 : -1.0;
  const double offset = (0.18 + jitter(rng)) * length * side;

  std::vector<Vector> states(static_cast<size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    const double f = static_cast<double>(k) / N;
    const double hat = 1.0 - std::abs(2.0 * f - 1.0);
    states[static_cast<size_t>(k)] =
        config.x0 + f * span + hat * offset * perp;
  }
  Vector stacked(2 * N);
  for (int k = 0; k < N; ++k)
    stacked.segment(2 * k, 2) =
        (states[static_cast<size_t>(k) + 1] - states[static_cast<size_t>(k)]) /
        config.gain;
  return StackedControl(std::move(stacked), 2);
}

}  // namespace

StackedControl find_initial_guess(const PathPlanConfig& config,
                                  GuessStrategy strategy, unsigned seed) {
  config.validate();
  StackedControl guess =
      strategy == GuessStrategy::Straight
          ? (seed == 0 ? straight_guess(config)
                       : bowed_straight_controls(config, seed))
          : route_controls(config, route_waypoints(config, strategy, seed));

  const double box_limit = config.u_max - kBoxMargin;
  if (guess.vec().lpNorm<Eigen::Infinity>() > box_limit)
    throw std::runtime_error(
        "initial guess violates the control box with margin " +
        std::to_string(kBoxMargin) + " (max |u| = " +
        std::to_string(guess.vec().lpNorm<Eigen::Infinity>()) +
        "); try another seed or strategy");

  const OcpProblem problem = build_problem(config);
  const NlpView view(problem);
  const Vector G = view.constraints(0.0, guess);
  for (int i = 0; i < view.s(); ++i) {
    if (!(G(i) < 0.0)) {
      const auto& entry = view.index_map().entry(i);
      const std::string family =
          entry.kind == ConstraintKind::State
              ? problem.state_families()[static_cast<size_t>(entry.family)].name
              : problem.input_families()[static_cast<size_t>(entry.family)].name;
      throw std::runtime_error(
          "initial guess is not strictly feasible at lambda = 0: row " +
          std::to_string(i) + " (" + family + ", k = " +
          std::to_string(entry.time) + ") has G = " + std::to_string(G(i)) +
          "; try another seed or strategy");
    }
  }
  return guess;
}

nlohmann::json result_to_json(const PathPlanConfig& config, const NlpView& view,
                              const SolveResult& result) {
  nlohmann::json out;
  out["status"] = to_string(result.status);
  out["lambda_final"] = result.lambda_final;
  out["cost"] = result.cost;
  out["kkt"] = {{"stationarity", result.kkt.stationarity},
                {"primal", result.kkt.primal},
                {"complementarity", result.kkt.complementarity},
                {"dual", result.kkt.dual}};
  out["steps"] = result.steps;
  out["tangent_warnings"] = result.tangent_warnings;

  const StateTrajectory traj = rollout(view.problem(), result.u_star);
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& obs : config.obstacles) {
    const double r2 = obs.radius * obs.radius;
    for (int k = 1; k < config.horizon; ++k) {
      const Eigen::Vector2d x = traj.at(k);
      min_margin = std::min(min_margin, (x - obs.center).squaredNorm() - r2);
    }
  }
  if (config.obstacles.empty())
    out["min_obstacle_margin"] = nullptr;
  else
    out["min_obstacle_margin"] = min_margin;
  out["terminal_error"] =
      (Eigen::Vector2d(traj.at(config.horizon)) - config.target).norm();

  nlohmann::json controls = nlohmann::json::array();
  for (int k = 0; k < result.u_star.horizon(); ++k) {
    const auto u = result.u_star.control(k);
    controls.push_back({u(0), u(1)});
  }
  out["u_star"] = controls;

  nlohmann::json trajectory = nlohmann::json::array();
  for (int k = 0; k <= config.horizon; ++k) {
    const Vector& x = traj.at(k);
    trajectory.push_back({x(0), x(1)});
  }
  out["trajectory"] = trajectory;
  return out;
}

}  // namespace hocp
