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

#ifndef HOCP_PATHPLAN_HPP_
#define HOCP_PATHPLAN_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hocp/tracker.hpp"

namespace hocp {

struct Obstacle {
  Eigen::Vector2d center;
  double radius = 1.0;
};

// Planar double-integrator-free benchmark: a point moves as
// x_{k+1} = x_k + gain * u_k and must end inside a ball of radius epsilon
// around the target while avoiding circular obstacles whose radius is
// inflated with lambda (so at lambda = 0 only the centers are excluded).
// Cost is the control energy 0.5 * sum ||u_k||^2 and controls live in the
// box ||u_k||_inf <= u_max.
struct PathPlanConfig {
  Eigen::Vector2d x0{0.0, 0.0};
  Eigen::Vector2d target{5.0, 5.0};
  std::vector<Obstacle> obstacles;
  double epsilon = 0.1;
  int horizon = 20;
  double u_max = 1.0;
  double gain = 0.5;

  // The two-obstacle benchmark instance.
  static PathPlanConfig defaults();

  static PathPlanConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Throws std::invalid_argument naming the offending field: epsilon, radii,
  // u_max and gain must be positive, the horizon long enough, the target
  // ball clear of every inflated obstacle, and the start distinct from every
  // obstacle center.
  void validate() const;
};

// Transcribes the benchmark into an OcpProblem: one state family per
// obstacle (scheduled at k = 1..N-1, nonconvex), a terminal-ball family at
// k = N, and four affine box rows (+/- each control coordinate, all k).
OcpProblem build_problem(const PathPlanConfig& config);

enum class GuessStrategy { Straight, TwoLeg, ThreeLeg };

GuessStrategy guess_strategy_from_string(const std::string& name);
const char* to_string(GuessStrategy strategy);

// Strictly feasible start controls for lambda = 0. `straight` with seed 0 is
// the constant control reaching the target in N equal steps; a nonzero seed
// bows the route gently to one side (hat profile peaking mid-route). The bow
// matters on symmetric configurations: the exactly straight route between
// the two default obstacles starts the continuation in a basin whose curve
// runs to infinity instead of reaching lambda = 1, while the bowed variants
// converge. The leg variants route through one or two waypoints placed off
// the straight line (jittered by `seed`; seed 0 keeps the canonical
// waypoints) with steps allocated to legs by displacement so the per-step
// control stays inside the box with margin 0.05. Throws std::runtime_error
// naming the violated row when no strictly feasible guess results.
StackedControl find_initial_guess(const PathPlanConfig& config,
                                  GuessStrategy strategy, unsigned seed = 0);

// The unvalidated straight-line controls (used by diagnostics so infeasible
// configs produce report failures instead of exceptions).
StackedControl straight_guess(const PathPlanConfig& config);

// Result summary for the CLI: status, lambda_final, cost, the four
// first-order residuals, step count, the worst squared obstacle margin
// min(||x_k - m_i||^2 - r_i^2) over k = 1..N-1, the terminal error
// ||x_N - target||, plus the solution controls and trajectory.
nlohmann::json result_to_json(const PathPlanConfig& config, const NlpView& view,
                              const SolveResult& result);

}  // namespace hocp

#endif  // HOCP_PATHPLAN_HPP_
