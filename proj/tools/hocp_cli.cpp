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

// Command-line front end for the path-planning benchmark:
//   hocp solve   --config c.json [--guess straight|two-leg|three-leg|all]
//                [--h 0.1] [--b0 1] [--c0 1] [--seed 0] [--max-steps 10000]
//                [--trace out.csv] [--full-trace] [--result out.json]
//   hocp check   --config c.json [--samples 200] [--seed 0]
//   hocp rollout --config c.json --controls u.csv
// Exit codes: 0 success / all checks pass, 1 configuration or input error,
// 2 solver failure.

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hocp/diagnostics.hpp"
#include "hocp/pathplan.hpp"

namespace {

hocp::PathPlanConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path +
                                "' is not valid JSON: " + e.what());
  }
  return hocp::PathPlanConfig::from_json(j);
}

// One solve for one guess strategy; returns the process exit code.
struct GuessRun {
  std::string name;
  hocp::SolveResult result;
};

GuessRun run_one(const hocp::PathPlanConfig& config, const hocp::NlpView& view,
                 hocp::GuessStrategy strategy, unsigned seed,
                 double b0_scale, double c0_scale,
                 const hocp::TrackerConfig& tracker) {
  const hocp::StackedControl guess =
      hocp::find_initial_guess(config, strategy, seed);
  const hocp::HomotopyParams params =
      hocp::make_params(view, guess, b0_scale, c0_scale);
  GuessRun run;
  run.name = hocp::to_string(strategy);
  run.result = hocp::track(view, params, tracker);
  return run;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + "-" + suffix;
  return path.substr(0, dot) + "-" + suffix + path.substr(dot);
}

void write_outputs(const hocp::PathPlanConfig& config, const hocp::NlpView& view,
                   const GuessRun& run, const std::string& trace_path,
                   bool full_trace, const std::string& result_path) {
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::invalid_argument("cannot write trace file '" + trace_path + "'");
    hocp::write_trace_csv(out, run.result.trace, full_trace, view.r());
  }
  if (!result_path.empty()) {
    std::ofstream out(result_path);
    if (!out)
      throw std::invalid_argument("cannot write result file '" + result_path + "'");
    out << hocp::result_to_json(config, view, run.result).dump(2) << "\n";
  }
}

void print_summary(const GuessRun& run) {
  const auto& r = run.result;
  std::cout << "guess " << run.name << ": " << hocp::to_string(r.status)
            << ", lambda " << r.lambda_final << ", cost " << r.cost
            << ", steps " << r.steps << ", kkt ["
            << r.kkt.stationarity << ", " << r.kkt.primal << ", "
            << r.kkt.complementarity << ", " << r.kkt.dual << "]\n";
}

int cmd_solve(const std::string& config_path, const std::string& guess_name,
              double h, double b0_scale, double c0_scale, unsigned seed,
              int max_steps, const std::string& trace_path, bool full_trace,
              const std::string& result_path) {
  const hocp::PathPlanConfig config = load_config(config_path);
  const hocp::OcpProblem problem = hocp::build_problem(config);
  const hocp::NlpView view(problem);

  hocp::TrackerConfig tracker;
  tracker.step_size = h;
  tracker.max_steps = max_steps;

  if (guess_name == "all") {
    const std::vector<hocp::GuessStrategy> strategies = {
        hocp::GuessStrategy::Straight, hocp::GuessStrategy::TwoLeg,
        hocp::GuessStrategy::ThreeLeg};
    std::vector<std::future<GuessRun>> futures;
    futures.reserve(strategies.size());
    for (const auto strategy : strategies)
      futures.push_back(std::async(std::launch::async, run_one, std::cref(config),
                                   std::cref(view), strategy, seed, b0_scale,
                                   c0_scale, std::cref(tracker)));
    bool all_converged = true;
    for (auto& future : futures) {
      const GuessRun run = future.get();
      print_summary(run);
      write_outputs(config, view, run,
                    trace_path.empty() ? trace_path : with_suffix(trace_path, run.name),
                    full_trace,
                    result_path.empty() ? result_path : with_suffix(result_path, run.name));
      all_converged = all_converged &&
                      run.result.status == hocp::SolveStatus::Converged;
    }
    return all_converged ? 0 : 2;
  }

  const GuessRun run = run_one(config, view,
                               hocp::guess_strategy_from_string(guess_name),
                               seed, b0_scale, c0_scale, tracker);
  print_summary(run);
  write_outputs(config, view, run, trace_path, full_trace, result_path);
  return run.result.status == hocp::SolveStatus::Converged ? 0 : 2;
}

int cmd_check(const std::string& config_path, int samples, unsigned seed) {
  const hocp::PathPlanConfig config = load_config(config_path);
  const hocp::OcpProblem problem = hocp::build_problem(config);
  const hocp::NlpView view(problem);

  // Use the raw straight guess so an infeasible configuration shows up as a
  // failed check instead of an exception.
  hocp::HomotopyParams params;
  params.u0 = hocp::straight_guess(config);
  params.b0 = hocp::Vector::Ones(view.s());
  params.c0 = hocp::Vector::Ones(view.s());

  hocp::AssumptionReport report = hocp::validate_params(view, params);
  hocp::AssumptionReport sampled =
      hocp::check_sampled_assumptions(view, samples, seed);
  report.checks.insert(report.checks.end(), sampled.checks.begin(),
                       sampled.checks.end());
  report.notes.insert(report.notes.end(), sampled.notes.begin(),
                      sampled.notes.end());

  std::cout << report.to_json().dump(2) << "\n";
  return report.all_passed() ? 0 : 2;
}

int cmd_rollout(const std::string& config_path, const std::string& controls_path) {
  const hocp::PathPlanConfig config = load_config(config_path);
  const hocp::OcpProblem problem = hocp::build_problem(config);

  std::ifstream in(controls_path);
  if (!in)
    throw std::invalid_argument("cannot open controls file '" + controls_path + "'");

  // CSV rows "k,u1,u2" (header optional), one row per control step.
  std::vector<hocp::Vector> controls;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!cells.empty() && cells[0] == "k") continue;  // header
    if (cells.size() != 3)
      throw std::invalid_argument("controls file: expected rows 'k,u1,u2', got '" +
                                  line + "'");
    try {
      hocp::Vector u(2);
      u << std::stod(cells[1]), std::stod(cells[2]);
      controls.push_back(u);
    } catch (const std::exception&) {
      throw std::invalid_argument("controls file: non-numeric row '" + line + "'");
    }
  }
  if (static_cast<int>(controls.size()) != config.horizon)
    throw std::invalid_argument(
        "controls file has " + std::to_string(controls.size()) +
        " rows, expected N = " + std::to_string(config.horizon));

  const hocp::StateTrajectory traj =
      hocp::rollout(problem, hocp::StackedControl::stack(controls));
  std::cout << "k,x1,x2\n";
  std::cout.precision(17);
  for (int k = 0; k <= config.horizon; ++k)
    std::cout << k << ',' << traj.at(k)(0) << ',' << traj.at(k)(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-curve continuation solver for the planar path benchmark"};
  app.require_subcommand(1);
  // Keep the short -h free for the step-size option on `solve`.
  app.set_help_flag("--help", "print this help message and exit");

  std::string config_path, guess_name = "straight", trace_path, result_path,
              controls_path;
  double h = 0.1, b0_scale = 1.0, c0_scale = 1.0;
  unsigned seed = 0;
  int max_steps = 10000, samples = 200;
  bool full_trace = false;

  auto* solve = app.add_subcommand("solve", "track the zero curve to lambda = 1");
  solve->set_help_flag("--help", "print this help message and exit");
  solve->add_option("--config", config_path, "config JSON file")->required();
  solve->add_option("--guess", guess_name,
                    "initial guess: straight, two-leg, three-leg or all");
  solve->add_option("--h", h, "base predictor step size");
  solve->add_option("--b0", b0_scale, "offset scale for b0 (vector of ones)");
  solve->add_option("--c0", c0_scale, "offset scale for c0 (vector of ones)");
  solve->add_option("--seed", seed, "seed for waypoint jitter");
  solve->add_option("--max-steps", max_steps, "maximum accepted steps");
  solve->add_option("--trace", trace_path, "write the step trace CSV here");
  solve->add_flag("--full-trace", full_trace,
                  "append u and mu columns to the trace CSV");
  solve->add_option("--result", result_path, "write the result JSON here");

  auto* check = app.add_subcommand("check", "run the assumption diagnostics");
  check->add_option("--config", config_path, "config JSON file")->required();
  check->add_option("--samples", samples, "number of sampled controls");
  check->add_option("--seed", seed, "sampling seed");

  auto* roll = app.add_subcommand("rollout", "simulate controls from a CSV");
  roll->add_option("--config", config_path, "config JSON file")->required();
  roll->add_option("--controls", controls_path, "controls CSV (k,u1,u2)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(config_path, guess_name, h, b0_scale, c0_scale, seed,
                       max_steps, trace_path, full_trace, result_path);
    if (check->parsed()) return cmd_check(config_path, samples, seed);
    if (roll->parsed()) return cmd_rollout(config_path, controls_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
