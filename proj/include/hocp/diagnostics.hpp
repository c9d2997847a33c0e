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

#ifndef HOCP_DIAGNOSTICS_HPP_
#define HOCP_DIAGNOSTICS_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hocp/tracker.hpp"

namespace hocp {

// Assumption labels used throughout: A2 = the relaxed feasible set at
// lambda = 0 has nonempty interior around u0; A5 = constraint rows never
// loosen as lambda grows; A6 = nonconvex rows are inactive everywhere at
// lambda = 0; B0 = validity of the (b0, c0) offsets. The sampled checks are
// falsification tests: they can fail an assumption but only certify it on
// the drawn samples.
enum class CheckStatus { Pass, Fail, SampledPass };

const char* to_string(CheckStatus status);

struct Witness {
  nlohmann::json point;  // where the violation happened
  double value = 0.0;    // by how much
};

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::vector<Witness> witnesses;  // empty when the check passed
  nlohmann::json detail;           // check-specific summary values

  nlohmann::json to_json() const;
};

struct AssumptionReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

// max_i G_i(lambda, u) <= tol.
bool check_feasible(const NlpView& view, double lambda, const StackedControl& u,
                    double tol = 0.0);

// A2-interior (strict feasibility of u0 at lambda = 0, with the margin
// reported) and B0-valid (b0, c0 positive and G(0, u0) < b0).
AssumptionReport validate_params(const NlpView& view, const HomotopyParams& params);

// Randomized falsification of A5 (rows are monotone non-decreasing in
// lambda at fixed u) and A6 (nonconvex rows are non-positive at lambda = 0),
// sampling `samples` controls uniformly from [-radius, radius]^r with a
// seeded generator. Deterministic for a fixed seed. At most five witnesses
// are kept per check.
AssumptionReport check_sampled_assumptions(const NlpView& view, int samples,
                                           unsigned seed, double radius = 2.0);

// First-order verification at lambda = 1: stationarity, primal feasibility,
// complementarity and multiplier sign, all within tol.
CheckResult verify_kkt(const NlpView& view, const StackedControl& u,
                       const Vector& mu, double tol);

// Post-hoc audit of a tracking trace: interior margins
// min(mu_i, (1-lambda) b0_i - G_i) >= -1e-8 at every record, and numerical
// rank of the curve Jacobian (sigma ratio above rank_tol) at every 10th
// record.
AssumptionReport curve_health(const NlpView& view, const HomotopyParams& params,
                              const std::vector<TraceRecord>& trace,
                              double rank_tol = 1e-10);

}  // namespace hocp

#endif  // HOCP_DIAGNOSTICS_HPP_
