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

#ifndef HOCP_TRACKER_HPP_
#define HOCP_TRACKER_HPP_

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hocp/homotopy.hpp"

namespace hocp {

// A smooth map rho: R^{1+n} -> R^n whose zero set is the curve to follow.
// w = (lambda; y). The tracker only sees this interface, so synthetic maps
// can be tracked the same way as the optimal-control homotopy.
struct ZeroCurveSystem {
  int dim = 0;  // n = number of residual rows; w has 1 + n entries
  std::function<Vector(const Vector& w)> residual;
  std::function<Matrix(const Vector& w)> jacobian;  // n x (n+1)
};

ZeroCurveSystem as_system(const HomotopyMap& map);

enum class SolveStatus {
  Converged,
  MaxSteps,
  CorrectorFailed,
  StepUnderflow,
  RankDeficient,
};

const char* to_string(SolveStatus status);

struct TrackerConfig {
  double step_size = 0.1;        // base predictor arc-length step h
  double corrector_tol = 1e-10;  // max-norm of the residual at accepted points
  int corrector_max_iters = 25;
  int max_steps = 10000;         // accepted steps
  double min_step = 1e-6;        // halving below this aborts (StepUnderflow)
  double overshoot_cap = 1.1;    // accepted lambda may not exceed this
  double endpoint_tol = 1e-9;    // residual bound for the lambda = 1 endpoint
  double kkt_tol = 1e-6;         // first-order check for declaring success
  double rank_tol = 1e-10;       // sigma_min / sigma_max threshold
  double fd_scale = 1e-6;        // step scale for the FD part of the Jacobian
  double min_tangent_cos = 0.5;  // reject steps that turn the tangent by more

  void validate() const;  // throws std::invalid_argument
};

// One accepted predictor-corrector step. The non-lambda coordinates y are
// retained so the curve can be re-audited after the fact (for the homotopy
// map y = (u; mu)).
struct TraceRecord {
  int iter = 0;
  double lambda = 0.0;
  double arc_length = 0.0;
  double residual_inf = 0.0;
  double tangent_lambda = 0.0;  // lambda-component of the tangent stepped along
  double min_margin = 0.0;      // min(mu_i, (1-lambda) b0_i - G_i); NaN if unknown
  int corrector_iters = 0;
  Vector y;
};

// Writes the records as CSV. The fixed column set is
//   iter,lambda,arclen,res_inf,tangent_lambda,min_margin,corrector_iters
// and full = true appends u_0..u_{r-1},mu_0..mu_{s-1}, splitting y at
// control_len = r.
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace,
                     bool full = false, int control_len = 0);

// Unit tangent of the curve at a point with Jacobian J: the kernel direction
// of J, normalized so that det([J; t^T]) > 0 when no `previous` tangent is
// given. Throws RankDeficiencyError when sigma_min / sigma_max <= rank_tol.
// With `previous`, continuity t . previous > 0 is enforced instead: the
// determinant sign of [J; t^T] is constant along a regular curve, but whether
// that constant is +1 or -1 depends on the problem (it flips with the parity
// of the system dimension), so the determinant normalization alone cannot
// define the forward direction. `continuity_flip` reports that the returned
// tangent is the det-negative choice; a caller tracking a curve should treat
// a CHANGE in that flag between consecutive steps as the actual warning sign.
struct TangentResult {
  Vector t;
  double sigma_ratio = 0.0;
  bool continuity_flip = false;
};

class RankDeficiencyError : public std::runtime_error {
 public:
  explicit RankDeficiencyError(const std::string& what)
      : std::runtime_error(what) {}
};

TangentResult tangent(const Matrix& J, const Vector* previous = nullptr,
                      double rank_tol = 1e-10);

// Euler predictor.
Vector predict(const Vector& w, const Vector& t, double h);

// Damped Newton for the corrector system [rho(v + z); t^T z] = 0 with
// backtracking (factor 0.5, at most 20 halvings) on the squared residual
// norm. Converged means max-norm(rho) <= corrector_tol with t^T (w - v)
// within 1e-9.
struct CorrectorResult {
  bool converged = false;
  bool singular = false;  // augmented Jacobian was numerically singular
  Vector w;
  int iterations = 0;
  double residual_inf = 0.0;
};

CorrectorResult correct(const ZeroCurveSystem& system, const Vector& v,
                        const Vector& t, const TrackerConfig& config);

// Newton iteration on y -> residual((1; y)) with lambda frozen at 1, started
// from the linear interpolation of a bracket (w_lo with lambda < 1, w_hi with
// lambda >= 1). Returns the endpoint w* = (1; y*) or nullopt on failure.
std::optional<Vector> refine_endpoint(const ZeroCurveSystem& system,
                                      const Vector& w_lo, const Vector& w_hi,
                                      const TrackerConfig& config);

// Predictor-corrector tracking of the zero curve from w0 (residual(w0) must
// already be below corrector_tol) until a corrected point reaches
// lambda >= 1, which is then refined onto the lambda = 1 hyperplane. The
// first tangent is anchored to the forward direction (positive lambda
// component); afterwards tangent continuity carries the orientation. A step
// is rejected -- and the step size halved -- when the corrector fails, when
// the corrected lambda exceeds overshoot_cap, or when the tangent at the
// landed point turns by more than acos(min_tangent_cos) against the tangent
// stepped along (the signature of the corrector sliding onto a nearby sheet
// of the zero set near a fold). The step is restored to the base value after
// two consecutive accepted steps. No monotonicity in lambda is assumed
// anywhere: steps with decreasing lambda are accepted like any other.
// tangent_warnings counts accepted steps whose determinant sign differs from
// the sign established at the start (a regular curve keeps it constant).
struct CurveResult {
  SolveStatus status = SolveStatus::CorrectorFailed;
  Vector endpoint;  // on success: (1; y*) with residual below endpoint_tol
  std::vector<TraceRecord> trace;
  int tangent_warnings = 0;
  int steps = 0;
};

CurveResult track_curve(const ZeroCurveSystem& system, const Vector& w0,
                        const TrackerConfig& config,
                        const std::function<double(const Vector&)>& margin_fn = {});

struct KktResiduals {
  double stationarity = 0.0;    // max-norm of grad J + dG^T mu
  double primal = 0.0;          // max_i G_i
  double complementarity = 0.0; // |mu^T G|
  double dual = 0.0;            // min_i mu_i
};

KktResiduals kkt_residuals(const NlpView& view, const StackedControl& u,
                           const Vector& mu);

struct SolveResult {
  SolveStatus status = SolveStatus::CorrectorFailed;
  StackedControl u_star;
  Vector mu_star;
  double cost = 0.0;
  double lambda_final = 0.0;
  KktResiduals kkt;
  int steps = 0;
  int tangent_warnings = 0;
  std::vector<TraceRecord> trace;
};

// Full solve: initial multipliers, curve tracking, endpoint refinement, and
// the first-order verification that gates SolveStatus::Converged.
SolveResult track(const NlpView& view, const HomotopyParams& params,
                  const TrackerConfig& config);

}  // namespace hocp

#endif  // HOCP_TRACKER_HPP_
