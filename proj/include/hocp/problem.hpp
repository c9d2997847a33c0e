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

#ifndef HOCP_PROBLEM_HPP_
#define HOCP_PROBLEM_HPP_

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hocp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Discrete-time dynamics x_{k+1} = f(x_k, u_k) with analytic Jacobians.
// Dynamics do not depend on the relaxation parameter by construction.
struct DynamicsModel {
  std::function<Vector(const Vector& x, const Vector& u)> f;
  std::function<Matrix(const Vector& x, const Vector& u)> dfdx;  // n x n
  std::function<Matrix(const Vector& x, const Vector& u)> dfdu;  // n x m
  // True when f is affine in (x, u). Enables exact constraint curvature
  // assembly (second derivatives of the state w.r.t. controls vanish).
  bool linear = false;
};

struct RunningCost {
  std::function<double(const Vector& x, const Vector& u)> value;
  std::function<Vector(const Vector& x, const Vector& u)> grad_x;  // n
  std::function<Vector(const Vector& x, const Vector& u)> grad_u;  // m
};

struct TerminalCost {
  std::function<double(const Vector& x)> value;
  std::function<Vector(const Vector& x)> grad_x;  // n
};

// One scalar state-constraint family g(lambda, x) <= 0, scheduled on a set
// of time indices in {1..N}. The family owns its relaxation behaviour via
// the lambda argument; dvalue_dlambda is required by the curve Jacobian.
// dgrad_x_dlambda and hess_x are optional: a null dgrad_x_dlambda makes the
// Jacobian fall back to finite differences in lambda for the cross term,
// and hess_x is only consumed by the exact curvature path.
struct StateConstraintFamily {
  std::string name;
  std::function<double(double lambda, const Vector& x)> value;
  std::function<Vector(double lambda, const Vector& x)> grad_x;           // n
  std::function<double(double lambda, const Vector& x)> dvalue_dlambda;
  std::function<Vector(double lambda, const Vector& x)> dgrad_x_dlambda;  // n, optional
  std::function<Matrix(double lambda, const Vector& x)> hess_x;           // n x n, optional
  std::vector<int> times;  // subset of {1..N}
  bool convex_in_u = false;
};

// One scalar input-constraint family h(lambda, u) <= 0 scheduled on a set of
// control indices in {0..N-1}.
struct InputConstraintFamily {
  std::string name;
  std::function<double(double lambda, const Vector& u)> value;
  std::function<Vector(double lambda, const Vector& u)> grad_u;           // m
  std::function<double(double lambda, const Vector& u)> dvalue_dlambda;
  std::function<Vector(double lambda, const Vector& u)> dgrad_u_dlambda;  // m, optional
  std::function<Matrix(double lambda, const Vector& u)> hess_u;           // m x m, optional
  std::vector<int> times;  // subset of {0..N-1}
  bool convex_in_u = false;
};

// Controls for the whole horizon stacked into a single vector
// (u_0, u_1, ..., u_{N-1}) of length r = N*m.
class StackedControl {
 public:
  StackedControl() = default;
  StackedControl(Vector stacked, int control_dim);

  static StackedControl stack(const std::vector<Vector>& controls);
  std::vector<Vector> unstack() const;

  int control_dim() const { return m_; }
  int horizon() const { return m_ == 0 ? 0 : static_cast<int>(vec_.size()) / m_; }
  int size() const { return static_cast<int>(vec_.size()); }

  // View of u_k.
  Eigen::Ref<const Vector> control(int k) const;

  const Vector& vec() const { return vec_; }
  Vector& vec() { return vec_; }

 private:
  Vector vec_;
  int m_ = 0;
};

// State sequence x_0..x_N produced by a rollout.
struct StateTrajectory {
  std::vector<Vector> states;  // N+1 entries

  int horizon() const { return static_cast<int>(states.size()) - 1; }
  const Vector& at(int k) const { return states.at(static_cast<size_t>(k)); }
};

// dx_k/du for k = 0..N, each an n x r matrix (k = 0 is all zeros).
struct SensitivityTensor {
  std::vector<Matrix> dx_du;

  const Matrix& at(int k) const { return dx_du.at(static_cast<size_t>(k)); }
};

// Immutable problem description. Validation happens once at construction;
// evaluation routines may then assume consistent dimensions and masks.
class OcpProblem {
 public:
  OcpProblem(int state_dim, int control_dim, int horizon, Vector x0,
             DynamicsModel dynamics, RunningCost running_cost,
             TerminalCost terminal_cost,
             std::vector<StateConstraintFamily> state_families,
             std::vector<InputConstraintFamily> input_families);

  int n() const { return n_; }
  int m() const { return m_; }
  int horizon() const { return N_; }
  int r() const { return N_ * m_; }  // stacked control length

  const Vector& x0() const { return x0_; }
  const DynamicsModel& dynamics() const { return dynamics_; }
  const RunningCost& running_cost() const { return running_cost_; }
  const TerminalCost& terminal_cost() const { return terminal_cost_; }
  const std::vector<StateConstraintFamily>& state_families() const { return state_families_; }
  const std::vector<InputConstraintFamily>& input_families() const { return input_families_; }

 private:
  int n_, m_, N_;
  Vector x0_;
  DynamicsModel dynamics_;
  RunningCost running_cost_;
  TerminalCost terminal_cost_;
  std::vector<StateConstraintFamily> state_families_;
  std::vector<InputConstraintFamily> input_families_;
};

// Simulates the dynamics from x0 under the stacked controls.
// Throws std::invalid_argument on dimension mismatch and std::runtime_error
// (naming the first offending step) when a state stops being finite.
StateTrajectory rollout(const OcpProblem& problem, const StackedControl& u);

// Rollout plus forward propagation of dx_k/du:
//   dx_{k+1}/du = dfdx(x_k,u_k) dx_k/du + dfdu(x_k,u_k) E_k,
// where E_k selects block k of the stacked control.
std::pair<StateTrajectory, SensitivityTensor> rollout_with_sensitivities(
    const OcpProblem& problem, const StackedControl& u);

// J(u) = sum_k running(x_k, u_k) + terminal(x_N) along the rollout of u.
double total_cost(const OcpProblem& problem, const StackedControl& u);

// Gradient of J w.r.t. the stacked control, assembled from the sensitivity
// tensor via the chain rule. Length r.
Vector cost_gradient(const OcpProblem& problem, const StackedControl& u);

// Compares every user-supplied derivative (dynamics Jacobians, cost
// gradients, constraint gradients and lambda-derivatives) against central
// finite differences at randomly sampled points. Returns the worst mixed
// relative error |analytic - fd| / (1 + max(|analytic|, |fd|)) together with
// a label describing where it occurred.
struct DerivativeCheck {
  double max_error = 0.0;
  std::string worst_location;
};
DerivativeCheck check_problem_derivatives(const OcpProblem& problem,
                                          int samples, unsigned seed);

}  // namespace hocp

#endif  // HOCP_PROBLEM_HPP_
