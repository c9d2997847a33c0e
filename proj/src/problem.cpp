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

#include "hocp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hocp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<int> normalized_mask(std::vector<int> times, int lo, int hi,
                                 const std::string& who) {
  require(!times.empty(), who + ": empty time mask");
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  require(times.front() >= lo && times.back() <= hi,
          who + ": time mask outside [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]");
  return times;
}

}  // namespace

StackedControl::StackedControl(Vector stacked, int control_dim)
    : vec_(std::move(stacked)), m_(control_dim) {
  require(m_ >= 1, "StackedControl: control_dim must be >= 1");
  require(vec_.size() % m_ == 0,
          "StackedControl: stacked length " + std::to_string(vec_.size()) +
              " is not a multiple of control_dim " + std::to_string(m_));
}

StackedControl StackedControl::stack(const std::vector<Vector>& controls) {
  require(!controls.empty(), "StackedControl::stack: no controls");
  const int m = static_cast<int>(controls.front().size());
  Vector out(static_cast<Eigen::Index>(controls.size()) * m);
  for (size_t k = 0; k < controls.size(); ++k) {
    require(controls[k].size() == m,
            "StackedControl::stack: control " + std::to_string(k) +
                " has inconsistent dimension");
    out.segment(static_cast<Eigen::Index>(k) * m, m) = controls[k];
  }
  return StackedControl(std::move(out), m);
}

std::vector<Vector> StackedControl::unstack() const {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(horizon()));
  for (int k = 0; k < horizon(); ++k) out.push_back(control(k));
  return out;
}

Eigen::Ref<const Vector> StackedControl::control(int k) const {
  if (k < 0 || k >= horizon())
    throw std::invalid_argument("StackedControl::control: index " +
                                std::to_string(k) + " outside [0, " +
                                std::to_string(horizon()) + ")");
  return vec_.segment(static_cast<Eigen::Index>(k) * m_, m_);
}

OcpProblem::OcpProblem(int state_dim, int control_dim, int horizon, Vector x0,
                       DynamicsModel dynamics, RunningCost running_cost,
                       TerminalCost terminal_cost,
                       std::vector<StateConstraintFamily> state_families,
                       std::vector<InputConstraintFamily> input_families)
    : n_(state_dim),
      m_(control_dim),
      N_(horizon),
      x0_(std::move(x0)),
      dynamics_(std::move(dynamics)),
      running_cost_(std::move(running_cost)),
      terminal_cost_(std::move(terminal_cost)),
      state_families_(std::move(state_families)),
      input_families_(std::move(input_families)) {
  require(n_ >= 1 && m_ >= 1 && N_ >= 1, "OcpProblem: n, m, N must be >= 1");
  require(x0_.size() == n_, "OcpProblem: x0 has length " +
                                std::to_string(x0_.size()) + ", expected n = " +
                                std::to_string(n_));
  require(dynamics_.f && dynamics_.dfdx && dynamics_.dfdu,
          "OcpProblem: dynamics evaluators must all be set");
  require(running_cost_.value && running_cost_.grad_x && running_cost_.grad_u,
          "OcpProblem: running cost evaluators must all be set");
  require(terminal_cost_.value && terminal_cost_.grad_x,
          "OcpProblem: terminal cost evaluators must all be set");
  for (auto& fam : state_families_) {
    require(fam.value && fam.grad_x && fam.dvalue_dlambda,
            "OcpProblem: state family '" + fam.name +
                "' must provide value, grad_x and dvalue_dlambda");
    fam.times = normalized_mask(fam.times, 1, N_, "state family '" + fam.name + "'");
  }
  for (auto& fam : input_families_) {
    require(fam.value && fam.grad_u && fam.dvalue_dlambda,
            "OcpProblem: input family '" + fam.name +
                "' must provide value, grad_u and dvalue_dlambda");
    fam.times = normalized_mask(fam.times, 0, N_ - 1, "input family '" + fam.name + "'");
  }
}

namespace {

void check_control_shape(const OcpProblem& p, const StackedControl& u,
                         const char* who) {
  if (u.control_dim() != p.m() || u.size() != p.r()) {
    std::ostringstream os;
    os << who << ": stacked control has length " << u.size()
       << " with control_dim " << u.control_dim() << ", expected length "
       << p.r() << " with control_dim " << p.m();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

StateTrajectory rollout(const OcpProblem& problem, const StackedControl& u) {
  check_control_shape(problem, u, "rollout");
  StateTrajectory traj;
  traj.states.reserve(static_cast<size_t>(problem.horizon()) + 1);
  traj.states.push_back(problem.x0());
  for (int k = 0; k < problem.horizon(); ++k) {
    Vector next = problem.dynamics().f(traj.states.back(), u.control(k));
    if (next.size() != problem.n())
      throw std::runtime_error("rollout: dynamics returned a state of length " +
                               std::to_string(next.size()) + " at step " +
                               std::to_string(k));
    if (!next.allFinite())
      throw std::runtime_error("rollout: non-finite state at step " +
                               std::to_string(k + 1));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

std::pair<StateTrajectory, SensitivityTensor> rollout_with_sensitivities(
    const OcpProblem& problem, const StackedControl& u) {
  check_control_shape(problem, u, "rollout_with_sensitivities");
  const int n = problem.n();
  const int m = problem.m();
  const int r = problem.r();

  StateTrajectory traj;
  SensitivityTensor sens;
  traj.states.reserve(static_cast<size_t>(problem.horizon()) + 1);
  sens.dx_du.reserve(static_cast<size_t>(problem.horizon()) + 1);
  traj.states.push_back(problem.x0());
  sens.dx_du.push_back(Matrix::Zero(n, r));

  for (int k = 0; k < problem.horizon(); ++k) {
    const Vector& x = traj.states.back();
    const auto uk = u.control(k);
    Vector next = problem.dynamics().f(x, uk);
    if (!next.allFinite())
      throw std::runtime_error(
          "rollout_with_sensitivities: non-finite state at step " +
          std::to_string(k + 1));
    const Matrix A = problem.dynamics().dfdx(x, uk);
    const Matrix B = problem.dynamics().dfdu(x, uk);
    if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != m)
      throw std::runtime_error(
          "rollout_with_sensitivities: Jacobian shape mismatch at step " +
          std::to_string(k));
    Matrix next_sens = A * sens.dx_du.back();
    next_sens.middleCols(static_cast<Eigen::Index>(k) * m, m) += B;
    traj.states.push_back(std::move(next));
    sens.dx_du.push_back(std::move(next_sens));
  }
  return {std::move(traj), std::move(sens)};
}

double total_cost(const OcpProblem& problem, const StackedControl& u) {
  StateTrajectory traj = rollout(problem, u);
  double J = 0.0;
  for (int k = 0; k < problem.horizon(); ++k)
    J += problem.running_cost().value(traj.at(k), u.control(k));
  J += problem.terminal_cost().value(traj.at(problem.horizon()));
  if (!std::isfinite(J))
    throw std::runtime_error("total_cost: cost is not finite");
  return J;
}

Vector cost_gradient(const OcpProblem& problem, const StackedControl& u) {
  auto [traj, sens] = rollout_with_sensitivities(problem, u);
  const int m = problem.m();
  Vector grad = Vector::Zero(problem.r());
  for (int k = 0; k < problem.horizon(); ++k) {
    const Vector& x = traj.at(k);
    const auto uk = u.control(k);
    grad.noalias() += sens.at(k).transpose() * problem.running_cost().grad_x(x, uk);
    grad.segment(static_cast<Eigen::Index>(k) * m, m) +=
        problem.running_cost().grad_u(x, uk);
  }
  grad.noalias() += sens.at(problem.horizon()).transpose() *
                    problem.terminal_cost().grad_x(traj.at(problem.horizon()));
  if (!grad.allFinite())
    throw std::runtime_error("cost_gradient: non-finite gradient");
  return grad;
}

namespace {

double mixed_rel_error(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

DerivativeCheck check_problem_derivatives(const OcpProblem& problem,
                                          int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  const int n = problem.n();
  const int m = problem.m();

  DerivativeCheck out;
  auto note = [&out](double err, const std::string& where) {
    if (err > out.max_error) {
      out.max_error = err;
      out.worst_location = where;
    }
  };
  auto fd_step = [](double coord) { return 1e-5 * (1.0 + std::abs(coord)); };

  for (int s = 0; s < samples; ++s) {
    Vector x(n), u(m);
    for (int i = 0; i < n; ++i) x(i) = 3.0 * unit(rng);
    for (int i = 0; i < m; ++i) u(i) = 2.0 * unit(rng);
    const double lambda = unit01(rng);

    // Dynamics Jacobians.
    const Matrix A = problem.dynamics().dfdx(x, u);
    const Matrix B = problem.dynamics().dfdu(x, u);
    for (int j = 0; j < n; ++j) {
      const double h = fd_step(x(j));
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Vector col = (problem.dynamics().f(xp, u) - problem.dynamics().f(xm, u)) / (2 * h);
      for (int i = 0; i < n; ++i) note(mixed_rel_error(A(i, j), col(i)), "dynamics dfdx");
    }
    for (int j = 0; j < m; ++j) {
      const double h = fd_step(u(j));
      Vector up = u, um = u;
      up(j) += h;
      um(j) -= h;
      const Vector col = (problem.dynamics().f(x, up) - problem.dynamics().f(x, um)) / (2 * h);
      for (int i = 0; i < n; ++i) note(mixed_rel_error(B(i, j), col(i)), "dynamics dfdu");
    }

    // Cost gradients.
    const Vector lx = problem.running_cost().grad_x(x, u);
    const Vector lu = problem.running_cost().grad_u(x, u);
    for (int j = 0; j < n; ++j) {
      const double h = fd_step(x(j));
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      note(mixed_rel_error(lx(j), (problem.running_cost().value(xp, u) -
                                   problem.running_cost().value(xm, u)) / (2 * h)),
           "running cost grad_x");
    }
    for (int j = 0; j < m; ++j) {
      const double h = fd_step(u(j));
      Vector up = u, um = u;
      up(j) += h;
      um(j) -= h;
      note(mixed_rel_error(lu(j), (problem.running_cost().value(x, up) -
                                   problem.running_cost().value(x, um)) / (2 * h)),
           "running cost grad_u");
    }
    const Vector tx = problem.terminal_cost().grad_x(x);
    for (int j = 0; j < n; ++j) {
      const double h = fd_step(x(j));
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      note(mixed_rel_error(tx(j), (problem.terminal_cost().value(xp) -
                                   problem.terminal_cost().value(xm)) / (2 * h)),
           "terminal cost grad_x");
    }

    // Constraint families: spatial gradients and lambda derivatives.
    const double hl = 1e-6;
    for (const auto& fam : problem.state_families()) {
      const Vector g = fam.grad_x(lambda, x);
      for (int j = 0; j < n; ++j) {
        const double h = fd_step(x(j));
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        note(mixed_rel_error(g(j), (fam.value(lambda, xp) - fam.value(lambda, xm)) / (2 * h)),
             "state family '" + fam.name + "' grad_x");
      }
      note(mixed_rel_error(fam.dvalue_dlambda(lambda, x),
                           (fam.value(lambda + hl, x) - fam.value(lambda - hl, x)) / (2 * hl)),
           "state family '" + fam.name + "' dvalue_dlambda");
    }
    for (const auto& fam : problem.input_families()) {
      const Vector g = fam.grad_u(lambda, u);
      for (int j = 0; j < m; ++j) {
        const double h = fd_step(u(j));
        Vector up = u, um = u;
        up(j) += h;
        um(j) -= h;
        note(mixed_rel_error(g(j), (fam.value(lambda, up) - fam.value(lambda, um)) / (2 * h)),
             "input family '" + fam.name + "' grad_u");
      }
      note(mixed_rel_error(fam.dvalue_dlambda(lambda, u),
                           (fam.value(lambda + hl, u) - fam.value(lambda - hl, u)) / (2 * hl)),
           "input family '" + fam.name + "' dvalue_dlambda");
    }
  }
  return out;
}

}  // namespace hocp
