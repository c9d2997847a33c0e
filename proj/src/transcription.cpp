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

#include "hocp/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hocp {

double complementarity_kernel(double mu, double d) {
  const double t = d - mu;
  if (t >= 0.0) {
    // mu^3 + (d^3 - t^3) with d - t = mu factored out.
    return mu * mu * mu + mu * (d * d + d * t + t * t);
  }
  // mu^3 + (d^3 + t^3), t < 0.
  return mu * mu * mu + (d + t) * (d * d - d * t + t * t);
}

double complementarity_kernel_dmu(double mu, double d) {
  const double t = d - mu;
  // 3 mu^2 + 3 t |t|, factored on the negative branch to avoid cancellation.
  if (t >= 0.0) return 3.0 * (mu * mu + t * t);
  return 3.0 * d * (2.0 * mu - d);
}

double complementarity_kernel_dd(double mu, double d) {
  const double t = d - mu;
  // 3 d^2 - 3 t |t|.
  if (t >= 0.0) return 3.0 * mu * (2.0 * d - mu);
  return 3.0 * (d * d + t * t);
}

ConstraintIndexMap ConstraintIndexMap::build(const OcpProblem& problem) {
  ConstraintIndexMap map;
  int next = 0;
  map.state_base_.reserve(problem.state_families().size());
  for (size_t j = 0; j < problem.state_families().size(); ++j) {
    map.state_base_.push_back(next);
    map.state_offsets_.push_back(problem.state_families()[j].times);
    for (int k : problem.state_families()[j].times) {
      map.entries_.push_back({ConstraintKind::State, static_cast<int>(j), k});
      ++next;
    }
  }
  map.input_base_.reserve(problem.input_families().size());
  for (size_t l = 0; l < problem.input_families().size(); ++l) {
    map.input_base_.push_back(next);
    map.input_offsets_.push_back(problem.input_families()[l].times);
    for (int k : problem.input_families()[l].times) {
      map.entries_.push_back({ConstraintKind::Input, static_cast<int>(l), k});
      ++next;
    }
  }
  return map;
}

const ConstraintEntry& ConstraintIndexMap::entry(int i) const {
  if (i < 0 || i >= size())
    throw std::invalid_argument("ConstraintIndexMap::entry: index " +
                                std::to_string(i) + " outside [0, " +
                                std::to_string(size()) + ")");
  return entries_[static_cast<size_t>(i)];
}

int ConstraintIndexMap::flat_index(ConstraintKind kind, int family, int time) const {
  const auto& offsets =
      kind == ConstraintKind::State ? state_offsets_ : input_offsets_;
  const auto& base = kind == ConstraintKind::State ? state_base_ : input_base_;
  if (family < 0 || family >= static_cast<int>(offsets.size()))
    throw std::invalid_argument("ConstraintIndexMap::flat_index: family " +
                                std::to_string(family) + " out of range");
  const auto& times = offsets[static_cast<size_t>(family)];
  const auto it = std::lower_bound(times.begin(), times.end(), time);
  if (it == times.end() || *it != time)
    throw std::invalid_argument("ConstraintIndexMap::flat_index: time " +
                                std::to_string(time) +
                                " is not scheduled for family " +
                                std::to_string(family));
  return base[static_cast<size_t>(family)] +
         static_cast<int>(it - times.begin());
}

NlpView::NlpView(const OcpProblem& problem)
    : problem_(&problem), map_(ConstraintIndexMap::build(problem)) {
  for (int i = 0; i < map_.size(); ++i) {
    const auto& e = map_.entry(i);
    const bool convex = e.kind == ConstraintKind::State
                            ? problem.state_families()[static_cast<size_t>(e.family)].convex_in_u
                            : problem.input_families()[static_cast<size_t>(e.family)].convex_in_u;
    (convex ? convex_rows_ : nonconvex_rows_).push_back(i);
  }
  analytic_cross_term_ = true;
  for (const auto& fam : problem.state_families())
    if (!fam.dgrad_x_dlambda) analytic_cross_term_ = false;
  for (const auto& fam : problem.input_families())
    if (!fam.dgrad_u_dlambda) analytic_cross_term_ = false;
}

Vector NlpView::constraints(double lambda, const StackedControl& u) const {
  const StateTrajectory traj = rollout(*problem_, u);
  Vector G(s());
  for (int i = 0; i < s(); ++i) {
    const auto& e = map_.entry(i);
    if (e.kind == ConstraintKind::State) {
      const auto& fam = problem_->state_families()[static_cast<size_t>(e.family)];
      G(i) = fam.value(lambda, traj.at(e.time));
    } else {
      const auto& fam = problem_->input_families()[static_cast<size_t>(e.family)];
      G(i) = fam.value(lambda, u.control(e.time));
    }
  }
  if (!G.allFinite())
    throw std::runtime_error("NlpView::constraints: non-finite constraint row");
  return G;
}

Vector NlpView::constraints_dlambda(double lambda, const StackedControl& u) const {
  const StateTrajectory traj = rollout(*problem_, u);
  Vector out(s());
  for (int i = 0; i < s(); ++i) {
    const auto& e = map_.entry(i);
    if (e.kind == ConstraintKind::State) {
      const auto& fam = problem_->state_families()[static_cast<size_t>(e.family)];
      out(i) = fam.dvalue_dlambda(lambda, traj.at(e.time));
    } else {
      const auto& fam = problem_->input_families()[static_cast<size_t>(e.family)];
      out(i) = fam.dvalue_dlambda(lambda, u.control(e.time));
    }
  }
  return out;
}

NlpPoint NlpView::evaluate_point(double lambda, const StackedControl& u) const {
  auto [traj, sens] = rollout_with_sensitivities(*problem_, u);
  const int m = problem_->m();
  NlpPoint pt;
  pt.G.resize(s());
  pt.G_dlambda.resize(s());
  pt.dG = Matrix::Zero(s(), r());
  for (int i = 0; i < s(); ++i) {
    const auto& e = map_.entry(i);
    if (e.kind == ConstraintKind::State) {
      const auto& fam = problem_->state_families()[static_cast<size_t>(e.family)];
      const Vector& xk = traj.at(e.time);
      pt.G(i) = fam.value(lambda, xk);
      pt.G_dlambda(i) = fam.dvalue_dlambda(lambda, xk);
      pt.dG.row(i) = fam.grad_x(lambda, xk).transpose() * sens.at(e.time);
    } else {
      const auto& fam = problem_->input_families()[static_cast<size_t>(e.family)];
      const auto uk = u.control(e.time);
      pt.G(i) = fam.value(lambda, uk);
      pt.G_dlambda(i) = fam.dvalue_dlambda(lambda, uk);
      pt.dG.row(i).segment(static_cast<Eigen::Index>(e.time) * m, m) =
          fam.grad_u(lambda, uk).transpose();
    }
  }

  // Cost gradient from the same rollout.
  Vector grad = Vector::Zero(r());
  for (int k = 0; k < problem_->horizon(); ++k) {
    const Vector& x = traj.at(k);
    const auto uk = u.control(k);
    grad.noalias() += sens.at(k).transpose() * problem_->running_cost().grad_x(x, uk);
    grad.segment(static_cast<Eigen::Index>(k) * m, m) +=
        problem_->running_cost().grad_u(x, uk);
  }
  grad.noalias() += sens.at(problem_->horizon()).transpose() *
                    problem_->terminal_cost().grad_x(traj.at(problem_->horizon()));
  pt.cost_grad = std::move(grad);
  if (!pt.G.allFinite() || !pt.dG.allFinite() || !pt.cost_grad.allFinite())
    throw std::runtime_error("NlpView::evaluate_point: non-finite evaluation");
  return pt;
}

Matrix NlpView::constraint_jacobian(double lambda, const StackedControl& u) const {
  return evaluate_point(lambda, u).dG;
}

Vector NlpView::kkt_residual(double lambda, const StackedControl& u,
                             const Vector& mu) const {
  if (mu.size() != s())
    throw std::invalid_argument("NlpView::kkt_residual: mu has length " +
                                std::to_string(mu.size()) + ", expected s = " +
                                std::to_string(s()));
  const NlpPoint pt = evaluate_point(lambda, u);
  Vector alpha(r() + s());
  alpha.head(r()) = pt.cost_grad + pt.dG.transpose() * mu;
  for (int i = 0; i < s(); ++i)
    alpha(r() + i) = complementarity_kernel(mu(i), -pt.G(i));
  return alpha;
}

Matrix NlpView::kkt_gradient_jacobian_fd(double lambda, const StackedControl& u,
                                         const Vector& mu, double fd_scale) const {
  const double h = fd_scale * (1.0 + u.vec().lpNorm<Eigen::Infinity>());
  Matrix out(r(), r());
  StackedControl probe = u;
  for (int j = 0; j < r(); ++j) {
    const double saved = probe.vec()(j);
    probe.vec()(j) = saved + h;
    const NlpPoint plus = evaluate_point(lambda, probe);
    probe.vec()(j) = saved - h;
    const NlpPoint minus = evaluate_point(lambda, probe);
    probe.vec()(j) = saved;
    out.col(j) = ((plus.cost_grad + plus.dG.transpose() * mu) -
                  (minus.cost_grad + minus.dG.transpose() * mu)) /
                 (2.0 * h);
  }
  return out;
}

Matrix NlpView::constraint_curvature(double lambda, const StackedControl& u,
                                     const Vector& mu) const {
  if (!problem_->dynamics().linear)
    throw std::logic_error(
        "NlpView::constraint_curvature: exact curvature requires linear dynamics");
  for (const auto& fam : problem_->state_families())
    if (!fam.hess_x)
      throw std::logic_error("NlpView::constraint_curvature: state family '" +
                             fam.name + "' has no Hessian");
  for (const auto& fam : problem_->input_families())
    if (!fam.hess_u)
      throw std::logic_error("NlpView::constraint_curvature: input family '" +
                             fam.name + "' has no Hessian");

  auto [traj, sens] = rollout_with_sensitivities(*problem_, u);
  const int m = problem_->m();
  Matrix H = Matrix::Zero(r(), r());
  for (int i = 0; i < s(); ++i) {
    const auto& e = map_.entry(i);
    if (mu(i) == 0.0) continue;
    if (e.kind == ConstraintKind::State) {
      const auto& fam = problem_->state_families()[static_cast<size_t>(e.family)];
      const Matrix& S = sens.at(e.time);
      H.noalias() += mu(i) * S.transpose() * fam.hess_x(lambda, traj.at(e.time)) * S;
    } else {
      const auto& fam = problem_->input_families()[static_cast<size_t>(e.family)];
      const Eigen::Index base = static_cast<Eigen::Index>(e.time) * m;
      H.block(base, base, m, m) += mu(i) * fam.hess_u(lambda, u.control(e.time));
    }
  }
  return H;
}

Vector NlpView::kkt_gradient_dlambda(double lambda, const StackedControl& u,
                                     const Vector& mu) const {
  if (analytic_cross_term_) {
    auto [traj, sens] = rollout_with_sensitivities(*problem_, u);
    const int m = problem_->m();
    Vector out = Vector::Zero(r());
    for (int i = 0; i < s(); ++i) {
      const auto& e = map_.entry(i);
      if (mu(i) == 0.0) continue;
      if (e.kind == ConstraintKind::State) {
        const auto& fam = problem_->state_families()[static_cast<size_t>(e.family)];
        out.noalias() += mu(i) * sens.at(e.time).transpose() *
                         fam.dgrad_x_dlambda(lambda, traj.at(e.time));
      } else {
        const auto& fam = problem_->input_families()[static_cast<size_t>(e.family)];
        out.segment(static_cast<Eigen::Index>(e.time) * m, m) +=
            mu(i) * fam.dgrad_u_dlambda(lambda, u.control(e.time));
      }
    }
    return out;
  }
  const double h = 1e-6 * (1.0 + std::abs(lambda));
  const NlpPoint plus = evaluate_point(lambda + h, u);
  const NlpPoint minus = evaluate_point(lambda - h, u);
  return (plus.dG.transpose() * mu - minus.dG.transpose() * mu) / (2.0 * h);
}

}  // namespace hocp
