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

#ifndef HOCP_TRANSCRIPTION_HPP_
#define HOCP_TRANSCRIPTION_HPP_

#include <vector>

#include "hocp/problem.hpp"

namespace hocp {

enum class ConstraintKind { State, Input };

// One scheduled scalar constraint row: family index within its kind plus the
// time it is applied at (state rows use k in {1..N}, input rows k in {0..N-1}).
struct ConstraintEntry {
  ConstraintKind kind;
  int family;
  int time;
};

// Deterministic flattening of all scheduled constraint rows. State families
// come first (family-major, times ascending), then input families. With full
// masks and 1-based flat indices this reproduces the usual stacking
//   state row  (j, k) -> (j-1)N + k,
//   input row  (l, k) -> pN + (l-1)N + k,
// where flat input slot k addresses the control u_{k-1}.
class ConstraintIndexMap {
 public:
  static ConstraintIndexMap build(const OcpProblem& problem);

  int size() const { return static_cast<int>(entries_.size()); }  // s
  const ConstraintEntry& entry(int i) const;                      // 0-based
  // Inverse lookup; throws std::invalid_argument for unscheduled rows.
  int flat_index(ConstraintKind kind, int family, int time) const;

  const std::vector<ConstraintEntry>& entries() const { return entries_; }

 private:
  std::vector<ConstraintEntry> entries_;
  std::vector<std::vector<int>> state_offsets_;  // family -> sorted times start
  std::vector<std::vector<int>> input_offsets_;
  std::vector<int> state_base_, input_base_;
};

// Everything the curve map needs at one (lambda, u): constraint values, their
// control Jacobian and lambda derivative, and the cost gradient. Computed
// from a single rollout with sensitivities.
struct NlpPoint {
  Vector G;          // s
  Vector G_dlambda;  // s
  Matrix dG;         // s x r
  Vector cost_grad;  // r
};

// Stacked NLP view of an OcpProblem: evaluates the flattened inequality
// vector G(lambda, u) <= 0 and the first-order optimality residual.
class NlpView {
 public:
  explicit NlpView(const OcpProblem& problem);

  const OcpProblem& problem() const { return *problem_; }
  const ConstraintIndexMap& index_map() const { return map_; }
  int s() const { return map_.size(); }
  int r() const { return problem_->r(); }

  // Rows whose map u -> G_i(lambda, u) is convex for every lambda, and the
  // complement, both as 0-based flat indices.
  const std::vector<int>& convex_rows() const { return convex_rows_; }
  const std::vector<int>& nonconvex_rows() const { return nonconvex_rows_; }

  // G(lambda, u); one rollout, no sensitivities.
  Vector constraints(double lambda, const StackedControl& u) const;

  // d/dlambda of G at fixed u.
  Vector constraints_dlambda(double lambda, const StackedControl& u) const;

  // Full evaluation used by the homotopy map.
  NlpPoint evaluate_point(double lambda, const StackedControl& u) const;

  // Control Jacobian of G alone (s x r).
  Matrix constraint_jacobian(double lambda, const StackedControl& u) const;

  // First-order residual alpha(lambda, u, mu) of length r + s: the first r
  // rows are grad J + dG^T mu, the remaining s rows are the componentwise
  // complementarity recast
  //   mu_i^3 - | -G_i - mu_i |^3 + (-G_i)^3,
  // which vanishes exactly at points satisfying the first-order conditions.
  Vector kkt_residual(double lambda, const StackedControl& u, const Vector& mu) const;

  // Jacobian w.r.t. u of the map u -> grad J(u) + dG(lambda, u)^T mu via
  // central differences with step fd_scale * (1 + max|u|). r x r.
  Matrix kkt_gradient_jacobian_fd(double lambda, const StackedControl& u,
                                  const Vector& mu, double fd_scale = 1e-6) const;

  // Exact curvature sum_i mu_i * d2G_i/du2 assembled from family Hessians.
  // Requires linear dynamics and Hessians on every scheduled family; throws
  // std::logic_error otherwise. Used to cross-check the FD path.
  Matrix constraint_curvature(double lambda, const StackedControl& u,
                              const Vector& mu) const;

  // Derivative w.r.t. lambda of dG(lambda, u)^T mu. Assembled analytically
  // when every scheduled family provides its mixed derivative, otherwise by
  // central differences in lambda.
  Vector kkt_gradient_dlambda(double lambda, const StackedControl& u,
                              const Vector& mu) const;

 private:
  const OcpProblem* problem_;
  ConstraintIndexMap map_;
  std::vector<int> convex_rows_, nonconvex_rows_;
  bool analytic_cross_term_;
};

// Stable evaluation of m(mu, d) = mu^3 - |d - mu|^3 + d^3 and its partials.
// The factored forms avoid the cancellation between |d - mu|^3 and d^3 when
// mu is small relative to d.
double complementarity_kernel(double mu, double d);
double complementarity_kernel_dmu(double mu, double d);
double complementarity_kernel_dd(double mu, double d);

}  // namespace hocp

#endif  // HOCP_TRANSCRIPTION_HPP_
