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

#ifndef HOCP_HOMOTOPY_HPP_
#define HOCP_HOMOTOPY_HPP_

#include <string>
#include <vector>

#include "hocp/transcription.hpp"

namespace hocp {

// Anchor data for one curve instance. u0 is the strictly feasible start at
// lambda = 0; b0 and c0 are the positive offset vectors that make the start
// point regular and the initial multipliers unique.
struct HomotopyParams {
  StackedControl u0;
  Vector b0;  // s, > 0, with G(0, u0) < b0 componentwise
  Vector c0;  // s, > 0
};

// Convenience: b0 = c0 = scale * ones.
HomotopyParams make_params(const NlpView& view, StackedControl u0,
                           double b0_scale = 1.0, double c0_scale = 1.0);

struct ParamViolation {
  std::string what;  // which precondition failed
  int row;           // flat constraint row, -1 when not row-specific
  double value;
};

// All precondition failures of (u0, b0, c0) against the view: shapes,
// positivity of b0/c0, strict feasibility of u0 at lambda = 0, and
// G(0, u0) < b0. Empty result means the params are valid.
std::vector<ParamViolation> params_violations(const NlpView& view,
                                              const HomotopyParams& params);

// Throws std::invalid_argument (first violation in the message) if invalid.
void check_params(const NlpView& view, const HomotopyParams& params);

// Deformed complementarity row
//   K_i = mu_i^3 - |(1-lambda) b0_i - G_i - mu_i|^3
//         + [(1-lambda) b0_i - G_i]^3 - (1-lambda) c0_i
// evaluated through the stable kernel. The scalar form is exposed for
// property tests; the indexed form evaluates G_i on the rollout of u.
double K_scalar(double lambda, double G_i, double mu_i, double b0_i, double c0_i);
double K_scalar_dmu(double lambda, double G_i, double mu_i, double b0_i);
double K_component(const NlpView& view, const HomotopyParams& params, int i,
                   double lambda, const StackedControl& u, const Vector& mu);

// Homotopy residual at w = (lambda; u; mu), length r + s:
//   rows 0..r-1 :  lambda [grad J + dG^T mu] + (1 - lambda)(u - u0)
//   rows r..    :  K_i(lambda, u, mu)
// At lambda = 1 this coincides exactly with the first-order residual.
Vector rho(const NlpView& view, const HomotopyParams& params, const Vector& w);

// Jacobian of rho w.r.t. (lambda, u, mu): (r+s) x (1+r+s). The K rows and
// the lambda / mu columns of the first block are analytic; the u-derivative
// of grad J + dG^T mu is obtained by central differences (fd_scale sets the
// step as fd_scale * (1 + max|u|)).
Matrix rho_jacobian(const NlpView& view, const HomotopyParams& params,
                    const Vector& w, double fd_scale = 1e-6);

// Unique positive root of K(0, u0, mu) = 0, solved per component by
// bracketing ([0, hi] with hi doubled from 1), bisection to width 1e-12, and
// Newton polish. Post-condition: max_i |K_i| <= 1e-12.
Vector solve_initial_multipliers(const NlpView& view, const HomotopyParams& params);

// Bundles a (view, params) pair behind vector-in / vector-out callables and
// caches shapes. This is the concrete curve map handed to the tracker.
class HomotopyMap {
 public:
  HomotopyMap(const NlpView& view, HomotopyParams params, double fd_scale = 1e-6);

  int dim() const { return view_->r() + view_->s(); }
  Vector residual(const Vector& w) const;
  Matrix jacobian(const Vector& w) const;
  Vector initial_multipliers() const;
  Vector initial_point() const;  // (0; u0; mu0)

  // min_i min(mu_i, (1-lambda) b0_i - G_i): positive along the interior of
  // the curve, used for trace diagnostics.
  double curve_margin(const Vector& w) const;

  const NlpView& view() const { return *view_; }
  const HomotopyParams& params() const { return params_; }

  StackedControl unpack_u(const Vector& w) const;
  Vector unpack_mu(const Vector& w) const;

 private:
  const NlpView* view_;
  HomotopyParams params_;
  double fd_scale_;
};

}  // namespace hocp

#endif  // HOCP_HOMOTOPY_HPP_
