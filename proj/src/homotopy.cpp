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

#include "hocp/homotopy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hocp {

HomotopyParams make_params(const NlpView& view, StackedControl u0,
                           double b0_scale, double c0_scale) {
  HomotopyParams params;
  params.u0 = std::move(u0);
  params.b0 = Vector::Constant(view.s(), b0_scale);
  params.c0 = Vector::Constant(view.s(), c0_scale);
  check_params(view, params);
  return params;
}

std::vector<ParamViolation> params_violations(const NlpView& view,
                                              const HomotopyParams& params) {
  std::vector<ParamViolation> out;
  if (params.u0.size() != view.r() || params.u0.control_dim() != view.problem().m()) {
    out.push_back({"u0 has wrong shape", -1, static_cast<double>(params.u0.size())});
    return out;
  }
  if (params.b0.size() != view.s() || params.c0.size() != view.s()) {
    out.push_back({"b0/c0 have wrong length", -1,
                   static_cast<double>(params.b0.size())});
    return out;
  }
  for (int i = 0; i < view.s(); ++i) {
    if (!(params.b0(i) > 0.0))
      out.push_back({"b0 must be positive", i, params.b0(i)});
    if (!(params.c0(i) > 0.0))
      out.push_back({"c0 must be positive", i, params.c0(i)});
  }
  const Vector G = view.constraints(0.0, params.u0);
  for (int i = 0; i < view.s(); ++i) {
    if (!(G(i) < 0.0))
      out.push_back({"u0 is not strictly feasible at lambda = 0", i, G(i)});
    if (!(G(i) < params.b0(i)))
      out.push_back({"G(0, u0) must stay below b0", i, G(i) - params.b0(i)});
  }
  return out;
}

void check_params(const NlpView& view, const HomotopyParams& params) {
  const auto violations = params_violations(view, params);
  if (violations.empty()) return;
  const auto& v = violations.front();
  std::string msg = "invalid homotopy params: " + v.what;
  if (v.row >= 0) msg += " (row " + std::to_string(v.row) + ")";
  msg += ", value " + std::to_string(v.value);
  if (violations.size() > 1)
    msg += " (+" + std::to_string(violations.size() - 1) + " more)";
  throw std::invalid_argument(msg);
}

double K_scalar(double lambda, double G_i, double mu_i, double b0_i, double c0_i) {
  const double d = (1.0 - lambda) * b0_i - G_i;
  return complementarity_kernel(mu_i, d) - (1.0 - lambda) * c0_i;
}

double K_scalar_dmu(double lambda, double G_i, double mu_i, double b0_i) {
  return complementarity_kernel_dmu(mu_i, (1.0 - lambda) * b0_i - G_i);
}

double K_component(const NlpView& view, const HomotopyParams& params, int i,
                   double lambda, const StackedControl& u, const Vector& mu) {
  if (i < 0 || i >= view.s())
    throw std::invalid_argument("K_component: row " + std::to_string(i) +
                                " outside [0, " + std::to_string(view.s()) + ")");
  const Vector G = view.constraints(lambda, u);
  return K_scalar(lambda, G(i), mu(i), params.b0(i), params.c0(i));
}

namespace {

void check_w(const NlpView& view, const Vector& w, const char* who) {
  if (w.size() != 1 + view.r() + view.s())
    throw std::invalid_argument(std::string(who) + ": w has length " +
                                std::to_string(w.size()) + ", expected " +
                                std::to_string(1 + view.r() + view.s()));
}

}  // namespace

Vector rho(const NlpView& view, const HomotopyParams& params, const Vector& w) {
  check_w(view, w, "rho");
  const int r = view.r();
  const int s = view.s();
  const double lambda = w(0);
  const StackedControl u(w.segment(1, r), view.problem().m());
  const Vector mu = w.tail(s);

  const NlpPoint pt = view.evaluate_point(lambda, u);
  Vector out(r + s);
  out.head(r) = lambda * (pt.cost_grad + pt.dG.transpose() * mu) +
                (1.0 - lambda) * (u.vec() - params.u0.vec());
  for (int i = 0; i < s; ++i)
    out(r + i) = K_scalar(lambda, pt.G(i), mu(i), params.b0(i), params.c0(i));
  return out;
}

Matrix rho_jacobian(const NlpView& view, const HomotopyParams& params,
                    const Vector& w, double fd_scale) {
  check_w(view, w, "rho_jacobian");
  const int r = view.r();
  const int s = view.s();
  const double lambda = w(0);
  const StackedControl u(w.segment(1, r), view.problem().m());
  const Vector mu = w.tail(s);

  const NlpPoint pt = view.evaluate_point(lambda, u);
  const Vector phi = pt.cost_grad + pt.dG.transpose() * mu;

  Matrix J = Matrix::Zero(r + s, 1 + r + s);

  // First block: lambda * phi(lambda, u, mu) + (1 - lambda)(u - u0).
  J.block(0, 0, r, 1) =
      phi - (u.vec() - params.u0.vec()) +
      lambda * view.kkt_gradient_dlambda(lambda, u, mu);
  J.block(0, 1, r, r) =
      lambda * view.kkt_gradient_jacobian_fd(lambda, u, mu, fd_scale) +
      (1.0 - lambda) * Matrix::Identity(r, r);
  J.block(0, 1 + r, r, s) = lambda * pt.dG.transpose();

  // K rows: with d_i = (1-lambda) b0_i - G_i and the kernel partials,
  //   dK/dlambda = kernel_d * (-b0_i - dG_i/dlambda) + c0_i
  //   dK/du      = -kernel_d * dG_i/du
  //   dK/dmu_i   = kernel_mu.
  for (int i = 0; i < s; ++i) {
    const double d = (1.0 - lambda) * params.b0(i) - pt.G(i);
    const double kd = complementarity_kernel_dd(mu(i), d);
    const double kmu = complementarity_kernel_dmu(mu(i), d);
    J(r + i, 0) = kd * (-params.b0(i) - pt.G_dlambda(i)) + params.c0(i);
    J.row(r + i).segment(1, r) = -kd * pt.dG.row(i);
    J(r + i, 1 + r + i) = kmu;
  }
  return J;
}

Vector solve_initial_multipliers(const NlpView& view, const HomotopyParams& params) {
  check_params(view, params);
  const Vector G = view.constraints(0.0, params.u0);
  const int s = view.s();
  Vector mu(s);
  for (int i = 0; i < s; ++i) {
    const double d = params.b0(i) - G(i);  // > 0 by the param preconditions
    const double c = params.c0(i);
    // K_i(mu) = kernel(mu, d) - c is strictly increasing with K_i(0) = -c < 0;
    // double the upper end until it brackets the root.
    double hi = 1.0;
    while (complementarity_kernel(hi, d) <= c) {
      hi *= 2.0;
      if (!std::isfinite(hi))
        throw std::runtime_error(
            "solve_initial_multipliers: failed to bracket root at row " +
            std::to_string(i));
    }
    double lo = 0.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (complementarity_kernel(mid, d) < c)
        lo = mid;
      else
        hi = mid;
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
      const double f = complementarity_kernel(root, d) - c;
      if (std::abs(f) <= 0.25e-12) break;
      const double df = complementarity_kernel_dmu(root, d);
      if (df <= 0.0) break;
      root -= f / df;
    }
    if (std::abs(complementarity_kernel(root, d) - c) > 1e-12)
      throw std::runtime_error(
          "solve_initial_multipliers: residual above 1e-12 at row " +
          std::to_string(i));
    mu(i) = root;
  }
  return mu;
}

HomotopyMap::HomotopyMap(const NlpView& view, HomotopyParams params, double fd_scale)
    : view_(&view), params_(std::move(params)), fd_scale_(fd_scale) {
  check_params(view, params_);
}

Vector HomotopyMap::residual(const Vector& w) const {
  return rho(*view_, params_, w);
}

Matrix HomotopyMap::jacobian(const Vector& w) const {
  return rho_jacobian(*view_, params_, w, fd_scale_);
}

Vector HomotopyMap::initial_multipliers() const {
  return solve_initial_multipliers(*view_, params_);
}

Vector HomotopyMap::initial_point() const {
  Vector w0(1 + view_->r() + view_->s());
  w0(0) = 0.0;
  w0.segment(1, view_->r()) = params_.u0.vec();
  w0.tail(view_->s()) = initial_multipliers();
  return w0;
}

double HomotopyMap::curve_margin(const Vector& w) const {
  check_w(*view_, w, "curve_margin");
  const double lambda = w(0);
  const StackedControl u = unpack_u(w);
  const Vector mu = unpack_mu(w);
  const Vector G = view_->constraints(lambda, u);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < view_->s(); ++i) {
    margin = std::min(margin, mu(i));
    margin = std::min(margin, (1.0 - lambda) * params_.b0(i) - G(i));
  }
  return margin;
}

StackedControl HomotopyMap::unpack_u(const Vector& w) const {
  check_w(*view_, w, "unpack_u");
  return StackedControl(w.segment(1, view_->r()), view_->problem().m());
}

Vector HomotopyMap::unpack_mu(const Vector& w) const {
  check_w(*view_, w, "unpack_mu");
  return w.tail(view_->s());
}

}  // namespace hocp
