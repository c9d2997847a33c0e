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

#include "hocp/tracker.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace hocp {

ZeroCurveSystem as_system(const HomotopyMap& map) {
  ZeroCurveSystem system;
  system.dim = map.dim();
  system.residual = [&map](const Vector& w) { return map.residual(w); };
  system.jacobian = [&map](const Vector& w) { return map.jacobian(w); };
  return system;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxSteps: return "MaxSteps";
    case SolveStatus::CorrectorFailed: return "CorrectorFailed";
    case SolveStatus::StepUnderflow: return "StepUnderflow";
    case SolveStatus::RankDeficient: return "RankDeficient";
  }
  return "Unknown";
}

void TrackerConfig::validate() const {
  auto require = [](bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(std::string("TrackerConfig: ") + msg);
  };
  require(step_size > 0.0, "step_size must be > 0");
  require(min_step > 0.0 && min_step <= step_size,
          "min_step must be in (0, step_size]");
  require(corrector_tol > 0.0, "corrector_tol must be > 0");
  require(corrector_max_iters >= 1, "corrector_max_iters must be >= 1");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(overshoot_cap >= 1.0, "overshoot_cap must be >= 1");
  require(endpoint_tol > 0.0, "endpoint_tol must be > 0");
  require(kkt_tol > 0.0, "kkt_tol must be > 0");
  require(rank_tol > 0.0 && rank_tol < 1.0, "rank_tol must be in (0, 1)");
  require(fd_scale > 0.0, "fd_scale must be > 0");
  require(min_tangent_cos >= -1.0 && min_tangent_cos < 1.0,
          "min_tangent_cos must be in [-1, 1)");
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace,
                     bool full, int control_len) {
  os << "iter,lambda,arclen,res_inf,tangent_lambda,min_margin,corrector_iters";
  if (full && !trace.empty()) {
    const int total = static_cast<int>(trace.front().y.size());
    for (int i = 0; i < control_len; ++i) os << ",u_" << i;
    for (int i = 0; i < total - control_len; ++i) os << ",mu_" << i;
  }
  os << "\n";
  os << std::setprecision(17);
  for (const auto& rec : trace) {
    os << rec.iter << ',' << rec.lambda << ',' << rec.arc_length << ','
       << rec.residual_inf << ',' << rec.tangent_lambda << ','
       << rec.min_margin << ',' << rec.corrector_iters;
    if (full)
      for (Eigen::Index i = 0; i < rec.y.size(); ++i) os << ',' << rec.y(i);
    os << "\n";
  }
}

namespace {

// Sign of det(A) from a partial-pivoting LU: permutation parity times the
// signs of the U diagonal. Magnitudes are never multiplied out, so this does
// not overflow for large well-conditioned matrices.
int determinant_sign(const Matrix& A) {
  Eigen::PartialPivLU<Matrix> lu(A);
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) == 0.0) return 0;
    if (diag(i) < 0.0) sign = -sign;
  }
  return sign;
}

}  // namespace

TangentResult tangent(const Matrix& J, const Vector* previous, double rank_tol) {
  const Eigen::Index n = J.rows();
  if (J.cols() != n + 1)
    throw std::invalid_argument("tangent: Jacobian must be n x (n+1)");

  Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double ratio = sigma(0) > 0.0 ? sigma(n - 1) / sigma(0) : 0.0;
  if (!(ratio > rank_tol))
    throw RankDeficiencyError(
        "tangent: Jacobian is numerically rank-deficient (sigma ratio " +
        std::to_string(ratio) + ")");

  TangentResult out;
  out.sigma_ratio = ratio;
  out.t = svd.matrixV().col(n);
  out.t.normalize();

  // Orient by the determinant of the augmented square matrix [J; t^T].
  Matrix aug(n + 1, n + 1);
  aug.topRows(n) = J;
  aug.row(n) = out.t.transpose();
  const int sign = determinant_sign(aug);
  if (sign == 0)
    throw RankDeficiencyError("tangent: augmented matrix is singular");
  if (sign < 0) out.t = -out.t;

  // With a previous tangent, continuity wins: the determinant sign of the
  // augmented matrix is constant along a regular curve, so a disagreement
  // between the determinant orientation and t.prev > 0 signals numerical
  // trouble. We keep moving forward and surface the disagreement as a
  // warning flag.
  if (previous != nullptr && previous->size() == out.t.size() &&
      out.t.dot(*previous) <= 0.0) {
    out.t = -out.t;
    out.continuity_flip = true;
  }
  return out;
}

Vector predict(const Vector& w, const Vector& t, double h) {
  if (w.size() != t.size())
    throw std::invalid_argument("predict: w and t sizes differ");
  return w + h * t;
}

CorrectorResult correct(const ZeroCurveSystem& system, const Vector& v,
                        const Vector& t, const TrackerConfig& config) {
  const Eigen::Index n = system.dim;
  CorrectorResult out;
  out.w = v;

  Vector z = Vector::Zero(n + 1);
  Vector res = system.residual(v);
  double ortho = 0.0;  // t^T z, kept by the augmented system

  auto merit = [](const Vector& rho_part, double tz) {
    return rho_part.squaredNorm() + tz * tz;
  };

  for (int iter = 0; iter <= config.corrector_max_iters; ++iter) {
    out.residual_inf = res.lpNorm<Eigen::Infinity>();
    if (out.residual_inf <= config.corrector_tol && std::abs(ortho) <= 1e-9) {
      out.converged = true;
      out.w = v + z;
      out.iterations = iter;
      return out;
    }
    if (iter == config.corrector_max_iters) break;

    Matrix aug(n + 1, n + 1);
    aug.topRows(n) = system.jacobian(v + z);
    aug.row(n) = t.transpose();
    Vector rhs(n + 1);
    rhs.head(n) = res;
    rhs(n) = ortho;

    Eigen::FullPivLU<Matrix> lu(aug);
    if (!lu.isInvertible()) {
      out.singular = true;
      out.iterations = iter;
      return out;
    }
    const Vector delta = lu.solve(-rhs);

    // Backtracking on the squared augmented residual.
    const double phi0 = merit(res, ortho);
    double alpha = 1.0;
    bool stepped = false;
    for (int bt = 0; bt < 20; ++bt) {
      const Vector z_try = z + alpha * delta;
      const Vector res_try = system.residual(v + z_try);
      const double ortho_try = t.dot(z_try);
      if (merit(res_try, ortho_try) <= (1.0 - 2e-4 * alpha) * phi0) {
        z = z_try;
        res = res_try;
        ortho = ortho_try;
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) {
      out.iterations = iter + 1;
      return out;  // no progress along the Newton direction
    }
  }
  out.iterations = config.corrector_max_iters;
  return out;
}

std::optional<Vector> refine_endpoint(const ZeroCurveSystem& system,
                                      const Vector& w_lo, const Vector& w_hi,
                                      const TrackerConfig& config) {
  const Eigen::Index n = system.dim;
  if (!(w_lo(0) < 1.0) || !(w_hi(0) >= 1.0))
    throw std::invalid_argument(
        "refine_endpoint: bracket must satisfy lambda_lo < 1 <= lambda_hi");

  // Already exactly on the hyperplane and on the curve: nothing to do.
  if (w_hi(0) == 1.0 &&
      system.residual(w_hi).lpNorm<Eigen::Infinity>() <= config.endpoint_tol)
    return w_hi;

  const double span = w_hi(0) - w_lo(0);
  const double blend = span > 0.0 ? (1.0 - w_lo(0)) / span : 1.0;
  Vector w = w_lo + blend * (w_hi - w_lo);
  w(0) = 1.0;

  Vector res = system.residual(w);
  for (int iter = 0; iter < 50; ++iter) {
    if (res.lpNorm<Eigen::Infinity>() <= config.endpoint_tol) return w;

    const Matrix J = system.jacobian(w);
    Eigen::FullPivLU<Matrix> lu(J.rightCols(n));  // lambda column dropped
    if (!lu.isInvertible()) return std::nullopt;
    const Vector delta = lu.solve(-res);

    const double phi0 = res.squaredNorm();
    double alpha = 1.0;
    bool stepped = false;
    for (int bt = 0; bt < 20; ++bt) {
      Vector w_try = w;
      w_try.tail(n) += alpha * delta;
      const Vector res_try = system.residual(w_try);
      if (res_try.squaredNorm() <= (1.0 - 2e-4 * alpha) * phi0) {
        w = w_try;
        res = res_try;
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) return std::nullopt;
  }
  if (res.lpNorm<Eigen::Infinity>() <= config.endpoint_tol) return w;
  return std::nullopt;
}

CurveResult track_curve(const ZeroCurveSystem& system, const Vector& w0,
                        const TrackerConfig& config,
                        const std::function<double(const Vector&)>& margin_fn) {
  config.validate();
  if (w0.size() != system.dim + 1)
    throw std::invalid_argument("track_curve: w0 has wrong length");
  if (system.residual(w0).lpNorm<Eigen::Infinity>() > config.corrector_tol)
    throw std::invalid_argument(
        "track_curve: w0 does not satisfy the corrector tolerance");

  CurveResult out;
  Vector w = w0;
  double base_h = config.step_size;
  double h = base_h;
  double arc = 0.0;
  int consecutive = 0;
  int refine_failures = 0;

  // Tangent at the current point. The zero curve emanates from the start
  // into lambda > 0; the raw determinant normalization fixes only an overall
  // sign whose relation to the forward direction depends on the parity of
  // the system dimension. Anchor the first tangent to the forward direction
  // and remember the determinant sign it came with -- along a regular curve
  // that sign never changes, so later deviations are flagged as warnings.
  TangentResult tan_w;
  try {
    tan_w = tangent(system.jacobian(w), nullptr, config.rank_tol);
  } catch (const RankDeficiencyError&) {
    out.status = SolveStatus::RankDeficient;
    return out;
  }
  int det_sign_ref = 1;
  if (tan_w.t(0) < 0.0) {
    tan_w.t = -tan_w.t;
    det_sign_ref = -1;
  }

  while (out.steps < config.max_steps) {
    const Vector v = predict(w, tan_w.t, h);
    const CorrectorResult cor = correct(system, v, tan_w.t, config);

    const bool beyond_cap = cor.converged && cor.w(0) > config.overshoot_cap;
    if (!cor.converged || beyond_cap) {
      h *= 0.5;
      consecutive = 0;
      if (h < config.min_step) {
        out.status = SolveStatus::StepUnderflow;
        return out;
      }
      continue;
    }

    if (cor.w(0) >= 1.0) {
      // Crossing point: use it as the upper bracket for the endpoint solve
      // rather than as a trace record (past lambda = 1 the interior margins
      // legitimately change sign, so it is not a curve sample).
      ++out.steps;
      const auto endpoint = refine_endpoint(system, w, cor.w, config);
      if (endpoint) {
        out.endpoint = *endpoint;
        out.status = SolveStatus::Converged;
        return out;
      }
      ++refine_failures;
      if (refine_failures >= 5) {
        out.status = SolveStatus::CorrectorFailed;
        return out;
      }
      // Step down permanently and re-approach the hyperplane from w.
      base_h *= 0.5;
      h = std::min(h * 0.5, base_h);
      consecutive = 0;
      if (h < config.min_step) {
        out.status = SolveStatus::StepUnderflow;
        return out;
      }
      continue;
    }

    // Tangent at the landed point, oriented by continuity with the tangent
    // stepped along. A sharp turn means the corrector slid onto a nearby
    // sheet of the zero set (typical near a fold): reject and retry shorter.
    TangentResult tan_next;
    try {
      tan_next = tangent(system.jacobian(cor.w), &tan_w.t, config.rank_tol);
    } catch (const RankDeficiencyError&) {
      out.status = SolveStatus::RankDeficient;
      return out;
    }
    if (tan_next.t.dot(tan_w.t) < config.min_tangent_cos) {
      h *= 0.5;
      consecutive = 0;
      if (h < config.min_step) {
        out.status = SolveStatus::StepUnderflow;
        return out;
      }
      continue;
    }

    ++out.steps;
    if ((tan_next.continuity_flip ? -1 : 1) != det_sign_ref)
      ++out.tangent_warnings;

    arc += (cor.w - w).norm();

    TraceRecord rec;
    rec.iter = out.steps;
    rec.lambda = cor.w(0);
    rec.arc_length = arc;
    rec.residual_inf = cor.residual_inf;
    rec.tangent_lambda = tan_w.t(0);
    rec.min_margin = margin_fn ? margin_fn(cor.w)
                               : std::numeric_limits<double>::quiet_NaN();
    rec.corrector_iters = cor.iterations;
    rec.y = cor.w.tail(system.dim);
    out.trace.push_back(std::move(rec));

    w = cor.w;
    tan_w = tan_next;
    ++consecutive;
    if (consecutive >= 2) h = base_h;
  }

  out.status = SolveStatus::MaxSteps;
  return out;
}

KktResiduals kkt_residuals(const NlpView& view, const StackedControl& u,
                           const Vector& mu) {
  const NlpPoint pt = view.evaluate_point(1.0, u);
  KktResiduals out;
  out.stationarity =
      (pt.cost_grad + pt.dG.transpose() * mu).lpNorm<Eigen::Infinity>();
  out.primal = pt.G.maxCoeff();
  out.complementarity = std::abs(mu.dot(pt.G));
  out.dual = mu.minCoeff();
  return out;
}

SolveResult track(const NlpView& view, const HomotopyParams& params,
                  const TrackerConfig& config) {
  config.validate();
  HomotopyMap map(view, params, config.fd_scale);
  const ZeroCurveSystem system = as_system(map);
  const Vector w0 = map.initial_point();

  const auto margin = [&map](const Vector& w) { return map.curve_margin(w); };
  CurveResult curve = track_curve(system, w0, config, margin);

  SolveResult out;
  out.status = curve.status;
  out.steps = curve.steps;
  out.tangent_warnings = curve.tangent_warnings;
  out.trace = std::move(curve.trace);

  Vector w_final;
  if (curve.status == SolveStatus::Converged) {
    w_final = curve.endpoint;
  } else if (!out.trace.empty()) {
    w_final = Vector(1 + view.r() + view.s());
    w_final(0) = out.trace.back().lambda;
    w_final.tail(view.r() + view.s()) = out.trace.back().y;
  } else {
    w_final = w0;
  }

  out.lambda_final = w_final(0);
  out.u_star = map.unpack_u(w_final);
  out.mu_star = map.unpack_mu(w_final);
  out.cost = total_cost(view.problem(), out.u_star);

  if (curve.status == SolveStatus::Converged) {
    out.kkt = kkt_residuals(view, out.u_star, out.mu_star);
    const bool ok = out.kkt.stationarity <= config.kkt_tol &&
                    out.kkt.primal <= config.kkt_tol &&
                    out.kkt.complementarity <= config.kkt_tol &&
                    out.kkt.dual >= -config.kkt_tol;
    if (!ok) out.status = SolveStatus::CorrectorFailed;
  }
  return out;
}

}  // namespace hocp
