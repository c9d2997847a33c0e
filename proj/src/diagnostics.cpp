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

#include "hocp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hocp {

namespace {

constexpr size_t kMaxWitnesses = 5;
constexpr double kMarginTol = 1e-8;

nlohmann::json vector_to_json(const Eigen::Ref<const Vector>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void add_witness(CheckResult& check, nlohmann::json point, double value) {
  check.status = CheckStatus::Fail;
  if (check.witnesses.size() < kMaxWitnesses)
    check.witnesses.push_back({std::move(point), value});
}

}  // namespace

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::SampledPass: return "sampled-pass";
  }
  return "unknown";
}

nlohmann::json CheckResult::to_json() const {
  nlohmann::json witness_array = nlohmann::json::array();
  for (const auto& w : witnesses)
    witness_array.push_back({{"point", w.point}, {"value", w.value}});
  nlohmann::json out = {
      {"check", name}, {"status", to_string(status)}, {"witnesses", witness_array}};
  if (!detail.is_null()) out["detail"] = detail;
  return out;
}

bool AssumptionReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) {
    return c.status == CheckStatus::Fail;
  });
}

nlohmann::json AssumptionReport::to_json() const {
  nlohmann::json check_array = nlohmann::json::array();
  for (const auto& c : checks) check_array.push_back(c.to_json());
  nlohmann::json out = {{"checks", check_array}};
  if (!notes.empty()) out["notes"] = notes;
  return out;
}

bool check_feasible(const NlpView& view, double lambda, const StackedControl& u,
                    double tol) {
  return view.constraints(lambda, u).maxCoeff() <= tol;
}

AssumptionReport validate_params(const NlpView& view, const HomotopyParams& params) {
  AssumptionReport report;

  CheckResult interior;
  interior.name = "A2-interior";
  CheckResult b0_valid;
  b0_valid.name = "B0-valid";

  if (params.u0.size() != view.r() || params.b0.size() != view.s() ||
      params.c0.size() != view.s()) {
    add_witness(interior, {{"what", "shape mismatch"}},
                static_cast<double>(params.u0.size()));
    add_witness(b0_valid, {{"what", "shape mismatch"}},
                static_cast<double>(params.b0.size()));
    report.checks = {interior, b0_valid};
    return report;
  }

  const Vector G = view.constraints(0.0, params.u0);
  interior.detail = {{"margin", -G.maxCoeff()}};
  for (int i = 0; i < view.s(); ++i)
    if (!(G(i) < 0.0))
      add_witness(interior, {{"row", i}, {"G", G(i)}}, G(i));

  for (int i = 0; i < view.s(); ++i) {
    if (!(params.b0(i) > 0.0))
      add_witness(b0_valid, {{"row", i}, {"which", "b0"}}, params.b0(i));
    if (!(params.c0(i) > 0.0))
      add_witness(b0_valid, {{"row", i}, {"which", "c0"}}, params.c0(i));
    if (!(G(i) < params.b0(i)))
      add_witness(b0_valid, {{"row", i}, {"which", "G-b0"}}, G(i) - params.b0(i));
  }

  report.checks = {std::move(interior), std::move(b0_valid)};
  return report;
}

AssumptionReport check_sampled_assumptions(const NlpView& view, int samples,
                                           unsigned seed, double radius) {
  AssumptionReport report;
  CheckResult monotone;
  monotone.name = "A5-monotone";
  monotone.status = CheckStatus::SampledPass;
  CheckResult trivial;
  trivial.name = "A6-trivial";
  trivial.status = CheckStatus::SampledPass;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);

  for (int sample = 0; sample < samples; ++sample) {
    Vector raw(view.r());
    for (int i = 0; i < view.r(); ++i) raw(i) = coord(rng);
    const StackedControl u(raw, view.problem().m());

    double l1 = unit01(rng);
    double l2 = unit01(rng);
    if (l2 > l1) std::swap(l1, l2);  // l2 <= l1

    const Vector G_hi = view.constraints(l1, u);
    const Vector G_lo = view.constraints(l2, u);
    for (int i = 0; i < view.s(); ++i) {
      const double gap = G_lo(i) - G_hi(i);  // > 0 means the row loosened
      if (gap > 1e-12)
        add_witness(monotone,
                    {{"row", i},
                     {"lambda_lo", l2},
                     {"lambda_hi", l1},
                     {"u", vector_to_json(raw)}},
                    gap);
    }

    const Vector G0 = view.constraints(0.0, u);
    for (int i : view.nonconvex_rows())
      if (G0(i) > 1e-12)
        add_witness(trivial, {{"row", i}, {"u", vector_to_json(raw)}}, G0(i));
  }

  monotone.detail = {{"samples", samples}, {"radius", radius}};
  trivial.detail = {{"samples", samples}, {"radius", radius}};
  report.checks = {std::move(monotone), std::move(trivial)};
  report.notes.push_back(
      "sampled checks falsify only: a pass certifies the drawn samples, not "
      "the whole control space");
  return report;
}

CheckResult verify_kkt(const NlpView& view, const StackedControl& u,
                       const Vector& mu, double tol) {
  CheckResult check;
  check.name = "KKT";

  const KktResiduals res = kkt_residuals(view, u, mu);
  check.detail = {{"stationarity", res.stationarity},
                  {"primal", res.primal},
                  {"complementarity", res.complementarity},
                  {"dual", res.dual},
                  {"tol", tol}};
  if (res.stationarity > tol)
    add_witness(check, {{"which", "stationarity"}}, res.stationarity);
  if (res.primal > tol)
    add_witness(check, {{"which", "primal"}}, res.primal);
  if (res.complementarity > tol)
    add_witness(check, {{"which", "complementarity"}}, res.complementarity);
  if (res.dual < -tol)
    add_witness(check, {{"which", "dual"}}, res.dual);
  return check;
}

AssumptionReport curve_health(const NlpView& view, const HomotopyParams& params,
                              const std::vector<TraceRecord>& trace,
                              double rank_tol) {
  AssumptionReport report;
  CheckResult margins;
  margins.name = "margins";
  CheckResult rank;
  rank.name = "rank";

  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_ratio = std::numeric_limits<double>::infinity();

  for (size_t idx = 0; idx < trace.size(); ++idx) {
    const TraceRecord& rec = trace[idx];
    if (rec.y.size() != view.r() + view.s()) {
      add_witness(margins, {{"iter", rec.iter}, {"what", "bad record shape"}},
                  static_cast<double>(rec.y.size()));
      continue;
    }
    const StackedControl u(rec.y.head(view.r()), view.problem().m());
    const Vector mu = rec.y.tail(view.s());
    const Vector G = view.constraints(rec.lambda, u);

    for (int i = 0; i < view.s(); ++i) {
      const double slack = (1.0 - rec.lambda) * params.b0(i) - G(i);
      worst_margin = std::min(worst_margin, std::min(mu(i), slack));
      if (mu(i) < -kMarginTol)
        add_witness(margins, {{"iter", rec.iter}, {"row", i}, {"which", "mu"}},
                    mu(i));
      if (slack < -kMarginTol)
        add_witness(margins, {{"iter", rec.iter}, {"row", i}, {"which", "slack"}},
                    slack);
    }

    if (idx % 10 == 0) {
      Vector w(1 + view.r() + view.s());
      w(0) = rec.lambda;
      w.tail(view.r() + view.s()) = rec.y;
      const Matrix J = rho_jacobian(view, params, w);
      Eigen::JacobiSVD<Matrix> svd(J);
      const auto& sigma = svd.singularValues();
      const double ratio =
          sigma(0) > 0.0 ? sigma(sigma.size() - 1) / sigma(0) : 0.0;
      worst_ratio = std::min(worst_ratio, ratio);
      if (!(ratio > rank_tol))
        add_witness(rank, {{"iter", rec.iter}}, ratio);
    }
  }

  margins.detail = {{"worst", worst_margin}, {"tol", kMarginTol}};
  rank.detail = {{"worst_sigma_ratio", worst_ratio}, {"tol", rank_tol}};
  report.checks = {std::move(margins), std::move(rank)};
  report.notes.push_back(
      "accumulation behaviour of the exact curve near lambda = 1 is a limit "
      "property and is not checked numerically");
  return report;
}

}  // namespace hocp
