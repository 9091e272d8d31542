//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  constexpr double kRankTolerance = 1e-10;
  constexpr double kNullLoading = 0.1;

  nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  }

  nlohmann::json number_or_null(const std::optional<double> &v) {
    return v ? number_or_null(*v) : nlohmann::json(nullptr);
  }

  std::string format_number(double v, int precision = 4) {
    if (!std::isfinite(v))
      return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
  }

  std::string format_number(const std::optional<double> &v) {
    return v ? format_number(*v) : "undefined";
  }
}  // namespace

FisherInformation fisher_information(const ParamSystem &ps,
                                     const Eigen::VectorXd &theta,
                                     const Eigen::MatrixXd &s, double n,
                                     FimMode mode) {
  FisherInformation out;
  out.mode = mode;
  const Eigen::Index m = ps.size();

  if (mode == FimMode::kObserved) {
    const ObjectiveEval e = eval_mlw(ps, theta, SampleCovariance(s),
                                     Order::kHessian);
    out.information = (n / 2) * *e.hessian;
  } else {
    const ImpliedCovariance ic(ps, theta);
    Eigen::LLT<Eigen::MatrixXd> llt(ic.sigma());
    if (llt.info() != Eigen::Success)
      throw DomainError("implied covariance is not positive definite");
    const Eigen::Index p = ic.sigma().rows();
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    std::vector<Eigen::MatrixXd> v;
    for (const auto &d: ic.derivatives())
      v.push_back(inv * d);
    out.information.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        out.information(i, j) = out.information(j, i) =
            (n / 2) * v[i].cwiseProduct(v[j].transpose()).sum();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.information);
  const Eigen::VectorXd &lambda = eig.eigenvalues();
  const Eigen::MatrixXd &vec = eig.eigenvectors();
  const double top = m > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0;
  const double cutoff = kRankTolerance * std::max(top, 1e-300);

  out.covariance = Eigen::MatrixXd::Zero(m, m);
  std::set<Eigen::Index> null_params;
  for (Eigen::Index c = 0; c < m; ++c) {
    if (lambda[c] > cutoff) {
      out.covariance += vec.col(c) * vec.col(c).transpose() / lambda[c];
      continue;
    }
    out.singular = true;
    for (Eigen::Index i = 0; i < m; ++i)
      if (std::abs(vec(i, c)) > kNullLoading)
        null_params.insert(i);
  }
  out.unidentified.assign(null_params.begin(), null_params.end());
  return out;
}

double normal_p_value(double z) {
  if (!std::isfinite(z))
    return std::isnan(z) ? kNaN : 0.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

Inference p_values(const Eigen::VectorXd &theta, const FisherInformation &fim) {
  const Eigen::Index m = theta.size();
  if (fim.covariance.rows() != m)
    throw Error("information matrix does not match the parameter vector");

  Inference out;
  out.mode = fim.mode;
  out.pseudo_inverse = fim.singular;
  out.unidentified = fim.unidentified;
  out.se.resize(m);
  out.z.resize(m);
  out.pvalues.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double var = fim.covariance(i, i);
    const bool unidentified =
        std::find(fim.unidentified.begin(), fim.unidentified.end(), i)
        != fim.unidentified.end();
    if (!(var > 0) || unidentified) {
      out.se[i] = out.z[i] = out.pvalues[i] = kNaN;
      continue;
    }
    out.se[i] = std::sqrt(var);
    out.z[i] = theta[i] / out.se[i];
    out.pvalues[i] = normal_p_value(out.z[i]);
  }
  return out;
}

FitIndices fit_indices(const IndexInputs &in) {
  FitIndices r;
  const int moments = in.k * (in.k + 1) / 2;
  r.chi2 = in.n * in.f;
  r.dof = moments - in.m;
  r.chi2_baseline = in.n * in.f_baseline;
  r.dof_baseline = moments - in.m_baseline;
  r.loglik = in.loglik;

  if (r.dof > 0 && in.n > 1)
    r.rmsea = std::sqrt(std::max(0.0, (r.chi2 / r.dof - 1) / (in.n - 1)));
  if (r.chi2_baseline > 0) {
    r.gfi = 1 - r.chi2 / r.chi2_baseline;
    r.nfi = (r.chi2_baseline - r.chi2) / r.chi2_baseline;
    if (r.dof > 0)
      r.agfi = 1 - in.k * (in.k + 1) / (2.0 * r.dof) * (1 - *r.gfi);
  }
  if (r.dof > 0 && r.dof_baseline > 0) {
    const double ratio_b = r.chi2_baseline / r.dof_baseline;
    if (ratio_b != 1)
      r.tli = (ratio_b - r.chi2 / r.dof) / (ratio_b - 1);
    const double excess_b = r.chi2_baseline - r.dof_baseline;
    if (excess_b > 0)
      r.cfi = 1 - std::max(r.chi2 - r.dof, 0.0) / excess_b;
  }
  r.aic = 2 * (in.m - in.loglik);
  r.bic = std::log(in.n) * in.m - 2 * in.loglik;
  return r;
}

FitIndices fit_indices(const Model &model, const FitResult &fit,
                       const FitResult &baseline,
                       std::optional<double> loglik) {
  if (fit.objective != baseline.objective)
    throw Error("model and baseline were fitted with different objectives");

  const auto n = static_cast<double>(model.n());
  IndexInputs in;
  in.n = n;
  in.k = static_cast<int>(model.system().z_names().size());
  in.m = static_cast<int>(fit.theta.size());
  in.m_baseline = static_cast<int>(baseline.theta.size());
  in.f = fit.discrepancy;
  in.f_baseline = baseline.discrepancy;

  std::string convention = "user-supplied";
  if (loglik) {
    in.loglik = *loglik;
  } else {
    convention = "wishart-ratio: L = -(n/2) F_MLW";
    double f_mlw = fit.discrepancy;
    if (fit.objective != ObjectiveKind::kMLW) {
      try {
        const SampleCovariance s(model.sample_cov());
        f_mlw = discrepancy(
            ObjectiveKind::kMLW,
            eval_mlw(model.system(), fit.theta, s, Order::kValue).value, s);
      } catch (const Error &) {
        f_mlw = kNaN;
      }
    }
    in.loglik = -n / 2 * f_mlw;
  }
  FitIndices r = fit_indices(in);
  r.loglik_convention = convention;
  return r;
}

Model baseline_model(const Model &model) {
  return Model(ParamSystem::independence(model.system().z_names(),
                                         model.sample_cov()),
               model.sample_cov(), model.n());
}

FitResult fit_baseline(const Model &model, ObjectiveKind objective,
                       const OptimizerOptions &options) {
  const Model base = baseline_model(model);
  return minimize(base, objective, options, base.system().start());
}

Report make_report(const Model &model, const FitResult &fit,
                   std::optional<Inference> inference,
                   std::optional<FitIndices> indices) {
  Report r { fit.objective, fit.method,     fit.value,   fit.converged,
             fit.termination, {}, std::move(inference), std::move(indices) };
  const ParamSystem &ps = model.system();
  for (Eigen::Index i = 0; i < ps.size(); ++i) {
    ParameterRow row { ps.param(i).name, fit.theta[i], kNaN, kNaN, kNaN };
    if (r.inference) {
      row.se = r.inference->se[i];
      row.z = r.inference->z[i];
      row.p = r.inference->pvalues[i];
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::string format_report(const Report &report) {
  std::ostringstream os;
  os << "objective: " << objective_name(report.objective)
     << "  method: " << method_name(report.method)
     << "  value: " << format_number(report.value, 6)
     << "  converged: " << (report.converged ? "yes" : "no") << " ("
     << termination_name(report.termination) << ")\n\n";

  size_t width = 9;
  for (const auto &row: report.rows)
    width = std::max(width, row.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "parameter"
     << std::right << std::setw(12) << "estimate" << std::setw(12) << "se"
     << std::setw(10) << "z" << std::setw(10) << "p" << '\n';
  for (const auto &row: report.rows)
    os << std::left << std::setw(static_cast<int>(width)) << row.name
       << std::right << std::setw(12) << format_number(row.estimate)
       << std::setw(12) << format_number(row.se) << std::setw(10)
       << format_number(row.z, 3) << std::setw(10) << format_number(row.p)
       << '\n';

  if (report.inference) {
    os << "\nstandard errors from the "
       << (report.inference->mode == FimMode::kExpected ? "expected"
                                                        : "observed")
       << " information matrix";
    if (report.inference->pseudo_inverse)
      os << " (singular, pseudo-inverse used)";
    os << '\n';
    if (!report.inference->unidentified.empty()) {
      os << "unidentified:";
      for (Eigen::Index i: report.inference->unidentified)
        os << ' ' << report.rows[i].name;
      os << '\n';
    }
  }

  if (report.indices) {
    const FitIndices &f = *report.indices;
    os << "\nchi2       " << format_number(f.chi2) << "  (df " << f.dof
       << ")\nchi2 base  " << format_number(f.chi2_baseline) << "  (df "
       << f.dof_baseline << ")\nRMSEA      " << format_number(f.rmsea)
       << "\nGFI        " << format_number(f.gfi) << "\nAGFI       "
       << format_number(f.agfi) << "\nNFI        " << format_number(f.nfi)
       << "\nTLI        " << format_number(f.tli) << "\nCFI        "
       << format_number(f.cfi) << "\nAIC        " << format_number(f.aic)
       << "\nBIC        " << format_number(f.bic) << "\nL          "
       << format_number(f.loglik) << "  (" << f.loglik_convention << ")\n";
  }
  return os.str();
}

std::string report_json(const Report &report) {
  nlohmann::json j;
  j["objective"] = std::string(objective_name(report.objective));
  j["method"] = std::string(method_name(report.method));
  j["value"] = number_or_null(report.value);
  j["converged"] = report.converged;
  j["termination"] = std::string(termination_name(report.termination));

  j["parameters"] = nlohmann::json::array();
  for (const auto &row: report.rows)
    j["parameters"].push_back({ { "name", row.name },
                                { "estimate", number_or_null(row.estimate) },
                                { "se", number_or_null(row.se) },
                                { "z", number_or_null(row.z) },
                                { "p", number_or_null(row.p) } });

  if (report.inference) {
    j["fim"] = report.inference->mode == FimMode::kExpected ? "expected"
                                                            : "observed";
    j["pseudo_inverse"] = report.inference->pseudo_inverse;
    auto &u = j["unidentified"] = nlohmann::json::array();
    for (Eigen::Index i: report.inference->unidentified)
      u.push_back(report.rows[i].name);
  }

  if (report.indices) {
    const FitIndices &f = *report.indices;
    j["fit"] = { { "chi2", number_or_null(f.chi2) },
                 { "dof", f.dof },
                 { "chi2_baseline", number_or_null(f.chi2_baseline) },
                 { "dof_baseline", f.dof_baseline },
                 { "rmsea", number_or_null(f.rmsea) },
                 { "gfi", number_or_null(f.gfi) },
                 { "agfi", number_or_null(f.agfi) },
                 { "nfi", number_or_null(f.nfi) },
                 { "tli", number_or_null(f.tli) },
                 { "cfi", number_or_null(f.cfi) },
                 { "aic", number_or_null(f.aic) },
                 { "bic", number_or_null(f.bic) },
                 { "loglik", number_or_null(f.loglik) },
                 { "loglik_convention", f.loglik_convention } };
  }
  return j.dump(2) + "\n";
}

}  // namespace semforge
