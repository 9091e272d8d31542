//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/objective.hpp"

#include <cmath>
#include <vector>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  // tr(A B) for square A, B.
  double trace_product(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
    return a.cwiseProduct(b.transpose()).sum();
  }

  Eigen::MatrixXd symmetrize(const Eigen::MatrixXd &a) {
    return (a + a.transpose()) / 2;
  }

  void check_shape(const ParamSystem &ps, const Eigen::VectorXd &theta,
                   const SampleCovariance &s) {
    if (theta.size() != ps.size())
      throw Error("parameter vector has wrong length");
    if (s.dim() != static_cast<Eigen::Index>(ps.z_names().size()))
      throw DataError("sample covariance does not match the model");
  }

  // Fills gradient and (optionally) the part of the Hessian that involves
  // second derivatives of Sigma: tr[weight d2Sigma].
  void gradient_from_weight(const ImpliedCovariance &ic,
                            const Eigen::MatrixXd &weight,
                            const std::vector<Eigen::MatrixXd> &d_sigma,
                            ObjectiveEval &out, Order order) {
    const auto m = static_cast<Eigen::Index>(d_sigma.size());
    out.gradient.resize(m);
    for (Eigen::Index i = 0; i < m; ++i)
      out.gradient[i] = weight.cwiseProduct(d_sigma[i]).sum();

    if (order != Order::kHessian)
      return;
    Eigen::MatrixXd h(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        h(i, j) = h(j, i) = weight.cwiseProduct(ic.second_derivative(i, j))
                                .sum();
    out.hessian = std::move(h);
  }
}  // namespace

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "ULS")
    return ObjectiveKind::kULS;
  if (name == "GLS")
    return ObjectiveKind::kGLS;
  if (name == "MLW")
    return ObjectiveKind::kMLW;
  throw Error("unknown objective '" + std::string(name)
              + "' (expected ULS, GLS or MLW)");
}

std::string_view objective_name(ObjectiveKind kind) noexcept {
  switch (kind) {
  case ObjectiveKind::kULS:
    return "ULS";
  case ObjectiveKind::kGLS:
    return "GLS";
  case ObjectiveKind::kMLW:
    return "MLW";
  }
  return "";
}

SampleCovariance::SampleCovariance(Eigen::MatrixXd s): s_(std::move(s)) {
  if (s_.rows() != s_.cols())
    throw DataError("sample covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(s_);
  pd_ = s_.rows() > 0 && llt.info() == Eigen::Success
        && (llt.matrixL().toDenseMatrix().diagonal().array() > 0).all();
  if (pd_) {
    inv_ = llt.solve(Eigen::MatrixXd::Identity(s_.rows(), s_.cols()));
    log_det_ = 2 * llt.matrixLLT().diagonal().array().log().sum();
    pd_ = std::isfinite(log_det_) && inv_.allFinite();
  }
}

const Eigen::MatrixXd &SampleCovariance::inverse() const {
  if (!pd_)
    throw DataError("sample covariance matrix is not positive definite");
  return inv_;
}

double SampleCovariance::log_det() const {
  if (!pd_)
    throw DataError("sample covariance matrix is not positive definite");
  return log_det_;
}

ObjectiveEval eval_uls(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s, Order order) {
  check_shape(ps, theta, s);
  const ImpliedCovariance ic(ps, theta);
  const Eigen::MatrixXd r = ic.sigma() - s.matrix();

  ObjectiveEval out;
  out.value = r.squaredNorm();
  if (order == Order::kValue)
    return out;

  const auto d_sigma = ic.derivatives();
  gradient_from_weight(ic, 2 * r, d_sigma, out, order);
  if (out.hessian) {
    auto &h = *out.hessian;
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        h(i, j) += 2 * d_sigma[i].cwiseProduct(d_sigma[j]).sum();
        h(j, i) = h(i, j);
      }
  }
  return out;
}

ObjectiveEval eval_gls(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s, Order order) {
  check_shape(ps, theta, s);
  const Eigen::MatrixXd &w = s.inverse();
  const ImpliedCovariance ic(ps, theta);
  const Eigen::Index p = s.dim();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p) - ic.sigma() * w;

  ObjectiveEval out;
  out.value = trace_product(a, a);
  if (order == Order::kValue)
    return out;

  // d tr(A^2) = -2 tr(W A dSigma)
  const Eigen::MatrixXd weight = symmetrize(-2 * (w * a).transpose());
  const auto d_sigma = ic.derivatives();
  gradient_from_weight(ic, weight, d_sigma, out, order);
  if (out.hessian) {
    std::vector<Eigen::MatrixXd> u;
    for (const auto &d: d_sigma)
      u.push_back(d * w);
    auto &h = *out.hessian;
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        h(i, j) += 2 * trace_product(u[j], u[i]);
        h(j, i) = h(i, j);
      }
  }
  return out;
}

ObjectiveEval eval_mlw(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s, Order order) {
  check_shape(ps, theta, s);
  const ImpliedCovariance ic(ps, theta);
  const Eigen::MatrixXd &sigma = ic.sigma();
  const Eigen::Index p = sigma.rows();

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success
      || !(llt.matrixLLT().diagonal().array() > 0).all())
    throw DomainError("implied covariance is not positive definite");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const double log_det = 2 * llt.matrixLLT().diagonal().array().log().sum();

  ObjectiveEval out;
  out.value = s.matrix().cwiseProduct(inv).sum() + log_det;
  if (!std::isfinite(out.value))
    throw DomainError("likelihood is not finite");
  if (order == Order::kValue)
    return out;

  const Eigen::MatrixXd ps_inv = inv * s.matrix();  // Sigma^-1 S
  const Eigen::MatrixXd weight = symmetrize(inv - ps_inv * inv);
  const auto d_sigma = ic.derivatives();
  gradient_from_weight(ic, weight, d_sigma, out, order);
  if (out.hessian) {
    std::vector<Eigen::MatrixXd> v;
    for (const auto &d: d_sigma)
      v.push_back(inv * d);
    auto &h = *out.hessian;
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const Eigen::MatrixXd vji = v[j] * v[i];
        h(i, j) += -vji.trace() + trace_product(v[j] * ps_inv, v[i])
                   + trace_product(ps_inv, vji);
        h(j, i) = h(i, j);
      }
  }
  return out;
}

ObjectiveEval evaluate(ObjectiveKind kind, const ParamSystem &ps,
                       const Eigen::VectorXd &theta, const SampleCovariance &s,
                       Order order) {
  switch (kind) {
  case ObjectiveKind::kULS:
    return eval_uls(ps, theta, s, order);
  case ObjectiveKind::kGLS:
    return eval_gls(ps, theta, s, order);
  case ObjectiveKind::kMLW:
    return eval_mlw(ps, theta, s, order);
  }
  throw Error("unknown objective");
}

double discrepancy(ObjectiveKind kind, double value,
                   const SampleCovariance &s) {
  if (kind != ObjectiveKind::kMLW)
    return value;
  return value - s.log_det() - static_cast<double>(s.dim());
}

}  // namespace semforge
