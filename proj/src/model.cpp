//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  constexpr double kPsiVarianceStart = 0.05;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<std::string> sorted(const std::set<std::string> &names) {
    return { names.begin(), names.end() };
  }

  bool contains(const std::vector<std::string> &v, std::string_view name) {
    return std::binary_search(v.begin(), v.end(), name);
  }

  Eigen::Index index_of(const std::vector<std::string> &v,
                        std::string_view name) {
    auto it = std::find(v.begin(), v.end(), name);
    return it == v.end() ? -1 : it - v.begin();
  }

  struct Cell {
    bool free = false;
    double value = 0;  // fixed value or start
    ParamKind kind = ParamKind::kRegression;
    std::string name;
  };

  using CellKey = std::tuple<MatrixId, Eigen::Index, Eigen::Index>;

  // Cells of symmetric matrices are stored once, with row >= col.
  CellKey sym_key(MatrixId id, Eigen::Index i, Eigen::Index j) {
    return { id, std::max(i, j), std::min(i, j) };
  }

  bool symmetric(MatrixId id) {
    return id == MatrixId::kPsi || id == MatrixId::kTheta;
  }

  std::string cov_name(const std::vector<std::string> &order, Eigen::Index i,
                       Eigen::Index j) {
    if (i > j)
      std::swap(i, j);
    return order[i] + "~~" + order[j];
  }

  Cell variance_cell(std::string name, double start) {
    return { true, start, ParamKind::kVariance, std::move(name) };
  }

  Cell covariance_cell(std::string name, double start) {
    return { true, start, ParamKind::kCovariance, std::move(name) };
  }

  Cell fixed_cell(double value) {
    return { false, value, ParamKind::kRegression, {} };
  }
}  // namespace

std::vector<std::string> VariableTaxonomy::omega() const {
  std::vector<std::string> out;
  out.insert(out.end(), eta_exo.begin(), eta_exo.end());
  out.insert(out.end(), eta_endo.begin(), eta_endo.end());
  out.insert(out.end(), x_endo.begin(), x_endo.end());
  out.insert(out.end(), x_exo.begin(), x_exo.end());
  return out;
}

std::vector<std::string> VariableTaxonomy::z() const {
  std::vector<std::string> out = y;
  out.insert(out.end(), x_endo.begin(), x_endo.end());
  out.insert(out.end(), x_exo.begin(), x_exo.end());
  return out;
}

bool VariableTaxonomy::is_latent(std::string_view name) const {
  return contains(eta_exo, name) || contains(eta_endo, name);
}

bool VariableTaxonomy::is_manifest(std::string_view name) const {
  return contains(y, name);
}

VariableTaxonomy classify(const ModelDescription &desc) {
  std::set<std::string> latent, manifest, regression, dependent, cov;

  for (const Statement &st: desc.statements) {
    switch (st.kind) {
    case StatementKind::kLoading:
      latent.insert(st.lhs.front());
      for (const Term &t: st.rhs)
        manifest.insert(t.name);
      break;
    case StatementKind::kRegression:
      regression.insert(st.lhs.front());
      dependent.insert(st.lhs.front());
      for (const Term &t: st.rhs)
        regression.insert(t.name);
      break;
    case StatementKind::kCovariance:
      cov.insert(st.lhs.front());
      cov.insert(st.rhs.front().name);
      break;
    case StatementKind::kTypeDecl:
      break;
    }
  }

  for (const auto &name: latent)
    if (manifest.count(name))
      throw ModelError("variable '" + name
                       + "' is both a latent and a manifest variable");
  for (const auto &name: regression)
    if (manifest.count(name))
      throw ModelError("manifest variable '" + name
                       + "' cannot take part in a regression");

  for (const Statement &st: desc.statements) {
    if (st.kind != StatementKind::kCovariance)
      continue;
    const auto &a = st.lhs.front(), &b = st.rhs.front().name;
    if (manifest.count(a) != manifest.count(b))
      throw ModelError("covariance '" + a + " ~~ " + b
                       + "' mixes a manifest and a structural variable");
  }

  std::set<std::string> structural = regression;
  structural.insert(latent.begin(), latent.end());
  for (const auto &name: cov)
    if (!manifest.count(name))
      structural.insert(name);

  VariableTaxonomy tax;
  for (const auto &name: structural) {
    const bool endo = dependent.count(name) > 0;
    if (latent.count(name))
      (endo ? tax.eta_endo : tax.eta_exo).push_back(name);
    else
      (endo ? tax.x_endo : tax.x_exo).push_back(name);
  }
  tax.y = sorted(manifest);
  return tax;
}

std::string first_indicator(std::vector<std::string> manifests) {
  return *std::min_element(manifests.begin(), manifests.end());
}

std::optional<Eigen::Index> ParamSystem::find(std::string_view name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name)
      return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

Eigen::VectorXd ParamSystem::lower_bounds() const {
  Eigen::VectorXd lo(size());
  for (Eigen::Index i = 0; i < size(); ++i)
    lo[i] = params_[i].lower;
  return lo;
}

Eigen::VectorXd ParamSystem::upper_bounds() const {
  Eigen::VectorXd hi(size());
  for (Eigen::Index i = 0; i < size(); ++i)
    hi[i] = params_[i].upper;
  return hi;
}

std::vector<Placement> ParamSystem::placements() const {
  std::vector<Placement> out;
  auto fixed = [&](MatrixId id, const Eigen::MatrixXd &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (m(i, j) != 0)
          out.push_back({ id, i, j, -1, m(i, j) });
  };
  fixed(MatrixId::kBeta, fixed_.beta);
  fixed(MatrixId::kLambda, fixed_.lambda);
  fixed(MatrixId::kPsi, fixed_.psi);
  fixed(MatrixId::kTheta, fixed_.theta);

  for (Eigen::Index k = 0; k < size(); ++k) {
    const Parameter &p = params_[k];
    out.push_back({ p.matrix, p.row, p.col, static_cast<int>(k), 0.0 });
    if (symmetric(p.matrix) && p.row != p.col)
      out.push_back({ p.matrix, p.col, p.row, static_cast<int>(k), 0.0 });
  }
  return out;
}

ModelMatrices ParamSystem::matrices(const Eigen::VectorXd &theta) const {
  ModelMatrices m = fixed_;
  for (Eigen::Index k = 0; k < size(); ++k) {
    const Parameter &p = params_[k];
    Eigen::MatrixXd *target = nullptr;
    switch (p.matrix) {
    case MatrixId::kBeta:
      target = &m.beta;
      break;
    case MatrixId::kLambda:
      target = &m.lambda;
      break;
    case MatrixId::kPsi:
      target = &m.psi;
      break;
    case MatrixId::kTheta:
      target = &m.theta;
      break;
    }
    (*target)(p.row, p.col) = theta[k];
    if (symmetric(p.matrix))
      (*target)(p.col, p.row) = theta[k];
  }
  return m;
}

Eigen::VectorXd ParamSystem::read(const ModelMatrices &m) const {
  Eigen::VectorXd theta(size());
  for (Eigen::Index k = 0; k < size(); ++k) {
    const Parameter &p = params_[k];
    switch (p.matrix) {
    case MatrixId::kBeta:
      theta[k] = m.beta(p.row, p.col);
      break;
    case MatrixId::kLambda:
      theta[k] = m.lambda(p.row, p.col);
      break;
    case MatrixId::kPsi:
      theta[k] = m.psi(p.row, p.col);
      break;
    case MatrixId::kTheta:
      theta[k] = m.theta(p.row, p.col);
      break;
    }
  }
  return theta;
}

ParamSystem build(const ModelDescription &desc, const Dataset &data) {
  for (const Statement &st: desc.statements) {
    if (st.kind != StatementKind::kTypeDecl)
      continue;
    std::string names;
    for (const auto &n: st.lhs)
      names += (names.empty() ? "" : ", ") + n;
    throw ModelError("ordinal variables are not supported by estimation ("
                     + names + ")");
  }

  ParamSystem ps;
  ps.taxonomy_ = classify(desc);
  const VariableTaxonomy &tax = ps.taxonomy_;
  ps.omega_ = tax.omega();
  ps.z_ = tax.z();
  const auto &omega = ps.omega_;
  const auto &z = ps.z_;
  if (omega.empty() && z.empty())
    throw ModelError("model has no variables");

  for (const auto &name: z)
    if (!data.has_column(name))
      throw DataError("dataset has no column for variable '" + name + "'");
  if (data.n() < 2)
    throw DataError("dataset needs at least two rows");

  const auto n_omega = static_cast<Eigen::Index>(omega.size());
  const auto n_z = static_cast<Eigen::Index>(z.size());
  const auto n_y = static_cast<Eigen::Index>(tax.n_y());
  const auto n_eta = static_cast<Eigen::Index>(tax.n_eta());
  const Eigen::MatrixXd s = data.covariance(z);

  std::map<CellKey, Cell> cells;

  // B: one entry per regression edge.
  for (const Statement &st: desc.statements) {
    if (st.kind != StatementKind::kRegression)
      continue;
    const auto &lhs = st.lhs.front();
    for (const Term &t: st.rhs) {
      if (t.name == lhs)
        throw ModelError("variable '" + lhs + "' regressed on itself");
      CellKey key { MatrixId::kBeta, index_of(omega, lhs),
                    index_of(omega, t.name) };
      cells[key] = t.fixed ? fixed_cell(*t.fixed)
                           : Cell { true, 0.0, ParamKind::kRegression,
                                    lhs + "~" + t.name };
    }
  }

  // Lambda: identity for observed-structural variables, loadings for latents.
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(tax.n_x()); ++k)
    cells[{ MatrixId::kLambda, n_y + k, n_eta + k }] = fixed_cell(1.0);

  std::map<std::string, std::vector<const Term *>> loadings;
  for (const Statement &st: desc.statements)
    if (st.kind == StatementKind::kLoading)
      for (const Term &t: st.rhs)
        loadings[st.lhs.front()].push_back(&t);

  for (const auto &[latent, terms]: loadings) {
    if (terms.empty())
      throw ModelError("latent variable '" + latent
                       + "' has no manifest variables");
    std::vector<std::string> names;
    bool user_fixed = false;
    for (const Term *t: terms) {
      names.push_back(t->name);
      user_fixed = user_fixed || t->fixed.has_value();
    }
    const std::string first = first_indicator(names);
    const Eigen::Index col = index_of(omega, latent);
    const Eigen::Index first_row = index_of(z, first);
    const double first_var = s(first_row, first_row);

    for (const Term *t: terms) {
      const Eigen::Index row = index_of(z, t->name);
      CellKey key { MatrixId::kLambda, row, col };
      if (t->fixed) {
        cells[key] = fixed_cell(*t->fixed);
      } else if (t->name == first && !user_fixed) {
        cells[key] = fixed_cell(1.0);
      } else {
        const double slope = first_var > 0 ? s(row, first_row) / first_var
                                           : 1.0;
        cells[key] = { true, slope, ParamKind::kLoading,
                       latent + "=~" + t->name };
      }
    }
  }

  // Psi.
  const auto n_eta_exo = static_cast<Eigen::Index>(tax.eta_exo.size());
  const auto n_x_exo = static_cast<Eigen::Index>(tax.x_exo.size());
  const Eigen::Index x_exo_begin = n_omega - n_x_exo;

  for (Eigen::Index i = 0; i < n_eta_exo; ++i) {
    cells[sym_key(MatrixId::kPsi, i, i)] = variance_cell(
        cov_name(omega, i, i), kPsiVarianceStart);
    for (Eigen::Index j = 0; j < i; ++j)
      cells[sym_key(MatrixId::kPsi, i, j)] = covariance_cell(
          cov_name(omega, i, j), 0.0);
  }

  for (Eigen::Index i = x_exo_begin; i < n_omega; ++i) {
    const Eigen::Index zi = n_z - (n_omega - i);
    for (Eigen::Index j = x_exo_begin; j <= i; ++j) {
      const Eigen::Index zj = n_z - (n_omega - j);
      if (s(zi, zj) != 0)
        cells[sym_key(MatrixId::kPsi, i, j)] = fixed_cell(s(zi, zj));
    }
  }

  std::set<std::string> regressors;
  for (const Statement &st: desc.statements)
    if (st.kind == StatementKind::kRegression)
      for (const Term &t: st.rhs)
        regressors.insert(t.name);

  for (Eigen::Index i = n_eta_exo; i < x_exo_begin; ++i) {
    cells[sym_key(MatrixId::kPsi, i, i)] = variance_cell(
        cov_name(omega, i, i), kPsiVarianceStart);
    if (regressors.count(omega[i]))
      continue;
    for (Eigen::Index j = n_eta_exo; j < i; ++j)
      if (!regressors.count(omega[j]))
        cells[sym_key(MatrixId::kPsi, i, j)] = covariance_cell(
            cov_name(omega, i, j), 0.0);
  }

  // Theta: free manifest variances.
  for (Eigen::Index i = 0; i < n_y; ++i)
    cells[sym_key(MatrixId::kTheta, i, i)] = variance_cell(
        cov_name(z, i, i), s(i, i) / 2);

  // User covariances.
  for (const Statement &st: desc.statements) {
    if (st.kind != StatementKind::kCovariance)
      continue;
    const auto &a = st.lhs.front();
    const Term &t = st.rhs.front();
    const bool manifest = tax.is_manifest(a);
    const auto &order = manifest ? z : omega;
    const MatrixId id = manifest ? MatrixId::kTheta : MatrixId::kPsi;
    const Eigen::Index i = index_of(order, a), j = index_of(order, t.name);
    const CellKey key = sym_key(id, i, j);

    if (t.fixed) {
      cells[key] = fixed_cell(*t.fixed);
      continue;
    }
    auto it = cells.find(key);
    if (it != cells.end() && it->second.free)
      continue;

    double start = i == j ? kPsiVarianceStart : 0.0;
    if (it != cells.end())
      start = it->second.value;
    cells[key] = i == j ? variance_cell(cov_name(order, i, j), start)
                        : covariance_cell(cov_name(order, i, j), start);
  }

  ps.fixed_ = {
    Eigen::MatrixXd::Zero(n_omega, n_omega),
    Eigen::MatrixXd::Zero(n_z, n_omega),
    Eigen::MatrixXd::Zero(n_omega, n_omega),
    Eigen::MatrixXd::Zero(n_z, n_z),
  };

  std::vector<double> start;
  for (const auto &[key, cell]: cells) {
    const auto [id, row, col] = key;
    if (cell.free) {
      const double lower = cell.kind == ParamKind::kVariance ? 0.0 : -kInf;
      ps.params_.push_back({ cell.name, cell.kind, id, row, col, lower, kInf });
      start.push_back(std::max(cell.value, lower));
      continue;
    }
    switch (id) {
    case MatrixId::kBeta:
      ps.fixed_.beta(row, col) = cell.value;
      break;
    case MatrixId::kLambda:
      ps.fixed_.lambda(row, col) = cell.value;
      break;
    case MatrixId::kPsi:
      ps.fixed_.psi(row, col) = ps.fixed_.psi(col, row) = cell.value;
      break;
    case MatrixId::kTheta:
      ps.fixed_.theta(row, col) = ps.fixed_.theta(col, row) = cell.value;
      break;
    }
  }
  ps.start_ = Eigen::Map<Eigen::VectorXd>(start.data(),
                                          static_cast<Eigen::Index>(start.size()));
  return ps;
}

ParamSystem
ParamSystem::independence(const std::vector<std::string> &observed,
                          const Eigen::MatrixXd &sample_cov) {
  ParamSystem ps;
  ps.taxonomy_.x_exo = observed;
  std::sort(ps.taxonomy_.x_exo.begin(), ps.taxonomy_.x_exo.end());
  ps.omega_ = observed;
  ps.z_ = observed;

  const auto k = static_cast<Eigen::Index>(observed.size());
  ps.fixed_ = {
    Eigen::MatrixXd::Zero(k, k),
    Eigen::MatrixXd::Identity(k, k),
    Eigen::MatrixXd::Zero(k, k),
    Eigen::MatrixXd::Zero(k, k),
  };
  ps.start_.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    ps.params_.push_back({ cov_name(observed, i, i), ParamKind::kVariance,
                           MatrixId::kPsi, i, i, 0.0, kInf });
    ps.start_[i] = sample_cov(i, i);
  }
  return ps;
}

ImpliedCovariance::ImpliedCovariance(const ParamSystem &ps,
                                     const Eigen::VectorXd &theta)
    : ps_(&ps), m_(ps.matrices(theta)) {
  const Eigen::Index n = m_.beta.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - m_.beta;
  if (n > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12))
      throw SingularError("I - B is singular");
    inv_ = lu.inverse();
  } else {
    inv_.resize(0, 0);
  }
  lc_ = m_.lambda * inv_;
  omega_cov_ = inv_ * m_.psi * inv_.transpose();
  t_ = m_.lambda * omega_cov_;
  sigma_ = t_ * m_.lambda.transpose() + m_.theta;
  sigma_ = (sigma_ + sigma_.transpose()) / 2;
}

Eigen::MatrixXd ImpliedCovariance::derivative(Eigen::Index param) const {
  const Parameter &p = ps_->param(param);
  const Eigen::Index i = p.row, j = p.col;
  switch (p.matrix) {
  case MatrixId::kBeta: {
    Eigen::MatrixXd x = lc_.col(i) * t_.col(j).transpose();
    return x + x.transpose();
  }
  case MatrixId::kLambda: {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(t_.rows(), t_.rows());
    x.row(i) = t_.col(j).transpose();
    return x + x.transpose();
  }
  case MatrixId::kPsi: {
    Eigen::MatrixXd x = lc_.col(i) * lc_.col(j).transpose();
    return i == j ? x : Eigen::MatrixXd(x + x.transpose());
  }
  case MatrixId::kTheta: {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(sigma_.rows(), sigma_.cols());
    x(i, j) = 1;
    x(j, i) = 1;
    return x;
  }
  }
  return {};
}

std::vector<Eigen::MatrixXd> ImpliedCovariance::derivatives() const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(ps_->size());
  for (Eigen::Index k = 0; k < ps_->size(); ++k)
    out.push_back(derivative(k));
  return out;
}

Eigen::MatrixXd ImpliedCovariance::seed(Eigen::Index param) const {
  const Parameter &p = ps_->param(param);
  const Eigen::MatrixXd *shape = nullptr;
  switch (p.matrix) {
  case MatrixId::kBeta:
    shape = &m_.beta;
    break;
  case MatrixId::kLambda:
    shape = &m_.lambda;
    break;
  case MatrixId::kPsi:
    shape = &m_.psi;
    break;
  case MatrixId::kTheta:
    shape = &m_.theta;
    break;
  }
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(shape->rows(), shape->cols());
  e(p.row, p.col) = 1;
  if (symmetric(p.matrix))
    e(p.col, p.row) = 1;
  return e;
}

Eigen::MatrixXd ImpliedCovariance::d_inverse(Eigen::Index param) const {
  return inv_ * seed(param) * inv_;
}

Eigen::MatrixXd ImpliedCovariance::second_derivative(Eigen::Index p,
                                                     Eigen::Index q) const {
  const MatrixId mp = ps_->param(p).matrix, mq = ps_->param(q).matrix;
  const Eigen::Index nz = sigma_.rows(), nw = inv_.rows();
  if (mp == MatrixId::kTheta || mq == MatrixId::kTheta)
    return Eigen::MatrixXd::Zero(nz, nz);

  const Eigen::MatrixXd zero_w = Eigen::MatrixXd::Zero(nw, nw);
  const Eigen::MatrixXd &c = inv_, &psi = m_.psi, &lambda = m_.lambda;

  auto d_c = [&](Eigen::Index k, MatrixId id) {
    return id == MatrixId::kBeta ? d_inverse(k) : zero_w;
  };
  auto d_psi = [&](Eigen::Index k, MatrixId id) {
    return id == MatrixId::kPsi ? seed(k) : zero_w;
  };
  auto d_omega_cov = [&](const Eigen::MatrixXd &dc,
                         const Eigen::MatrixXd &dpsi) {
    Eigen::MatrixXd x = dc * psi * c.transpose();
    return Eigen::MatrixXd(x + x.transpose() + c * dpsi * c.transpose());
  };

  const Eigen::MatrixXd dcp = d_c(p, mp), dcq = d_c(q, mq);
  const Eigen::MatrixXd dpsip = d_psi(p, mp), dpsiq = d_psi(q, mq);

  Eigen::MatrixXd d2c = zero_w;
  if (mp == MatrixId::kBeta && mq == MatrixId::kBeta) {
    const Eigen::MatrixXd ep = seed(p), eq = seed(q);
    d2c = c * eq * c * ep * c + c * ep * c * eq * c;
  }

  Eigen::MatrixXd x = d2c * psi * c.transpose() + dcp * psi * dcq.transpose()
                      + dcq * dpsip * c.transpose()
                      + dcp * dpsiq * c.transpose();
  const Eigen::MatrixXd d2_omega_cov = x + x.transpose();

  Eigen::MatrixXd out = lambda * d2_omega_cov * lambda.transpose();
  if (mp == MatrixId::kLambda || mq == MatrixId::kLambda) {
    const Eigen::MatrixXd zero_l = Eigen::MatrixXd::Zero(nz, nw);
    const Eigen::MatrixXd dlp = mp == MatrixId::kLambda ? seed(p) : zero_l;
    const Eigen::MatrixXd dlq = mq == MatrixId::kLambda ? seed(q) : zero_l;
    Eigen::MatrixXd y = dlp * omega_cov_ * dlq.transpose()
                        + dlp * d_omega_cov(dcq, dpsiq) * lambda.transpose()
                        + dlq * d_omega_cov(dcp, dpsip) * lambda.transpose();
    out += y + y.transpose();
  }
  return out;
}

Eigen::MatrixXd sigma(const ParamSystem &ps, const Eigen::VectorXd &theta) {
  return ImpliedCovariance(ps, theta).sigma();
}

Model::Model(ModelDescription desc, const Dataset &data)
    : desc_(std::move(desc)), ps_(build(desc_, data)),
      s_(data.covariance(ps_.z_names())), n_(data.n()) { }

Model::Model(ParamSystem ps, Eigen::MatrixXd sample_cov, Eigen::Index n)
    : ps_(std::move(ps)), s_(std::move(sample_cov)), n_(n) { }

std::string_view matrix_name(MatrixId id) noexcept {
  switch (id) {
  case MatrixId::kBeta:
    return "Beta";
  case MatrixId::kLambda:
    return "Lambda";
  case MatrixId::kPsi:
    return "Psi";
  case MatrixId::kTheta:
    return "Theta";
  }
  return "";
}

}  // namespace semforge
