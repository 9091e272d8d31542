//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kArmijo = 1e-4;

  class Evaluator {
  public:
    explicit Evaluator(const ObjectiveFunction &f): f_(f) { }

    bool operator()(const Eigen::VectorXd &x, double &value,
                    Eigen::VectorXd &grad) {
      ++count_;
      grad.resize(0);
      try {
        value = f_(x, &grad);
      } catch (const Error &) {
        return false;
      }
      return std::isfinite(value) && grad.size() == x.size()
             && grad.allFinite();
    }

    int count() const { return count_; }

  private:
    const ObjectiveFunction &f_;
    int count_ = 0;
  };

  double relative_decrease(double f_old, double f_new) {
    return (f_old - f_new)
           / std::max({ std::abs(f_old), std::abs(f_new), 1.0 });
  }

  OptimOutcome domain_failure(Eigen::VectorXd x, const Evaluator &eval) {
    OptimOutcome out;
    out.x = std::move(x);
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.evaluations = eval.count();
    out.termination = Termination::kDomainFailure;
    return out;
  }

  struct LineSearchResult {
    bool accepted = false;
    bool any_finite = false;
    Eigen::VectorXd x;
    Eigen::VectorXd g;
    double f = 0;
  };

  // Backtracking along x + alpha d, alpha = initial, initial / 2, ...
  LineSearchResult backtrack(Evaluator &eval, const Bounds &bounds,
                             const Eigen::VectorXd &x, double f,
                             const Eigen::VectorXd &d, double slope,
                             double initial, int max_halvings) {
    LineSearchResult r;
    double alpha = initial;
    for (int k = 0; k <= max_halvings; ++k, alpha /= 2) {
      Eigen::VectorXd xn = bounds.project(x + alpha * d);
      double fn;
      Eigen::VectorXd gn;
      if (!eval(xn, fn, gn))
        continue;
      r.any_finite = true;
      if (fn <= f + kArmijo * alpha * slope) {
        r.accepted = true;
        r.x = std::move(xn);
        r.g = std::move(gn);
        r.f = fn;
        return r;
      }
    }
    return r;
  }

  // Powell-damped BFGS update of a dense Hessian approximation.
  void damped_bfgs_update(Eigen::MatrixXd &h, const Eigen::VectorXd &s,
                          const Eigen::VectorXd &y) {
    const Eigen::VectorXd hs = h * s;
    const double shs = s.dot(hs);
    if (!(shs > 0))
      return;
    const double sy = s.dot(y);
    Eigen::VectorXd r = y;
    if (sy < 0.2 * shs) {
      const double th = 0.8 * shs / (shs - sy);
      r = th * y + (1 - th) * hs;
    }
    const double sr = s.dot(r);
    if (!(sr > 0))
      return;
    h += r * r.transpose() / sr - hs * hs.transpose() / shs;
    h = (h + h.transpose()) / 2;
  }

  OptimOutcome run_slsqp(const ObjectiveFunction &f, const Bounds &bounds,
                         const Eigen::VectorXd &x0,
                         const OptimizerOptions &opt, int max_it) {
    Evaluator eval(f);
    OptimOutcome out;
    out.x = bounds.project(x0);
    Eigen::VectorXd g;
    if (!eval(out.x, out.value, g))
      return domain_failure(out.x, eval);

    const Eigen::Index n = out.x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool fresh = true;
    bool scaled = false;
    out.termination = Termination::kMaxIterations;

    for (out.iterations = 0; out.iterations < max_it; ++out.iterations) {
      if (bounds.projected_gradient_norm(out.x, g) <= opt.gradient_tolerance) {
        out.termination = Termination::kGradientTolerance;
        break;
      }

      const Eigen::VectorXd d = solve_box_qp(h, g, bounds.lower - out.x,
                                             bounds.upper - out.x);
      const double slope = g.dot(d);
      LineSearchResult ls;
      if (slope < 0) {
        // An unscaled identity model gives no length information.
        const double initial = scaled ? 1.0 : std::min(1.0, 1.0 / d.norm());
        ls = backtrack(eval, bounds, out.x, out.value, d, slope, initial,
                       opt.max_halvings);
      }

      if (!ls.accepted) {
        if (!fresh) {
          h.setIdentity();
          fresh = true;
          scaled = false;
          continue;
        }
        out.termination = slope < 0 && !ls.any_finite
                              ? Termination::kDomainFailure
                              : Termination::kLineSearch;
        break;
      }

      const Eigen::VectorXd s = ls.x - out.x, y = ls.g - g;
      const double decrease = relative_decrease(out.value, ls.f);
      out.x = std::move(ls.x);
      out.value = ls.f;
      g = std::move(ls.g);

      if (!scaled) {
        const double sy = s.dot(y);
        if (sy > 0) {
          h = Eigen::MatrixXd::Identity(n, n) * (y.squaredNorm() / sy);
          scaled = true;
        }
      }
      damped_bfgs_update(h, s, y);
      fresh = false;

      if (decrease <= opt.function_tolerance) {
        ++out.iterations;
        out.termination = Termination::kFunctionTolerance;
        break;
      }
    }

    out.evaluations = eval.count();
    out.converged = out.termination == Termination::kGradientTolerance
                    || out.termination == Termination::kFunctionTolerance;
    return out;
  }

  // Dense limited-memory BFGS matrix: theta I updated with stored pairs.
  Eigen::MatrixXd lbfgs_matrix(const std::deque<Eigen::VectorXd> &ss,
                               const std::deque<Eigen::VectorXd> &ys,
                               Eigen::Index n) {
    double theta = 1;
    if (!ss.empty())
      theta = ys.back().squaredNorm() / ss.back().dot(ys.back());
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n) * theta;
    for (size_t k = 0; k < ss.size(); ++k) {
      const Eigen::VectorXd bs = b * ss[k];
      b += ys[k] * ys[k].transpose() / ys[k].dot(ss[k])
           - bs * bs.transpose() / ss[k].dot(bs);
    }
    return (b + b.transpose()) / 2;
  }

  // Generalized Cauchy point followed by subspace minimisation. Returns the
  // target point xbar; the search direction is xbar - x.
  Eigen::VectorXd lbfgsb_target(const Eigen::MatrixXd &b,
                                const Eigen::VectorXd &x,
                                const Eigen::VectorXd &g,
                                const Bounds &bounds) {
    const Eigen::Index n = x.size();
    const Eigen::VectorXd &lo = bounds.lower, &hi = bounds.upper;

    Eigen::VectorXd t(n), d = -g, z = Eigen::VectorXd::Zero(n);
    std::vector<bool> at_bound(n, false);
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (g[i] < 0 && hi[i] < kInf)
        t[i] = (x[i] - hi[i]) / g[i];
      else if (g[i] > 0 && lo[i] > -kInf)
        t[i] = (x[i] - lo[i]) / g[i];
      else
        t[i] = kInf;

      if (t[i] <= 0) {
        d[i] = 0;
        at_bound[i] = true;
      } else if (t[i] < kInf) {
        order.push_back(i);
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index c) { return t[a] < t[c]; });

    double t_old = 0;
    size_t k = 0;
    Eigen::VectorXd bd = b * d;
    double fp = g.dot(d), fpp = d.dot(bd);
    while (fp < 0 && fpp > 0) {
      const double t_next = k < order.size() ? t[order[k]] : kInf;
      const double dt = t_next - t_old;
      const double dt_min = -fp / fpp;
      if (dt_min < dt) {
        z += dt_min * d;
        break;
      }
      z += dt * d;
      t_old = t_next;
      while (k < order.size() && t[order[k]] == t_next) {
        const Eigen::Index i = order[k++];
        z[i] = (d[i] > 0 ? hi[i] : lo[i]) - x[i];
        d[i] = 0;
        at_bound[i] = true;
      }
      bd = b * d;
      fp = g.dot(d) + z.dot(bd);
      fpp = d.dot(bd);
    }

    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!at_bound[i])
        free.push_back(i);
    if (free.empty())
      return bounds.project(x + z);

    const auto nf = static_cast<Eigen::Index>(free.size());
    const Eigen::VectorXd r = g + b * z;
    Eigen::MatrixXd bff(nf, nf);
    Eigen::VectorXd rf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      rf[a] = r[free[a]];
      for (Eigen::Index c = 0; c < nf; ++c)
        bff(a, c) = b(free[a], free[c]);
    }
    const Eigen::VectorXd step = bff.ldlt().solve(-rf);
    if (!step.allFinite())
      return bounds.project(x + z);

    double alpha = 1;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      const double pos = x[i] + z[i];
      if (step[a] > 0 && hi[i] < kInf)
        alpha = std::min(alpha, (hi[i] - pos) / step[a]);
      else if (step[a] < 0 && lo[i] > -kInf)
        alpha = std::min(alpha, (lo[i] - pos) / step[a]);
    }
    alpha = std::max(alpha, 0.0);
    for (Eigen::Index a = 0; a < nf; ++a)
      z[free[a]] += alpha * step[a];
    return bounds.project(x + z);
  }

  OptimOutcome run_lbfgsb(const ObjectiveFunction &f, const Bounds &bounds,
                          const Eigen::VectorXd &x0,
                          const OptimizerOptions &opt, int max_it) {
    Evaluator eval(f);
    OptimOutcome out;
    out.x = bounds.project(x0);
    Eigen::VectorXd g;
    if (!eval(out.x, out.value, g))
      return domain_failure(out.x, eval);

    const Eigen::Index n = out.x.size();
    std::deque<Eigen::VectorXd> ss, ys;
    out.termination = Termination::kMaxIterations;

    for (out.iterations = 0; out.iterations < max_it; ++out.iterations) {
      if (bounds.projected_gradient_norm(out.x, g) <= opt.gradient_tolerance) {
        out.termination = Termination::kGradientTolerance;
        break;
      }

      const Eigen::MatrixXd b = lbfgs_matrix(ss, ys, n);
      const Eigen::VectorXd d = lbfgsb_target(b, out.x, g, bounds) - out.x;
      const double slope = g.dot(d);

      LineSearchResult ls;
      if (slope < 0) {
        const double initial = ss.empty() && out.iterations == 0
                                   ? std::min(1.0, 1.0 / d.norm())
                                   : 1.0;
        ls = backtrack(eval, bounds, out.x, out.value, d, slope, initial,
                       opt.max_halvings);
      }

      if (!ls.accepted) {
        if (!ss.empty()) {
          ss.clear();
          ys.clear();
          continue;
        }
        out.termination = slope < 0 && !ls.any_finite
                              ? Termination::kDomainFailure
                              : Termination::kLineSearch;
        break;
      }

      Eigen::VectorXd s = ls.x - out.x, y = ls.g - g;
      const double decrease = relative_decrease(out.value, ls.f);
      out.x = std::move(ls.x);
      out.value = ls.f;
      g = std::move(ls.g);

      if (s.dot(y) > std::numeric_limits<double>::epsilon() * y.squaredNorm()) {
        ss.push_back(std::move(s));
        ys.push_back(std::move(y));
        if (static_cast<int>(ss.size()) > opt.memory) {
          ss.pop_front();
          ys.pop_front();
        }
      }

      if (decrease <= opt.function_tolerance) {
        ++out.iterations;
        out.termination = Termination::kFunctionTolerance;
        break;
      }
    }

    out.evaluations = eval.count();
    out.converged = out.termination == Termination::kGradientTolerance
                    || out.termination == Termination::kFunctionTolerance;
    return out;
  }

  OptimOutcome run_first_order(const ObjectiveFunction &f,
                               const Bounds &bounds, const Eigen::VectorXd &x0,
                               const OptimizerOptions &opt, int max_it) {
    Evaluator eval(f);
    OptimOutcome out;
    out.x = bounds.project(x0);
    Eigen::VectorXd g;
    if (!eval(out.x, out.value, g))
      return domain_failure(out.x, eval);

    const Eigen::Index n = out.x.size();
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(n), m2 = m1, velocity = m1;
    double beta1_t = 1, beta2_t = 1;
    out.termination = Termination::kMaxIterations;

    for (out.iterations = 0; out.iterations < max_it; ++out.iterations) {
      if (bounds.projected_gradient_norm(out.x, g) <= opt.gradient_tolerance) {
        out.termination = Termination::kGradientTolerance;
        break;
      }

      Eigen::VectorXd step, next_velocity;
      switch (opt.method) {
      case MethodKind::kAdam: {
        m1 = opt.beta1 * m1 + (1 - opt.beta1) * g;
        m2 = opt.beta2 * m2 + (1 - opt.beta2) * g.cwiseAbs2();
        beta1_t *= opt.beta1;
        beta2_t *= opt.beta2;
        const Eigen::ArrayXd mh = m1.array() / (1 - beta1_t);
        const Eigen::ArrayXd vh = m2.array() / (1 - beta2_t);
        step = -opt.learning_rate * (mh / (vh.sqrt() + opt.epsilon)).matrix();
        break;
      }
      case MethodKind::kNesterov:
        // Look-ahead form: x tracks the shifted iterate x + mu v.
        next_velocity = opt.momentum * velocity - opt.learning_rate * g;
        step = opt.momentum * next_velocity - opt.learning_rate * g;
        break;
      default:
        step = -opt.learning_rate * g;
        break;
      }

      bool moved = false;
      double scale = 1;
      for (int k = 0; k <= opt.max_halvings; ++k, scale /= 2) {
        Eigen::VectorXd xn = bounds.project(out.x + scale * step);
        double fn;
        Eigen::VectorXd gn;
        if (eval(xn, fn, gn)) {
          out.x = std::move(xn);
          out.value = fn;
          g = std::move(gn);
          moved = true;
          break;
        }
      }
      if (!moved) {
        out.termination = Termination::kDomainFailure;
        break;
      }
      if (opt.method == MethodKind::kNesterov)
        velocity = scale * next_velocity;
    }

    out.evaluations = eval.count();
    out.converged = out.termination == Termination::kGradientTolerance;
    return out;
  }
}  // namespace

MethodKind parse_method(std::string_view name) {
  if (name == "SLSQP")
    return MethodKind::kSLSQP;
  if (name == "L-BFGS-B" || name == "LBFGSB")
    return MethodKind::kLBFGSB;
  if (name == "Adam")
    return MethodKind::kAdam;
  if (name == "Nesterov")
    return MethodKind::kNesterov;
  if (name == "SGD")
    return MethodKind::kSGD;
  throw Error("unknown optimization method '" + std::string(name)
              + "' (expected SLSQP, L-BFGS-B, Adam, Nesterov or SGD)");
}

std::string_view method_name(MethodKind kind) noexcept {
  switch (kind) {
  case MethodKind::kSLSQP:
    return "SLSQP";
  case MethodKind::kLBFGSB:
    return "L-BFGS-B";
  case MethodKind::kAdam:
    return "Adam";
  case MethodKind::kNesterov:
    return "Nesterov";
  case MethodKind::kSGD:
    return "SGD";
  }
  return "";
}

int default_max_iterations(MethodKind method) noexcept {
  switch (method) {
  case MethodKind::kSLSQP:
    return 1000;
  case MethodKind::kLBFGSB:
    return 15000;
  default:
    return 10000;
  }
}

std::string_view termination_name(Termination t) noexcept {
  switch (t) {
  case Termination::kGradientTolerance:
    return "gradient-tol";
  case Termination::kFunctionTolerance:
    return "function-tol";
  case Termination::kMaxIterations:
    return "max-iter";
  case Termination::kLineSearch:
    return "line-search";
  case Termination::kDomainFailure:
    return "domain-failure";
  }
  return "";
}

Bounds Bounds::unbounded(Eigen::Index n) {
  return { Eigen::VectorXd::Constant(n, -kInf),
           Eigen::VectorXd::Constant(n, kInf) };
}

Eigen::VectorXd Bounds::project(const Eigen::VectorXd &x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

double Bounds::projected_gradient_norm(const Eigen::VectorXd &x,
                                       const Eigen::VectorXd &g) const {
  return (project(x - g) - x).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd &h,
                             const Eigen::VectorXd &g,
                             const Eigen::VectorXd &lo,
                             const Eigen::VectorXd &hi) {
  enum State { kFree, kLower, kUpper };
  const Eigen::Index n = g.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  std::vector<State> state(n, kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo[i] >= 0 && g[i] > 0)
      state[i] = kLower;
    else if (hi[i] <= 0 && g[i] < 0)
      state[i] = kUpper;
  }

  const int max_iter = 10 * static_cast<int>(n) + 10;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (state[i] == kFree)
        free.push_back(i);

    const Eigen::VectorXd grad = g + h * d;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd p(nf);
    if (nf > 0) {
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf[a] = grad[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b)
          hff(a, b) = h(free[a], free[b]);
      }
      p = hff.ldlt().solve(-gf);
    }

    const double scale = 1 + d.lpNorm<Eigen::Infinity>();
    if (nf == 0 || p.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) {
      // Stationary on the current face: release the worst multiplier.
      Eigen::Index worst = -1;
      double worst_value = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double violation = 0;
        if (state[i] == kLower)
          violation = -grad[i];
        else if (state[i] == kUpper)
          violation = grad[i];
        if (violation > worst_value) {
          worst_value = violation;
          worst = i;
        }
      }
      if (worst < 0)
        break;
      state[worst] = kFree;
      continue;
    }

    double alpha = 1;
    Eigen::Index blocking = -1;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      double t = kInf;
      if (p[a] < 0)
        t = (lo[i] - d[i]) / p[a];
      else if (p[a] > 0)
        t = (hi[i] - d[i]) / p[a];
      if (t < alpha) {
        alpha = std::max(t, 0.0);
        blocking = i;
      }
    }
    for (Eigen::Index a = 0; a < nf; ++a)
      d[free[a]] += alpha * p[a];
    if (blocking >= 0) {
      const bool lower = p[std::find(free.begin(), free.end(), blocking)
                           - free.begin()]
                         < 0;
      d[blocking] = lower ? lo[blocking] : hi[blocking];
      state[blocking] = lower ? kLower : kUpper;
    }
  }
  return d.cwiseMax(lo).cwiseMin(hi);
}

OptimOutcome minimize(const ObjectiveFunction &f, const Bounds &bounds,
                      const Eigen::VectorXd &x0,
                      const OptimizerOptions &options) {
  if (bounds.lower.size() != x0.size() || bounds.upper.size() != x0.size())
    throw Error("bounds do not match the parameter vector");
  if ((bounds.lower.array() > bounds.upper.array()).any())
    throw Error("lower bound exceeds upper bound");
  if (options.max_iterations < 0 || !(options.gradient_tolerance > 0)
      || !(options.function_tolerance > 0))
    throw Error("invalid optimizer options");

  const int max_it = options.max_iterations > 0
                         ? options.max_iterations
                         : default_max_iterations(options.method);
  switch (options.method) {
  case MethodKind::kSLSQP:
    return run_slsqp(f, bounds, x0, options, max_it);
  case MethodKind::kLBFGSB:
    return run_lbfgsb(f, bounds, x0, options, max_it);
  default:
    return run_first_order(f, bounds, x0, options, max_it);
  }
}

}  // namespace semforge
