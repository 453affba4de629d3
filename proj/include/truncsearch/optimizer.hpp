#ifndef TRUNCSEARCH_OPTIMIZER_HPP
#define TRUNCSEARCH_OPTIMIZER_HPP

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "truncsearch/search_model.hpp"

namespace truncsearch {

/// Penalty coefficients for one gap, all in (0, 1).
///   width: weight of the squared gap width (scaled by 1/v2^2)
///   upper: weight of the squared upper endpoint (zeta or beta, scaled by 1/v1^2)
///   lower: weight of the squared lower endpoint (theta or alpha, scaled by 1/v1^2)
struct GapPenalty {
  double width = 0.1;
  double upper = 0.1;
  double lower = 0.1;
};

struct PenaltyParams {
  std::vector<GapPenalty> left;
  std::vector<GapPenalty> right;

  static PenaltyParams uniform(std::size_t left_count, std::size_t right_count, double value) {
    const GapPenalty p{value, value, value};
    return {std::vector<GapPenalty>(left_count, p), std::vector<GapPenalty>(right_count, p)};
  }
};

inline void validate(const PenaltyParams& p) {
  const auto check = [](const std::vector<GapPenalty>& v, const char* side) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (double e : {v[i].width, v[i].upper, v[i].lower}) {
        if (!(e > 0.0 && e < 1.0)) {
          throw std::invalid_argument(std::string("penalty parameters must lie in (0, 1); ") + side +
                                      " gap " + std::to_string(i + 1) + " has " + std::to_string(e));
        }
      }
    }
  };
  check(p.left, "left");
  check(p.right, "right");
}

enum class ObjectiveTail { Left, Right, Total };

/// Penalized expected-time objective as a function of the packed mesh vector
///   x = (theta_1..theta_M, zeta_1..zeta_M, alpha_1..alpha_N, beta_1..beta_N).
///
/// Evaluation does not require the mesh to be ordered, so finite-difference
/// stencils may straddle the feasibility boundary. It returns NaN only when the
/// surviving mass is not positive.
class MeshObjective {
 public:
  MeshObjective(Distribution d, double a, double b, std::size_t left_count, std::size_t right_count,
                SearchSpeeds s, PenaltyParams p, ObjectiveTail which)
      : dist_(std::move(d)), a_(a), b_(b), left_(left_count), right_(right_count), speeds_(s),
        penalties_(std::move(p)), which_(which) {
    truncsearch::validate(dist_);
    truncsearch::validate(speeds_);
    truncsearch::validate(penalties_);
    if (penalties_.left.size() != left_ || penalties_.right.size() != right_) {
      throw std::invalid_argument(
          "penalty parameters cover " + std::to_string(penalties_.left.size()) + " left / " +
          std::to_string(penalties_.right.size()) + " right gaps but the layout has " +
          std::to_string(left_) + " / " + std::to_string(right_));
    }
  }

  static MeshObjective for_layout(const Distribution& d, const TruncationLayout& layout,
                                  const SearchSpeeds& s, const PenaltyParams& p, ObjectiveTail which) {
    return MeshObjective(d, layout.a, layout.b, layout.left_count(), layout.right_count(), s, p, which);
  }

  std::size_t dimension() const { return 2 * (left_ + right_); }
  double a() const { return a_; }
  double b() const { return b_; }

  std::vector<double> pack(const TruncationLayout& layout) const {
    std::vector<double> x(dimension());
    for (std::size_t j = 0; j < left_; ++j) {
      x[j] = layout.left_gaps[j].lower;
      x[left_ + j] = layout.left_gaps[j].upper;
    }
    const std::size_t off = 2 * left_;
    for (std::size_t i = 0; i < right_; ++i) {
      x[off + i] = layout.right_gaps[i].lower;
      x[off + right_ + i] = layout.right_gaps[i].upper;
    }
    return x;
  }

  TruncationLayout unpack(std::span<const double> x) const {
    TruncationLayout layout{a_, b_, {}, {}};
    for (std::size_t j = 0; j < left_; ++j) layout.left_gaps.push_back({x[j], x[left_ + j]});
    const std::size_t off = 2 * left_;
    for (std::size_t i = 0; i < right_; ++i) layout.right_gaps.push_back({x[off + i], x[off + right_ + i]});
    return layout;
  }

  /// Strict ordering a < theta_M < zeta_M < ... < zeta_1 < 0 < alpha_1 < ... < beta_N < b.
  bool feasible(std::span<const double> x) const {
    double prev = a_;
    const auto next = [&prev](double v) {
      const bool ok = std::isfinite(v) && prev < v;
      prev = v;
      return ok;
    };
    bool ok = true;
    for (std::size_t j = left_; j-- > 0;) {
      ok = next(x[j]) && ok;
      ok = next(x[left_ + j]) && ok;
    }
    if (left_ > 0 || a_ < 0.0) ok = next(0.0) && ok;
    else prev = 0.0;
    const std::size_t off = 2 * left_;
    for (std::size_t i = 0; i < right_; ++i) {
      ok = next(x[off + i]) && ok;
      ok = next(x[off + right_ + i]) && ok;
    }
    return next(b_) && ok;
  }

  double operator()(std::span<const double> x) const {
    const auto theta = [&](std::size_t l) { return l == 0 ? 0.0 : x[l - 1]; };
    const auto zeta = [&](std::size_t l) { return l == left_ + 1 ? a_ : x[left_ + l - 1]; };
    const std::size_t off = 2 * left_;
    const auto alpha = [&](std::size_t l) { return l == right_ + 1 ? b_ : x[off + l - 1]; };
    const auto beta = [&](std::size_t l) { return l == 0 ? 0.0 : x[off + right_ + l - 1]; };
    const auto F = [this](double v) { return cdf(dist_, v); };

    double deleted = 0.0;
    for (std::size_t l = 1; l <= left_; ++l) deleted += F(zeta(l)) - F(theta(l));
    for (std::size_t l = 1; l <= right_; ++l) deleted += F(beta(l)) - F(alpha(l));
    const double norm = F(b_) - F(a_) - deleted;
    if (!(norm > 0.0)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const double v1 = speeds_.sweep;
    const double v2 = speeds_.gap;

    double left_value = 0.0;
    if (which_ != ObjectiveTail::Right) {
      for (std::size_t l = 1; l <= left_ + 1; ++l) {
        const double lo = zeta(l);
        const double hi = theta(l - 1);
        left_value += (hi - lo) * (F(hi) - F(lo)) / norm / v1;
      }
      for (std::size_t l = 1; l <= left_; ++l) {
        const double w = zeta(l) - theta(l);
        const auto& e = penalties_.left[l - 1];
        left_value += (w + e.width / v2 * w * w) / v2;
        left_value += (e.upper * zeta(l) * zeta(l) + e.lower * theta(l) * theta(l)) / (v1 * v1);
      }
    }
    double right_value = 0.0;
    if (which_ != ObjectiveTail::Left) {
      for (std::size_t l = 1; l <= right_ + 1; ++l) {
        const double lo = beta(l - 1);
        const double hi = alpha(l);
        right_value += (hi - lo) * (F(hi) - F(lo)) / norm / v1;
      }
      for (std::size_t l = 1; l <= right_; ++l) {
        const double w = beta(l) - alpha(l);
        const auto& e = penalties_.right[l - 1];
        right_value += (w + e.width / v2 * w * w) / v2;
        right_value += (e.upper * beta(l) * beta(l) + e.lower * alpha(l) * alpha(l)) / (v1 * v1);
      }
    }
    return left_value + right_value;
  }

  /// E(tau_0), E(tau_last) or their sum on the unpacked (valid) layout.
  double unpenalized(std::span<const double> x) const {
    const TruncatedDistribution t(dist_, unpack(x));
    const auto& layout = t.layout();
    double value = 0.0;
    if (which_ != ObjectiveTail::Right && !layout.half_line()) {
      value += expected_time(t, speeds_, 0);
    }
    if (which_ != ObjectiveTail::Left) {
      value += expected_time(t, speeds_, last_time_index(layout));
    }
    return value;
  }

 private:
  Distribution dist_;
  double a_;
  double b_;
  std::size_t left_;
  std::size_t right_;
  SearchSpeeds speeds_;
  PenaltyParams penalties_;
  ObjectiveTail which_;
};

/// Penalized objective for a valid layout.
inline double modified_objective(const Distribution& d, const TruncationLayout& layout,
                                 const SearchSpeeds& s, const PenaltyParams& p, ObjectiveTail which) {
  validate(layout);
  const auto objective = MeshObjective::for_layout(d, layout, s, p, which);
  return objective(objective.pack(layout));
}

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// A non-finite objective value inside a finite-difference stencil or at an iterate.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

namespace detail {

inline double checked_eval(const ObjectiveFn& q, std::span<const double> x) {
  const double v = q(x);
  if (!std::isfinite(v)) {
    throw EvaluationError("objective is not finite at the evaluation point",
                          std::vector<double>(x.begin(), x.end()));
  }
  return v;
}

inline std::vector<double> fd_steps(std::span<const double> x, double rel_step) {
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = rel_step * std::max(1.0, std::fabs(x[i]));
  return h;
}

inline std::vector<double> central_gradient(const ObjectiveFn& q, std::span<const double> x,
                                            std::span<const double> h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    point[i] = x[i] + h[i];
    const double up = checked_eval(q, point);
    point[i] = x[i] - h[i];
    const double down = checked_eval(q, point);
    point[i] = x[i];
    g[i] = (up - down) / (2.0 * h[i]);
  }
  return g;
}

}  // namespace detail

/// Central-difference gradient with step rel_step * max(1, |x_i|).
inline std::vector<double> fd_gradient(const ObjectiveFn& q, std::span<const double> x,
                                       double rel_step = 1e-5) {
  return detail::central_gradient(q, x, detail::fd_steps(x, rel_step));
}

/// Hessian as the central difference of the central-difference gradient,
/// before symmetrization. Both differences use the relative step
/// cbrt(rel_step), since rounding in a second difference grows like eps |Q| / h^2.
inline Eigen::MatrixXd fd_hessian_raw(const ObjectiveFn& q, std::span<const double> x,
                                      double rel_step = 1e-5) {
  const auto h = detail::fd_steps(x, std::cbrt(rel_step));
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd H(n, n);
  std::vector<double> point(x.begin(), x.end());
  for (Eigen::Index i = 0; i < n; ++i) {
    point[i] = x[i] + h[i];
    const auto g_up = detail::central_gradient(q, point, h);
    point[i] = x[i] - h[i];
    const auto g_down = detail::central_gradient(q, point, h);
    point[i] = x[i];
    for (Eigen::Index j = 0; j < n; ++j) H(i, j) = (g_up[j] - g_down[j]) / (2.0 * h[i]);
  }
  return H;
}

/// Symmetrized finite-difference Hessian, (H + H^T) / 2.
inline Eigen::MatrixXd fd_hessian(const ObjectiveFn& q, std::span<const double> x,
                                  double rel_step = 1e-5) {
  const Eigen::MatrixXd H = fd_hessian_raw(q, x, rel_step);
  return 0.5 * (H + H.transpose());
}

struct NewtonOptions {
  int max_iterations = 100;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  double fd_step = 1e-5;
  double initial_damping = 0.0;
};

inline void validate(const NewtonOptions& o) {
  if (o.max_iterations < 1 || !(o.grad_tol > 0.0) || !(o.step_tol > 0.0) || !(o.fd_step > 0.0) ||
      !(o.initial_damping >= 0.0)) {
    throw std::invalid_argument(
        "newton options: tolerances and fd_step must be > 0, max_iterations >= 1, damping >= 0");
  }
}

/// One row per iterate: x^(k), its objective and gradient norm, and the
/// Levenberg damping used on the step that produced it (0 for k = 0).
struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double damping = 0.0;
};

enum class StopReason { GradientTolerance, StepTolerance, MaxIterations, NoVariables };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient-tolerance";
    case StopReason::StepTolerance: return "step-tolerance";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::NoVariables: return "no-variables";
  }
  return "unknown";
}

struct OptimizationResult {
  std::vector<double> x_star;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIterations;
  std::vector<TraceRow> trace;
};

/// No feasible, non-increasing step could be found from the current iterate.
class StallError : public std::runtime_error {
 public:
  StallError(const std::string& what, std::vector<TraceRow> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

using FeasibleFn = std::function<bool(std::span<const double>)>;

/// Damped Newton iteration on a finite-difference gradient and Hessian.
///
/// Each step solves (H + lambda I) s = -grad by Cholesky. If the factorization
/// fails, or the step raises the objective, lambda is doubled starting from
/// 1e-6. The step is halved until the trial point is feasible. Stops when the
/// gradient norm reaches grad_tol (converged), when an accepted step is shorter
/// than step_tol, or after max_iterations steps.
inline OptimizationResult newton_minimize(const ObjectiveFn& q, std::vector<double> x0,
                                          const NewtonOptions& opts, const FeasibleFn& feasible = {}) {
  validate(opts);
  const auto is_feasible = [&](std::span<const double> x) { return !feasible || feasible(x); };
  if (!is_feasible(x0)) {
    throw std::invalid_argument("newton_minimize: initial point violates the constraints");
  }
  constexpr int max_adjustments = 60;
  const auto n = static_cast<Eigen::Index>(x0.size());

  OptimizationResult result;
  std::vector<double> x = std::move(x0);
  double fx = detail::checked_eval(q, x);
  double damping_in = 0.0;
  double last_step = std::numeric_limits<double>::infinity();

  for (int k = 0;; ++k) {
    const auto g = fd_gradient(q, x, opts.fd_step);
    const Eigen::Map<const Eigen::VectorXd> grad(g.data(), n);
    const double gnorm = grad.norm();
    result.trace.push_back({k, fx, gnorm, damping_in});
    result.iterations = k;
    if (gnorm <= opts.grad_tol) {
      result.converged = true;
      result.stop = StopReason::GradientTolerance;
      break;
    }
    if (last_step <= opts.step_tol) {
      result.stop = StopReason::StepTolerance;
      break;
    }
    if (k == opts.max_iterations) {
      result.stop = StopReason::MaxIterations;
      break;
    }

    const Eigen::MatrixXd H = fd_hessian(q, x, opts.fd_step);
    double lambda = opts.initial_damping;
    bool accepted = false;
    std::vector<double> trial(x.size());
    for (int attempt = 0; attempt <= max_adjustments && !accepted; ++attempt) {
      const Eigen::LLT<Eigen::MatrixXd> llt(H + lambda * Eigen::MatrixXd::Identity(n, n));
      const auto raise_damping = [&lambda] { lambda = lambda == 0.0 ? 1e-6 : 2.0 * lambda; };
      if (llt.info() != Eigen::Success) {
        raise_damping();
        continue;
      }
      const Eigen::VectorXd step = llt.solve(-grad);
      double scale = 1.0;
      bool inside = false;
      for (int halving = 0; halving <= max_adjustments; ++halving, scale *= 0.5) {
        for (Eigen::Index i = 0; i < n; ++i) trial[i] = x[i] + scale * step[i];
        if (is_feasible(trial)) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        break;
      }
      const double f_trial = q(trial);
      if (std::isfinite(f_trial) && f_trial <= fx) {
        last_step = scale * step.norm();
        x = trial;
        fx = f_trial;
        damping_in = lambda;
        accepted = true;
      } else {
        raise_damping();
      }
    }
    if (!accepted) {
      throw StallError("newton_minimize: no feasible non-increasing step from iterate " +
                           std::to_string(k),
                       result.trace);
    }
  }
  result.x_star = x;
  result.objective = fx;
  result.grad_norm = result.trace.back().grad_norm;
  return result;
}

struct LayoutOptimization {
  TruncationLayout layout;
  OptimizationResult result;
  double unpenalized = 0.0;          // E(tau_0) + E(tau_last) at the optimized layout
  double initial_objective = 0.0;    // penalized objective at the template
  double initial_unpenalized = 0.0;  // E(tau_0) + E(tau_last) at the template
};

/// Minimizes the Total penalized objective over all mesh points, starting from
/// the template's mesh.
inline LayoutOptimization optimize_layout(const Distribution& d, const TruncationLayout& initial,
                                          const SearchSpeeds& s, const PenaltyParams& p,
                                          const NewtonOptions& opts) {
  validate(initial);
  validate(opts);
  const auto objective = MeshObjective::for_layout(d, initial, s, p, ObjectiveTail::Total);
  const auto x0 = objective.pack(initial);

  LayoutOptimization out;
  out.initial_objective = objective(x0);
  out.initial_unpenalized = objective.unpenalized(x0);
  if (x0.empty()) {
    out.layout = initial;
    out.result.objective = out.initial_objective;
    out.result.converged = true;
    out.result.stop = StopReason::NoVariables;
    out.result.trace.push_back({0, out.initial_objective, 0.0, 0.0});
    out.unpenalized = out.initial_unpenalized;
    return out;
  }
  out.result = newton_minimize(
      [&objective](std::span<const double> x) { return objective(x); }, x0, opts,
      [&objective](std::span<const double> x) { return objective.feasible(x); });
  out.layout = objective.unpack(out.result.x_star);
  out.unpenalized = objective.unpenalized(out.result.x_star);
  return out;
}

}  // namespace truncsearch

#endif  // TRUNCSEARCH_OPTIMIZER_HPP
