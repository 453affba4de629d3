#ifndef TRUNCSEARCH_SPECIAL_FUNCTIONS_HPP
#define TRUNCSEARCH_SPECIAL_FUNCTIONS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace truncsearch {

/// Accuracy control for the iterative special functions.
struct EvalPolicy {
  double abs_tol = 1e-12;
  int max_terms = 200;
};

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": argument must be finite");
  }
}

inline void require_valid(const EvalPolicy& policy) {
  if (!(policy.abs_tol > 0.0) || policy.max_terms < 1) {
    throw std::invalid_argument("EvalPolicy: abs_tol must be > 0 and max_terms >= 1");
  }
}

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n (2x^2)^n x / (2n+1)!!
// Every term is positive, so there is no cancellation for |x| <= 3.
inline double erf_series(double x) {
  const double two_x2 = 2.0 * x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 500; ++n) {
    term *= two_x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) {
      break;
    }
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x) * sum;
}

// Continued fraction erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated with the modified Lentz method. Used for x > 3 in erf and x >= 2 in erfc.
inline double erfc_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double ak = 0.5 * k;
    d = x + ak * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = x + ak / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 4 * std::numeric_limits<double>::epsilon()) {
      break;
    }
  }
  return std::exp(-x * x) / std::sqrt(std::numbers::pi) / f;
}

}  // namespace detail

/// Error function. Series for |x| <= 3, continued-fraction complement beyond.
/// Odd by construction: erf(-x) is computed as -erf(x).
inline double erf(double x) {
  detail::require_finite(x, "erf");
  const double ax = std::fabs(x);
  const double value = ax <= 3.0 ? detail::erf_series(ax) : 1.0 - detail::erfc_continued_fraction(ax);
  return std::signbit(x) ? -value : value;
}

/// Complementary error function, keeping relative precision in the upper tail.
inline double erfc(double x) {
  detail::require_finite(x, "erfc");
  if (x >= 2.0) {
    return detail::erfc_continued_fraction(x);
  }
  if (x <= -2.0) {
    return 2.0 - detail::erfc_continued_fraction(-x);
  }
  return 1.0 - erf(x);
}

/// Standard normal CDF, Phi(x) = (1 + erf(x / sqrt 2)) / 2, evaluated through erfc
/// so that Phi(x) + Phi(-x) == 1 to rounding.
inline double std_normal_cdf(double x) {
  detail::require_finite(x, "std_normal_cdf");
  return 0.5 * erfc(-x / std::numbers::sqrt2);
}

inline double std_normal_pdf(double x) {
  detail::require_finite(x, "std_normal_pdf");
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], found by
// Newton iteration on P_n from the Chebyshev-like starting guesses.
template <int N>
const std::array<std::pair<double, double>, N>& gauss_legendre_rule() {
  static const auto rule = [] {
    std::array<std::pair<double, double>, N> r{};
    for (int i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      r[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return r;
  }();
  return rule;
}

template <class F>
double gauss_legendre(const F& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (const auto& [x, w] : gauss_legendre_rule<16>()) sum += w * f(mid + half * x);
  return sum * half;
}

template <class F>
double adaptive_gauss_step(const F& f, double lo, double hi, double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = gauss_legendre(f, lo, mid);
  const double right = gauss_legendre(f, mid, hi);
  // The relative floor stops refinement once the difference is integrand rounding noise.
  if (depth <= 0 || std::fabs(left + right - whole) <= std::max(tol, 1e-12 * std::fabs(left + right))) {
    return left + right;
  }
  return adaptive_gauss_step(f, lo, mid, left, 0.5 * tol, depth - 1) +
         adaptive_gauss_step(f, mid, hi, right, 0.5 * tol, depth - 1);
}

/// Adaptive 16-point Gauss-Legendre quadrature: a panel is accepted when its
/// estimate agrees with the sum over its two halves to within tol, or to 1e-12
/// relative.
template <class F>
double adaptive_gauss(const F& f, double lo, double hi, double tol, int max_depth = 30) {
  return adaptive_gauss_step(f, lo, hi, gauss_legendre(f, lo, hi), tol, max_depth);
}

}  // namespace detail

/// Owen's T function, T(h, a) = 1/(2 pi) * int_0^a exp(-h^2 (1 + v^2) / 2) / (1 + v^2) dv.
///
/// Evaluated as exp(-h^2/2) / (2 pi) * int_0^a exp(-h^2 v^2 / 2) / (1 + v^2) dv
/// by adaptive Gauss-Legendre quadrature. The remaining integrand peaks at 1, so
/// policy.abs_tol acts as a relative tolerance on T. Accurate for the moderate
/// shape values used by skew-normal targets; not tuned for |a| in the thousands.
inline double owen_t(double h, double a, const EvalPolicy& policy = {}) {
  detail::require_finite(h, "owen_t");
  detail::require_finite(a, "owen_t");
  detail::require_valid(policy);
  if (a == 0.0) {
    return 0.0;
  }
  const double half_h2 = 0.5 * h * h;
  const double scale = std::exp(-half_h2);
  if (scale == 0.0) {
    return 0.0;
  }
  const auto integrand = [half_h2](double v) { return std::exp(-half_h2 * v * v) / (1.0 + v * v); };
  const double upper = std::fabs(a);
  const double integral = detail::adaptive_gauss(integrand, 0.0, upper, 0.1 * policy.abs_tol);
  const double value = scale * integral / (2.0 * std::numbers::pi);
  return a < 0.0 ? -value : value;
}

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7, n = 9).
/// std::lgamma is avoided because glibc writes the global signgam.
inline double log_gamma(double x) {
  detail::require_finite(x, "log_gamma");
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be > 0");
  }
  static constexpr std::array<double, 9> coeff = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = coeff[0];
  for (std::size_t i = 1; i < coeff.size(); ++i) {
    series += coeff[i] / (z + static_cast<double>(i));
  }
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

/// Regularized lower incomplete gamma P(kappa, x) = gamma(kappa, x) / Gamma(kappa).
///
/// Power series for x < kappa + 1, Lentz continued fraction for the complement
/// otherwise. Throws std::domain_error for kappa <= 0 or x < 0, and
/// std::runtime_error if policy.max_terms is exhausted.
inline double regularized_lower_gamma(double kappa, double x, const EvalPolicy& policy = {}) {
  detail::require_finite(kappa, "regularized_lower_gamma");
  detail::require_finite(x, "regularized_lower_gamma");
  detail::require_valid(policy);
  if (!(kappa > 0.0)) {
    throw std::domain_error("regularized_lower_gamma: shape must be > 0");
  }
  if (x < 0.0) {
    throw std::domain_error("regularized_lower_gamma: x must be >= 0");
  }
  if (x == 0.0) {
    return 0.0;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double log_prefactor = -x + kappa * std::log(x) - log_gamma(kappa);

  if (x < kappa + 1.0) {
    double denom = kappa;
    double term = 1.0 / kappa;
    double sum = term;
    for (int n = 0; n < policy.max_terms; ++n) {
      denom += 1.0;
      term *= x / denom;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * eps) {
        return std::min(1.0, sum * std::exp(log_prefactor));
      }
    }
    throw std::runtime_error("regularized_lower_gamma: series did not converge");
  }

  constexpr double tiny = 1e-300;
  double b = x + 1.0 - kappa;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= policy.max_terms; ++i) {
    const double an = -i * (i - kappa);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) {
      return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
    }
  }
  throw std::runtime_error("regularized_lower_gamma: continued fraction did not converge");
}

}  // namespace truncsearch

#endif  // TRUNCSEARCH_SPECIAL_FUNCTIONS_HPP
