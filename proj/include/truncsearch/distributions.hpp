#ifndef TRUNCSEARCH_DISTRIBUTIONS_HPP
#define TRUNCSEARCH_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "truncsearch/special_functions.hpp"

namespace truncsearch {

struct Normal {
  double mean = 0.0;
  double stddev = 1.0;
};

struct Cauchy {
  double location = 0.0;
  double half_width = 1.0;
};

/// Azzalini skew-normal. The density carries the factor 2 so that it
/// integrates to one and differentiates the Phi - 2T CDF.
struct SkewNormal {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;
};

/// Shape/scale gamma, supported on [0, inf).
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
};

using Distribution = std::variant<Normal, Cauchy, SkewNormal, Gamma>;

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite and > 0");
  }
}

inline void require_finite_param(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

// Mass of the light skew-normal tail beyond |z|: int_|z|^inf 2 phi(t) Phi(-|shape| t) dt.
// Phi(z) - 2 T(z, shape) cancels there, so the tail is integrated directly.
inline double skew_normal_thin_tail(double z, double shape) {
  const double t0 = std::fabs(z);
  const double k = std::fabs(shape);
  const auto integrand = [k](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi) * std::erfc(k * t / std::numbers::sqrt2);
  };
  const double peak = integrand(t0);
  if (peak < 1e-280) {
    return 0.0;
  }
  // The integrand falls below 1e-17 of its value at t0 within this length.
  const double length = std::sqrt(80.0 / (1.0 + k * k));
  return adaptive_gauss(integrand, t0, t0 + length, 1e-14 * peak * length);
}

}  // namespace detail

/// Throws std::invalid_argument when a scale or shape parameter is out of range.
inline void validate(const Distribution& d) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          detail::require_finite_param(p.mean, "normal mean");
          detail::require_positive(p.stddev, "normal stddev");
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          detail::require_finite_param(p.location, "cauchy location");
          detail::require_positive(p.half_width, "cauchy half_width");
        } else if constexpr (std::is_same_v<T, SkewNormal>) {
          detail::require_finite_param(p.location, "skew-normal location");
          detail::require_positive(p.scale, "skew-normal scale");
          detail::require_finite_param(p.shape, "skew-normal shape");
        } else {
          detail::require_positive(p.shape, "gamma shape");
          detail::require_positive(p.scale, "gamma scale");
        }
      },
      d);
}

inline std::string_view name(const Distribution& d) {
  constexpr std::string_view names[] = {"normal", "cauchy", "skew-normal", "gamma"};
  return names[d.index()];
}

/// Lower end of the support: 0 for gamma, -inf otherwise.
inline double support_lower(const Distribution& d) {
  return std::holds_alternative<Gamma>(d) ? 0.0 : -std::numeric_limits<double>::infinity();
}

/// Center of symmetry for the symmetric families (normal, Cauchy).
inline std::optional<double> symmetry_center(const Distribution& d) {
  if (const auto* n = std::get_if<Normal>(&d)) return n->mean;
  if (const auto* c = std::get_if<Cauchy>(&d)) return c->location;
  return std::nullopt;
}

/// A characteristic width: stddev, half-width, scale, or shape*scale.
inline double scale_of(const Distribution& d) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) return p.stddev;
        else if constexpr (std::is_same_v<T, Cauchy>) return p.half_width;
        else if constexpr (std::is_same_v<T, SkewNormal>) return p.scale;
        else return p.shape * p.scale;
      },
      d);
}

inline double pdf(const Distribution& d, double x) {
  detail::require_finite(x, "pdf");
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return std_normal_pdf((x - p.mean) / p.stddev) / p.stddev;
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          const double u = x - p.location;
          return p.half_width / (std::numbers::pi * (p.half_width * p.half_width + u * u));
        } else if constexpr (std::is_same_v<T, SkewNormal>) {
          const double z = (x - p.location) / p.scale;
          return 2.0 / p.scale * std_normal_pdf(z) * std_normal_cdf(p.shape * z);
        } else {
          if (x < 0.0) {
            throw std::domain_error("pdf: gamma density is supported on [0, inf)");
          }
          if (x == 0.0) {
            if (p.shape < 1.0) return std::numeric_limits<double>::infinity();
            return p.shape == 1.0 ? 1.0 / p.scale : 0.0;
          }
          return std::exp((p.shape - 1.0) * std::log(x) - x / p.scale - log_gamma(p.shape) -
                          p.shape * std::log(p.scale));
        }
      },
      d);
}

/// CDF. Gamma returns 0 for x < 0 instead of throwing.
inline double cdf(const Distribution& d, double x) {
  detail::require_finite(x, "cdf");
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return std_normal_cdf((x - p.mean) / p.stddev);
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          return std::atan((x - p.location) / p.half_width) / std::numbers::pi + 0.5;
        } else if constexpr (std::is_same_v<T, SkewNormal>) {
          const double z = (x - p.location) / p.scale;
          if (p.shape < 0.0 && z > 0.0) return 1.0 - detail::skew_normal_thin_tail(z, p.shape);
          if (p.shape > 0.0 && z < 0.0) return detail::skew_normal_thin_tail(z, p.shape);
          const double value = std_normal_cdf(z) - 2.0 * owen_t(z, p.shape);
          return std::clamp(value, 0.0, 1.0);
        } else {
          return x <= 0.0 ? 0.0 : regularized_lower_gamma(p.shape, x / p.scale);
        }
      },
      d);
}

}  // namespace truncsearch

#endif  // TRUNCSEARCH_DISTRIBUTIONS_HPP
