#ifndef TRUNCSEARCH_TRUNCATION_HPP
#define TRUNCSEARCH_TRUNCATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "truncsearch/distributions.hpp"

namespace truncsearch {

/// A deleted open subinterval (lower, upper) in which the target cannot lie.
struct Gap {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  friend bool operator==(const Gap&, const Gap&) = default;
};

/// The search domain [a, b] with deleted subintervals on either side of the origin.
///
/// Gaps are listed nearest-the-origin first on both sides:
///   left_gaps[j-1]  = (theta_j, zeta_j),   a < ... < theta_1 < zeta_1 < 0
///   right_gaps[i-1] = (alpha_i, beta_i),   0 < alpha_1 < beta_1 < ... < b
/// A layout with a == 0 and no left gaps is a half-line layout, for targets
/// supported on [0, inf).
struct TruncationLayout {
  double a = 0.0;
  double b = 0.0;
  std::vector<Gap> left_gaps;
  std::vector<Gap> right_gaps;

  bool half_line() const { return a == 0.0 && left_gaps.empty(); }
  std::size_t left_count() const { return left_gaps.size(); }
  std::size_t right_count() const { return right_gaps.size(); }
  std::size_t gap_count() const { return left_gaps.size() + right_gaps.size(); }

  friend bool operator==(const TruncationLayout&, const TruncationLayout&) = default;
};

enum class TruncationClass { Symmetric, Commensurate, Uneven, HalfLine };

inline std::string_view to_string(TruncationClass c) {
  switch (c) {
    case TruncationClass::Symmetric: return "symmetric";
    case TruncationClass::Commensurate: return "commensurate";
    case TruncationClass::Uneven: return "uneven";
    case TruncationClass::HalfLine: return "half-line";
  }
  return "unknown";
}

enum class Side { Left, Right };

/// Closed piece of the domain between consecutive gaps, indexed left to right.
struct Segment {
  int index = 0;
  double lower = 0.0;
  double upper = 0.0;
  Side side = Side::Right;

  double length() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Whether a gap may have zero width. Contour grids evaluate the alpha == beta
/// diagonal, everything else requires open gaps with positive width.
enum class GapWidth { Positive, AllowZero };

/// Mesh ordering violation. `first` and `second` name the offending pair in
/// the notation a, theta_j, zeta_j, 0, alpha_i, beta_i, b.
class LayoutError : public std::invalid_argument {
 public:
  LayoutError(std::string first, std::string second, const std::string& what)
      : std::invalid_argument(what), first_(std::move(first)), second_(std::move(second)) {}

  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }

 private:
  std::string first_;
  std::string second_;
};

/// All mass was deleted by the truncation.
class DegenerateTruncation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct MeshPoint {
  std::string name;
  double value;
};

// Left-to-right sequence a, theta_M, zeta_M, ..., theta_1, zeta_1, 0, alpha_1, ..., beta_N, b.
inline std::vector<MeshPoint> mesh_sequence(const TruncationLayout& layout) {
  std::vector<MeshPoint> seq;
  seq.reserve(2 * layout.gap_count() + 3);
  seq.push_back({"a", layout.a});
  for (std::size_t j = layout.left_gaps.size(); j-- > 0;) {
    seq.push_back({"theta_" + std::to_string(j + 1), layout.left_gaps[j].lower});
    seq.push_back({"zeta_" + std::to_string(j + 1), layout.left_gaps[j].upper});
  }
  if (!layout.half_line()) {
    seq.push_back({"0", 0.0});
  }
  for (std::size_t i = 0; i < layout.right_gaps.size(); ++i) {
    seq.push_back({"alpha_" + std::to_string(i + 1), layout.right_gaps[i].lower});
    seq.push_back({"beta_" + std::to_string(i + 1), layout.right_gaps[i].upper});
  }
  seq.push_back({"b", layout.b});
  return seq;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace detail

/// Checks the strict mesh ordering. Throws LayoutError naming the first offending pair.
inline void validate(const TruncationLayout& layout, GapWidth gaps = GapWidth::Positive) {
  const auto seq = detail::mesh_sequence(layout);
  for (const auto& p : seq) {
    if (!std::isfinite(p.value)) {
      throw LayoutError(p.name, p.name, "mesh point " + p.name + " must be finite");
    }
  }
  if (layout.a > 0.0) {
    throw LayoutError("a", "0", "a = " + detail::format_number(layout.a) +
                                    " must be < 0 (or exactly 0 for a half-line layout)");
  }
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    const auto& lo = seq[k];
    const auto& hi = seq[k + 1];
    // Only the two ends of one gap may coincide, and only under AllowZero.
    const bool gap_pair = (lo.name.starts_with("theta_") && hi.name.starts_with("zeta_")) ||
                          (lo.name.starts_with("alpha_") && hi.name.starts_with("beta_"));
    // A half-line layout may start its first gap at the origin.
    const bool origin_touch = layout.half_line() && lo.name == "a" && hi.name == "alpha_1";
    const bool allow_equal = origin_touch || (gap_pair && gaps == GapWidth::AllowZero);
    const bool ok = allow_equal ? lo.value <= hi.value : lo.value < hi.value;
    if (!ok) {
      throw LayoutError(lo.name, hi.name,
                        "mesh ordering violated: " + lo.name + " = " + detail::format_number(lo.value) +
                            " must be " + (allow_equal ? "<= " : "< ") + hi.name + " = " +
                            detail::format_number(hi.value));
    }
  }
}

/// Classifies a valid layout. Symmetry uses exact equality of mirrored mesh values.
inline TruncationClass classify(const TruncationLayout& layout) {
  validate(layout);
  if (layout.half_line()) {
    return TruncationClass::HalfLine;
  }
  if (layout.left_gaps.size() != layout.right_gaps.size()) {
    return TruncationClass::Uneven;
  }
  // With no gaps at all the layout is a plain doubly truncated domain: commensurate.
  bool mirrored = layout.gap_count() > 0 && layout.b == -layout.a;
  for (std::size_t j = 0; mirrored && j < layout.left_gaps.size(); ++j) {
    mirrored = layout.right_gaps[j].upper == -layout.left_gaps[j].lower &&
               layout.right_gaps[j].lower == -layout.left_gaps[j].upper;
  }
  return mirrored ? TruncationClass::Symmetric : TruncationClass::Commensurate;
}

/// Segments of the domain enumerated left to right (Omega_0 ... Omega_{N^+1}).
/// Half-line layouts start at [0, alpha_1].
inline std::vector<Segment> segments(const TruncationLayout& layout) {
  std::vector<Segment> out;
  out.reserve(layout.gap_count() + 2);
  int index = 0;
  if (!layout.half_line()) {
    double lower = layout.a;
    for (std::size_t j = layout.left_gaps.size(); j-- > 0;) {
      out.push_back({index++, lower, layout.left_gaps[j].lower, Side::Left});
      lower = layout.left_gaps[j].upper;
    }
    out.push_back({index++, lower, 0.0, Side::Left});
  }
  double lower = 0.0;
  for (const auto& gap : layout.right_gaps) {
    out.push_back({index++, lower, gap.lower, Side::Right});
    lower = gap.upper;
  }
  out.push_back({index++, lower, layout.b, Side::Right});
  return out;
}

/// A distribution conditioned on the gapped domain. Immutable after construction.
class TruncatedDistribution {
 public:
  TruncatedDistribution(Distribution dist, TruncationLayout layout,
                        GapWidth gaps = GapWidth::Positive)
      : dist_(std::move(dist)), layout_(std::move(layout)) {
    truncsearch::validate(dist_);
    truncsearch::validate(layout_, gaps);
    if (std::holds_alternative<Gamma>(dist_) && !layout_.half_line()) {
      throw std::invalid_argument("gamma targets require a half-line layout (a = 0, no left gaps)");
    }
    segments_ = truncsearch::segments(layout_);
    f_lower_.reserve(segments_.size());
    f_upper_.reserve(segments_.size());
    for (const auto& s : segments_) {
      f_lower_.push_back(truncsearch::cdf(dist_, s.lower));
      f_upper_.push_back(truncsearch::cdf(dist_, s.upper));
    }
    f_a_ = f_lower_.front();
    gap_mass_prefix_.assign(segments_.size(), 0.0);
    for (std::size_t k = 1; k < segments_.size(); ++k) {
      gap_mass_prefix_[k] = gap_mass_prefix_[k - 1] + (f_lower_[k] - f_upper_[k - 1]);
    }
    norm_ = f_upper_.back() - f_a_ - gap_mass_prefix_.back();
    if (!(norm_ > 1e-12)) {
      throw DegenerateTruncation("truncation deletes all probability mass (normalization " +
                                 detail::format_number(norm_) + ")");
    }
  }

  const Distribution& distribution() const { return dist_; }
  const TruncationLayout& layout() const { return layout_; }
  TruncationClass truncation_class() const { return classify(layout_); }
  std::span<const Segment> segments() const { return segments_; }

  /// Surviving probability mass F(b) - F(a) - (all gap masses).
  double norm() const { return norm_; }

  /// Deleted mass of all gaps lying left of segment m.
  double gap_mass_before(std::size_t m) const { return gap_mass_prefix_.at(m); }

  /// Index of the segment containing x, or -1 if x lies in a gap or outside [a, b].
  int segment_of(double x) const {
    const auto k = last_segment_starting_at_or_below(x);
    if (k < 0) return -1;
    return segments_[k].contains(x) ? static_cast<int>(k) : -1;
  }

  double pdf(double x) const {
    detail::require_finite(x, "truncated_pdf");
    if (segment_of(x) < 0) return 0.0;
    return truncsearch::pdf(dist_, x) / norm_;
  }

  /// (F(x) - F(a) - deleted mass below x) / norm, clamped to [0, 1] outside [a, b].
  double cdf(double x) const {
    detail::require_finite(x, "truncated_cdf");
    if (x <= layout_.a) return 0.0;
    if (x >= layout_.b) return 1.0;
    const auto k = static_cast<std::size_t>(last_segment_starting_at_or_below(x));
    const double fx = x <= segments_[k].upper ? truncsearch::cdf(dist_, x) : f_upper_[k];
    return std::clamp((fx - f_a_ - gap_mass_prefix_[k]) / norm_, 0.0, 1.0);
  }

  /// Probability that the target lies in segment m.
  double segment_probability(int m) const {
    if (m < 0 || static_cast<std::size_t>(m) >= segments_.size()) {
      throw std::out_of_range("segment index " + std::to_string(m) + " outside 0.." +
                              std::to_string(segments_.size() - 1));
    }
    return (f_upper_[m] - f_lower_[m]) / norm_;
  }

  /// Inverse of cdf(). A p on a gap plateau maps to the left edge of the next segment.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("quantile: p must lie in [0, 1]");
    }
    if (p == 0.0) return layout_.a;
    if (p == 1.0) return layout_.b;
    double before = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const double mass = (f_upper_[k] - f_lower_[k]) / norm_;
      if (mass > 0.0 && p < before + mass) {
        return invert_in_segment(k, (p - before) * norm_);
      }
      before += mass;
    }
    return layout_.b;
  }

 private:
  std::ptrdiff_t last_segment_starting_at_or_below(double x) const {
    const auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                                     [](double v, const Segment& s) { return v < s.lower; });
    return std::distance(segments_.begin(), it) - 1;
  }

  // Solves F(x) - F(lower_k) = target on segment k: Newton steps safeguarded by bisection.
  double invert_in_segment(std::size_t k, double target) const {
    double lo = segments_[k].lower;
    double hi = segments_[k].upper;
    const auto residual = [&](double x) { return truncsearch::cdf(dist_, x) - f_lower_[k] - target; };
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
      const double r = residual(x);
      if (r == 0.0) return x;
      if (r < 0.0) lo = x; else hi = x;
      const double density = truncsearch::pdf(dist_, x);
      if (density > 0.0 && std::isfinite(density)) {
        const double step = r / density;
        if (std::fabs(step) < 1e-13) {
          return std::clamp(x - step, segments_[k].lower, segments_[k].upper);
        }
        const double next = x - step;
        x = next > lo && next < hi ? next : 0.5 * (lo + hi);
      } else {
        x = 0.5 * (lo + hi);
      }
    }
    return std::clamp(x, segments_[k].lower, segments_[k].upper);
  }

  Distribution dist_;
  TruncationLayout layout_;
  std::vector<Segment> segments_;
  std::vector<double> f_lower_;
  std::vector<double> f_upper_;
  std::vector<double> gap_mass_prefix_;
  double f_a_ = 0.0;
  double norm_ = 1.0;
};

inline TruncatedDistribution make_truncated(Distribution d, TruncationLayout layout) {
  return TruncatedDistribution(std::move(d), std::move(layout));
}

inline double truncated_pdf(const TruncatedDistribution& t, double x) { return t.pdf(x); }
inline double truncated_cdf(const TruncatedDistribution& t, double x) { return t.cdf(x); }
inline double segment_probability(const TruncatedDistribution& t, int m) {
  return t.segment_probability(m);
}
inline double quantile(const TruncatedDistribution& t, double p) { return t.quantile(p); }

}  // namespace truncsearch

#endif  // TRUNCSEARCH_TRUNCATION_HPP
