#ifndef TRUNCSEARCH_SEARCH_MODEL_HPP
#define TRUNCSEARCH_SEARCH_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "truncsearch/truncation.hpp"

namespace truncsearch {

/// Searcher speeds: `sweep` (v1) inside the domain, `gap` (v2) across deleted
/// subintervals. The gap speed may be +inf.
struct SearchSpeeds {
  double sweep = 1.0;
  double gap = 5.0;
};

inline void validate(const SearchSpeeds& s) {
  if (!(s.sweep > 0.0) || !std::isfinite(s.sweep)) {
    throw std::invalid_argument("sweep speed v1 must be finite and > 0");
  }
  if (!(s.gap > s.sweep)) {
    throw std::invalid_argument("gap speed v2 must exceed the sweep speed v1");
  }
}

/// The gate delta_{k,1}: 0 for k <= 1, 1 for k > 1.
constexpr double delta_gate(int k) { return k > 1 ? 1.0 : 0.0; }

/// Smallest valid time index m: 0 for two-sided layouts, 1 for half-line layouts.
inline int first_time_index(const TruncationLayout& layout) { return layout.half_line() ? 1 : 0; }

/// Largest valid time index: N^ + 1 for two-sided layouts, N + 1 for half-line layouts.
inline int last_time_index(const TruncationLayout& layout) {
  return static_cast<int>(layout.half_line() ? layout.right_count() + 1 : layout.gap_count() + 1);
}

namespace detail {

/// Which side index m belongs to and how many segments, counted outward from
/// the origin, the searcher on that side sweeps to reach it.
struct SweepExtent {
  Side side;
  int segments;
};

inline SweepExtent sweep_extent(const TruncationLayout& layout, int m) {
  const int lo = first_time_index(layout);
  const int hi = last_time_index(layout);
  if (m < lo || m > hi) {
    throw std::out_of_range("time index m = " + std::to_string(m) + " outside " +
                            std::to_string(lo) + ".." + std::to_string(hi));
  }
  if (layout.half_line()) {
    return {Side::Right, m};
  }
  const int left = static_cast<int>(layout.left_count());
  if (m <= left) {
    return {Side::Left, left + 1 - m};
  }
  return {Side::Right, m - left};
}

// Walks `extent.segments` segments outward from the origin, accumulating
// length * weight(segment index) and the gate-weighted widths of the gaps
// crossed on the way.
template <class Weight>
double sweep_time(const TruncationLayout& layout, std::span<const Segment> segs, SweepExtent extent,
                  const SearchSpeeds& s, Weight weight) {
  const auto& gaps = extent.side == Side::Left ? layout.left_gaps : layout.right_gaps;
  // Index of the segment adjacent to the origin on this side.
  const int origin_segment = layout.half_line() ? 0 : static_cast<int>(layout.left_count()) +
                                                          (extent.side == Side::Right ? 1 : 0);
  const int direction = extent.side == Side::Left ? -1 : 1;
  double sweep = 0.0;
  for (int r = 0; r < extent.segments; ++r) {
    const auto& seg = segs[origin_segment + direction * r];
    sweep += seg.length() * weight(seg.index);
  }
  double crossed = 0.0;
  for (int r = 0; r + 1 < extent.segments; ++r) {
    crossed += gaps[r].width();
  }
  const double gap_time = std::isinf(s.gap) ? 0.0 : delta_gate(extent.segments) * crossed / s.gap;
  return sweep / s.sweep + gap_time;
}

}  // namespace detail

/// Elapsed time tau_m to sweep from the origin through segment m.
inline double elapsed_time(const TruncationLayout& layout, const SearchSpeeds& s, int m) {
  validate(s);
  const auto extent = detail::sweep_extent(layout, m);
  const auto segs = segments(layout);
  return detail::sweep_time(layout, segs, extent, s, [](int) { return 1.0; });
}

/// Expected elapsed time E(tau_m): each swept segment's full length weighted by
/// that segment's own probability, plus the gated gap-crossing time.
inline double expected_time(const TruncatedDistribution& t, const SearchSpeeds& s, int m) {
  validate(s);
  const auto extent = detail::sweep_extent(t.layout(), m);
  return detail::sweep_time(t.layout(), t.segments(), extent, s,
                            [&t](int index) { return t.segment_probability(index); });
}

struct ExpectedTimeRow {
  int m = 0;
  double tau = 0.0;
  double expected = 0.0;
};

struct ExpectedTimeTable {
  std::string scenario;
  std::vector<ExpectedTimeRow> rows;
};

inline ExpectedTimeTable expected_time_table(const TruncatedDistribution& t, const SearchSpeeds& s,
                                             std::string scenario = {}) {
  ExpectedTimeTable table{std::move(scenario), {}};
  const auto& layout = t.layout();
  for (int m = first_time_index(layout); m <= last_time_index(layout); ++m) {
    table.rows.push_back({m, elapsed_time(layout, s, m), expected_time(t, s, m)});
  }
  return table;
}

/// Sweep time of [a, 0] (Left) or [0, b] (Right) with no internal gaps,
/// weighted by the mass of that half renormalized over [a, b].
inline double baseline_expectation(const Distribution& d, double a, double b, const SearchSpeeds& s,
                                   Side side) {
  validate(d);
  validate(s);
  if (!(a < 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("baseline_expectation requires a < 0 < b");
  }
  const double fa = cdf(d, a);
  const double f0 = cdf(d, 0.0);
  const double fb = cdf(d, b);
  const double total = fb - fa;
  if (!(total > 0.0)) {
    throw DegenerateTruncation("no probability mass on [a, b]");
  }
  if (side == Side::Left) {
    return (-a) / s.sweep * (f0 - fa) / total;
  }
  return b / s.sweep * (fb - f0) / total;
}

enum class VariedGap { Left, Right };

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;

  double at(int i) const { return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1); }
};

/// Expected times over a Cartesian grid of the single varied gap's endpoints.
/// values[iy * x.size() + ix]; infeasible nodes hold NaN.
struct ContourGrid {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;

  double at(std::size_t ix, std::size_t iy) const { return values[iy * x.size() + ix]; }
};

/// Evaluates expected_time(target_m) with the varied gap set to (x, y) at each
/// node: (theta, zeta) for VariedGap::Left, (alpha, beta) for VariedGap::Right.
/// Nodes on the x == y diagonal are evaluated as zero-width gaps. Work is split
/// by rows across `threads` workers; results do not depend on the thread count.
inline ContourGrid contour_grid(const Distribution& d, const TruncationLayout& base,
                                const SearchSpeeds& s, int target_m, VariedGap vary,
                                GridAxis x_axis, GridAxis y_axis, unsigned threads = 1) {
  validate(d);
  validate(s);
  const auto& varied = vary == VariedGap::Left ? base.left_gaps : base.right_gaps;
  if (varied.size() != 1) {
    throw std::invalid_argument("contour grid needs exactly one gap on the varied side, found " +
                                std::to_string(varied.size()));
  }
  if (x_axis.steps < 1 || y_axis.steps < 1) {
    throw std::invalid_argument("contour grid axes need at least one step");
  }
  detail::sweep_extent(base, target_m);

  ContourGrid grid;
  for (int i = 0; i < x_axis.steps; ++i) grid.x.push_back(x_axis.at(i));
  for (int i = 0; i < y_axis.steps; ++i) grid.y.push_back(y_axis.at(i));
  grid.values.assign(grid.x.size() * grid.y.size(), std::numeric_limits<double>::quiet_NaN());

  const auto evaluate_row = [&](std::size_t iy) {
    TruncationLayout layout = base;
    auto& gap = vary == VariedGap::Left ? layout.left_gaps[0] : layout.right_gaps[0];
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
      gap = {grid.x[ix], grid.y[iy]};
      try {
        const TruncatedDistribution t(d, layout, GapWidth::AllowZero);
        grid.values[iy * grid.x.size() + ix] = expected_time(t, s, target_m);
      } catch (const LayoutError&) {
      } catch (const DegenerateTruncation&) {
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, grid.y.size()));
  if (workers == 1) {
    for (std::size_t iy = 0; iy < grid.y.size(); ++iy) evaluate_row(iy);
    return grid;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t iy = w; iy < grid.y.size(); iy += workers) evaluate_row(iy);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return grid;
}

}  // namespace truncsearch

#endif  // TRUNCSEARCH_SEARCH_MODEL_HPP
