#ifndef TRUNCSEARCH_MONTECARLO_HPP
#define TRUNCSEARCH_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "truncsearch/search_model.hpp"

namespace truncsearch {

/// 64-bit LCG (Knuth MMIX constants). Uniforms take the top 53 bits.
using SampleEngine =
    std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL, 1442695040888963407ULL, 0ULL>;

inline double uniform01(SampleEngine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// n target positions by inverse-transform sampling through the quantile.
inline std::vector<double> sample(const TruncatedDistribution& t, std::uint64_t seed, std::size_t n) {
  if (n < 1) {
    throw std::invalid_argument("sample: n must be >= 1");
  }
  SampleEngine engine(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = t.quantile(uniform01(engine));
  return out;
}

/// Kolmogorov distance sup |F_n - F| between the samples and the truncated CDF.
inline double empirical_cdf_distance(std::span<const double> samples, const TruncatedDistribution& t) {
  if (samples.empty()) {
    throw std::invalid_argument("empirical_cdf_distance: no samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double distance = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = t.cdf(sorted[i]);
    distance = std::max({distance, (i + 1) / n - f, f - i / n});
  }
  return distance;
}

/// Fraction of samples in each segment, in segment order.
inline std::vector<double> segment_frequencies(std::span<const double> samples,
                                               const TruncatedDistribution& t) {
  std::vector<double> counts(t.segments().size(), 0.0);
  for (double x : samples) {
    const int k = t.segment_of(x);
    if (k < 0) {
      throw std::logic_error("sample " + std::to_string(x) + " lies outside the truncated domain");
    }
    counts[k] += 1.0;
  }
  for (auto& c : counts) c /= static_cast<double>(samples.size());
  return counts;
}

/// Time for the searcher on x's side to reach x: full lengths of the segments
/// between the origin and x at v1, the gaps crossed at v2, then the distance
/// into x's own segment at v1.
inline std::vector<double> arrival_times(const TruncatedDistribution& t, const SearchSpeeds& s,
                                         std::span<const double> samples) {
  validate(s);
  const auto segs = t.segments();
  const double gap_rate = std::isinf(s.gap) ? 0.0 : 1.0 / s.gap;
  // Time at which the searcher enters each segment from its origin-side end.
  std::vector<double> entry(segs.size(), 0.0);
  std::size_t first_right = 0;
  while (first_right < segs.size() && segs[first_right].side == Side::Left) ++first_right;
  for (std::size_t k = first_right + 1; k < segs.size(); ++k) {
    entry[k] = entry[k - 1] + segs[k - 1].length() / s.sweep + (segs[k].lower - segs[k - 1].upper) * gap_rate;
  }
  for (std::size_t k = first_right; k-- > 1;) {
    entry[k - 1] = entry[k] + segs[k].length() / s.sweep + (segs[k].lower - segs[k - 1].upper) * gap_rate;
  }
  std::vector<double> times;
  times.reserve(samples.size());
  for (double x : samples) {
    const int k = t.segment_of(x);
    if (k < 0) {
      throw std::logic_error("sample " + std::to_string(x) + " lies outside the truncated domain");
    }
    const auto& seg = segs[k];
    const double into = seg.side == Side::Left ? seg.upper - x : x - seg.lower;
    times.push_back(entry[k] + into / s.sweep);
  }
  return times;
}

struct ArrivalMeans {
  double left = std::numeric_limits<double>::quiet_NaN();   // NaN when no sample fell left of 0
  double right = std::numeric_limits<double>::quiet_NaN();  // NaN when no sample fell right of 0
};

/// Side-conditional mean arrival times. A diagnostic: this is the mean time to
/// reach the target, a different functional from expected_time().
inline ArrivalMeans simulate_arrival(const TruncatedDistribution& t, const SearchSpeeds& s,
                                     std::span<const double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("simulate_arrival: no samples");
  }
  const auto times = arrival_times(t, s, samples);
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int side = t.segments()[t.segment_of(samples[i])].side == Side::Left ? 0 : 1;
    sum[side] += times[i];
    ++count[side];
  }
  ArrivalMeans means;
  if (count[0] > 0) means.left = sum[0] / static_cast<double>(count[0]);
  if (count[1] > 0) means.right = sum[1] / static_cast<double>(count[1]);
  return means;
}

struct SampleReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double sup_cdf_distance = 0.0;
  std::vector<double> segment_frequencies;
  std::vector<double> segment_probabilities;
  double mean_arrival_time_left = std::numeric_limits<double>::quiet_NaN();
  double mean_arrival_time_right = std::numeric_limits<double>::quiet_NaN();
  double std_error = 0.0;  // standard error of the mean arrival time over all samples
  double expected_first = std::numeric_limits<double>::quiet_NaN();  // E(tau_0), two-sided only
  double expected_last = 0.0;                                         // E(tau_last)
};

inline SampleReport run_validation(const TruncatedDistribution& t, const SearchSpeeds& s,
                                   std::uint64_t seed, std::size_t n) {
  const auto xs = sample(t, seed, n);
  SampleReport r;
  r.n = n;
  r.seed = seed;
  r.sup_cdf_distance = empirical_cdf_distance(xs, t);
  r.segment_frequencies = segment_frequencies(xs, t);
  for (std::size_t k = 0; k < t.segments().size(); ++k) {
    r.segment_probabilities.push_back(t.segment_probability(static_cast<int>(k)));
  }
  const auto means = simulate_arrival(t, s, xs);
  r.mean_arrival_time_left = means.left;
  r.mean_arrival_time_right = means.right;

  const auto times = arrival_times(t, s, xs);
  double mean = 0.0;
  for (double v : times) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : times) ss += (v - mean) * (v - mean);
  r.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;

  const auto& layout = t.layout();
  if (!layout.half_line()) r.expected_first = expected_time(t, s, 0);
  r.expected_last = expected_time(t, s, last_time_index(layout));
  return r;
}

namespace detail {

inline std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace detail

/// Flat key = value block, 12 significant digits.
inline std::string to_key_value(const SampleReport& r) {
  const auto g = [](double v) { return detail::format_g(v, 12); };
  std::string out;
  const auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  line("n", std::to_string(r.n));
  line("seed", std::to_string(r.seed));
  line("sup_cdf_distance", g(r.sup_cdf_distance));
  for (std::size_t k = 0; k < r.segment_frequencies.size(); ++k) {
    line("segment_" + std::to_string(k) + "_frequency", g(r.segment_frequencies[k]));
    line("segment_" + std::to_string(k) + "_probability", g(r.segment_probabilities[k]));
  }
  line("mean_arrival_time_left", g(r.mean_arrival_time_left));
  line("mean_arrival_time_right", g(r.mean_arrival_time_right));
  line("std_error", g(r.std_error));
  line("expected_time_first", g(r.expected_first));
  line("expected_time_last", g(r.expected_last));
  line("note", "mean arrival times and expected_time values are different functionals");
  return out;
}

}  // namespace truncsearch

#endif  // TRUNCSEARCH_MONTECARLO_HPP
