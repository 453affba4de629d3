// The worked example scenarios, built directly (no config parsing).
#ifndef TRUNCSEARCH_TESTS_SCENARIOS_HPP
#define TRUNCSEARCH_TESTS_SCENARIOS_HPP

#include <string>
#include <vector>

#include "truncsearch/truncation.hpp"

namespace scenario {

namespace ts = truncsearch;

inline ts::TruncationLayout ex1_layout() { return {-20, 30, {{-6, -4}, {-15, -10}}, {{2, 7}, {11, 17}}}; }
inline ts::TruncationLayout ex1_half_line() { return {0, 30, {}, {{2, 7}, {11, 17}}}; }
inline ts::TruncationLayout ex2_layout() {
  return {-30, 20, {{-6, -4}, {-17, -13}, {-23, -20}}, {{3, 6}, {13, 17}}};
}
inline ts::TruncationLayout ex3_layout() { return {-20, 20, {{-8, -4}, {-17, -13}}, {{4, 8}, {13, 17}}}; }

inline const ts::Distribution ex1_normal = ts::Normal{0.0, 4.53};
inline const ts::Distribution ex1_cauchy = ts::Cauchy{1.38, 2.76};
inline const ts::Distribution ex1_skew = ts::SkewNormal{-2.3, 1.6, -3.37};
inline const ts::Distribution ex1_gamma = ts::Gamma{3.15, 1.27};
inline const ts::Distribution ex2_normal = ts::Normal{2.5, 3.6};
inline const ts::Distribution ex2_cauchy = ts::Cauchy{4.6, 2.5};
inline const ts::Distribution ex2_skew = ts::SkewNormal{-2.13, 2.6, 5.48};
inline const ts::Distribution ex3_normal = ts::Normal{0.0, 4.53};
inline const ts::Distribution ex3_cauchy = ts::Cauchy{0.0, 2.76};

struct Scenario {
  std::string name;
  ts::Distribution dist;
  ts::TruncationLayout layout;
};

// Nine example scenarios plus the example 1 normal target with no internal gaps.
inline std::vector<Scenario> all() {
  return {
      {"ex1_normal", ex1_normal, ex1_layout()},
      {"ex1_cauchy", ex1_cauchy, ex1_layout()},
      {"ex1_skew", ex1_skew, ex1_layout()},
      {"ex1_gamma", ex1_gamma, ex1_half_line()},
      {"ex1_normal_nogap", ex1_normal, {-20, 30, {}, {}}},
      {"ex2_normal", ex2_normal, ex2_layout()},
      {"ex2_cauchy", ex2_cauchy, ex2_layout()},
      {"ex2_skew", ex2_skew, ex2_layout()},
      {"ex3_normal", ex3_normal, ex3_layout()},
      {"ex3_cauchy", ex3_cauchy, ex3_layout()},
  };
}

}  // namespace scenario

#endif  // TRUNCSEARCH_TESTS_SCENARIOS_HPP
