#ifndef TRUNCSEARCH_TOOLS_CONFIG_HPP
#define TRUNCSEARCH_TOOLS_CONFIG_HPP

#include <istream>
#include <map>
#include <stdexcept>
#include <string>

#include "truncsearch/optimizer.hpp"

namespace truncsearch::cli {

/// A malformed or inconsistent scenario file. what() is "<source>:<line>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Uniform penalty coefficients per side; expanded to one GapPenalty per gap.
struct PenaltySettings {
  GapPenalty left;
  GapPenalty right;
};

/// One scenario file:
///
///   [distribution]  kind = normal | cauchy | skew-normal | gamma, plus
///                   mean/stddev, location/half_width, location/scale/shape, shape/scale
///   [truncation]    a, b, left = (theta,zeta) ..., right = (alpha,beta) ...
///   [search]        v1, v2 (v2 may be inf)
///   [optimizer]     penalty, left_width, left_zeta, left_theta, right_width,
///                   right_beta, right_alpha, max_iterations, grad_tol, step_tol,
///                   fd_step, initial_damping
///
/// Every section is optional. Without [truncation] the domain is [0, 10]; an
/// absent `a` means a = 0.
struct ScenarioConfig {
  std::string source;
  Distribution distribution = Normal{};
  TruncationLayout layout{0.0, 10.0, {}, {}};
  SearchSpeeds speeds{};
  PenaltySettings penalties{};
  NewtonOptions newton{};

  PenaltyParams penalty_params() const;
};

ScenarioConfig parse_config(std::istream& in, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

}  // namespace truncsearch::cli

#endif  // TRUNCSEARCH_TOOLS_CONFIG_HPP
