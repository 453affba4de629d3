#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "config.hpp"
#include "truncsearch/montecarlo.hpp"
#include "truncsearch/optimizer.hpp"

namespace truncsearch::cli {

namespace {

std::string num(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string time_str(double v) { return num(v, 6); }
std::string stat_str(double v) { return num(v, 12); }
std::string coord_str(double v) { return num(v, 9); }

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string output;
  int points = 1001;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string trace;
  std::optional<int> m;
  std::string vary;
  std::vector<double> x_range;
  std::vector<double> y_range;
  int steps = 51;
};

void write_pdf(const ScenarioConfig& cfg, const Options& o, std::ostream& out) {
  const TruncatedDistribution t(cfg.distribution, cfg.layout);
  const auto& L = cfg.layout;
  struct Row {
    double x;
    int order;
    double value;
  };
  std::vector<Row> rows;
  for (int i = 0; i < o.points; ++i) {
    const double x = i + 1 == o.points ? L.b : L.a + (L.b - L.a) * i / (o.points - 1);
    rows.push_back({x, 0, t.pdf(x)});
  }
  // Each gap edge gets both the segment value and 0, so the steps integrate exactly.
  for (const auto* side : {&L.left_gaps, &L.right_gaps}) {
    for (const auto& g : *side) {
      rows.push_back({g.lower, 0, t.pdf(g.lower)});
      rows.push_back({g.lower, 1, 0.0});
      rows.push_back({g.upper, -1, 0.0});
      rows.push_back({g.upper, 0, t.pdf(g.upper)});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& p, const Row& q) {
    return p.x != q.x ? p.x < q.x : p.order < q.order;
  });
  out << "x,pdf\n";
  for (const auto& r : rows) out << coord_str(r.x) << ',' << coord_str(r.value) << '\n';
}

void write_cdf(const ScenarioConfig& cfg, const Options& o, std::ostream& out) {
  const TruncatedDistribution t(cfg.distribution, cfg.layout);
  const auto& L = cfg.layout;
  out << "x,cdf\n";
  for (int i = 0; i < o.points; ++i) {
    const double x = i + 1 == o.points ? L.b : L.a + (L.b - L.a) * i / (o.points - 1);
    out << coord_str(x) << ',' << coord_str(t.cdf(x)) << '\n';
  }
}

void write_expected_times(const ScenarioConfig& cfg, std::ostream& out) {
  const TruncatedDistribution t(cfg.distribution, cfg.layout);
  out << "m,tau,expected\n";
  for (const auto& r : expected_time_table(t, cfg.speeds).rows) {
    out << r.m << ',' << time_str(r.tau) << ',' << time_str(r.expected) << '\n';
  }
}

void write_baseline(const ScenarioConfig& cfg, std::ostream& out) {
  const auto& L = cfg.layout;
  if (!(L.a < 0.0 && L.b > 0.0)) {
    throw UsageError("baseline needs a two-sided domain with a < 0 < b");
  }
  out << "side,expected\n";
  out << "left," << time_str(baseline_expectation(cfg.distribution, L.a, L.b, cfg.speeds, Side::Left)) << '\n';
  out << "right," << time_str(baseline_expectation(cfg.distribution, L.a, L.b, cfg.speeds, Side::Right)) << '\n';
}

GridAxis axis_from(const std::vector<double>& range, double lo, double hi, int steps) {
  if (range.empty()) return {lo, hi, steps};
  if (range.size() != 2) throw UsageError("axis ranges take two values: lo,hi");
  return {range[0], range[1], steps};
}

void write_contour(const ScenarioConfig& cfg, const Options& o, std::ostream& out) {
  const auto& L = cfg.layout;
  VariedGap vary;
  if (o.vary.empty()) {
    vary = L.right_count() == 1 ? VariedGap::Right : VariedGap::Left;
  } else if (o.vary == "left") {
    vary = VariedGap::Left;
  } else if (o.vary == "right") {
    vary = VariedGap::Right;
  } else {
    throw UsageError("--vary must be 'left' or 'right'");
  }
  const auto& gaps = vary == VariedGap::Left ? L.left_gaps : L.right_gaps;
  if (gaps.size() != 1) {
    throw UsageError("contour needs exactly one gap on the varied side; the config has " +
                     std::to_string(gaps.size()));
  }
  if (o.steps < 1) throw UsageError("--steps must be >= 1");
  const double lo = vary == VariedGap::Left ? L.a : 0.0;
  const double hi = vary == VariedGap::Left ? 0.0 : L.b;
  const int m = o.m.value_or(last_time_index(L));
  const auto lo_m = first_time_index(L);
  if (m < lo_m || m > last_time_index(L)) {
    throw UsageError("--m must lie in " + std::to_string(lo_m) + ".." + std::to_string(last_time_index(L)));
  }
  const auto grid = contour_grid(cfg.distribution, L, cfg.speeds, m, vary, axis_from(o.x_range, lo, hi, o.steps),
                                 axis_from(o.y_range, lo, hi, o.steps), o.threads);
  out << "x,y,expected\n";
  for (std::size_t iy = 0; iy < grid.y.size(); ++iy) {
    for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
      if (std::isnan(grid.at(ix, iy))) continue;  // infeasible node
      out << coord_str(grid.x[ix]) << ',' << coord_str(grid.y[iy]) << ',' << time_str(grid.at(ix, iy)) << '\n';
    }
  }
}

void write_trace(const std::vector<TraceRow>& trace, std::ostream& out) {
  out << "iteration,objective,grad_norm,damping\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << stat_str(r.objective) << ',' << stat_str(r.grad_norm) << ','
        << stat_str(r.damping) << '\n';
  }
}

void write_optimize(const ScenarioConfig& cfg, const Options& o, std::ostream& out) {
  const auto result = optimize_layout(cfg.distribution, cfg.layout, cfg.speeds, cfg.penalty_params(), cfg.newton);
  const auto& L = result.layout;
  for (std::size_t j = 0; j < L.left_count(); ++j) {
    out << "left_gap_" << j + 1 << " = (" << coord_str(L.left_gaps[j].lower) << ","
        << coord_str(L.left_gaps[j].upper) << ")\n";
  }
  for (std::size_t i = 0; i < L.right_count(); ++i) {
    out << "right_gap_" << i + 1 << " = (" << coord_str(L.right_gaps[i].lower) << ","
        << coord_str(L.right_gaps[i].upper) << ")\n";
  }
  out << "penalized_initial = " << time_str(result.initial_objective) << '\n';
  out << "penalized = " << time_str(result.result.objective) << '\n';
  out << "unpenalized_initial = " << time_str(result.initial_unpenalized) << '\n';
  out << "unpenalized = " << time_str(result.unpenalized) << '\n';
  out << "iterations = " << result.result.iterations << '\n';
  out << "grad_norm = " << stat_str(result.result.grad_norm) << '\n';
  out << "converged = " << (result.result.converged ? "true" : "false") << '\n';
  out << "stop = " << to_string(result.result.stop) << '\n';
  if (!o.trace.empty()) {
    std::ofstream trace(o.trace);
    if (!trace) throw UsageError("cannot write trace file " + o.trace);
    write_trace(result.result.trace, trace);
  }
}

void write_validate(const ScenarioConfig& cfg, const Options& o, std::ostream& out) {
  if (o.n < 1) throw UsageError("--n must be >= 1");
  const TruncatedDistribution t(cfg.distribution, cfg.layout);
  out << to_key_value(run_validation(t, cfg.speeds, o.seed, o.n));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coordinated two-searcher model on truncated distributions", "truncsearch"};
  app.require_subcommand(1);
  Options o;

  const auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", o.config, "Scenario file")->required();
    sub->add_option("-o,--output", o.output, "Write to this file instead of standard output");
    return sub;
  };
  add("classify", "Print the truncation class");
  add("pdf", "Truncated density over a grid (CSV)")->add_option("--points", o.points, "Grid points")->check(CLI::Range(2, 10000000));
  add("cdf", "Truncated CDF over a grid (CSV)")->add_option("--points", o.points, "Grid points")->check(CLI::Range(2, 10000000));
  add("expected-times", "Elapsed and expected times per index m (CSV)");
  add("baseline", "Expected sweep times without internal gaps");
  auto* contour = add("contour", "Expected time over a grid of one gap's endpoints (CSV)");
  contour->add_option("--vary", o.vary, "Which gap to vary: left or right");
  contour->add_option("--m", o.m, "Time index (default: the last)");
  contour->add_option("--x-range", o.x_range, "lo hi for the gap's lower endpoint")->expected(2)->delimiter(',');
  contour->add_option("--y-range", o.y_range, "lo hi for the gap's upper endpoint")->expected(2)->delimiter(',');
  contour->add_option("--steps", o.steps, "Nodes per axis");
  contour->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  add("optimize", "Damped Newton optimization of the mesh")->add_option("--trace", o.trace, "Write the iteration trace CSV here");
  auto* validate_cmd = add("validate", "Monte Carlo validation report");
  validate_cmd->add_option("--n", o.n, "Sample count");
  validate_cmd->add_option("--seed", o.seed, "Generator seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kBadConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  std::ostringstream buffer;
  try {
    const auto cfg = load_config(o.config);
    if (cmd == "classify") {
      buffer << to_string(classify(cfg.layout)) << '\n';
    } else if (cmd == "pdf") {
      write_pdf(cfg, o, buffer);
    } else if (cmd == "cdf") {
      write_cdf(cfg, o, buffer);
    } else if (cmd == "expected-times") {
      write_expected_times(cfg, buffer);
    } else if (cmd == "baseline") {
      write_baseline(cfg, buffer);
    } else if (cmd == "contour") {
      write_contour(cfg, o, buffer);
    } else if (cmd == "optimize") {
      write_optimize(cfg, o, buffer);
    } else if (cmd == "validate") {
      write_validate(cfg, o, buffer);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const StallError& e) {
    err << "numeric failure: " << e.what() << '\n';
    write_trace(e.trace(), err);
    return kNumericFailure;
  } catch (const EvaluationError& e) {
    err << "numeric failure: " << e.what() << " at x =";
    for (double v : e.point()) err << ' ' << coord_str(v);
    err << '\n';
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }

  if (o.output.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.output, std::ios::binary);
    if (!file || !(file << buffer.str())) {
      err << "error: cannot write " << o.output << '\n';
      return kBadConfig;
    }
  }
  return kSuccess;
}

}  // namespace truncsearch::cli
