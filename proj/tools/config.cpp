#include "config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <vector>

namespace truncsearch::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return std::string(s.substr(lo, hi - lo));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

class Reader {
 public:
  Reader(std::string source, std::map<std::string, Section> sections, std::map<std::string, int> headers)
      : source_(std::move(source)), sections_(std::move(sections)), headers_(std::move(headers)) {}

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ConfigError(source_, line, message);
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
  int header_line(const std::string& s) const {
    const auto it = headers_.find(s);
    return it == headers_.end() ? 0 : it->second;
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    return e ? e->line : header_line(section);
  }

  double parse_real(const Entry& e, const std::string& key) const {
    const std::string v = lower(e.value);
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    if (!e.value.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) fail(e.line, key + ": expected a number, got '" + e.value + "'");
    return out;
  }

  std::optional<double> real(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    return parse_real(*e, key);
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    long long out = 0;
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) fail(e->line, key + ": expected an integer, got '" + e->value + "'");
    return out;
  }

  // "(x,y) (x,y) ..." with optional whitespace and commas between pairs.
  std::vector<Gap> gaps(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return {};
    std::vector<Gap> out;
    const std::string& s = e->value;
    std::size_t pos = 0;
    const auto skip = [&] {
      while (pos < s.size() && (std::isspace(static_cast<unsigned char>(s[pos])) || s[pos] == ',')) ++pos;
    };
    const auto number_until = [&](char stop) {
      const std::size_t end = s.find(stop, pos);
      if (end == std::string::npos) fail(e->line, key + ": expected '" + std::string(1, stop) + "' in '" + s + "'");
      const double v = parse_real({trim(std::string_view(s).substr(pos, end - pos)), e->line}, key);
      pos = end + 1;
      return v;
    };
    skip();
    while (pos < s.size()) {
      if (s[pos] != '(') fail(e->line, key + ": gaps must be written as (lower,upper), got '" + s + "'");
      ++pos;
      const double lo = number_until(',');
      const double hi = number_until(')');
      out.push_back({lo, hi});
      skip();
    }
    return out;
  }

  void reject_unknown(const std::string& section, const std::set<std::string>& allowed) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, entry] : s->second) {
      if (!allowed.count(key)) fail(entry.line, "unknown key '" + key + "' in [" + section + "]");
    }
  }

 private:
  std::string source_;
  std::map<std::string, Section> sections_;
  std::map<std::string, int> headers_;
};

Distribution read_distribution(const Reader& r) {
  const std::string sec = "distribution";
  if (!r.has_section(sec)) return Normal{};
  const auto* kind_entry = r.find(sec, "kind");
  if (!kind_entry) r.fail(r.header_line(sec), "[distribution] needs 'kind'");
  const std::string kind = lower(kind_entry->value);
  const auto get = [&](const char* key, double fallback) { return r.real(sec, key).value_or(fallback); };

  Distribution d;
  if (kind == "normal") {
    r.reject_unknown(sec, {"kind", "mean", "stddev"});
    d = Normal{get("mean", 0.0), get("stddev", 1.0)};
  } else if (kind == "cauchy") {
    r.reject_unknown(sec, {"kind", "location", "half_width"});
    d = Cauchy{get("location", 0.0), get("half_width", 1.0)};
  } else if (kind == "skew-normal" || kind == "skew_normal" || kind == "skewnormal") {
    r.reject_unknown(sec, {"kind", "location", "scale", "shape"});
    d = SkewNormal{get("location", 0.0), get("scale", 1.0), get("shape", 0.0)};
  } else if (kind == "gamma") {
    r.reject_unknown(sec, {"kind", "shape", "scale"});
    d = Gamma{get("shape", 1.0), get("scale", 1.0)};
  } else {
    r.fail(kind_entry->line, "unknown distribution kind '" + kind_entry->value +
                                 "' (expected normal, cauchy, skew-normal or gamma)");
  }
  try {
    validate(d);
  } catch (const std::invalid_argument& e) {
    r.fail(r.header_line(sec), e.what());
  }
  return d;
}

int line_for_mesh_name(const Reader& r, const std::string& name) {
  const std::string sec = "truncation";
  if (name == "a") return r.line_of(sec, "a");
  if (name == "b") return r.line_of(sec, "b");
  if (name.starts_with("theta_") || name.starts_with("zeta_")) return r.line_of(sec, "left");
  if (name.starts_with("alpha_") || name.starts_with("beta_")) return r.line_of(sec, "right");
  return r.header_line(sec);
}

TruncationLayout read_layout(const Reader& r) {
  const std::string sec = "truncation";
  TruncationLayout layout{0.0, 10.0, {}, {}};
  if (!r.has_section(sec)) return layout;
  r.reject_unknown(sec, {"a", "b", "left", "right"});
  layout.a = r.real(sec, "a").value_or(0.0);
  layout.b = r.real(sec, "b").value_or(10.0);
  layout.left_gaps = r.gaps(sec, "left");
  layout.right_gaps = r.gaps(sec, "right");
  try {
    validate(layout);
  } catch (const LayoutError& e) {
    // Report the later of the two lines involved, which is where the violating value sits.
    const int line = std::max(line_for_mesh_name(r, e.first()), line_for_mesh_name(r, e.second()));
    r.fail(line, e.what());
  }
  return layout;
}

SearchSpeeds read_speeds(const Reader& r) {
  const std::string sec = "search";
  r.reject_unknown(sec, {"v1", "v2"});
  SearchSpeeds s;
  s.sweep = r.real(sec, "v1").value_or(1.0);
  s.gap = r.real(sec, "v2").value_or(5.0 * s.sweep);
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    r.fail(std::max(r.line_of(sec, "v1"), r.line_of(sec, "v2")), e.what());
  }
  return s;
}

void read_optimizer(const Reader& r, ScenarioConfig& cfg) {
  const std::string sec = "optimizer";
  r.reject_unknown(sec, {"penalty", "left_width", "left_zeta", "left_theta", "right_width", "right_beta",
                         "right_alpha", "max_iterations", "grad_tol", "step_tol", "fd_step",
                         "initial_damping"});
  const double base = r.real(sec, "penalty").value_or(0.1);
  const auto coeff = [&](const char* key) {
    const double v = r.real(sec, key).value_or(base);
    if (!(v > 0.0 && v < 1.0)) {
      r.fail(r.line_of(sec, r.find(sec, key) ? key : "penalty"),
             std::string(key) + " = " + std::to_string(v) + " violates 0 < penalty < 1");
    }
    return v;
  };
  cfg.penalties.left = {coeff("left_width"), coeff("left_zeta"), coeff("left_theta")};
  cfg.penalties.right = {coeff("right_width"), coeff("right_beta"), coeff("right_alpha")};

  auto& n = cfg.newton;
  if (const auto v = r.integer(sec, "max_iterations")) {
    if (*v < 1 || *v > 1000000) r.fail(r.line_of(sec, "max_iterations"), "max_iterations must lie in [1, 1000000]");
    n.max_iterations = static_cast<int>(*v);
  }
  const auto positive = [&](const char* key, double& field) {
    if (const auto v = r.real(sec, key)) {
      if (!(*v > 0.0) || !std::isfinite(*v)) r.fail(r.line_of(sec, key), std::string(key) + " must be finite and > 0");
      field = *v;
    }
  };
  positive("grad_tol", n.grad_tol);
  positive("step_tol", n.step_tol);
  positive("fd_step", n.fd_step);
  if (const auto v = r.real(sec, "initial_damping")) {
    if (!(*v >= 0.0) || !std::isfinite(*v)) r.fail(r.line_of(sec, "initial_damping"), "initial_damping must be finite and >= 0");
    n.initial_damping = *v;
  }
}

}  // namespace

PenaltyParams ScenarioConfig::penalty_params() const {
  return {std::vector<GapPenalty>(layout.left_count(), penalties.left),
          std::vector<GapPenalty>(layout.right_count(), penalties.right)};
}

ScenarioConfig parse_config(std::istream& in, const std::string& source) {
  static const std::set<std::string> known = {"distribution", "truncation", "search", "optimizer"};
  std::map<std::string, Section> sections;
  std::map<std::string, int> headers;
  std::string current;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(source, line, "unterminated section header '" + text + "'");
      current = lower(trim(std::string_view(text).substr(1, text.size() - 2)));
      if (!known.count(current)) throw ConfigError(source, line, "unknown section [" + current + "]");
      if (headers.count(current)) throw ConfigError(source, line, "duplicate section [" + current + "]");
      headers[current] = line;
      sections[current];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value', got '" + text + "'");
    if (current.empty()) throw ConfigError(source, line, "key outside of any section");
    const std::string key = lower(trim(std::string_view(text).substr(0, eq)));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line, "empty key");
    if (value.empty()) throw ConfigError(source, line, "empty value for '" + key + "'");
    auto& section = sections[current];
    if (section.count(key)) throw ConfigError(source, line, "duplicate key '" + key + "'");
    section[key] = {value, line};
  }

  const Reader r(source, std::move(sections), std::move(headers));
  ScenarioConfig cfg;
  cfg.source = source;
  cfg.distribution = read_distribution(r);
  cfg.layout = read_layout(r);
  if (std::holds_alternative<Gamma>(cfg.distribution) && !cfg.layout.half_line()) {
    r.fail(r.line_of("truncation", cfg.layout.left_gaps.empty() ? "a" : "left"),
           "gamma targets need a half-line layout: a = 0 and no left gaps");
  }
  cfg.speeds = read_speeds(r);
  read_optimizer(r, cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  return parse_config(in, path);
}

}  // namespace truncsearch::cli
