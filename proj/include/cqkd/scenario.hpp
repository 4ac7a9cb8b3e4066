#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cqkd/report.hpp"

namespace cqkd {

// ---------------------------------------------------------------------------
// Attack registry

struct AttackInfo {
  const char* name;
  const char* summary;
  const char* detail;
};

inline const std::vector<AttackInfo>& attack_registry() {
  static const std::vector<AttackInfo> r = {
      {"identity", "Eve does nothing",
       "U = V = identity on probe (x) channel.  Every probe vector E_n1n0 equals the\n"
       "initial probe |E>, so Eve can learn nothing."},
      {"pns", "photon-number splitting of two-photon pulses (BB84)",
       "Nondemolition splitting into a two-mode probe:\n"
       "  |0,0>E|0,2> -> |0,1>E|0,1>\n"
       "  |0,0>E|2,0> -> |1,0>E|1,0>\n"
       "  |0,0>E|1,1> -> (|1,0>E|0,1> + |0,1>E|1,0>)/sqrt2\n"
       "which also gives |0,0>E|0,2>_x -> |0,1>E_x|0,1>_x and |0,0>E|2,0>_x -> |1,0>E_x|1,0>_x.\n"
       "The lossy channel is replaced by a lossless one; two-photon pulses are forwarded\n"
       "first so Bob still sees X = (F p1 + [1 - (1-F)^2] p2) N non-empty pulses."},
      {"usd-b92", "unambiguous discrimination of B92 states",
       "Eve measures every pulse like Bob, in a random {u_b, u_b'} basis, and resends the\n"
       "identified state over a lossless channel only on a conclusive result.  Only\n"
       "attempted when lossrate >= (1 + c^2)/2, i.e. when 1 - p_conclusive losses hide it."},
      {"tagging", "two-photon tag against classical Alice",
       "Outbound: Bob's |+> is replaced by (|0,2> + |2,0>)/sqrt2.  Return: |E>|0,2> -> |E>|0,1>\n"
       "and |E>|2,0> -> |E>|1,0>, so CTRL rounds hand Bob exactly |+>.  Single photons coming\n"
       "back (measure-resend) are tagged into probe states E0/E1, revealing SIFT and the bit."},
      {"constrained-random", "random attack satisfying every undetectability constraint",
       "Outbound probe vectors vanish on mixed occupations (n1 * n0 != 0); the return pass\n"
       "has F01 = F10 and F0n = Fn0 = 0 for n > 1, with arbitrary orthogonal H vectors.\n"
       "Parameters: probe_dim, seed."},
      {"general", "user-supplied dense U and V matrices",
       "Matrix files hold `dim D` followed by D rows of D (re, im) pairs over probe (x)\n"
       "channel, channel index (n1+n0)(n1+n0+1)/2 + n1 fastest.  Both maps must be\n"
       "isometries within 1e-10.  Parameters: probe_dim, outbound_matrix, return_matrix, lossless."},
  };
  return r;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline const AttackInfo& find_attack(const std::string& name) {
  const auto& reg = attack_registry();
  for (const auto& a : reg)
    if (name == a.name) return a;
  const AttackInfo* best = &reg.front();
  for (const auto& a : reg)
    if (edit_distance(name, a.name) < edit_distance(name, best->name)) best = &a;
  throw config_error("unknown attack '" + name + "' (did you mean '" + best->name + "'?)");
}

// ---------------------------------------------------------------------------
// Scenario files

struct AttackParams {
  std::string name = "identity";
  std::size_t probe_dim = 4;
  std::uint64_t seed = 1;
  std::optional<double> overlap;
  std::string outbound_matrix, return_matrix;
  bool lossless = true;
};

struct Expectation {
  std::string metric;
  std::string formula;  // "@name" when given symbolically
  double analytic = 0.0;
  double tolerance = 0.0;
  double sigmas = 3.0;
};

struct Scenario {
  std::string name;
  std::string description;
  std::filesystem::path origin;
  ProtocolConfig config;
  AttackParams attack;
  std::vector<Expectation> expectations;
};

namespace detail {

class YamlReader {
 public:
  explicit YamlReader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& what) const {
    std::string where = origin_;
    if (n.IsDefined() && n.Mark().line >= 0) where += ":" + std::to_string(n.Mark().line + 1);
    throw config_error(where + ": field '" + field + "': " + what);
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& field, const char* expected) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, field, std::string("expected ") + expected);
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const char* key, const std::string& prefix, T& into,
            const char* expected) const {
    const YAML::Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) return;
    into = as<T>(n, prefix + key, expected);
  }

  void check_keys(const YAML::Node& map, const std::string& prefix,
                  std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) fail(map, prefix.empty() ? "<root>" : prefix, "expected a mapping");
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
        fail(kv.first, prefix + k, "unknown field");
    }
  }

 private:
  std::string origin_;
};

inline Variant parse_variant(const std::string& s, const YamlReader& y, const YAML::Node& n) {
  for (Variant v : {Variant::classical_alice_limited, Variant::classical_alice_full, Variant::bb84, Variant::b92})
    if (s == to_string(v)) return v;
  y.fail(n, "protocol.variant",
         "unknown variant '" + s + "' (classical-alice-limited, classical-alice-full, bb84, b92)");
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::filesystem::path& origin = "<string>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw config_error(origin.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  detail::YamlReader y(origin.string());
  y.check_keys(root, "", {"name", "description", "protocol", "attack", "expect"});
  Scenario s;
  s.origin = origin;
  y.read(root, "name", "", s.name, "string");
  if (s.name.empty()) y.fail(root, "name", "missing scenario name");
  y.read(root, "description", "", s.description, "string");

  ProtocolConfig& c = s.config;
  if (const YAML::Node p = root["protocol"]; p.IsDefined()) {
    y.check_keys(p, "protocol.", {"variant", "rounds", "seed", "n_max", "transmission", "detector",
                                  "residual_policy", "test_fraction", "ctrl_probability", "b92_overlap",
                                  "source", "strengthening"});
    std::string v = to_string(c.variant);
    y.read(p, "variant", "protocol.", v, "string");
    c.variant = detail::parse_variant(v, y, p["variant"]);
    y.read(p, "rounds", "protocol.", c.rounds, "non-negative integer");
    y.read(p, "seed", "protocol.", c.rng_seed, "64-bit unsigned integer");
    y.read(p, "n_max", "protocol.", c.n_max, "integer");
    y.read(p, "transmission", "protocol.", c.transmission, "real");
    y.read(p, "test_fraction", "protocol.", c.test_fraction, "real");
    y.read(p, "ctrl_probability", "protocol.", c.ctrl_probability, "real");
    y.read(p, "b92_overlap", "protocol.", c.b92_overlap, "real");
    std::string det = to_string(c.detector);
    y.read(p, "detector", "protocol.", det, "string");
    if (det == "threshold") c.detector = DetectorModel::threshold;
    else if (det == "counter") c.detector = DetectorModel::counter;
    else y.fail(p["detector"], "protocol.detector", "expected threshold or counter");
    std::string pol = to_string(c.residual_policy);
    y.read(p, "residual_policy", "protocol.", pol, "string");
    if (pol == "reflect-occupation") c.residual_policy = ResidualPolicy::reflect_occupation;
    else if (pol == "measure-resend") c.residual_policy = ResidualPolicy::measure_resend;
    else y.fail(p["residual_policy"], "protocol.residual_policy", "expected reflect-occupation or measure-resend");
    if (const YAML::Node src = p["source"]; src.IsDefined()) {
      y.check_keys(src, "protocol.source.", {"p0", "p1", "p2"});
      c.source = {0.0, 0.0, 0.0};
      y.read(src, "p0", "protocol.source.", c.source.p0, "real");
      y.read(src, "p1", "protocol.source.", c.source.p1, "real");
      y.read(src, "p2", "protocol.source.", c.source.p2, "real");
    }
    if (const YAML::Node st = p["strengthening"]; st.IsDefined()) {
      y.check_keys(st, "protocol.strengthening.", {"counters", "cross_basis_tests", "extra_bob_states",
                                                    "cross_basis_fraction", "extra_state_fraction"});
      auto& g = c.strengthening;
      y.read(st, "counters", "protocol.strengthening.", g.counters, "boolean");
      y.read(st, "cross_basis_tests", "protocol.strengthening.", g.cross_basis_tests, "boolean");
      y.read(st, "extra_bob_states", "protocol.strengthening.", g.extra_bob_states, "boolean");
      y.read(st, "cross_basis_fraction", "protocol.strengthening.", g.cross_basis_fraction, "real");
      y.read(st, "extra_state_fraction", "protocol.strengthening.", g.extra_state_fraction, "real");
    }
  }
  try {
    c.validate();
  } catch (const config_error& e) {
    y.fail(root["protocol"], "protocol", e.what());
  }

  if (const YAML::Node a = root["attack"]; a.IsDefined()) {
    y.check_keys(a, "attack.", {"name", "probe_dim", "seed", "overlap", "outbound_matrix", "return_matrix",
                                "lossless"});
    y.read(a, "name", "attack.", s.attack.name, "string");
    try {
      find_attack(s.attack.name);
    } catch (const config_error& e) {
      y.fail(a["name"], "attack.name", e.what());
    }
    y.read(a, "probe_dim", "attack.", s.attack.probe_dim, "positive integer");
    y.read(a, "seed", "attack.", s.attack.seed, "64-bit unsigned integer");
    if (a["overlap"].IsDefined()) s.attack.overlap = y.as<double>(a["overlap"], "attack.overlap", "real");
    y.read(a, "outbound_matrix", "attack.", s.attack.outbound_matrix, "path");
    y.read(a, "return_matrix", "attack.", s.attack.return_matrix, "path");
    y.read(a, "lossless", "attack.", s.attack.lossless, "boolean");
    if (s.attack.probe_dim == 0) y.fail(a["probe_dim"], "attack.probe_dim", "must be >= 1");
  }

  if (const YAML::Node e = root["expect"]; e.IsDefined()) {
    if (!e.IsMap()) y.fail(e, "expect", "expected a mapping metric -> expectation");
    for (const auto& kv : e) {
      Expectation x;
      x.metric = kv.first.as<std::string>();
      const std::string field = "expect." + x.metric;
      const YAML::Node spec = kv.second;
      // yaml-cpp nodes alias on assignment, so pick the value node once.
      const YAML::Node value = spec.IsMap() ? spec["analytic"] : spec;
      if (spec.IsMap()) {
        y.check_keys(spec, field + ".", {"analytic", "tolerance", "sigmas"});
        if (!value.IsDefined()) y.fail(spec, field + ".analytic", "missing analytic value");
        y.read(spec, "tolerance", field + ".", x.tolerance, "real");
        y.read(spec, "sigmas", field + ".", x.sigmas, "real");
      }
      const std::string raw = y.as<std::string>(value, field, "number or @formula");
      if (!raw.empty() && raw[0] == '@') x.formula = raw;
      else x.analytic = y.as<double>(value, field, "number or @formula");
      s.expectations.push_back(x);
    }
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

inline AttackSpec build_attack(const Scenario& s) {
  const AttackParams& a = s.attack;
  const int n_max = s.config.n_max;
  find_attack(a.name);
  if (a.name == "identity") return identity_attack(a.probe_dim, n_max);
  if (a.name == "pns") return pns_attack(n_max);
  if (a.name == "usd-b92") return usd_attack_b92(a.overlap.value_or(s.config.b92_overlap), n_max);
  if (a.name == "tagging") return tagging_attack(n_max);
  if (a.name == "constrained-random") {
    for (std::uint64_t k = 0;; ++k) {
      try {
        return constrained_random_attack(a.seed + k, a.probe_dim, n_max);
      } catch (const infeasible_completion&) {
        if (k > 1000) throw;
      }
    }
  }
  // general
  if (a.outbound_matrix.empty() || a.return_matrix.empty())
    throw config_error("attack 'general' needs outbound_matrix and return_matrix");
  const auto base = s.origin.has_parent_path() ? s.origin.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return (q.is_absolute() ? q : base / q).string();
  };
  return general_attack(load_matrix_file(resolve(a.outbound_matrix)), load_matrix_file(resolve(a.return_matrix)),
                        a.probe_dim, n_max, a.lossless);
}

// ---------------------------------------------------------------------------
// Running and comparing

struct ComparisonRow {
  std::string metric;
  double analytic = 0.0;
  double empirical = 0.0;
  double sigma = 0.0;
  double deviation_sigmas = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  Scenario scenario;
  RunReport report;
  std::map<std::string, double> exact;  // closed-form quantities for the attack
  std::vector<ComparisonRow> rows;

  bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
  }
};

/// Named analytic values usable as `@name` in expectations.
inline double evaluate_formula(const std::string& f, const Scenario& s) {
  const ProtocolConfig& c = s.config;
  const double n = static_cast<double>(c.rounds);
  const double cc = s.attack.overlap.value_or(c.b92_overlap);
  if (f == "@b92_conclusive") return b92_conclusive_prob(cc);
  if (f == "@b92_conclusive_count") return b92_conclusive_prob(cc) * n;
  if (f == "@bb84_received") return bb84_expected_received(c.source, c.transmission, c.rounds);
  if (f == "@bb84_received_fraction") return bb84_expected_received(c.source, c.transmission, c.rounds) / n;
  if (f == "@loss_fraction") {
    // Bob's |+> survives both legs with probability F^2; SIFT rounds where
    // Alice sees nothing are also losses.
    return 1.0 - c.transmission * c.transmission;
  }
  if (f == "@half") return 0.5;
  throw config_error("unknown formula '" + f + "'");
}

inline std::map<std::string, double> exact_metrics(const AttackSpec& atk, const ProtocolConfig& cfg) {
  std::map<std::string, double> m;
  if (cfg.variant == Variant::classical_alice_full || cfg.variant == Variant::classical_alice_limited) {
    const ConstraintReport c = check_constraints(atk, cfg);
    m["exact.alice_11_prob"] = c.alice_11_prob;
    m["exact.bob_minus_click_prob"] = c.bob_minus_click_prob;
    m["exact.sift_error_prob"] = c.sift_error_prob;
    m["exact.undetectable"] = c.undetectable ? 1.0 : 0.0;
    m["exact.action_discrimination"] = action_discrimination(atk, cfg);
  }
  if (cfg.variant != Variant::b92) {
    const LeakageReport l = eve_leakage(atk, cfg);
    if (l.defined) {
      m["exact.leakage_fidelity"] = l.conditional_fidelity;
      m["exact.leakage_trace_distance"] = l.trace_distance;
    }
  }
  if (cfg.variant == Variant::bb84) {
    const PnsFeasibility p = pns_feasibility(cfg.source.p0, cfg.source.p1, cfg.source.p2, cfg.transmission, cfg.rounds);
    m["exact.pns_x"] = p.x;
    m["exact.pns_feasible"] = p.feasible ? 1.0 : 0.0;
  }
  return m;
}

inline ComparisonRow compare(const Expectation& e, double analytic, double empirical, std::optional<Metric> metric) {
  ComparisonRow r{e.metric, analytic, empirical};
  if (metric && metric->trials > 0) {
    const double t = static_cast<double>(metric->trials);
    const double p = std::clamp(metric->is_fraction ? analytic : analytic / t, 0.0, 1.0);
    r.sigma = metric->is_fraction ? std::sqrt(p * (1.0 - p) / t) : std::sqrt(t * p * (1.0 - p));
  }
  const double d = std::abs(empirical - analytic);
  r.deviation_sigmas = d == 0.0 ? 0.0 : r.sigma > 0.0 ? d / r.sigma : std::numeric_limits<double>::infinity();
  r.pass = d <= e.tolerance || (r.sigma > 0.0 && d <= e.sigmas * r.sigma);
  return r;
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  unsigned jobs = 1;
};

inline ScenarioResult run_scenario(Scenario s, const RunOptions& opt = {}) {
  if (opt.seed) s.config.rng_seed = *opt.seed;
  if (opt.rounds) s.config.rounds = *opt.rounds;
  s.config.jobs = opt.jobs;
  s.config.validate();
  const AttackSpec atk = build_attack(s);
  ScenarioResult out{s, run(s.config, atk), exact_metrics(atk, s.config), {}};
  for (const auto& e : s.expectations) {
    const double analytic = e.formula.empty() ? e.analytic : evaluate_formula(e.formula, s);
    if (auto it = out.exact.find(e.metric); it != out.exact.end()) {
      out.rows.push_back(compare(e, analytic, it->second, std::nullopt));
      continue;
    }
    const auto m = find_metric(out.report, e.metric);
    if (!m) throw config_error(s.origin.string() + ": expectation on unknown metric '" + e.metric + "'");
    out.rows.push_back(compare(e, analytic, m->value, m));
  }
  return out;
}

inline void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "[comparison]\n";
  for (const auto& r : rows)
    out << r.metric << " analytic=" << format_double(r.analytic) << " empirical=" << format_double(r.empirical)
        << " sigma=" << format_double(r.sigma) << " deviation_sigmas=" << format_double(r.deviation_sigmas)
        << " pass=" << (r.pass ? "yes" : "no") << '\n';
}

inline void write_summary(std::ostream& out, const ScenarioResult& r) {
  const auto& s = r.scenario;
  out << "Scenario: " << s.name << '\n';
  if (!s.description.empty()) out << s.description << '\n';
  out << "Protocol: " << to_string(s.config.variant) << ", " << s.config.rounds << " rounds, seed "
      << s.config.rng_seed << ", F = " << format_double(s.config.transmission) << ", detector "
      << to_string(s.config.effective_detector()) << ", residual " << to_string(s.config.residual_policy) << '\n';
  out << "Attack:   " << r.report.attack << '\n';
  if (r.report.variant == Variant::b92) out << "USD attempted: " << (r.report.attack_attempted ? "yes" : "no") << '\n';
  if (r.report.variant == Variant::bb84 && r.report.pns_infeasible) out << "PNS: infeasible at this loss\n";
  out << '\n';
  const auto& t = r.report.totals;
  out << "Outcomes: " << t.losses << " loss, " << t.conclusive << " conclusive, " << t.inconclusive
      << " inconclusive, " << t.errors << " error\n";
  if (!r.exact.empty()) {
    out << "\nExact quantities\n";
    for (const auto& [k, v] : r.exact) out << "  " << k << " = " << format_double(v) << '\n';
  }
  if (!r.rows.empty()) {
    out << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %14s %14s %10s %8s  %s\n", "metric", "analytic", "empirical", "sigma",
                  "dev/sig", "result");
    out << line;
    for (const auto& row : r.rows) {
      std::snprintf(line, sizeof line, "%-32s %14.6g %14.6g %10.3g %8.2f  %s\n", row.metric.c_str(), row.analytic,
                    row.empirical, row.sigma, std::isinf(row.deviation_sigmas) ? 999.99 : row.deviation_sigmas,
                    row.pass ? "PASS" : "FAIL");
      out << line;
    }
  }
  out << "\nOverall: " << (r.passed() ? "PASS" : "FAIL") << '\n';
}

// ---------------------------------------------------------------------------
// Verification suites

struct CheckRow {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CorpusRow {
  int n, sign, k;
  long numerator, radicand, denominator;
  double value() const {
    return static_cast<double>(numerator) * std::sqrt(static_cast<double>(radicand)) /
           static_cast<double>(denominator);
  }
};

inline std::vector<CorpusRow> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read expansion corpus " + path.string());
  std::vector<CorpusRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    CorpusRow r{};
    if (!(is >> r.n >> r.sign >> r.k >> r.numerator >> r.radicand >> r.denominator))
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": malformed corpus row");
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<CheckRow> verify_fock(const std::filesystem::path& corpus) {
  std::vector<CheckRow> out;
  const auto rows = load_corpus(corpus);
  double worst = 0.0;
  for (const auto& r : rows) {
    const ExpansionRow e = x_expansion(r.n, r.sign, std::max(r.n, 1));
    worst = std::max(worst, std::abs(e.coefficients.at(static_cast<std::size_t>(r.k)) - r.value()));
  }
  out.push_back({"fock", "expansion rows vs corpus (" + std::to_string(rows.size()) + " entries)",
                 !rows.empty() && worst <= 1e-12, "max error " + format_double(worst)});

  double inv = 0.0;
  RoundRng rng(2024, 0);
  for (int t = 0; t < 50; ++t) {
    FockState s(Basis::z, 6);
    for (int i = 0; i < static_cast<int>(occupation_count(6)); ++i)
      s.add(occupation_at(static_cast<std::size_t>(i)), linalg::complex_normal(rng));
    s = s.normalized();
    const FockState back = change_basis(change_basis(s).retag(Basis::z));
    for (int i = 0; i < static_cast<int>(occupation_count(6)); ++i) {
      const Occupation o = occupation_at(static_cast<std::size_t>(i));
      inv = std::max(inv, std::abs(back.amplitude(o) - s.amplitude(o)));
    }
  }
  out.push_back({"fock", "basis change is an involution", inv <= 1e-10, "max error " + format_double(inv)});

  double parity = 0.0;
  for (int n = 1; n <= 6; ++n)
    for (Parity p : {Parity::even, Parity::odd}) {
      const auto d = measure_distribution(even_odd_state(n, p, Basis::z, 6), Basis::x);
      for (int k = 0; k <= n; ++k) {
        const bool allowed = (k % 2 == 0) == (p == Parity::even);
        const double want = allowed ? 2.0 * binomial(n, k) / std::pow(2.0, n) : 0.0;
        auto it = d.find({k, n - k});
        parity = std::max(parity, std::abs((it == d.end() ? 0.0 : it->second) - want));
      }
    }
  out.push_back({"fock", "parity laws n <= 6", parity <= 1e-12, "max error " + format_double(parity)});
  return out;
}

inline std::vector<CheckRow> verify_lemma(std::uint64_t seed, int trials = 200) {
  const LemmaSummary s = lemma_verify(4, trials, seed);
  return {
      {"lemma", "forward: constrained attacks undetectable", s.forward_ok(),
       "max minus-click " + format_double(s.max_forward_minus_click) + ", min fidelity " +
           format_double(s.min_forward_fidelity)},
      {"lemma", "converse: single violations detectable", s.converse_ok(),
       "min violating prob " + format_double(s.min_violating_prob) + ", n=1 analytic error " +
           format_double(s.max_f01_analytic_error)},
      {"lemma", "even/odd decomposition", s.decomposition_ok(),
       "max error " + format_double(s.max_decomposition_error)},
  };
}

inline std::vector<CheckRow> verify_thresholds() {
  std::vector<CheckRow> out;
  const PnsFeasibility p = pns_feasibility(0.89, 0.1, 0.01, 0.01, 1000000);
  out.push_back({"thresholds", "PNS X for p1=0.1 p2=0.01 F=0.01 N=1e6", std::abs(p.x - 1199.0) <= 1e-6 && p.feasible,
                 "X = " + format_double(p.x)});
  const double ratio = 0.01 / (0.99 * 0.99);
  out.push_back({"thresholds", "PNS threshold ratio F/(1-F)^2", std::abs(p.threshold_ratio - ratio) <= 1e-15,
                 format_double(p.threshold_ratio)});
  const double below = std::nextafter(ratio * 0.1 * (1.0 - 1e-9), 0.0);
  const double above = ratio * 0.1 * (1.0 + 1e-9);
  const bool flip = !pns_feasibility(1.0 - 0.1 - below, 0.1, below, 0.01, 1000000).feasible &&
                    pns_feasibility(1.0 - 0.1 - above, 0.1, above, 0.01, 1000000).feasible;
  out.push_back({"thresholds", "PNS feasibility flips at the threshold ratio", flip, ""});
  bool b92 = true;
  for (double c : {0.0, 0.5, 0.8}) {
    b92 = b92 && std::abs(b92_conclusive_prob(c) - (1.0 - c * c) / 2.0) <= 1e-15;
    const double t = (1.0 + c * c) / 2.0;
    b92 = b92 && b92_breakable(t, c) && !b92_breakable(t - 1e-9, c);
    b92 = b92 && b92_breakable_by_povm(c, c) && !b92_breakable_by_povm(c - 1e-9, c);
  }
  out.push_back({"thresholds", "B92 conclusive probability and loss thresholds", b92, "c in {0, 0.5, 0.8}"});
  return out;
}

}  // namespace cqkd
