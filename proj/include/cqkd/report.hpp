#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "cqkd/analysis.hpp"

namespace cqkd {

/// Shortest round-trip representation, independent of locale and stream state.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string format_metric(const Metric& m) {
  if (!m.is_fraction && std::floor(m.value) == m.value && std::abs(m.value) < 1e18)
    return std::to_string(static_cast<long long>(m.value));
  return format_double(m.value);
}

enum class ReportFormat : std::uint8_t { text, csv };

namespace detail {

inline std::string flags_of(const RoundRecord& r) {
  std::string f;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!f.empty()) f += '|';
    f += name;
  };
  add(r.ctrl_error, "ctrl_error");
  add(r.test_error, "test_error");
  add(r.double_click, "double_click");
  add(r.multi_photon, "multi_photon");
  add(r.loss, "loss");
  add(r.key_mismatch, "key_mismatch");
  add(r.extra_test_error, "extra_test_error");
  add(r.test_sample, "test");
  add(r.extra_state, "extra_state");
  add(r.cross_basis, "cross_basis");
  return f.empty() ? "-" : f;
}

inline std::string opt_bit(int b) { return b < 0 ? "-" : std::to_string(b); }

}  // namespace detail

inline const char* round_header() {
  return "index,photons,alice_action,alice_readout,sender_basis,sender_bit,bob_basis,bob_readout,"
         "alice_bit,bob_bit,eve_bit,eve_action,outcome,flags";
}

inline std::string round_row(const RoundRecord& r, char sep) {
  std::ostringstream o;
  o << r.index << sep << r.sent_photons << sep
    << (r.alice_action ? to_string(*r.alice_action) : "-") << sep
    << (r.alice_action == AliceAction::sift ? to_string(r.alice_readout) : std::string("-")) << sep
    << (r.alice_action ? "-" : to_string(r.sender_basis)) << sep << detail::opt_bit(r.sender_bit) << sep
    << (r.bob_b92_basis >= 0 ? "u" + std::to_string(r.bob_b92_basis) : std::string(to_string(r.bob_basis)))
    << sep << to_string(r.bob_readout) << sep << detail::opt_bit(r.alice_bit) << sep
    << detail::opt_bit(r.bob_bit) << sep << detail::opt_bit(r.eve_bit) << sep
    << (r.eve_action_guess ? to_string(*r.eve_action_guess) : "-") << sep << to_string(r.outcome) << sep
    << detail::flags_of(r);
  return o.str();
}

/// Machine-readable aggregate block, one `name = value` per line.
inline void write_aggregate(std::ostream& out, const RunReport& r) {
  out << "[aggregate]\n";
  for (const auto& m : metrics(r)) out << m.name << " = " << format_metric(m) << '\n';
}

inline void write_report(std::ostream& out, const RunReport& r, const std::string& scenario,
                         ReportFormat fmt = ReportFormat::text) {
  if (fmt == ReportFormat::csv) {
    out << "# scenario=" << scenario << " variant=" << to_string(r.variant) << " attack=" << r.attack
        << " seed=" << r.seed << " rounds=" << r.rounds << '\n';
    out << "metric,value\n";
    for (const auto& m : metrics(r)) out << m.name << ',' << format_metric(m) << '\n';
    out << '\n' << round_header() << '\n';
    for (const auto& rec : r.records) out << round_row(rec, ',') << '\n';
    return;
  }
  out << "[run]\n"
      << "scenario = " << scenario << '\n'
      << "variant = " << to_string(r.variant) << '\n'
      << "attack = " << r.attack << '\n'
      << "seed = " << r.seed << '\n'
      << "rounds = " << r.rounds << '\n';
  write_aggregate(out, r);
  out << "[rounds]\n";
  std::string header = round_header();
  for (auto& c : header)
    if (c == ',') c = ' ';
  out << "# " << header << '\n';
  for (const auto& rec : r.records) out << round_row(rec, ' ') << '\n';
}

inline void write_report(std::ostream& out, const ConstraintReport& c) {
  out << "[constraints]\n"
      << "alice_11_prob = " << format_double(c.alice_11_prob) << '\n'
      << "bob_minus_click_prob = " << format_double(c.bob_minus_click_prob) << '\n'
      << "sift_error_prob = " << format_double(c.sift_error_prob) << '\n'
      << "f01_f10_distance = " << format_double(c.f01_f10_distance) << '\n';
  for (const auto& [n, v] : c.higher_f_norms) out << "higher_f_norm." << n << " = " << format_double(v) << '\n';
  out << "verdict = " << c.verdict() << '\n';
}

inline void write_report(std::ostream& out, const LeakageReport& l) {
  out << "[leakage]\n";
  if (!l.defined) {
    out << "conditional_fidelity = undefined\ntrace_distance = undefined\n";
  } else {
    out << "conditional_fidelity = " << format_double(l.conditional_fidelity) << '\n'
        << "trace_distance = " << format_double(l.trace_distance) << '\n';
  }
  if (!l.note.empty()) out << "note = " << l.note << '\n';
}

}  // namespace cqkd
