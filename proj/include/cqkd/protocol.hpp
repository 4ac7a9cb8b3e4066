#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cqkd/attack.hpp"
#include "cqkd/detector.hpp"

namespace cqkd {

enum class Variant : std::uint8_t { classical_alice_limited, classical_alice_full, bb84, b92 };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::classical_alice_limited: return "classical-alice-limited";
    case Variant::classical_alice_full: return "classical-alice-full";
    case Variant::bb84: return "bb84";
    case Variant::b92: return "b92";
  }
  return "?";
}

/// What Alice sends back after a SIFT measurement.
enum class ResidualPolicy : std::uint8_t {
  reflect_occupation,  // the measured |n1,n0> itself
  measure_resend,      // a fresh |0,1>, |1,0> or |0,0> matching the clicks
};

inline const char* to_string(ResidualPolicy p) {
  return p == ResidualPolicy::reflect_occupation ? "reflect-occupation" : "measure-resend";
}

/// Pulse-size probabilities of the source (0, 1 or 2 photons).
struct SourceStats {
  double p0 = 0.0;
  double p1 = 1.0;
  double p2 = 0.0;
};

struct Strengthening {
  bool counters = false;            // photon counters instead of click detectors
  bool cross_basis_tests = false;   // CTRL measured in z, SIFT measured in x
  bool extra_bob_states = false;    // Bob also sends |0,1> / |1,0> for extra TESTs
  double cross_basis_fraction = 0.5;
  double extra_state_fraction = 1.0 / 3.0;
};

struct ProtocolConfig {
  Variant variant = Variant::classical_alice_full;
  std::uint64_t rounds = 10000;
  SourceStats source;
  double transmission = 1.0;  // F: per-leg photon survival probability
  DetectorModel detector = DetectorModel::threshold;
  ResidualPolicy residual_policy = ResidualPolicy::reflect_occupation;
  Strengthening strengthening;
  double b92_overlap = 0.5;       // c = |<u0|u1>|
  double test_fraction = 0.5;     // share of SIFT rounds sampled for TEST
  double ctrl_probability = 0.5;  // Alice's CTRL rate
  int n_max = kDefaultMaxPhotons;
  std::uint64_t rng_seed = 1;
  unsigned jobs = 1;

  DetectorModel effective_detector() const {
    return strengthening.counters ? DetectorModel::counter : detector;
  }

  void validate() const {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    const auto& s = source;
    if (!unit(s.p0) || !unit(s.p1) || !unit(s.p2) || std::abs(s.p0 + s.p1 + s.p2 - 1.0) > 1e-12)
      throw config_error("source statistics must be probabilities summing to 1");
    if (!unit(transmission)) throw config_error("transmission must lie in [0, 1]");
    if (!(b92_overlap >= 0.0 && b92_overlap < 1.0)) throw config_error("b92 overlap must lie in [0, 1)");
    if (!unit(test_fraction)) throw config_error("test_fraction must lie in [0, 1]");
    if (!unit(ctrl_probability)) throw config_error("ctrl_probability must lie in [0, 1]");
    if (!unit(strengthening.cross_basis_fraction) || !unit(strengthening.extra_state_fraction))
      throw config_error("strengthening fractions must lie in [0, 1]");
    if (n_max < 1) throw config_error("n_max must be >= 1");
    if (s.p2 > 0.0 && n_max < 2) throw config_error("two-photon pulses need n_max >= 2");
    if (variant == Variant::classical_alice_limited && s.p2 > 0.0)
      throw config_error("the limited variant has no multi-photon pulses");
    if (jobs == 0) throw config_error("jobs must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Elementary operations

/// CTRL: Alice reflects the pulse untouched.
inline JointState alice_ctrl(const JointState& joint) { return joint; }

struct SiftBranch {
  Readout readout;
  double probability = 0.0;
  JointState residual;  // normalized channel state sent back to Bob
};

/// SIFT: Alice attaches |0,0>_A, copies the click pattern of the channel into
/// her probe and measures it.  Under reflect-occupation each readout is one
/// branch holding the untouched channel components.  Under measure-resend
/// the detectors absorb the pulse, so there is one branch per absorbed
/// occupation, each carrying a freshly prepared |0,1>, |1,0> or |0,0>
/// (vacuum also after an illicit 11).  Branch probabilities sum to the
/// squared norm of the input.
inline std::vector<SiftBranch> alice_sift(const JointState& joint, DetectorModel model,
                                          ResidualPolicy policy) {
  std::vector<SiftBranch> out;
  if (policy == ResidualPolicy::reflect_occupation) {
    std::map<Readout, JointState> groups;
    for (const auto& [k, a] : joint.amplitudes()) {
      auto [it, fresh] = groups.try_emplace(detect(k.channel, model), joint.probe_dim(), joint.n_max());
      it->second.add(k, a);
    }
    for (auto& [r, s] : groups) {
      const double p = s.norm_squared();
      out.push_back({r, p, s.normalized()});
    }
    return out;
  }
  std::map<Occupation, JointState> absorbed;
  for (const auto& [k, a] : joint.amplitudes()) {
    auto [it, fresh] = absorbed.try_emplace(k.channel, joint.probe_dim(), joint.n_max());
    it->second.add(k, a);
  }
  for (auto& [o, s] : absorbed) {
    const Readout r = detect(o, model);
    Occupation resend{0, 0};
    if (!r.double_click()) resend = {r.first > 0 ? 1 : 0, r.second > 0 ? 1 : 0};
    JointState res(joint.probe_dim(), joint.n_max());
    for (const auto& [k, a] : s.amplitudes()) res.add({k.probe, resend}, a);
    out.push_back({r, s.norm_squared(), res.normalized()});
  }
  return out;
}

/// Independent per-photon survival with probability F: one quantum jump is
/// sampled from the Kraus operators
///   K_{l1,l0}|n1,n0> = sqrt(C(n1,l1) C(n0,l0) (1-F)^{l1+l0} F^{n1+n0-l1-l0}) |n1-l1, n0-l0>.
inline JointState apply_loss(const JointState& joint, double transmission, RoundRng& rng) {
  if (transmission >= 1.0) return joint;
  const double f = transmission;
  const double l = 1.0 - f;
  std::map<Occupation, JointState> branches;  // keyed by photons lost per mode
  for (const auto& [k, a] : joint.amplitudes()) {
    for (int l1 = 0; l1 <= k.channel.n1; ++l1)
      for (int l0 = 0; l0 <= k.channel.n0; ++l0) {
        const int kept = k.channel.total() - l1 - l0;
        const double w = binomial(k.channel.n1, l1) * binomial(k.channel.n0, l0) *
                         std::pow(l, l1 + l0) * std::pow(f, kept);
        if (w <= 0.0) continue;
        auto [it, fresh] = branches.try_emplace(Occupation{l1, l0}, joint.probe_dim(), joint.n_max());
        it->second.add({k.probe, {k.channel.n1 - l1, k.channel.n0 - l0}}, a * std::sqrt(w));
      }
  }
  std::vector<const JointState*> states;
  std::vector<double> w;
  for (const auto& [lost, s] : branches) {
    states.push_back(&s);
    w.push_back(s.norm_squared());
  }
  if (states.empty()) return joint;
  return states[sample_index(w, rng)]->normalized();
}

struct BobResult {
  Basis basis = Basis::z;
  Readout readout;
  bool illicit = false;  // z: double click; x: any click on the |-> mode
  ProbeVector probe;     // Eve's conditional probe after the measurement
};

inline BobResult bob_measure(const JointState& s, Basis basis, DetectorModel model, RoundRng& rng) {
  const ChannelMeasurement m = measure_channel(s, basis, model, rng);
  const bool illicit = basis == Basis::z ? m.readout.double_click() : m.readout.first > 0;
  return {basis, m.readout, illicit, m.probe};
}

/// Bob's z-basis (TEST / SIFT) measurement.
inline BobResult bob_measure_z(const JointState& s, DetectorModel model, RoundRng& rng) {
  return bob_measure(s, Basis::z, model, rng);
}

/// Bob's x-basis (CTRL) measurement; `illicit` is the ctrl_error condition.
inline BobResult bob_measure_x(const JointState& s, DetectorModel model, RoundRng& rng) {
  return bob_measure(s, Basis::x, model, rng);
}

// ---------------------------------------------------------------------------
// Round records and reports

enum class Outcome : std::uint8_t { loss, conclusive, inconclusive, error };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::loss: return "loss";
    case Outcome::conclusive: return "conclusive";
    case Outcome::inconclusive: return "inconclusive";
    case Outcome::error: return "error";
  }
  return "?";
}

struct RoundRecord {
  std::uint64_t index = 0;
  int sent_photons = 0;                     // pulse size emitted by the originator
  std::optional<AliceAction> alice_action;  // classical-Alice variants only
  Readout alice_readout;                    // SIFT readout (classical Alice)
  Basis sender_basis = Basis::z;            // bb84: Alice's basis; b92: unused
  int sender_bit = -1;                      // bb84/b92: Alice's bit; extra-state bit
  Basis bob_basis = Basis::z;
  Readout bob_readout;
  int bob_b92_basis = -1;
  bool test_sample = false;
  bool extra_state = false;
  bool cross_basis = false;
  bool ctrl_error = false;
  bool test_error = false;
  bool double_click = false;
  bool multi_photon = false;
  bool loss = false;
  bool key_mismatch = false;
  bool extra_test_error = false;
  int alice_bit = -1;  // sifted key bit held by the legitimate sender side
  int bob_bit = -1;
  int eve_bit = -1;
  std::optional<AliceAction> eve_action_guess;
  Outcome outcome = Outcome::inconclusive;
};

struct RunReport {
  Variant variant = Variant::classical_alice_full;
  std::string attack;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  bool attack_attempted = true;  // b92: USD only runs past the loss threshold
  bool pns_infeasible = false;   // bb84: two-photon pulses cannot cover X
  double analytic_received = 0.0;
  std::vector<RoundRecord> records;

  struct Totals {
    std::uint64_t ctrl_rounds = 0, sift_rounds = 0, test_rounds = 0;
    std::uint64_t ctrl_checked = 0, ctrl_errors = 0;
    std::uint64_t test_errors = 0, double_clicks = 0, alice_double_clicks = 0;
    std::uint64_t sift_nonempty = 0, multi_photon = 0;
    std::uint64_t losses = 0, conclusive = 0, inconclusive = 0, errors = 0;
    std::uint64_t received = 0;
    std::uint64_t sifted_bits = 0, key_agreements = 0, key_mismatches = 0;
    std::uint64_t eve_key_correct = 0;
    std::uint64_t eve_action_guesses = 0, eve_action_correct = 0;
    std::uint64_t cross_ctrl_z = 0, cross_ctrl_z_double = 0;
    std::uint64_t cross_sift_x = 0, cross_sift_x_double = 0;
    std::uint64_t extra_tests = 0, extra_test_errors = 0;
  } totals;
};

inline void summarize(RunReport& r) {
  auto& t = r.totals;
  t = {};
  for (const auto& rec : r.records) {
    if (rec.alice_action == AliceAction::ctrl) {
      ++t.ctrl_rounds;
      if (rec.bob_basis == Basis::x && !rec.extra_state) ++t.ctrl_checked;
      if (rec.cross_basis) {
        ++t.cross_ctrl_z;
        if (rec.bob_readout.double_click()) ++t.cross_ctrl_z_double;
      }
    } else if (rec.alice_action == AliceAction::sift) {
      ++t.sift_rounds;
      if (rec.test_sample) ++t.test_rounds;
      if (!rec.alice_readout.empty()) ++t.sift_nonempty;
      if (rec.alice_readout.double_click()) ++t.alice_double_clicks;
      if (rec.cross_basis) {
        ++t.cross_sift_x;
        if (rec.bob_readout.double_click() && !rec.alice_readout.double_click()) ++t.cross_sift_x_double;
      }
      if (rec.extra_state) {
        ++t.extra_tests;
        if (rec.extra_test_error) ++t.extra_test_errors;
      }
    }
    if (rec.ctrl_error) ++t.ctrl_errors;
    if (rec.test_error) ++t.test_errors;
    if (rec.double_click) ++t.double_clicks;
    if (rec.multi_photon) ++t.multi_photon;
    if (!rec.bob_readout.empty()) ++t.received;
    if (rec.bob_bit >= 0 && rec.alice_bit >= 0) {
      ++t.sifted_bits;
      if (rec.bob_bit == rec.alice_bit) ++t.key_agreements;
      else ++t.key_mismatches;
      if (rec.eve_bit == rec.alice_bit) ++t.eve_key_correct;
    }
    if (rec.eve_action_guess && rec.alice_action) {
      ++t.eve_action_guesses;
      if (*rec.eve_action_guess == *rec.alice_action) ++t.eve_action_correct;
    }
    switch (rec.outcome) {
      case Outcome::loss: ++t.losses; break;
      case Outcome::conclusive: ++t.conclusive; break;
      case Outcome::inconclusive: ++t.inconclusive; break;
      case Outcome::error: ++t.errors; break;
    }
  }
}

/// A named aggregate with enough context to put a binomial error bar on it.
struct Metric {
  std::string name;
  double value = 0.0;
  bool is_fraction = false;
  std::uint64_t trials = 0;  // denominator of a fraction, or rounds for counts
};

inline double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline std::vector<Metric> metrics(const RunReport& r) {
  const auto& t = r.totals;
  const std::uint64_t n = r.rounds;
  auto count = [&](const char* name, std::uint64_t v) {
    return Metric{name, static_cast<double>(v), false, n};
  };
  auto frac = [&](const char* name, std::uint64_t num, std::uint64_t den) {
    return Metric{name, ratio(num, den), true, den};
  };
  std::vector<Metric> m = {
      count("rounds", n),
      count("losses", t.losses),
      count("conclusive", t.conclusive),
      count("inconclusive", t.inconclusive),
      count("errors", t.errors),
      count("received", t.received),
      count("ctrl_rounds", t.ctrl_rounds),
      count("sift_rounds", t.sift_rounds),
      count("test_rounds", t.test_rounds),
      count("ctrl_errors", t.ctrl_errors),
      count("test_errors", t.test_errors),
      count("double_clicks", t.double_clicks),
      count("alice_double_clicks", t.alice_double_clicks),
      count("sift_nonempty", t.sift_nonempty),
      count("multi_photon", t.multi_photon),
      count("sifted_bits", t.sifted_bits),
      count("key_mismatches", t.key_mismatches),
      count("eve_key_correct", t.eve_key_correct),
      count("cross_ctrl_z", t.cross_ctrl_z),
      count("cross_ctrl_z_double", t.cross_ctrl_z_double),
      count("cross_sift_x", t.cross_sift_x),
      count("cross_sift_x_double", t.cross_sift_x_double),
      count("extra_tests", t.extra_tests),
      count("extra_test_errors", t.extra_test_errors),
      frac("loss_fraction", t.losses, n),
      frac("received_fraction", t.received, n),
      frac("conclusive_fraction", t.conclusive, n),
      frac("ctrl_error_rate", t.ctrl_errors, t.ctrl_checked),
      frac("test_error_rate", t.test_errors, t.test_rounds),
      frac("key_agreement", t.key_agreements, t.sifted_bits),
      frac("sifted_error_rate", t.key_mismatches, t.sifted_bits),
      frac("eve_key_knowledge", t.eve_key_correct, t.sifted_bits),
      frac("eve_action_success", t.eve_action_correct, t.eve_action_guesses),
      frac("alice_double_click_fraction", t.alice_double_clicks, t.sift_nonempty),
      frac("extra_test_error_rate", t.extra_test_errors, t.extra_tests),
      Metric{"attack_attempted", r.attack_attempted ? 1.0 : 0.0, false, 0},
      Metric{"pns_infeasible", r.pns_infeasible ? 1.0 : 0.0, false, 0},
  };
  return m;
}

inline std::optional<Metric> find_metric(const RunReport& r, const std::string& name) {
  for (auto& m : metrics(r))
    if (m.name == name) return m;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Runners

namespace detail {

inline int bit_of(const Readout& r) {
  if (r.first > 0 && r.second == 0) return 1;
  if (r.second > 0 && r.first == 0) return 0;
  return -1;
}

/// Projective readout of a normalized probe onto labelled orthonormal
/// vectors; returns the label or nullopt for the complementary outcome.
template <typename Label>
std::optional<Label> read_probe(const ProbeVector& probe,
                                const std::vector<std::pair<ProbeVector, Label>>& vectors,
                                RoundRng& rng) {
  if (vectors.empty() || norm_squared(probe) == 0.0) return std::nullopt;
  std::vector<double> w;
  double acc = 0.0;
  for (const auto& [v, label] : vectors) {
    w.push_back(std::norm(inner(v, probe)));
    acc += w.back();
  }
  w.push_back(std::max(0.0, 1.0 - acc));
  const std::size_t i = sample_index(w, rng);
  if (i == vectors.size()) return std::nullopt;
  return vectors[i].second;
}

template <typename RoundFn>
std::vector<RoundRecord> run_rounds(std::uint64_t rounds, unsigned jobs, RoundFn fn) {
  std::vector<RoundRecord> records(rounds);
  const unsigned workers = static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(jobs, rounds)));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < rounds; ++i) records[i] = fn(i);
    return records;
  }
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (rounds + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::uint64_t lo = w * chunk, hi = std::min(rounds, lo + chunk);
        for (std::uint64_t i = lo; i < hi; ++i) records[i] = fn(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return records;
}

inline void check_compatible(const ProtocolConfig& cfg, const AttackSpec& atk) {
  cfg.validate();
  if (atk.n_max() != cfg.n_max)
    throw dimension_mismatch("attack built for n_max " + std::to_string(atk.n_max()) +
                             " but the protocol uses " + std::to_string(cfg.n_max));
  if (atk.outbound.probe_dim() != atk.probe.dim || atk.ret.probe_dim() != atk.probe.dim)
    throw dimension_mismatch("attack maps disagree with probe dimension");
}

inline FockState source_pulse(int size, Basis b, int bit, int n_max) {
  if (size == 0) return make_basis_state({0, 0}, b, n_max);
  return make_basis_state(bit == 1 ? Occupation{size, 0} : Occupation{0, size}, b, n_max);
}

}  // namespace detail

/// One round of the classical-Alice protocol (limited or full variant).
inline RoundRecord classical_alice_round(const ProtocolConfig& cfg, const AttackSpec& atk,
                                         std::uint64_t index) {
  RoundRng rng(cfg.rng_seed, index);
  RoundRecord rec;
  rec.index = index;
  const int n_max = cfg.n_max;
  const DetectorModel model = cfg.effective_detector();
  const bool limited = cfg.variant == Variant::classical_alice_limited;

  // Bob's pulse.
  FockState pulse(Basis::x, n_max);
  if (cfg.strengthening.extra_bob_states && rng.bernoulli(cfg.strengthening.extra_state_fraction)) {
    rec.extra_state = true;
    rec.sender_bit = rng.bernoulli(0.5) ? 1 : 0;
    rec.sent_photons = 1;
    pulse = detail::source_pulse(1, Basis::z, rec.sender_bit, n_max);
  } else {
    const std::vector<double> w = {cfg.source.p0, cfg.source.p1, cfg.source.p2};
    rec.sent_photons = static_cast<int>(sample_index(w, rng));
    pulse = make_basis_state({0, rec.sent_photons}, Basis::x, n_max);  // |0,n>_x
  }

  JointState joint = JointState::product(atk.probe.dim, 0, pulse);
  if (!atk.lossless_channel) joint = apply_loss(joint, cfg.transmission, rng);
  joint = atk.outbound.apply(joint);
  if (limited)
    for (const auto& [k, a] : joint.amplitudes())
      if (k.channel.total() > 1)
        throw dimension_mismatch("the limited variant is only defined on at most one photon");

  const bool ctrl = rng.bernoulli(cfg.ctrl_probability);
  rec.alice_action = ctrl ? AliceAction::ctrl : AliceAction::sift;
  if (ctrl) {
    joint = alice_ctrl(joint);
  } else {
    auto branches = alice_sift(joint, model, cfg.residual_policy);
    std::vector<double> w;
    for (const auto& b : branches) w.push_back(b.probability);
    const auto& pick = branches[sample_index(w, rng)];
    rec.alice_readout = pick.readout;
    joint = pick.residual;
    rec.test_sample = !rec.extra_state && rng.bernoulli(cfg.test_fraction);
  }

  if (!atk.lossless_channel) joint = apply_loss(joint, cfg.transmission, rng);
  joint = atk.ret.apply(joint);

  Basis bob_basis = ctrl ? Basis::x : Basis::z;
  if (rec.extra_state) {
    bob_basis = Basis::z;
  } else if (cfg.strengthening.cross_basis_tests &&
             rng.bernoulli(cfg.strengthening.cross_basis_fraction)) {
    bob_basis = opposite(bob_basis);
    rec.cross_basis = true;
  }
  const BobResult bob = bob_measure(joint, bob_basis, model, rng);
  rec.bob_basis = bob_basis;
  rec.bob_readout = bob.readout;
  rec.loss = bob.readout.empty();

  const Readout& ar = rec.alice_readout;
  const bool alice_illicit = !ctrl && (ar.double_click() || (model == DetectorModel::counter && ar.multi_photon()));
  rec.multi_photon = model == DetectorModel::counter && (ar.multi_photon() || bob.readout.multi_photon());
  rec.double_click = ar.double_click() || (bob_basis == Basis::z && bob.readout.double_click());
  rec.ctrl_error = ctrl && bob_basis == Basis::x && bob.readout.first > 0;

  const int a_bit = ctrl ? -1 : detail::bit_of(ar);
  const int b_bit = bob_basis == Basis::z ? detail::bit_of(bob.readout) : -1;
  if (!ctrl && rec.test_sample && bob_basis == Basis::z) {
    rec.test_error = bob.illicit || alice_illicit ||
                     (a_bit >= 0 && b_bit >= 0 && a_bit != b_bit) ||
                     (ar.empty() && !bob.readout.empty()) ||
                     (model == DetectorModel::counter && bob.readout.multi_photon());
  }
  if (rec.extra_state && !ctrl)
    rec.extra_test_error = alice_illicit || (a_bit >= 0 && a_bit != rec.sender_bit);

  const bool key_round = !ctrl && !rec.test_sample && !rec.extra_state && bob_basis == Basis::z;
  if (key_round && a_bit >= 0 && b_bit >= 0) {
    rec.alice_bit = a_bit;
    rec.bob_bit = b_bit;
    rec.key_mismatch = a_bit != b_bit;
  }

  if (atk.readout) {
    if (rec.alice_bit >= 0) {
      if (auto it = atk.readout->bit_vectors.find(Basis::z); it != atk.readout->bit_vectors.end())
        if (auto g = detail::read_probe(bob.probe, it->second, rng)) rec.eve_bit = *g;
    }
    if (!atk.readout->action_vectors.empty())
      rec.eve_action_guess = detail::read_probe(bob.probe, atk.readout->action_vectors, rng);
  }

  const bool bob_illicit_extra = model == DetectorModel::counter && bob.readout.multi_photon() && bob_basis == Basis::z && !ctrl && !rec.cross_basis;
  if (rec.ctrl_error || rec.test_error || alice_illicit || rec.extra_test_error || rec.key_mismatch ||
      bob_illicit_extra) {
    rec.outcome = Outcome::error;
  } else if (rec.loss || (!ctrl && ar.empty())) {
    rec.outcome = Outcome::loss;
  } else if ((ctrl && bob_basis == Basis::x) ||
             (!ctrl && !rec.extra_state && bob_basis == Basis::z && a_bit >= 0 && b_bit >= 0)) {
    rec.outcome = Outcome::conclusive;
  } else {
    rec.outcome = Outcome::inconclusive;
  }
  return rec;
}

/// Runs the classical-Alice protocol for cfg.rounds rounds.
inline RunReport run_protocol(const ProtocolConfig& cfg, const AttackSpec& atk) {
  detail::check_compatible(cfg, atk);
  if (cfg.variant != Variant::classical_alice_full && cfg.variant != Variant::classical_alice_limited)
    throw config_error("run_protocol handles the classical-Alice variants only");
  RunReport r;
  r.variant = cfg.variant;
  r.attack = atk.name;
  r.seed = cfg.rng_seed;
  r.rounds = cfg.rounds;
  r.records = detail::run_rounds(cfg.rounds, cfg.jobs,
                                 [&](std::uint64_t i) { return classical_alice_round(cfg, atk, i); });
  summarize(r);
  return r;
}

// ---------------------------------------------------------------------------
// BB84

/// Expected number of non-empty pulses Bob receives through a lossy channel.
inline double bb84_expected_received(const SourceStats& s, double f, std::uint64_t n) {
  return (f * s.p1 + (1.0 - (1.0 - f) * (1.0 - f)) * s.p2) * static_cast<double>(n);
}

struct PnsPlan {
  double forward_two = 0.0;  // probability of forwarding a split two-photon pulse
  double forward_one = 0.0;  // probability of forwarding a single-photon pulse
  bool infeasible = false;
  double target = 0.0;       // X
};

/// Eve's pulse selection: split and forward two-photon pulses first; only
/// forward single photons when the two-photon supply cannot reach X.
inline PnsPlan plan_pns(const ProtocolConfig& cfg) {
  PnsPlan plan;
  const double n = static_cast<double>(cfg.rounds);
  plan.target = bb84_expected_received(cfg.source, cfg.transmission, cfg.rounds);
  const double twos = cfg.source.p2 * n;
  if (twos >= plan.target) {
    plan.forward_two = twos > 0.0 ? plan.target / twos : 0.0;
  } else {
    plan.infeasible = true;
    plan.forward_two = 1.0;
    const double ones = cfg.source.p1 * n;
    plan.forward_one = ones > 0.0 ? std::min(1.0, (plan.target - twos) / ones) : 0.0;
  }
  return plan;
}

inline RoundRecord bb84_round(const ProtocolConfig& cfg, const AttackSpec& atk, const PnsPlan& plan,
                              std::uint64_t index) {
  RoundRng rng(cfg.rng_seed, index);
  RoundRecord rec;
  rec.index = index;
  const int n_max = cfg.n_max;
  const DetectorModel model = cfg.effective_detector();
  rec.sender_basis = rng.bernoulli(0.5) ? Basis::x : Basis::z;
  rec.sender_bit = rng.bernoulli(0.5) ? 1 : 0;
  const std::vector<double> w = {cfg.source.p0, cfg.source.p1, cfg.source.p2};
  rec.sent_photons = static_cast<int>(sample_index(w, rng));
  const FockState pulse = detail::source_pulse(rec.sent_photons, rec.sender_basis, rec.sender_bit, n_max);
  JointState joint = JointState::product(atk.probe.dim, 0, pulse);

  if (atk.strategy == StrategyKind::pns_selection) {
    // Eve counts photons without disturbing them, then splits or blocks.
    const double keep = rec.sent_photons == 2 ? plan.forward_two
                        : rec.sent_photons == 1 ? plan.forward_one
                                                : 0.0;
    if (rec.sent_photons > 0 && rng.bernoulli(keep)) {
      joint = atk.outbound.apply(joint);
    } else {
      joint = JointState::product(atk.probe.dim, 0, make_basis_state({0, 0}, Basis::z, n_max));
    }
  } else {
    joint = atk.outbound.apply(joint);
    if (!atk.lossless_channel) joint = apply_loss(joint, cfg.transmission, rng);
  }

  rec.bob_basis = rng.bernoulli(0.5) ? Basis::x : Basis::z;
  const BobResult bob = bob_measure(joint, rec.bob_basis, model, rng);
  rec.bob_readout = bob.readout;
  rec.loss = bob.readout.empty();
  rec.double_click = bob.readout.double_click();
  rec.multi_photon = model == DetectorModel::counter && bob.readout.multi_photon();

  if (rec.loss) {
    rec.outcome = Outcome::loss;
  } else if (rec.bob_basis != rec.sender_basis) {
    rec.outcome = Outcome::inconclusive;
  } else {
    rec.alice_bit = rec.sender_bit;
    rec.bob_bit = detail::bit_of(bob.readout);
    if (rec.bob_bit < 0) rec.bob_bit = 1 - rec.sender_bit;  // double click counts as an error
    rec.key_mismatch = rec.bob_bit != rec.alice_bit;
    rec.outcome = rec.key_mismatch ? Outcome::error : Outcome::conclusive;
    if (atk.readout) {
      if (auto it = atk.readout->bit_vectors.find(rec.sender_basis); it != atk.readout->bit_vectors.end())
        if (auto g = detail::read_probe(bob.probe, it->second, rng)) rec.eve_bit = *g;
    }
  }
  return rec;
}

inline RunReport run_bb84(const ProtocolConfig& cfg, const AttackSpec& atk) {
  detail::check_compatible(cfg, atk);
  if (cfg.variant != Variant::bb84) throw config_error("run_bb84 needs variant bb84");
  RunReport r;
  r.variant = cfg.variant;
  r.attack = atk.name;
  r.seed = cfg.rng_seed;
  r.rounds = cfg.rounds;
  r.analytic_received = bb84_expected_received(cfg.source, cfg.transmission, cfg.rounds);
  const PnsPlan plan = atk.strategy == StrategyKind::pns_selection ? plan_pns(cfg) : PnsPlan{};
  r.pns_infeasible = plan.infeasible;
  r.records = detail::run_rounds(cfg.rounds, cfg.jobs,
                                 [&](std::uint64_t i) { return bb84_round(cfg, atk, plan, i); });
  summarize(r);
  return r;
}

// ---------------------------------------------------------------------------
// B92

/// B92 states cos(t/2)|0,1> +- sin(t/2)|1,0> with cos t = c, and the states
/// orthogonal to them within the single-photon space.
struct B92States {
  FockState u[2];
  FockState u_perp[2];
};

inline B92States b92_states(double c, int n_max = kDefaultMaxPhotons) {
  const double half = std::acos(c) / 2.0;
  const double co = std::cos(half), si = std::sin(half);
  B92States s{{FockState(Basis::z, n_max), FockState(Basis::z, n_max)},
              {FockState(Basis::z, n_max), FockState(Basis::z, n_max)}};
  s.u[0].add({0, 1}, co).add({1, 0}, si);
  s.u[1].add({0, 1}, co).add({1, 0}, -si);
  s.u_perp[0].add({0, 1}, si).add({1, 0}, -co);
  s.u_perp[1].add({0, 1}, si).add({1, 0}, co);
  return s;
}

/// Bob's B92 measurement in {u_b, u_b'} (plus vacuum).  Returns the key bit
/// on a conclusive result (u_b' rules out u_b), -2 for inconclusive, -1 for
/// vacuum.
inline int b92_measure(const FockState& pulse, const B92States& s, int basis, RoundRng& rng) {
  const FockState z = to_z_basis(pulse);
  const std::vector<double> w = {std::norm(inner(s.u[basis], z)), std::norm(inner(s.u_perp[basis], z)),
                                 std::norm(z.amplitude({0, 0}))};
  switch (sample_index(w, rng)) {
    case 0: return -2;
    case 1: return 1 - basis;
    default: return -1;
  }
}

inline RoundRecord b92_round(const ProtocolConfig& cfg, const AttackSpec& atk, bool attempt,
                             const B92States& states, std::uint64_t index) {
  RoundRng rng(cfg.rng_seed, index);
  RoundRecord rec;
  rec.index = index;
  rec.sender_bit = rng.bernoulli(0.5) ? 1 : 0;
  rec.sent_photons = 1;
  FockState pulse = states.u[rec.sender_bit];

  if (attempt) {
    const int eve_basis = rng.bernoulli(0.5) ? 1 : 0;
    const int got = b92_measure(pulse, states, eve_basis, rng);
    if (got >= 0) {
      pulse = states.u[got];
      rec.eve_bit = got;
    } else {
      pulse = make_basis_state({0, 0}, Basis::z, cfg.n_max);
    }
  } else {
    pulse = to_z_basis(pulse);
    JointState j = JointState::product(1, 0, pulse);
    j = apply_loss(j, cfg.transmission, rng);
    FockState lossy(Basis::z, cfg.n_max);
    for (const auto& [k, a] : j.amplitudes()) lossy.add(k.channel, a);
    pulse = lossy;
  }

  rec.bob_b92_basis = rng.bernoulli(0.5) ? 1 : 0;
  const int got = b92_measure(pulse, states, rec.bob_b92_basis, rng);
  rec.loss = got == -1;
  if (!rec.loss) rec.bob_readout = {1, 0};  // one detection, basis-relative
  if (got == -1) {
    rec.outcome = Outcome::loss;
  } else if (got == -2) {
    rec.outcome = Outcome::inconclusive;
  } else {
    rec.alice_bit = rec.sender_bit;
    rec.bob_bit = got;
    rec.key_mismatch = got != rec.sender_bit;
    rec.outcome = rec.key_mismatch ? Outcome::error : Outcome::conclusive;
  }
  (void)atk;
  return rec;
}

/// B92 conclusive probability (1 - c^2)/2 and the loss thresholds past
/// which unambiguous discrimination breaks the scheme.
inline double b92_conclusive_prob(double c) {
  if (!(c >= 0.0 && c < 1.0)) throw config_error("B92 overlap must lie in [0, 1)");
  return 0.5 * (1.0 - c * c);
}

inline bool b92_breakable(double lossrate, double c) { return lossrate >= 1.0 - b92_conclusive_prob(c); }

/// Threshold for a POVM-based attack (formula only).
inline bool b92_breakable_by_povm(double lossrate, double c) {
  if (!(c >= 0.0 && c < 1.0)) throw config_error("B92 overlap must lie in [0, 1)");
  return lossrate >= c;
}

inline RunReport run_b92(const ProtocolConfig& cfg, const AttackSpec& atk) {
  detail::check_compatible(cfg, atk);
  if (cfg.variant != Variant::b92) throw config_error("run_b92 needs variant b92");
  double c = cfg.b92_overlap;
  if (atk.strategy == StrategyKind::usd_intercept) c = atk.b92_overlap;
  if (std::abs(c - cfg.b92_overlap) > 1e-12)
    throw config_error("attack overlap differs from the configured B92 overlap");
  RunReport r;
  r.variant = cfg.variant;
  r.attack = atk.name;
  r.seed = cfg.rng_seed;
  r.rounds = cfg.rounds;
  const bool usd = atk.strategy == StrategyKind::usd_intercept;
  r.attack_attempted = usd && b92_breakable(1.0 - cfg.transmission, c);
  const B92States states = b92_states(c, cfg.n_max);
  r.records = detail::run_rounds(cfg.rounds, cfg.jobs, [&](std::uint64_t i) {
    return b92_round(cfg, atk, r.attack_attempted, states, i);
  });
  summarize(r);
  return r;
}

/// Dispatches on cfg.variant.
inline RunReport run(const ProtocolConfig& cfg, const AttackSpec& atk) {
  switch (cfg.variant) {
    case Variant::bb84: return run_bb84(cfg, atk);
    case Variant::b92: return run_b92(cfg, atk);
    default: return run_protocol(cfg, atk);
  }
}

}  // namespace cqkd
