#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqkd/protocol.hpp"

namespace cqkd {

inline constexpr double kUndetectableTol = 1e-10;

// ---------------------------------------------------------------------------
// Exact constraint check

struct ConstraintReport {
  double alice_11_prob = 0.0;
  double bob_minus_click_prob = 0.0;
  double sift_error_prob = 0.0;  // Bob's z readout disagreeing with Alice on SIFT
  double f01_f10_distance = 0.0;
  std::map<int, double> higher_f_norms;  // n > 1: |F0n| + |Fn0|
  bool undetectable = true;

  const char* verdict() const { return undetectable ? "undetectable" : "detectable"; }
};

namespace detail {

/// Bob's pulses with their weights under the configured source.
inline std::vector<std::pair<FockState, double>> bob_pulses(const ProtocolConfig& cfg) {
  std::vector<std::pair<FockState, double>> out;
  const double p[3] = {cfg.source.p0, cfg.source.p1, cfg.source.p2};
  for (int n = 0; n < 3; ++n)
    if (p[n] > 0.0) out.emplace_back(make_basis_state({0, n}, Basis::x, cfg.n_max), p[n]);
  return out;
}

/// Probability that a SIFT round with Alice readout `alice` looks wrong to
/// Bob's z measurement of `returned` (unnormalized, norm^2 = branch weight).
inline double sift_error_weight(const Readout& alice, const JointState& returned, DetectorModel m) {
  double w = 0.0;
  const bool alice_illicit = alice.double_click() || (m == DetectorModel::counter && alice.multi_photon());
  for (const auto& [r, p] : readout_distribution(returned, Basis::z, m)) {
    const int a = bit_of(alice), b = bit_of(r);
    const bool bad = alice_illicit || r.double_click() ||
                     (m == DetectorModel::counter && r.multi_photon()) ||
                     (alice.empty() && !r.empty()) || (a >= 0 && b >= 0 && a != b);
    if (bad) w += p;
  }
  return w;
}

inline double minus_click_weight(const JointState& s) {
  double w = 0.0;
  for (const auto& [o, p] : s.channel_distribution(Basis::x))
    if (o.n1 > 0) w += p;
  return w;
}

}  // namespace detail

/// Exact detection probabilities of an attack against classical Alice
/// (lossless channel, Bob's source as configured).  The return-pass vectors
/// F0n, Fn0 are read off V applied to the single-mode parts of U|0>|+>.
inline ConstraintReport check_constraints(const AttackSpec& atk, const ProtocolConfig& cfg) {
  if (atk.n_max() != cfg.n_max)
    throw dimension_mismatch("attack n_max " + std::to_string(atk.n_max()) + " vs protocol " +
                             std::to_string(cfg.n_max));
  const DetectorModel model = cfg.effective_detector();
  ConstraintReport r;
  const double pc = cfg.ctrl_probability;
  for (const auto& [pulse, weight] : detail::bob_pulses(cfg)) {
    const JointState out = atk.outbound.apply(JointState::product(atk.probe.dim, 0, pulse));
    for (const auto& [k, a] : out.amplitudes())
      if (detect(k.channel, model).double_click()) r.alice_11_prob += weight * std::norm(a);
    r.bob_minus_click_prob += weight * detail::minus_click_weight(atk.ret.apply(out));
    double sift_err = 0.0;
    for (const auto& b : alice_sift(out, model, cfg.residual_policy)) {
      JointState back = atk.ret.apply(b.residual);
      back *= std::sqrt(b.probability);
      sift_err += detail::sift_error_weight(b.readout, back, model);
    }
    r.sift_error_prob += weight * sift_err;
  }
  (void)pc;

  // Lemma quantities from the single-photon pulse.
  const JointState out = atk.outbound.apply(JointState::product(atk.probe.dim, 0, plus_state(cfg.n_max)));
  const JointState psi01 = out.filter([](const JointKey& k) { return k.channel.n1 == 0 && k.channel.n0 > 0; });
  const JointState psi10 = out.filter([](const JointKey& k) { return k.channel.n0 == 0 && k.channel.n1 > 0; });
  const JointState v01 = atk.ret.apply(psi01);
  const JointState v10 = atk.ret.apply(psi10);
  const ProbeVector f01 = v01.probe_component({0, 1});
  const ProbeVector f10 = v10.probe_component({1, 0});
  ProbeVector d(atk.probe.dim);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = f01[i] - f10[i];
  r.f01_f10_distance = std::sqrt(norm_squared(d));
  for (int n = 2; n <= cfg.n_max; ++n) {
    const double s = std::sqrt(norm_squared(v01.probe_component({0, n}))) +
                     std::sqrt(norm_squared(v10.probe_component({n, 0})));
    r.higher_f_norms[n] = s;
  }
  r.undetectable = r.alice_11_prob <= kUndetectableTol && r.bob_minus_click_prob <= kUndetectableTol &&
                   r.sift_error_prob <= kUndetectableTol;
  return r;
}

// ---------------------------------------------------------------------------
// Eve's information

struct LeakageReport {
  bool defined = false;  // false when a conditioning branch has probability 0
  double conditional_fidelity = 0.0;
  double trace_distance = 0.0;
  std::string note;
};

/// Fidelity and trace distance between Eve's conditional probe states given
/// sifted bit 0 and bit 1.  Bob's detectors absorb the exact occupation, so
/// the conditionals are in general mixtures, kept as ensembles of
/// unnormalized vectors.
inline LeakageReport compare_conditionals(const linalg::Ensemble& zero, const linalg::Ensemble& one,
                                          std::size_t dim) {
  LeakageReport r;
  if (linalg::trace(zero) <= 1e-24 || linalg::trace(one) <= 1e-24) {
    r.note = "undefined: a key bit never occurs";
    return r;
  }
  r.defined = true;
  r.conditional_fidelity = linalg::fidelity(zero, one, dim);
  r.trace_distance = linalg::trace_distance(zero, one, dim);
  return r;
}

namespace detail {

/// Adds Eve's unnormalized probe vectors for each Bob z-readout of `s` that
/// yields bit 0 or bit 1 (matching `want`, or any bit if want < 0).
inline void collect_bits(const JointState& s, Basis b, DetectorModel m, int want,
                         linalg::Ensemble (&into)[2]) {
  const JointState::Map amps = b == Basis::z ? s.amplitudes() : s.channel_in_x();
  std::map<Occupation, ProbeVector> by_key;
  for (const auto& [k, a] : amps) {
    auto [it, fresh] = by_key.try_emplace(k.channel, ProbeVector(s.probe_dim()));
    it->second[k.probe] += a;
  }
  for (auto& [o, v] : by_key) {
    const int bit = bit_of(detect(o, m));
    if (bit < 0 || (want >= 0 && bit != want)) continue;
    into[bit].push_back(std::move(v));
  }
}

}  // namespace detail

inline LeakageReport eve_leakage(const AttackSpec& atk, const ProtocolConfig& cfg) {
  if (atk.n_max() != cfg.n_max) throw dimension_mismatch("attack and protocol n_max differ");
  const DetectorModel model = cfg.effective_detector();
  const std::size_t dim = atk.probe.dim;
  linalg::Ensemble bits[2];

  switch (cfg.variant) {
    case Variant::classical_alice_full:
    case Variant::classical_alice_limited: {
      // Key bits come from SIFT rounds where Alice's and Bob's z readouts agree.
      for (const auto& [pulse, weight] : detail::bob_pulses(cfg)) {
        const JointState out = atk.outbound.apply(JointState::product(dim, 0, pulse));
        for (const auto& b : alice_sift(out, model, cfg.residual_policy)) {
          const int a = detail::bit_of(b.readout);
          if (a < 0 || b.probability <= 0.0) continue;
          JointState back = atk.ret.apply(b.residual);
          back *= std::sqrt(weight * b.probability);
          detail::collect_bits(back, Basis::z, model, a, bits);
        }
      }
      return compare_conditionals(bits[0], bits[1], dim);
    }
    case Variant::bb84: {
      // Per announced basis; the reported figure is the basis where Eve
      // learns least.
      double weights[3] = {0.0, cfg.source.p1, cfg.source.p2};
      if (atk.strategy == StrategyKind::pns_selection) {
        const PnsPlan plan = plan_pns(cfg);
        weights[1] *= plan.forward_one;
        weights[2] *= plan.forward_two;
      }
      LeakageReport worst;
      worst.defined = true;
      worst.conditional_fidelity = -1.0;
      for (Basis basis : {Basis::z, Basis::x}) {
        linalg::Ensemble per[2];
        for (int n = 1; n <= 2; ++n) {
          if (weights[n] <= 0.0) continue;
          for (int bit = 0; bit < 2; ++bit) {
            JointState s = JointState::product(dim, 0, detail::source_pulse(n, basis, bit, cfg.n_max));
            s = atk.outbound.apply(s);
            s *= std::sqrt(weights[n]);
            detail::collect_bits(s, basis, model, bit, per);
          }
        }
        const LeakageReport r = compare_conditionals(per[0], per[1], dim);
        if (!r.defined) return r;
        if (r.conditional_fidelity > worst.conditional_fidelity) worst = r;
      }
      return worst;
    }
    case Variant::b92:
      break;
  }
  LeakageReport r;
  r.note = "undefined: B92 interception is classical; see eve_key_knowledge in run reports";
  return r;
}

/// Eve's optimal (Helstrom) probability of telling CTRL from SIFT from her
/// probe alone, with Alice's configured CTRL prior.
inline double action_discrimination(const AttackSpec& atk, const ProtocolConfig& cfg) {
  const DetectorModel model = cfg.effective_detector();
  const std::size_t dim = atk.probe.dim;
  const double pc = cfg.ctrl_probability;
  linalg::Ensemble ctrl, sift;
  auto trace_channel = [&](const JointState& s, double w, linalg::Ensemble& into) {
    std::map<Occupation, ProbeVector> by_key;
    for (const auto& [k, a] : s.amplitudes()) {
      auto [it, fresh] = by_key.try_emplace(k.channel, ProbeVector(dim));
      it->second[k.probe] += a * std::sqrt(w);
    }
    for (auto& [o, v] : by_key) into.push_back(std::move(v));
  };
  for (const auto& [pulse, weight] : detail::bob_pulses(cfg)) {
    const JointState out = atk.outbound.apply(JointState::product(dim, 0, pulse));
    trace_channel(atk.ret.apply(out), weight * pc, ctrl);
    for (const auto& b : alice_sift(out, model, cfg.residual_policy))
      trace_channel(atk.ret.apply(b.residual), weight * (1.0 - pc) * b.probability, sift);
  }
  const linalg::Matrix a = linalg::ensemble_matrix(ctrl, dim);
  const linalg::Matrix b = linalg::ensemble_matrix(sift, dim);
  const linalg::Matrix diff = a * a.adjoint() - b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<linalg::Matrix> es(diff);
  return 0.5 * (1.0 + es.eigenvalues().cwiseAbs().sum());
}

// ---------------------------------------------------------------------------
// Lemma verification

struct LemmaSummary {
  int forward_trials = 0;
  int forward_failures = 0;
  double max_forward_minus_click = 0.0;
  double min_forward_fidelity = 1.0;
  double max_forward_alice_11 = 0.0;
  int converse_trials = 0;
  int converse_failures = 0;
  double min_violating_prob = std::numeric_limits<double>::infinity();
  double max_f01_analytic_error = 0.0;  // |P(minus) - |F01 - F10|^2 / 2|
  double max_decomposition_error = 0.0;
  int retries = 0;

  bool forward_ok() const { return forward_failures == 0; }
  bool converse_ok() const { return converse_failures == 0 && max_f01_analytic_error <= 1e-9; }
  bool decomposition_ok() const { return max_decomposition_error <= 1e-12; }
  bool passed() const { return forward_ok() && converse_ok() && decomposition_ok(); }
};

namespace detail {

inline RandomAttack sample_with_retry(std::uint64_t seed, std::size_t dim, int n_max, LemmaViolation v,
                                      int& retries) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    try {
      return sample_random_attack(RoundRng::mix(seed + attempt * 0x9e3779b97f4a7c15ULL), dim, n_max, v);
    } catch (const infeasible_completion&) {
      ++retries;
      if (attempt > 1000) throw;
    }
  }
}

/// |F0n>|0,n> + |Fn0>|n,0> against its even/odd decomposition
/// ((F0n + Fn0)/sqrt2) e(n) + ((F0n - Fn0)/sqrt2) o(n), evaluated in the x basis.
inline double decomposition_error(const ProbeVector& f0n, const ProbeVector& fn0, int n, int n_max) {
  const std::size_t dim = f0n.size();
  JointState direct(dim, n_max);
  for (std::size_t i = 0; i < dim; ++i) {
    direct.add({i, {0, n}}, f0n[i]);
    direct.add({i, {n, 0}}, fn0[i]);
  }
  const FockState e = even_odd_state(n, Parity::even, Basis::z, n_max);
  const FockState o = even_odd_state(n, Parity::odd, Basis::z, n_max);
  ProbeVector plus(dim), minus(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    plus[i] = (f0n[i] + fn0[i]) / std::sqrt(2.0);
    minus[i] = (f0n[i] - fn0[i]) / std::sqrt(2.0);
  }
  JointState combo = JointState::product(plus, e);
  combo += JointState::product(minus, o);
  const auto x1 = direct.channel_in_x();
  const auto x2 = combo.channel_in_x();
  double err = 0.0;
  for (const auto& [k, a] : x1) {
    auto it = x2.find(k);
    err = std::max(err, std::abs(a - (it == x2.end() ? Amplitude{} : it->second)));
  }
  for (const auto& [k, a] : x2)
    if (!x1.count(k)) err = std::max(err, std::abs(a));
  return err;
}

}  // namespace detail

/// Forward and converse checks of the return-pass Lemma over random attacks.
/// Probe dimensions cycle through 1..max_probe_dim and photon caps through
/// 3..n_max.
inline LemmaSummary lemma_verify(int n_max, int trials, std::uint64_t seed, std::size_t max_probe_dim = 4) {
  if (n_max < 3) throw config_error("lemma_verify needs n_max >= 3");
  if (trials < 1) throw config_error("lemma_verify needs trials >= 1");
  if (max_probe_dim < 1) throw config_error("probe dimension must be >= 1");
  LemmaSummary s;
  for (int t = 0; t < trials; ++t) {
    const std::size_t dim = 1 + static_cast<std::size_t>(t) % max_probe_dim;
    const int cap = 3 + (t / static_cast<int>(max_probe_dim)) % (n_max - 2);
    ProtocolConfig cfg;
    cfg.n_max = cap;

    const std::uint64_t base = seed ^ (0x1000003ULL * static_cast<std::uint64_t>(t + 1));
    const RandomAttack fwd = detail::sample_with_retry(base, dim, cap, LemmaViolation::none, s.retries);
    const ConstraintReport cr = check_constraints(fwd.attack, cfg);
    const LeakageReport lk = eve_leakage(fwd.attack, cfg);
    ++s.forward_trials;
    s.max_forward_minus_click = std::max(s.max_forward_minus_click, cr.bob_minus_click_prob);
    s.max_forward_alice_11 = std::max(s.max_forward_alice_11, cr.alice_11_prob);
    const double fid = lk.defined ? lk.conditional_fidelity : 0.0;
    s.min_forward_fidelity = std::min(s.min_forward_fidelity, fid);
    if (cr.bob_minus_click_prob > kUndetectableTol || cr.alice_11_prob > kUndetectableTol || fid < 1.0 - 1e-9)
      ++s.forward_failures;

    const LemmaViolation v = t % 2 == 0 ? LemmaViolation::f01_vs_f10 : LemmaViolation::higher_n;
    const RandomAttack bad = detail::sample_with_retry(~base, dim, cap, v, s.retries);
    const ConstraintReport br = check_constraints(bad.attack, cfg);
    ++s.converse_trials;
    s.min_violating_prob = std::min(s.min_violating_prob, br.bob_minus_click_prob);
    if (!(br.bob_minus_click_prob > 0.0)) ++s.converse_failures;
    if (v == LemmaViolation::f01_vs_f10) {
      const ProbeVector& a = bad.profile.f0n.at(1);
      const ProbeVector& b = bad.profile.fn0.at(1);
      ProbeVector d(a.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
      s.max_f01_analytic_error =
          std::max(s.max_f01_analytic_error, std::abs(br.bob_minus_click_prob - norm_squared(d) / 2.0));
    } else {
      for (int n = 2; n <= cap; ++n) {
        const auto z = ProbeVector(dim);
        auto pick = [&](const std::map<int, ProbeVector>& m) { return m.count(n) ? m.at(n) : z; };
        s.max_decomposition_error = std::max(
            s.max_decomposition_error, detail::decomposition_error(pick(bad.profile.f0n), pick(bad.profile.fn0), n, cap));
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Threshold formulas

struct PnsFeasibility {
  double x = 0.0;                // expected non-empty pulses at Bob without Eve
  double threshold_ratio = 0.0;  // F / (1 - F)^2
  bool feasible = false;         // two-photon pulses alone can cover x
};

inline PnsFeasibility pns_feasibility(double p0, double p1, double p2, double f, std::uint64_t n) {
  SourceStats s{p0, p1, p2};
  ProtocolConfig check;
  check.source = s;
  check.transmission = f;
  check.n_max = 2;
  check.variant = Variant::bb84;
  check.validate();
  PnsFeasibility r;
  r.x = bb84_expected_received(s, f, n);
  r.threshold_ratio = f < 1.0 ? f / ((1.0 - f) * (1.0 - f)) : std::numeric_limits<double>::infinity();
  // p2 N >= X  <=>  p2 (1 - F)^2 >= F p1
  r.feasible = p2 * (1.0 - f) * (1.0 - f) >= f * p1;
  return r;
}

}  // namespace cqkd
