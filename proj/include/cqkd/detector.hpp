#pragma once

#include <map>
#include <string>

#include "cqkd/joint.hpp"
#include "cqkd/rng.hpp"

namespace cqkd {

/// threshold: each mode's detector only clicks (>= 1 photon).
/// counter:   each mode reports 0, 1 or "2 or more" (stored as 2).
enum class DetectorModel : std::uint8_t { threshold, counter };

inline const char* to_string(DetectorModel m) {
  return m == DetectorModel::threshold ? "threshold" : "counter";
}

/// Detector pattern over the two modes, first slot first (n1 / n-).
struct Readout {
  int first = 0;
  int second = 0;

  bool empty() const { return first == 0 && second == 0; }
  bool double_click() const { return first > 0 && second > 0; }
  bool multi_photon() const { return first > 1 || second > 1; }

  constexpr auto operator<=>(const Readout&) const = default;
};

inline std::string to_string(const Readout& r) {
  return std::to_string(r.first) + std::to_string(r.second);
}

inline Readout detect(const Occupation& o, DetectorModel m) {
  if (m == DetectorModel::threshold) return {o.n1 > 0 ? 1 : 0, o.n0 > 0 ? 1 : 0};
  return {std::min(o.n1, 2), std::min(o.n0, 2)};
}

/// Exact readout statistics of the channel in basis b (probe traced out).
inline std::map<Readout, double> readout_distribution(const JointState& s, Basis b,
                                                      DetectorModel m) {
  std::map<Readout, double> p;
  for (const auto& [o, prob] : s.channel_distribution(b)) p[detect(o, m)] += prob;
  return p;
}

inline std::map<Readout, double> readout_distribution(const FockState& s, Basis b,
                                                      DetectorModel m) {
  return readout_distribution(JointState::product(1, 0, s), b, m);
}

/// Outcome of a destructive photon-counting measurement of the channel.
struct ChannelMeasurement {
  Occupation key;       // exact occupation absorbed by the detectors
  Readout readout;      // what the detector model reports
  ProbeVector probe;    // Eve's conditional probe state, normalized
};

/// Samples the channel of a (possibly unnormalized) joint state in basis b.
/// An all-zero state is reported as vacuum with an empty probe vector.
inline ChannelMeasurement measure_channel(const JointState& s, Basis b, DetectorModel m,
                                          RoundRng& rng) {
  const JointState::Map amps = b == Basis::z ? s.amplitudes() : s.channel_in_x();
  std::map<Occupation, double> dist;
  for (const auto& [k, a] : amps) dist[k.channel] += std::norm(a);
  ChannelMeasurement out{{0, 0}, {}, ProbeVector(s.probe_dim())};
  if (dist.empty()) return out;
  std::vector<Occupation> keys;
  std::vector<double> w;
  for (const auto& [o, p] : dist) {
    keys.push_back(o);
    w.push_back(p);
  }
  out.key = keys[sample_index(w, rng)];
  out.readout = detect(out.key, m);
  for (const auto& [k, a] : amps)
    if (k.channel == out.key) out.probe[k.probe] += a;
  const double n = std::sqrt(norm_squared(out.probe));
  for (auto& a : out.probe) a /= n;
  return out;
}

}  // namespace cqkd
