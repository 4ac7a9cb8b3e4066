#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqkd/fock.hpp"

namespace cqkd {

/// Basis ket |probe>_E |channel>, with the channel always in the z basis.
struct JointKey {
  std::size_t probe = 0;
  Occupation channel{};

  constexpr auto operator<=>(const JointKey&) const = default;
};

using ProbeVector = std::vector<Amplitude>;

/// Sparse amplitude vector over Eve's probe (dimension probe_dim) tensored
/// with the two-mode channel (z basis, capped at n_max photons).
class JointState {
 public:
  using Map = std::map<JointKey, Amplitude>;

  JointState(std::size_t probe_dim, int n_max) : probe_dim_(probe_dim), n_max_(n_max) {
    if (probe_dim == 0) throw std::invalid_argument("probe dimension must be >= 1");
  }

  /// |probe>|channel>; the channel may be tagged with either basis.
  static JointState product(std::size_t probe_dim, std::size_t probe_index,
                            const FockState& channel) {
    JointState s(probe_dim, channel.n_max());
    const FockState z = to_z_basis(channel);
    for (const auto& [o, a] : z.amplitudes()) s.add({probe_index, o}, a);
    return s;
  }

  static JointState product(const ProbeVector& probe, const FockState& channel) {
    JointState s(probe.size(), channel.n_max());
    const FockState z = to_z_basis(channel);
    for (std::size_t e = 0; e < probe.size(); ++e)
      for (const auto& [o, a] : z.amplitudes()) s.add({e, o}, probe[e] * a);
    return s;
  }

  std::size_t probe_dim() const { return probe_dim_; }
  int n_max() const { return n_max_; }
  const Map& amplitudes() const { return amps_; }
  bool empty() const { return amps_.empty(); }

  Amplitude amplitude(const JointKey& k) const {
    auto it = amps_.find(k);
    return it == amps_.end() ? Amplitude{} : it->second;
  }

  JointState& add(const JointKey& k, Amplitude a) {
    if (k.probe >= probe_dim_)
      throw dimension_mismatch("probe index " + std::to_string(k.probe) +
                               " outside probe dimension " + std::to_string(probe_dim_));
    check_occupation(k.channel, n_max_);
    auto [it, inserted] = amps_.try_emplace(k, a);
    if (!inserted) it->second += a;
    if (std::abs(it->second) <= kAmplitudeFloor) amps_.erase(it);
    return *this;
  }

  JointState& operator+=(const JointState& o) {
    if (o.probe_dim_ != probe_dim_) throw dimension_mismatch("probe dimensions differ");
    for (const auto& [k, a] : o.amps_) add(k, a);
    return *this;
  }

  JointState& operator*=(Amplitude s) {
    Map scaled;
    for (const auto& [k, a] : amps_)
      if (std::abs(a * s) > kAmplitudeFloor) scaled.emplace(k, a * s);
    amps_ = std::move(scaled);
    return *this;
  }

  friend JointState operator+(JointState a, const JointState& b) { return a += b; }
  friend JointState operator*(Amplitude s, JointState a) { return a *= s; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [k, a] : amps_) s += std::norm(a);
    return s;
  }

  JointState normalized() const {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) throw unnormalized_state("cannot normalize the zero vector");
    return (1.0 / n) * *this;
  }

  /// Keeps only the components whose channel key satisfies `pred`.
  template <typename Pred>
  JointState filter(Pred pred) const {
    JointState out(probe_dim_, n_max_);
    for (const auto& [k, a] : amps_)
      if (pred(k)) out.amps_.emplace(k, a);
    return out;
  }

  /// The channel re-expressed in the x basis; keys become (n-, n+).
  Map channel_in_x() const {
    Map out;
    for (const auto& [k, a] : amps_)
      for (const auto& [img, c] : detail::hadamard_image(k.channel)) {
        auto& slot = out[JointKey{k.probe, img}];
        slot += a * c;
      }
    std::erase_if(out, [](const auto& kv) { return std::abs(kv.second) <= kAmplitudeFloor; });
    return out;
  }

  /// Unnormalized probe vector |F_o> multiplying channel key o (z basis).
  ProbeVector probe_component(const Occupation& o) const {
    ProbeVector v(probe_dim_);
    for (const auto& [k, a] : amps_)
      if (k.channel == o) v[k.probe] += a;
    return v;
  }

  /// Channel photon-counting distribution in basis b, traced over the probe.
  std::map<Occupation, double> channel_distribution(Basis b) const {
    std::map<Occupation, double> p;
    if (b == Basis::z) {
      for (const auto& [k, a] : amps_) p[k.channel] += std::norm(a);
    } else {
      for (const auto& [k, a] : channel_in_x()) p[k.channel] += std::norm(a);
    }
    return p;
  }

 private:
  std::size_t probe_dim_;
  int n_max_;
  Map amps_;
};

inline double norm_squared(const ProbeVector& v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

inline Amplitude inner(const ProbeVector& a, const ProbeVector& b) {
  Amplitude s{};
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline Amplitude inner(const JointState& a, const JointState& b) {
  Amplitude s{};
  for (const auto& [k, amp] : a.amplitudes()) s += std::conj(amp) * b.amplitude(k);
  return s;
}

/// Linear map on probe (x) channel stored column by column.
///
/// Columns are defined for every basis ket whose probe index is below
/// domain_probe_dim(); columns that were never set act as the identity.
/// Applying the map to a component outside the domain is an error.
class LinearMap {
 public:
  LinearMap(std::size_t probe_dim, int n_max, std::size_t domain_probe_dim)
      : probe_dim_(probe_dim), n_max_(n_max), domain_probe_dim_(domain_probe_dim) {
    if (domain_probe_dim == 0 || domain_probe_dim > probe_dim)
      throw dimension_mismatch("map domain must cover 1..probe_dim probe states");
  }

  static LinearMap identity(std::size_t probe_dim, int n_max) {
    return LinearMap(probe_dim, n_max, probe_dim);
  }

  std::size_t probe_dim() const { return probe_dim_; }
  int n_max() const { return n_max_; }
  std::size_t domain_probe_dim() const { return domain_probe_dim_; }
  const std::map<JointKey, JointState>& columns() const { return columns_; }

  LinearMap& set_column(const JointKey& in, JointState out) {
    if (in.probe >= domain_probe_dim_)
      throw dimension_mismatch("column outside the map's domain");
    check_occupation(in.channel, n_max_);
    if (out.probe_dim() != probe_dim_) throw dimension_mismatch("column probe dimension");
    columns_.insert_or_assign(in, std::move(out));
    return *this;
  }

  JointState column(const JointKey& in) const {
    auto it = columns_.find(in);
    if (it != columns_.end()) return it->second;
    JointState e(probe_dim_, n_max_);
    e.add(in, 1.0);
    return e;
  }

  JointState apply(const JointState& s) const {
    if (s.probe_dim() != probe_dim_)
      throw dimension_mismatch("state probe dimension " + std::to_string(s.probe_dim()) +
                               " vs map " + std::to_string(probe_dim_));
    JointState out(probe_dim_, n_max_);
    for (const auto& [k, a] : s.amplitudes()) {
      if (k.probe >= domain_probe_dim_)
        throw dimension_mismatch("state has support outside the map's domain");
      auto it = columns_.find(k);
      if (it == columns_.end()) {
        out.add(k, a);
      } else {
        for (const auto& [k2, c] : it->second.amplitudes()) out.add(k2, a * c);
      }
    }
    return out;
  }

  /// Largest |<col_i|col_j> - delta_ij| over the domain basis.
  double isometry_deviation() const {
    std::vector<JointState> cols;
    for (std::size_t e = 0; e < domain_probe_dim_; ++e)
      for (std::size_t i = 0; i < occupation_count(n_max_); ++i)
        cols.push_back(column({e, occupation_at(i)}));
    double worst = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      worst = std::max(worst, std::abs(cols[i].norm_squared() - 1.0));
      for (std::size_t j = i + 1; j < cols.size(); ++j)
        worst = std::max(worst, std::abs(inner(cols[i], cols[j])));
    }
    return worst;
  }

 private:
  std::size_t probe_dim_;
  int n_max_;
  std::size_t domain_probe_dim_;
  std::map<JointKey, JointState> columns_;
};

}  // namespace cqkd
