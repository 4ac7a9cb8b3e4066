#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "cqkd/occupation.hpp"

namespace cqkd {

using Amplitude = std::complex<double>;

/// Amplitudes with magnitude at or below this are dropped after arithmetic.
inline constexpr double kAmplitudeFloor = 1e-15;

/// Sparse state of the two photonic modes, truncated at n_max photons.
///
/// Keys are occupation numbers in the basis named by basis(); amplitudes of
/// magnitude <= kAmplitudeFloor are never stored.
class FockState {
 public:
  using Map = std::map<Occupation, Amplitude>;

  explicit FockState(Basis basis = Basis::z, int n_max = kDefaultMaxPhotons)
      : basis_(basis), n_max_(n_max) {
    if (n_max < 0) throw std::invalid_argument("negative photon cap");
  }

  Basis basis() const { return basis_; }
  int n_max() const { return n_max_; }
  const Map& amplitudes() const { return amps_; }
  bool empty() const { return amps_.empty(); }

  Amplitude amplitude(const Occupation& o) const {
    auto it = amps_.find(o);
    return it == amps_.end() ? Amplitude{} : it->second;
  }

  /// Adds `a` to the amplitude of `o`, pruning the entry if it cancels.
  FockState& add(const Occupation& o, Amplitude a) {
    check_occupation(o, n_max_);
    auto [it, inserted] = amps_.try_emplace(o, a);
    if (!inserted) it->second += a;
    if (std::abs(it->second) <= kAmplitudeFloor) amps_.erase(it);
    return *this;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [o, a] : amps_) s += std::norm(a);
    return s;
  }

  bool is_normalized(double tol = 1e-12) const {
    return std::abs(norm_squared() - 1.0) <= tol;
  }

  FockState normalized() const {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) throw unnormalized_state("cannot normalize the zero vector");
    FockState out(basis_, n_max_);
    for (const auto& [o, a] : amps_) out.add(o, a / n);
    return out;
  }

  /// Same amplitudes read as keys of basis `b` (applies H when b differs).
  FockState retag(Basis b) const {
    FockState out(b, n_max_);
    out.amps_ = amps_;
    return out;
  }

  FockState& operator+=(const FockState& other) {
    if (other.basis_ != basis_)
      throw std::invalid_argument("adding states tagged with different bases");
    for (const auto& [o, a] : other.amps_) add(o, a);
    return *this;
  }

  FockState& operator*=(Amplitude s) {
    Map scaled;
    for (const auto& [o, a] : amps_)
      if (std::abs(a * s) > kAmplitudeFloor) scaled.emplace(o, a * s);
    amps_ = std::move(scaled);
    return *this;
  }

  friend FockState operator+(FockState a, const FockState& b) { return a += b; }
  friend FockState operator*(Amplitude s, FockState a) { return a *= s; }

 private:
  Basis basis_;
  int n_max_;
  Map amps_;
};

/// Unit vector on a single occupation.
inline FockState make_basis_state(const Occupation& occ, Basis basis,
                                  int n_max = kDefaultMaxPhotons) {
  FockState s(basis, n_max);
  s.add(occ, 1.0);
  return s;
}

namespace detail {

// Image of one occupation key under the two-mode Hadamard change of basis.
// With creation operators s (second slot) and f (first slot), the key (a, b)
// is a^-1/2 b^-1/2 (s - f)^a (s + f)^b |0,0> / 2^{n/2}; expanding the commuting
// polynomial and applying f^i s^j |0,0> = sqrt(i! j!) |i, j> gives the image.
// The transform is its own inverse, so it maps z keys to x keys and back.
inline std::vector<std::pair<Occupation, double>> compute_hadamard_image(
    const Occupation& key) {
  const int a = key.n1;
  const int b = key.n0;
  const int n = a + b;
  std::vector<double> poly(static_cast<std::size_t>(n + 1), 0.0);  // by power of f
  for (int i = 0; i <= a; ++i) {
    const double ci = binomial(a, i) * ((i % 2) ? -1.0 : 1.0);
    for (int l = 0; l <= b; ++l) poly[static_cast<std::size_t>(i + l)] += ci * binomial(b, l);
  }
  const double scale = 1.0 / std::sqrt(factorial(a) * factorial(b) * std::pow(2.0, n));
  std::vector<std::pair<Occupation, double>> out;
  for (int k = 0; k <= n; ++k) {
    const double c = poly[static_cast<std::size_t>(k)];
    if (c == 0.0) continue;
    out.emplace_back(Occupation{k, n - k}, c * std::sqrt(factorial(k) * factorial(n - k)) * scale);
  }
  return out;
}

inline constexpr int kHadamardTableCap = 16;

inline const std::vector<std::pair<Occupation, double>>& hadamard_image(
    const Occupation& key) {
  static const auto table = [] {
    std::vector<std::vector<std::pair<Occupation, double>>> t;
    t.reserve(occupation_count(kHadamardTableCap));
    for (std::size_t i = 0; i < occupation_count(kHadamardTableCap); ++i)
      t.push_back(compute_hadamard_image(occupation_at(i)));
    return t;
  }();
  if (key.total() > kHadamardTableCap)
    throw cap_exceeded("basis change supports at most " +
                       std::to_string(kHadamardTableCap) + " photons");
  return table[occupation_index(key)];
}

}  // namespace detail

/// Re-expresses `state` in the other basis (z <-> x).
inline FockState change_basis(const FockState& state) {
  FockState out(opposite(state.basis()), state.n_max());
  for (const auto& [key, amp] : state.amplitudes())
    for (const auto& [img, c] : detail::hadamard_image(key)) out.add(img, amp * c);
  return out;
}

inline FockState to_z_basis(const FockState& state) {
  return state.basis() == Basis::z ? state : change_basis(state);
}

inline FockState to_x_basis(const FockState& state) {
  return state.basis() == Basis::x ? state : change_basis(state);
}

inline FockState in_basis(const FockState& state, Basis b) {
  return state.basis() == b ? state : change_basis(state);
}

/// <a|b>; converts b into a's basis when the tags differ.
inline Amplitude inner(const FockState& a, const FockState& b) {
  const FockState bb = in_basis(b, a.basis());
  Amplitude s{};
  for (const auto& [o, amp] : a.amplitudes()) s += std::conj(amp) * bb.amplitude(o);
  return s;
}

/// Coefficients of |0,n>_x (sign +1) or |n,0>_x (sign -1) over |k, n-k>.
struct ExpansionRow {
  int n = 0;
  int sign = +1;
  std::vector<double> coefficients;  // indexed by k
};

inline ExpansionRow x_expansion(int n, int sign, int n_max = kDefaultMaxPhotons) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (n < 0) throw std::invalid_argument("negative photon number");
  const Occupation key = sign > 0 ? Occupation{0, n} : Occupation{n, 0};
  check_occupation(key, n_max);
  ExpansionRow row{n, sign, std::vector<double>(static_cast<std::size_t>(n + 1), 0.0)};
  for (const auto& [img, c] : detail::hadamard_image(key))
    row.coefficients[static_cast<std::size_t>(img.n1)] = c;
  return row;
}

enum class Parity : std::uint8_t { even, odd };

/// e(n) = (|0,n> + |n,0>)/sqrt2 or o(n) = (|0,n> - |n,0>)/sqrt2, keys in `basis`.
inline FockState even_odd_state(int n, Parity parity, Basis basis,
                                int n_max = kDefaultMaxPhotons) {
  if (n < 1) throw std::invalid_argument("even/odd states need n >= 1");
  FockState s(basis, n_max);
  const double r = 1.0 / std::sqrt(2.0);
  s.add({0, n}, r);
  s.add({n, 0}, parity == Parity::even ? r : -r);
  return s;
}

/// Photon-counting statistics of a normalized state in basis `b`.
inline std::map<Occupation, double> measure_distribution(const FockState& state, Basis b,
                                                         double tol = 1e-10) {
  if (!state.is_normalized(tol))
    throw unnormalized_state("measure_distribution needs a normalized state (norm^2 = " +
                             std::to_string(state.norm_squared()) + ")");
  std::map<Occupation, double> p;
  const FockState in_b = in_basis(state, b);
  for (const auto& [o, a] : in_b.amplitudes()) p[o] = std::norm(a);
  return p;
}

/// |+> and |-> as single-photon Fock states.
inline FockState plus_state(int n_max = kDefaultMaxPhotons) {
  return to_z_basis(make_basis_state({0, 1}, Basis::x, n_max));
}

inline FockState minus_state(int n_max = kDefaultMaxPhotons) {
  return to_z_basis(make_basis_state({1, 0}, Basis::x, n_max));
}

}  // namespace cqkd
