#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>

#include "cqkd/errors.hpp"

namespace cqkd {

inline constexpr int kDefaultMaxPhotons = 6;

/// Which single-photon basis the two modes refer to.  In the z basis the
/// first slot counts photons in |1> and the second in |0>; in the x basis the
/// first slot counts |-> photons and the second |+> photons.
enum class Basis : std::uint8_t { z, x };

inline Basis opposite(Basis b) { return b == Basis::z ? Basis::x : Basis::z; }

inline const char* to_string(Basis b) { return b == Basis::z ? "z" : "x"; }

/// Occupation numbers |n1, n0> of the two modes.
struct Occupation {
  int n1 = 0;
  int n0 = 0;

  constexpr int total() const { return n1 + n0; }

  // Ordered by total photon number first, then by n1.  This is also the
  // order used for dense matrix rows (see occupation_index).
  constexpr std::strong_ordering operator<=>(const Occupation& o) const {
    if (auto c = total() <=> o.total(); c != 0) return c;
    return n1 <=> o.n1;
  }
  constexpr bool operator==(const Occupation&) const = default;
};

inline std::string to_string(const Occupation& o) {
  return "|" + std::to_string(o.n1) + "," + std::to_string(o.n0) + ">";
}

/// Number of two-mode occupations with total photon number <= n_max.
constexpr std::size_t occupation_count(int n_max) {
  return static_cast<std::size_t>((n_max + 1) * (n_max + 2) / 2);
}

constexpr std::size_t occupation_index(const Occupation& o) {
  const int n = o.total();
  return static_cast<std::size_t>(n * (n + 1) / 2 + o.n1);
}

constexpr Occupation occupation_at(std::size_t index) {
  int n = 0;
  while (occupation_count(n) <= index) ++n;
  const int n1 = static_cast<int>(index - occupation_count(n - 1));
  return {n1, n - n1};
}

inline void check_occupation(const Occupation& o, int n_max) {
  if (o.n1 < 0 || o.n0 < 0)
    throw std::invalid_argument("negative occupation " + to_string(o));
  if (o.total() > n_max)
    throw cap_exceeded("occupation " + to_string(o) + " exceeds photon cap " +
                       std::to_string(n_max));
}

/// Exact binomial coefficient as a double (exact for the small n used here).
constexpr double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

constexpr double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace cqkd
