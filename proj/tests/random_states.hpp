#pragma once

// Hand-rolled generators for property tests.

#include "cqkd/cqkd.hpp"

namespace testing_support {

/// Normalized state with Gaussian amplitudes on a random subset of keys.
inline cqkd::FockState random_state(cqkd::RoundRng& rng, int n_max, cqkd::Basis b) {
  cqkd::FockState s(b, n_max);
  const double keep = 0.3 + 0.7 * rng.uniform();
  for (std::size_t i = 0; i < cqkd::occupation_count(n_max); ++i)
    if (rng.bernoulli(keep)) s.add(cqkd::occupation_at(i), cqkd::linalg::complex_normal(rng));
  if (s.empty()) s.add({0, 0}, 1.0);
  return s.normalized();
}

inline cqkd::JointState random_joint(cqkd::RoundRng& rng, std::size_t probe_dim, int n_max) {
  cqkd::JointState s(probe_dim, n_max);
  const double keep = 0.3 + 0.7 * rng.uniform();
  for (std::size_t e = 0; e < probe_dim; ++e)
    for (std::size_t i = 0; i < cqkd::occupation_count(n_max); ++i)
      if (rng.bernoulli(keep)) s.add({e, cqkd::occupation_at(i)}, cqkd::linalg::complex_normal(rng));
  if (s.empty()) s.add({0, {0, 0}}, 1.0);
  return s.normalized();
}

/// Random joint state without mixed occupations (n1 * n0 == 0).
inline cqkd::JointState random_unmixed_joint(cqkd::RoundRng& rng, std::size_t probe_dim, int n_max) {
  cqkd::JointState s = random_joint(rng, probe_dim, n_max);
  s = s.filter([](const cqkd::JointKey& k) { return k.channel.n1 == 0 || k.channel.n0 == 0; });
  if (s.empty()) s.add({0, {0, 1}}, 1.0);
  return s.normalized();
}

}  // namespace testing_support
