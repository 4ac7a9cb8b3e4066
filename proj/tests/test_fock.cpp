#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cqkd/cqkd.hpp"
#include "cqkd/scenario.hpp"
#include "oracle.hpp"
#include "random_states.hpp"

using namespace cqkd;

namespace {

const double kR2 = std::sqrt(2.0);

void expect_state(const FockState& s, std::initializer_list<std::pair<Occupation, double>> want,
                  double tol = 1e-12) {
  double total = 0.0;
  for (const auto& [o, a] : want) {
    EXPECT_NEAR(s.amplitude(o).real(), a, tol) << to_string(o);
    EXPECT_NEAR(s.amplitude(o).imag(), 0.0, tol) << to_string(o);
    total += a * a;
  }
  EXPECT_NEAR(s.norm_squared(), total, tol);
}

}  // namespace

TEST(Occupation, IndexRoundTrip) {
  for (std::size_t i = 0; i < occupation_count(8); ++i) EXPECT_EQ(occupation_index(occupation_at(i)), i);
  EXPECT_EQ(occupation_count(6), 28u);
  EXPECT_EQ(occupation_at(0), (Occupation{0, 0}));
  EXPECT_EQ(occupation_at(1), (Occupation{0, 1}));
  EXPECT_EQ(occupation_at(2), (Occupation{1, 0}));
}

TEST(MakeBasisState, Examples) {
  expect_state(make_basis_state({0, 0}, Basis::z), {{{0, 0}, 1.0}});
  const FockState zero = make_basis_state({0, 1}, Basis::z);
  EXPECT_EQ(zero.basis(), Basis::z);
  expect_state(zero, {{{0, 1}, 1.0}});
  // |1,0>_x is |->
  const FockState minus = make_basis_state({1, 0}, Basis::x);
  EXPECT_NEAR(std::abs(inner(minus, minus_state())), 1.0, 1e-12);
}

TEST(MakeBasisState, RejectsOccupationsPastTheCap) {
  EXPECT_THROW(make_basis_state({4, 3}, Basis::z, 6), cap_exceeded);
  EXPECT_THROW(make_basis_state({-1, 0}, Basis::z, 6), std::invalid_argument);
  EXPECT_NO_THROW(make_basis_state({3, 3}, Basis::z, 6));
}

TEST(FockState, PrunesTinyAmplitudes) {
  FockState s(Basis::z, 2);
  s.add({0, 1}, 1.0).add({0, 1}, -1.0 + 1e-16);
  EXPECT_TRUE(s.empty());
  s.add({1, 0}, 1e-16);
  EXPECT_TRUE(s.empty());
  EXPECT_THROW(s.normalized(), unnormalized_state);
}

TEST(Inner, Examples) {
  EXPECT_NEAR(std::abs(inner(make_basis_state({0, 1}, Basis::z), make_basis_state({1, 0}, Basis::z))), 0.0, 1e-15);
  const Amplitude a = inner(plus_state(), make_basis_state({0, 1}, Basis::z));
  EXPECT_NEAR(a.real(), 1.0 / kR2, 1e-12);
  EXPECT_NEAR(a.imag(), 0.0, 1e-12);
  const Amplitude b = inner(make_basis_state({2, 0}, Basis::x), make_basis_state({1, 1}, Basis::z));
  EXPECT_NEAR(b.real(), -kR2 / 2.0, 1e-12);
}

TEST(Inner, ConjugateSymmetric) {
  RoundRng rng(5, 0);
  for (int t = 0; t < 50; ++t) {
    const FockState a = testing_support::random_state(rng, 4, Basis::z);
    const FockState b = testing_support::random_state(rng, 4, Basis::x);
    EXPECT_NEAR(std::abs(inner(a, b) - std::conj(inner(b, a))), 0.0, 1e-12);
  }
}

TEST(XExpansion, ExplicitRows) {
  const auto one_plus = x_expansion(1, +1).coefficients;
  EXPECT_NEAR(one_plus[0], 1.0 / kR2, 1e-12);
  EXPECT_NEAR(one_plus[1], 1.0 / kR2, 1e-12);
  const auto one_minus = x_expansion(1, -1).coefficients;
  EXPECT_NEAR(one_minus[0], 1.0 / kR2, 1e-12);
  EXPECT_NEAR(one_minus[1], -1.0 / kR2, 1e-12);

  const auto two = x_expansion(2, -1).coefficients;
  ASSERT_EQ(two.size(), 3u);
  EXPECT_NEAR(two[0], 0.5, 1e-12);
  EXPECT_NEAR(two[1], -kR2 / 2.0, 1e-12);
  EXPECT_NEAR(two[2], 0.5, 1e-12);

  const auto three = x_expansion(3, -1).coefficients;
  const double s8 = 1.0 / std::sqrt(8.0), s3 = std::sqrt(3.0);
  const double want[] = {s8, -s3 * s8, s3 * s8, -s8};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(three[k], want[k], 1e-12) << k;

  EXPECT_EQ(x_expansion(0, +1).coefficients, std::vector<double>{1.0});
  EXPECT_EQ(x_expansion(0, -1).coefficients, std::vector<double>{1.0});
}

TEST(XExpansion, ClosedFormAndNormalization) {
  for (int n = 0; n <= 6; ++n)
    for (int sign : {1, -1}) {
      const auto row = x_expansion(n, sign, 6);
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double want = (sign < 0 && k % 2 ? -1.0 : 1.0) * std::sqrt(binomial(n, k)) / std::pow(2.0, n / 2.0);
        EXPECT_NEAR(row.coefficients[k], want, 1e-12);
        sum += row.coefficients[k] * row.coefficients[k];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  EXPECT_THROW(x_expansion(7, 1, 6), cap_exceeded);
}

TEST(XExpansion, MatchesFrozenCorpus) {
  const auto rows = load_corpus(std::string(CQKD_DATA_DIR) + "/expansion_corpus.txt");
  ASSERT_EQ(rows.size(), 2u * (1 + 2 + 3 + 4 + 5 + 6 + 7));
  for (const auto& r : rows)
    EXPECT_NEAR(x_expansion(r.n, r.sign, 6).coefficients.at(r.k), r.value(), 1e-12)
        << "n=" << r.n << " sign=" << r.sign << " k=" << r.k;
}

TEST(XExpansion, MatchesSymmetricStateOracle) {
  for (int n = 0; n <= 4; ++n)
    for (int sign : {1, -1}) {
      const auto want = oracle::expansion(n, sign);
      const auto got = x_expansion(n, sign, 4).coefficients;
      for (int k = 0; k <= n; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    }
}

TEST(BasisChange, Examples) {
  expect_state(to_z_basis(make_basis_state({0, 1}, Basis::x)), {{{0, 1}, 1.0 / kR2}, {{1, 0}, 1.0 / kR2}});
  expect_state(to_z_basis(make_basis_state({0, 2}, Basis::x)),
               {{{0, 2}, 0.5}, {{1, 1}, kR2 / 2.0}, {{2, 0}, 0.5}});
  expect_state(to_z_basis(make_basis_state({1, 1}, Basis::x)), {{{0, 2}, 1.0 / kR2}, {{2, 0}, -1.0 / kR2}});
}

TEST(BasisChange, EveryKeyMatchesOracle) {
  // Full transform, mixed keys included, against the distinguishable-photon
  // construction.
  for (int n = 0; n <= 4; ++n)
    for (int minus = 0; minus <= n; ++minus) {
      const FockState z = to_z_basis(make_basis_state({minus, n - minus}, Basis::x, 4));
      for (const auto& [k, a] : oracle::x_key_in_z(minus, n - minus))
        EXPECT_NEAR(std::abs(z.amplitude({k, n - k}) - a), 0.0, 1e-12) << minus << "," << n - minus << " k=" << k;
    }
}

TEST(BasisChange, InvolutionOnRandomStates) {
  RoundRng rng(11, 0);
  for (int t = 0; t < 500; ++t) {
    const FockState s = testing_support::random_state(rng, 6, Basis::z);
    const FockState twice = change_basis(change_basis(s).retag(Basis::z));
    for (std::size_t i = 0; i < occupation_count(6); ++i) {
      const Occupation o = occupation_at(i);
      ASSERT_NEAR(std::abs(twice.amplitude(o) - s.amplitude(o)), 0.0, 1e-10);
    }
  }
}

TEST(BasisChange, PreservesInnerProductsAndNorm) {
  RoundRng rng(12, 0);
  for (int t = 0; t < 300; ++t) {
    const FockState a = testing_support::random_state(rng, 6, Basis::z);
    const FockState b = testing_support::random_state(rng, 6, Basis::z);
    const FockState ha = change_basis(a).retag(Basis::z), hb = change_basis(b).retag(Basis::z);
    ASSERT_NEAR(std::abs(inner(a, b) - inner(ha, hb)), 0.0, 1e-10);
    ASSERT_NEAR(ha.norm_squared(), 1.0, 1e-10);
  }
}

TEST(BasisChange, ConservesPhotonNumber) {
  for (std::size_t i = 0; i < occupation_count(6); ++i) {
    const Occupation key = occupation_at(i);
    const FockState z = to_z_basis(make_basis_state(key, Basis::x, 6));
    for (const auto& [o, a] : z.amplitudes())
      EXPECT_EQ(o.total(), key.total());
  }
}

TEST(EvenOdd, Examples) {
  const FockState e2 = even_odd_state(2, Parity::even, Basis::z, 2);
  expect_state(e2, {{{0, 2}, 1.0 / kR2}, {{2, 0}, 1.0 / kR2}});
  EXPECT_NEAR(std::abs(to_x_basis(e2).amplitude({1, 1})), 0.0, 1e-15);

  // o(1) built from x keys is |1,0> up to a global phase.
  const FockState o1 = to_z_basis(even_odd_state(1, Parity::odd, Basis::x, 1));
  EXPECT_NEAR(std::abs(o1.amplitude({1, 0})), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(o1.amplitude({0, 1})), 0.0, 1e-12);

  const auto d = measure_distribution(even_odd_state(2, Parity::odd, Basis::z, 2), Basis::x);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d.at({1, 1}), 1.0, 1e-12);

  EXPECT_THROW(even_odd_state(0, Parity::even, Basis::z), std::invalid_argument);
  EXPECT_THROW(even_odd_state(7, Parity::even, Basis::z, 6), cap_exceeded);
}

TEST(EvenOdd, OppositeBasisParityLaw) {
  for (int n = 1; n <= 6; ++n)
    for (Parity p : {Parity::even, Parity::odd})
      for (Basis b : {Basis::z, Basis::x}) {
        const auto d = measure_distribution(even_odd_state(n, p, b, 6), opposite(b));
        for (int k = 0; k <= n; ++k) {
          const bool allowed = (k % 2 == 0) == (p == Parity::even);
          const double want = allowed ? 2.0 * binomial(n, k) / std::pow(2.0, n) : 0.0;
          const auto it = d.find({k, n - k});
          EXPECT_NEAR(it == d.end() ? 0.0 : it->second, want, 1e-12) << "n=" << n << " k=" << k;
        }
      }
}

TEST(MeasureDistribution, Examples) {
  for (int n = 0; n <= 6; ++n) {
    const auto d = measure_distribution(make_basis_state({0, n}, Basis::x, 6), Basis::z);
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      EXPECT_NEAR(d.at({k, n - k}), binomial(n, k) / std::pow(2.0, n), 1e-12);
      sum += d.at({k, n - k});
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);
  }
  const auto d = measure_distribution(make_basis_state({0, 1}, Basis::z), Basis::z);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.at({0, 1}), 1.0);
}

TEST(MeasureDistribution, RejectsUnnormalizedInput) {
  FockState s(Basis::z, 2);
  s.add({0, 1}, 0.5);
  EXPECT_THROW(measure_distribution(s, Basis::z), unnormalized_state);
}
