#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cqkd/cqkd.hpp"
#include "random_states.hpp"

using namespace cqkd;

TEST(JointState, ProductConvertsChannelToZ) {
  const JointState s = JointState::product(2, 1, make_basis_state({0, 1}, Basis::x, 2));
  EXPECT_NEAR(s.amplitude({1, {0, 1}}).real(), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.amplitude({1, {1, 0}}).real(), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(s.amplitudes().size(), 2u);
}

TEST(JointState, RejectsBadKeys) {
  JointState s(2, 2);
  EXPECT_THROW(s.add({2, {0, 1}}, 1.0), dimension_mismatch);
  EXPECT_THROW(s.add({0, {2, 1}}, 1.0), cap_exceeded);
}

TEST(JointState, ChannelInXMatchesFockBasisChange) {
  RoundRng rng(3, 0);
  for (int t = 0; t < 50; ++t) {
    const FockState f = testing_support::random_state(rng, 4, Basis::z);
    const JointState j = JointState::product(1, 0, f);
    const FockState fx = to_x_basis(f);
    const auto jx = j.channel_in_x();
    for (const auto& [k, a] : jx) EXPECT_NEAR(std::abs(a - fx.amplitude(k.channel)), 0.0, 1e-12);
    EXPECT_EQ(jx.size(), fx.amplitudes().size());
  }
}

TEST(JointState, ChannelDistributionSumsToNorm) {
  RoundRng rng(4, 0);
  for (int t = 0; t < 50; ++t) {
    const JointState j = testing_support::random_joint(rng, 3, 4);
    for (Basis b : {Basis::z, Basis::x}) {
      double sum = 0.0;
      for (const auto& [o, p] : j.channel_distribution(b)) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-10);
    }
  }
}

TEST(LinearMap, IdentityAndColumns) {
  LinearMap m = LinearMap::identity(2, 2);
  JointState img(2, 2);
  img.add({1, {0, 1}}, 1.0);
  m.set_column({0, {0, 1}}, img);
  m.set_column({1, {0, 1}}, JointState::product(2, 0, make_basis_state({0, 1}, Basis::z, 2)));
  const JointState out = m.apply(JointState::product(2, 0, make_basis_state({0, 1}, Basis::x, 2)));
  EXPECT_NEAR(out.amplitude({1, {0, 1}}).real(), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out.amplitude({0, {1, 0}}).real(), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_LE(m.isometry_deviation(), 1e-12);
}

TEST(LinearMap, DetectsNonIsometry) {
  LinearMap m = LinearMap::identity(1, 1);
  JointState img(1, 1);
  img.add({0, {0, 1}}, 2.0);
  m.set_column({0, {0, 1}}, img);
  EXPECT_NEAR(m.isometry_deviation(), 3.0, 1e-12);
}

TEST(LinearMap, RestrictedDomain) {
  LinearMap m(3, 2, 1);
  EXPECT_THROW(m.apply(JointState::product(3, 2, make_basis_state({0, 1}, Basis::z, 2))), std::invalid_argument);
  EXPECT_NO_THROW(m.apply(JointState::product(3, 0, make_basis_state({0, 1}, Basis::z, 2))));
}

TEST(Detector, ThresholdAndCounterReadouts) {
  EXPECT_EQ(detect({0, 0}, DetectorModel::threshold), (Readout{0, 0}));
  EXPECT_EQ(detect({0, 3}, DetectorModel::threshold), (Readout{0, 1}));
  EXPECT_EQ(detect({2, 1}, DetectorModel::threshold), (Readout{1, 1}));
  EXPECT_EQ(detect({0, 3}, DetectorModel::counter), (Readout{0, 2}));
  EXPECT_EQ(detect({1, 0}, DetectorModel::counter), (Readout{1, 0}));
  EXPECT_TRUE(detect({2, 1}, DetectorModel::threshold).double_click());
  EXPECT_TRUE(detect({0, 2}, DetectorModel::counter).multi_photon());
  EXPECT_EQ(to_string(Readout{1, 1}), "11");
}

TEST(Detector, ThresholdElevenIffBothModesOccupied) {
  for (std::size_t i = 0; i < occupation_count(6); ++i) {
    const Occupation o = occupation_at(i);
    EXPECT_EQ(detect(o, DetectorModel::threshold).double_click(), o.n1 >= 1 && o.n0 >= 1);
  }
}

TEST(Detector, MeasureChannelReturnsConditionalProbe) {
  // (|a>|0,1> + |b>|1,0>)/sqrt2 with orthogonal probes
  JointState s(2, 1);
  s.add({0, {0, 1}}, 1.0 / std::sqrt(2.0));
  s.add({1, {1, 0}}, 1.0 / std::sqrt(2.0));
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < 64; ++i) {
    RoundRng rng(1, i);
    const auto m = measure_channel(s, Basis::z, DetectorModel::threshold, rng);
    seen.insert(to_string(m.readout));
    const std::size_t expect_probe = m.readout == Readout{0, 1} ? 0 : 1;
    EXPECT_NEAR(std::abs(m.probe[expect_probe]), 1.0, 1e-12);
  }
  EXPECT_EQ(seen, (std::set<std::string>{"01", "10"}));
  RoundRng rng(1, 0);
  const auto vac = measure_channel(JointState(2, 1), Basis::z, DetectorModel::threshold, rng);
  EXPECT_TRUE(vac.readout.empty());
}

TEST(RoundRng, DeterministicPerRound) {
  RoundRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(RoundRng, UniformRangeAndMean) {
  RoundRng r(1, 1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RoundRng, SampleIndexFollowsWeights) {
  const std::vector<double> w = {0.0, 1.0, 3.0, 0.0};
  int counts[4] = {};
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    RoundRng r(9, static_cast<std::uint64_t>(i));
    ++counts[sample_index(w, r)];
  }
  EXPECT_EQ(counts[0], 0);
  EXPECT_EQ(counts[3], 0);
  const double p = 0.25;
  EXPECT_NEAR(counts[1], n * p, 4.0 * std::sqrt(n * p * (1 - p)));
}

TEST(Linalg, HaarUnitaryIsUnitary) {
  RoundRng rng(2, 0);
  for (int d : {1, 2, 5, 12}) {
    const auto u = linalg::haar_unitary(d, rng);
    EXPECT_LE((u.adjoint() * u - linalg::Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Linalg, UnitaryCompletionSendsColumns) {
  RoundRng rng(3, 0);
  const linalg::Matrix a = linalg::haar_unitary(6, rng).leftCols(3);
  const linalg::Matrix b = linalg::haar_unitary(6, rng).leftCols(3);
  const auto w = linalg::unitary_completion(a, b);
  EXPECT_LE((w * a - b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((w.adjoint() * w - linalg::Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linalg, PureStateFidelityAndTraceDistance) {
  RoundRng rng(4, 0);
  for (int t = 0; t < 50; ++t) {
    const auto v = linalg::random_orthonormal(3, 2, rng);
    const double c = rng.uniform();
    ProbeVector a = v[0], b(3);
    for (std::size_t i = 0; i < 3; ++i) b[i] = c * v[0][i] + std::sqrt(1 - c * c) * v[1][i];
    const double f = linalg::fidelity({a}, {b}, 3);
    EXPECT_NEAR(f, std::abs(inner(a, b)), 1e-12);
    EXPECT_NEAR(linalg::trace_distance({a}, {b}, 3), std::sqrt(1 - f * f), 1e-9);
  }
}

TEST(Linalg, FidelityInvariantUnderProbeRotation) {
  RoundRng rng(5, 0);
  for (int t = 0; t < 30; ++t) {
    linalg::Ensemble a, b;
    for (int i = 0; i < 3; ++i) {
      a.push_back(linalg::random_orthonormal(4, 1, rng)[0]);
      b.push_back(linalg::random_orthonormal(4, 1, rng)[0]);
    }
    const auto w = linalg::haar_unitary(4, rng);
    auto rotate = [&](const linalg::Ensemble& e) {
      linalg::Ensemble out;
      for (const auto& v : e) {
        linalg::Vector x(4);
        for (int i = 0; i < 4; ++i) x(i) = v[i];
        const linalg::Vector y = w * x;
        out.push_back(ProbeVector(y.data(), y.data() + 4));
      }
      return out;
    };
    EXPECT_NEAR(linalg::fidelity(a, b, 4), linalg::fidelity(rotate(a), rotate(b), 4), 1e-10);
    EXPECT_NEAR(linalg::trace_distance(a, b, 4), linalg::trace_distance(rotate(a), rotate(b), 4), 1e-10);
  }
}
