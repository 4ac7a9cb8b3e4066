#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cqkd/linalg.hpp"

namespace cqkd {

enum class AliceAction : std::uint8_t { ctrl, sift };

inline const char* to_string(AliceAction a) { return a == AliceAction::ctrl ? "CTRL" : "SIFT"; }

struct ProbeSpace {
  std::size_t dim = 1;
  std::vector<std::string> labels;
};

/// Per-round classical behaviour layered on top of the linear maps.
enum class StrategyKind : std::uint8_t {
  none,
  pns_selection,  // QND photon count, forward split two-photon pulses to hit X
  usd_intercept,  // measure in Bob's B92 bases, resend only conclusive results
};

/// How Eve reads her probe once the round's basis is public: an orthonormal
/// set of probe vectors per basis with the key bit each one indicates, and
/// optionally vectors that reveal Alice's CTRL/SIFT choice.
struct ProbeReadout {
  std::map<Basis, std::vector<std::pair<ProbeVector, int>>> bit_vectors;
  std::vector<std::pair<ProbeVector, AliceAction>> action_vectors;
};

/// Eve's two-pass attack: U on the way out, V on the way back.
struct AttackSpec {
  AttackSpec(std::string n, ProbeSpace p, LinearMap u, LinearMap v)
      : name(std::move(n)), probe(std::move(p)), outbound(std::move(u)), ret(std::move(v)) {}

  std::string name;
  ProbeSpace probe;
  LinearMap outbound;  // U
  LinearMap ret;       // V
  bool lossless_channel = false;
  StrategyKind strategy = StrategyKind::none;
  double b92_overlap = 0.0;
  std::optional<ProbeReadout> readout;

  int n_max() const { return outbound.n_max(); }
};

/// Outbound decomposition sum_o |E_o>|o> of U applied to Bob's pulse.
using OutboundDecomposition = std::map<Occupation, ProbeVector>;

inline OutboundDecomposition decompose(const JointState& s) {
  OutboundDecomposition d;
  for (const auto& [k, a] : s.amplitudes()) {
    auto [it, fresh] = d.try_emplace(k.channel, ProbeVector(s.probe_dim()));
    it->second[k.probe] += a;
  }
  return d;
}

inline void validate_isometry(const LinearMap& m, const std::string& which, double tol = 1e-10) {
  const double dev = m.isometry_deviation();
  if (dev > tol)
    throw not_isometric(which + " map is not an isometry: max Gram deviation " +
                            std::to_string(dev),
                        dev);
}

inline void validate(const AttackSpec& a) {
  if (a.probe.dim == 0) throw std::invalid_argument("probe dimension must be >= 1");
  if (a.outbound.probe_dim() != a.probe.dim || a.ret.probe_dim() != a.probe.dim)
    throw dimension_mismatch("attack maps disagree with probe dimension");
  if (a.outbound.n_max() != a.ret.n_max()) throw dimension_mismatch("attack maps disagree on n_max");
  validate_isometry(a.outbound, "outbound");
  validate_isometry(a.ret, "return");
}

// ---------------------------------------------------------------------------
// Building blocks

/// Map that exchanges two orthonormal channel states on every probe index and
/// leaves their orthogonal complement alone.
inline LinearMap channel_swap(std::size_t probe_dim, int n_max, const FockState& a,
                              const FockState& b) {
  const FockState za = to_z_basis(a);
  const FockState zb = to_z_basis(b);
  std::vector<Occupation> support;
  for (const auto& [o, x] : za.amplitudes()) support.push_back(o);
  for (const auto& [o, x] : zb.amplitudes()) support.push_back(o);
  LinearMap m = LinearMap::identity(probe_dim, n_max);
  for (std::size_t e = 0; e < probe_dim; ++e) {
    for (const auto& o : support) {
      const Amplitude ca = std::conj(za.amplitude(o));
      const Amplitude cb = std::conj(zb.amplitude(o));
      FockState col(Basis::z, n_max);
      col.add(o, 1.0);
      col += (-ca) * za;
      col += (-cb) * zb;
      col += ca * zb;
      col += cb * za;
      m.set_column({e, o}, JointState::product(probe_dim, e, col));
    }
  }
  return m;
}

/// Cyclic permutation k0 -> k1 -> ... -> k0 of basis kets.
inline void set_cycle(LinearMap& m, const std::vector<JointKey>& cycle) {
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    JointState col(m.probe_dim(), m.n_max());
    col.add(cycle[(i + 1) % cycle.size()], 1.0);
    m.set_column(cycle[i], std::move(col));
  }
}

inline LinearMap from_dense(const linalg::Matrix& w, std::size_t probe_dim, int n_max) {
  const auto dim = static_cast<Eigen::Index>(probe_dim * occupation_count(n_max));
  if (w.rows() != dim || w.cols() != dim)
    throw dimension_mismatch("dense map is " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + ", expected " + std::to_string(dim));
  LinearMap m = LinearMap::identity(probe_dim, n_max);
  for (Eigen::Index j = 0; j < dim; ++j)
    m.set_column(linalg::dense_key(static_cast<std::size_t>(j), n_max),
                 linalg::from_dense(w.col(j), probe_dim, n_max));
  return m;
}

inline linalg::Matrix to_dense(const LinearMap& m) {
  const auto dim = static_cast<Eigen::Index>(m.probe_dim() * occupation_count(m.n_max()));
  linalg::Matrix w = linalg::Matrix::Zero(dim, dim);
  const auto domain = static_cast<Eigen::Index>(m.domain_probe_dim() * occupation_count(m.n_max()));
  for (Eigen::Index j = 0; j < domain; ++j)
    w.col(j) = linalg::to_dense(m.column(linalg::dense_key(static_cast<std::size_t>(j), m.n_max())));
  return w;
}

/// Extends an isometry defined on part of the probe space to a unitary on
/// all of probe (x) channel.
inline LinearMap complete_isometry(const LinearMap& m) {
  const auto domain = static_cast<Eigen::Index>(m.domain_probe_dim() * occupation_count(m.n_max()));
  const linalg::Matrix w = to_dense(m);
  const auto dim = w.rows();
  const linalg::Matrix from = linalg::Matrix::Identity(dim, dim).leftCols(domain);
  return from_dense(linalg::unitary_completion(from, w.leftCols(domain)), m.probe_dim(), m.n_max());
}

/// Unitary sending each nonzero input[i] to output[i].  The inputs must be
/// mutually orthogonal, likewise the outputs, with matching norms.
inline LinearMap map_sending(const std::vector<JointState>& inputs,
                             const std::vector<JointState>& outputs, double tol = 1e-10) {
  if (inputs.size() != outputs.size() || inputs.empty())
    throw std::invalid_argument("map_sending needs matching non-empty lists");
  const std::size_t probe_dim = inputs.front().probe_dim();
  const int n_max = inputs.front().n_max();
  std::vector<linalg::Vector> from, to;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double ni = inputs[i].norm_squared();
    const double no = outputs[i].norm_squared();
    if (std::abs(ni - no) > tol)
      throw infeasible_completion("norm mismatch " + std::to_string(ni) + " vs " + std::to_string(no));
    if (ni <= tol) continue;
    from.push_back(linalg::to_dense(inputs[i]) / std::sqrt(ni));
    to.push_back(linalg::to_dense(outputs[i]) / std::sqrt(no));
  }
  const auto dim = static_cast<Eigen::Index>(probe_dim * occupation_count(n_max));
  linalg::Matrix a(dim, static_cast<Eigen::Index>(from.size()));
  linalg::Matrix b(dim, static_cast<Eigen::Index>(to.size()));
  for (std::size_t i = 0; i < from.size(); ++i) {
    a.col(static_cast<Eigen::Index>(i)) = from[i];
    b.col(static_cast<Eigen::Index>(i)) = to[i];
  }
  const double ga = (a.adjoint() * a - linalg::Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
  const double gb = (b.adjoint() * b - linalg::Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
  if (ga > tol || gb > tol)
    throw infeasible_completion("prescribed vectors are not orthonormal (deviation " +
                                std::to_string(std::max(ga, gb)) + ")");
  return from_dense(linalg::unitary_completion(a, b), probe_dim, n_max);
}

// ---------------------------------------------------------------------------
// Named attacks

inline AttackSpec identity_attack(std::size_t probe_dim = 4, int n_max = kDefaultMaxPhotons) {
  AttackSpec a{"identity", {probe_dim, {}}, LinearMap::identity(probe_dim, n_max),
               LinearMap::identity(probe_dim, n_max)};
  return a;
}

/// Nondemolition splitting of two-photon pulses into a two-mode Fock probe
/// restricted to {|0,0>E, |0,1>E, |1,0>E}:
///   |0,0>E|0,2> -> |0,1>E|0,1>
///   |0,0>E|2,0> -> |1,0>E|1,0>
///   |0,0>E|1,1> -> (|1,0>E|0,1> + |0,1>E|1,0>)/sqrt2
/// and identity on every other photon number.  Defined on the vacuum probe.
inline AttackSpec pns_attack(int n_max = kDefaultMaxPhotons) {
  if (n_max < 2) throw cap_exceeded("pns_attack needs a photon cap of at least 2");
  constexpr std::size_t kVac = 0, kE01 = 1, kE10 = 2;
  LinearMap u(3, n_max, 1);
  JointState c02(3, n_max), c20(3, n_max), c11(3, n_max);
  c02.add({kE01, {0, 1}}, 1.0);
  c20.add({kE10, {1, 0}}, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  c11.add({kE10, {0, 1}}, r).add({kE01, {1, 0}}, r);
  u.set_column({kVac, {0, 2}}, c02);
  u.set_column({kVac, {2, 0}}, c20);
  u.set_column({kVac, {1, 1}}, c11);

  ProbeReadout ro;
  ro.bit_vectors[Basis::z] = {{{0.0, 1.0, 0.0}, 0}, {{0.0, 0.0, 1.0}, 1}};
  ro.bit_vectors[Basis::x] = {{{0.0, r, r}, 0}, {{0.0, r, -r}, 1}};

  AttackSpec a{"pns", {3, {"|0,0>E", "|0,1>E", "|1,0>E"}}, std::move(u),
               LinearMap::identity(3, n_max)};
  a.lossless_channel = true;
  a.strategy = StrategyKind::pns_selection;
  a.readout = std::move(ro);
  return a;
}

/// Unambiguous-discrimination attack on B92: intercept every pulse, measure
/// it the way Bob would, resend the identified state only when conclusive.
inline AttackSpec usd_attack_b92(double c, int n_max = kDefaultMaxPhotons) {
  if (!(c >= 0.0 && c < 1.0)) throw config_error("B92 overlap must lie in [0, 1)");
  AttackSpec a = identity_attack(1, n_max);
  a.name = "usd-b92";
  a.lossless_channel = true;
  a.strategy = StrategyKind::usd_intercept;
  a.b92_overlap = c;
  return a;
}

/// Tagging attack: Eve swaps Bob's |+> for (|0,2> + |2,0>)/sqrt2 on the way
/// out.  On the way back V cycles
///   |E>|0,2> -> |E>|0,1> -> |E0>|0,1> -> |E>|0,2>   (and likewise for |2,0>)
/// so a reflected two-photon pulse reaches Bob as |+>, a two-photon SIFT
/// residual becomes a single photon, and a single-photon (measure-resend)
/// residual is copied into the probe as E0 / E1.
inline AttackSpec tagging_attack(int n_max = kDefaultMaxPhotons) {
  if (n_max < 2) throw cap_exceeded("tagging_attack needs a photon cap of at least 2");
  constexpr std::size_t kE = 0, kE0 = 1, kE1 = 2;
  const FockState tag = even_odd_state(2, Parity::even, Basis::z, n_max);
  LinearMap u = channel_swap(3, n_max, plus_state(n_max), tag);
  LinearMap v = LinearMap::identity(3, n_max);
  set_cycle(v, {{kE, {0, 2}}, {kE, {0, 1}}, {kE0, {0, 1}}});
  set_cycle(v, {{kE, {2, 0}}, {kE, {1, 0}}, {kE1, {1, 0}}});

  ProbeReadout ro;
  ro.bit_vectors[Basis::z] = {{{0.0, 1.0, 0.0}, 0}, {{0.0, 0.0, 1.0}, 1}};
  ro.action_vectors = {{{1.0, 0.0, 0.0}, AliceAction::ctrl},
                       {{0.0, 1.0, 0.0}, AliceAction::sift},
                       {{0.0, 0.0, 1.0}, AliceAction::sift}};
  AttackSpec a{"tagging", {3, {"E", "E0", "E1"}}, std::move(u), std::move(v)};
  a.lossless_channel = true;
  a.readout = std::move(ro);
  return a;
}

/// Dense complex matrix over probe (x) channel, row-major.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<Amplitude> data;

  Amplitude operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
};

inline linalg::Matrix to_eigen(const DenseMatrix& m) {
  linalg::Matrix w(static_cast<Eigen::Index>(m.dim), static_cast<Eigen::Index>(m.dim));
  for (std::size_t r = 0; r < m.dim; ++r)
    for (std::size_t c = 0; c < m.dim; ++c)
      w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return w;
}

/// User-supplied attack.  Rows and columns are ordered |probe>|n1,n0> with
/// index probe * occupation_count(n_max) + occupation_index(n1, n0).
inline AttackSpec general_attack(const DenseMatrix& u, const DenseMatrix& v, std::size_t probe_dim,
                                 int n_max = kDefaultMaxPhotons, bool lossless = true) {
  const std::size_t dim = probe_dim * occupation_count(n_max);
  if (u.dim != dim || v.dim != dim)
    throw dimension_mismatch("attack matrices must be " + std::to_string(dim) + "x" +
                             std::to_string(dim) + " for probe_dim " + std::to_string(probe_dim) +
                             " and n_max " + std::to_string(n_max));
  AttackSpec a{"general", {probe_dim, {}}, from_dense(to_eigen(u), probe_dim, n_max),
               from_dense(to_eigen(v), probe_dim, n_max)};
  a.lossless_channel = lossless;
  validate(a);
  return a;
}

/// Reads a matrix file: '#' comments, then `dim D`, then D rows of D
/// whitespace-separated `re im` pairs.
inline DenseMatrix load_matrix(std::istream& in, const std::string& origin = "<stream>") {
  DenseMatrix m;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> numbers;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (m.dim == 0) {
      std::size_t d = 0;
      if (tok != "dim" || !(ls >> d) || d == 0)
        throw config_error(origin + ":" + std::to_string(line_no) + ": expected 'dim <D>'");
      m.dim = d;
      continue;
    }
    ls.clear();
    ls.str(line);
    std::size_t count = 0;
    double x = 0.0;
    while (ls >> x) {
      numbers.push_back(x);
      ++count;
    }
    if (!ls.eof())
      throw config_error(origin + ":" + std::to_string(line_no) + ": non-numeric entry");
    if (count != 2 * m.dim)
      throw config_error(origin + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(2 * m.dim) + " numbers, got " + std::to_string(count));
  }
  if (m.dim == 0) throw config_error(origin + ": missing 'dim' header");
  if (numbers.size() != 2 * m.dim * m.dim)
    throw config_error(origin + ": expected " + std::to_string(m.dim) + " rows");
  for (std::size_t i = 0; i < numbers.size(); i += 2) m.data.emplace_back(numbers[i], numbers[i + 1]);
  return m;
}

inline DenseMatrix load_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open matrix file " + path);
  return load_matrix(f, path);
}

// ---------------------------------------------------------------------------
// Undetectable (and deliberately detectable) random attacks

/// Eve's return-pass targets:
///   V psi_00 = H00 |0,0>
///   V psi_01 = sum_n F0n |0,n> + H01 |0,0>
///   V psi_10 = sum_n Fn0 |n,0> + H10 |0,0>
/// where psi_01 / psi_10 / psi_00 are the parts of U|0>|+> with only n0,
/// only n1, or no photons.
struct ReturnProfile {
  std::map<int, ProbeVector> f0n;
  std::map<int, ProbeVector> fn0;
  ProbeVector h00, h01, h10;
};

/// Builds U and V realizing the given outbound decomposition (for Bob's
/// pulse `bob`) and return profile, completed to unitaries.
inline AttackSpec attack_from_profiles(std::string name, std::size_t probe_dim, int n_max,
                                       const FockState& bob, const OutboundDecomposition& outbound,
                                       const ReturnProfile& ret) {
  JointState target(probe_dim, n_max);
  JointState psi00(probe_dim, n_max), psi01(probe_dim, n_max), psi10(probe_dim, n_max);
  for (const auto& [o, e] : outbound) {
    if (e.size() != probe_dim) throw dimension_mismatch("outbound probe vector size");
    for (std::size_t i = 0; i < probe_dim; ++i) {
      target.add({i, o}, e[i]);
      if (o.n1 == 0 && o.n0 == 0) psi00.add({i, o}, e[i]);
      else if (o.n1 == 0) psi01.add({i, o}, e[i]);
      else if (o.n0 == 0) psi10.add({i, o}, e[i]);
    }
  }
  auto image = [&](const std::map<int, ProbeVector>& fam, bool zeros_side, const ProbeVector& h) {
    JointState s(probe_dim, n_max);
    for (const auto& [n, f] : fam)
      for (std::size_t i = 0; i < f.size(); ++i)
        s.add({i, zeros_side ? Occupation{0, n} : Occupation{n, 0}}, f[i]);
    for (std::size_t i = 0; i < h.size(); ++i) s.add({i, {0, 0}}, h[i]);
    return s;
  };
  JointState v00(probe_dim, n_max);
  for (std::size_t i = 0; i < ret.h00.size(); ++i) v00.add({i, {0, 0}}, ret.h00[i]);

  AttackSpec a{std::move(name), {probe_dim, {}},
               map_sending({JointState::product(probe_dim, 0, bob)}, {target}),
               map_sending({psi00, psi01, psi10},
                           {v00, image(ret.f0n, true, ret.h01), image(ret.fn0, false, ret.h10)})};
  a.lossless_channel = true;
  validate(a);
  return a;
}

enum class LemmaViolation : std::uint8_t {
  none,         // F01 = F10, F0n = Fn0 = 0 for n > 1
  f01_vs_f10,   // F01 != F10, everything else as in `none`
  higher_n,     // F01 = F10 but some F0n or Fn0 (n > 1) nonzero
};

namespace detail {

inline ProbeVector random_direction(std::size_t dim, RoundRng& rng) {
  ProbeVector v(dim);
  for (auto& a : v) a = linalg::complex_normal(rng);
  const double n = std::sqrt(norm_squared(v));
  for (auto& a : v) a /= n;
  return v;
}

inline ProbeVector scaled(ProbeVector v, double norm) {
  for (auto& a : v) a *= norm;
  return v;
}

}  // namespace detail

/// A sampled attack together with the probe vectors it was built from.
struct RandomAttack {
  AttackSpec attack;
  OutboundDecomposition outbound;
  ReturnProfile profile;
};

/// Random attack honoring every undetectability constraint (violation ==
/// none), or breaking exactly one of the Lemma's return-pass constraints.
/// Bob's pulse is |+>.  The outbound decomposition never populates mixed
/// occupations (n1 * n0 != 0).
inline RandomAttack sample_random_attack(std::uint64_t seed, std::size_t probe_dim,
                                            int n_max = kDefaultMaxPhotons,
                                            LemmaViolation violation = LemmaViolation::none) {
  if (probe_dim == 0) throw std::invalid_argument("probe_dim must be >= 1");
  if (n_max < 1) throw cap_exceeded("constrained_random_attack needs n_max >= 1");
  if (violation == LemmaViolation::higher_n && n_max < 2)
    throw cap_exceeded("a higher-n violation needs n_max >= 2");
  RoundRng rng(seed, 0x5eed);
  using detail::random_direction;
  using detail::scaled;

  // Outbound: weights on |0,0>, |0,n>, |n,0>.
  const bool allow_vacuum = probe_dim >= 2;
  OutboundDecomposition out;
  double w01 = 0.0, w10 = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    if (n == 1 || rng.bernoulli(0.5)) {
      const double a = 0.2 + rng.uniform(), b = 0.2 + rng.uniform();
      out[{0, n}] = scaled(random_direction(probe_dim, rng), std::sqrt(a));
      out[{n, 0}] = scaled(random_direction(probe_dim, rng), std::sqrt(b));
      w01 += a;
      w10 += b;
    }
  }
  double w00 = allow_vacuum && rng.bernoulli(0.5) ? rng.uniform() : 0.0;
  if (probe_dim == 1) {
    // A one-dimensional probe leaves no room for H vectors: balance the two
    // single-mode groups so F can saturate both.
    for (auto& [o, e] : out)
      if (o.n1 == 0) e = scaled(e, std::sqrt(w10 / w01));
  }
  if (w00 > 0.0) out[{0, 0}] = scaled(random_direction(probe_dim, rng), std::sqrt(w00));
  double total = 0.0;
  for (const auto& [o, e] : out) total += norm_squared(e);
  for (auto& [o, e] : out) e = scaled(e, 1.0 / std::sqrt(total));
  double a01 = 0.0, a10 = 0.0, a00 = 0.0;
  for (const auto& [o, e] : out) {
    if (o.total() == 0) a00 += norm_squared(e);
    else if (o.n1 == 0) a01 += norm_squared(e);
    else a10 += norm_squared(e);
  }

  // Return pass.  The H vectors must be mutually orthogonal; with a small
  // probe some of them are forced to zero by saturating the F norms.
  ReturnProfile ret;
  const double budget = std::min(a01, a10);
  const bool tight = probe_dim <= 2;
  double f01_sq = 0.0, f10_sq = 0.0, extra_sq = 0.0;
  ProbeVector f01, f10;
  int extra_n = 0;
  int extra_kind = 0;  // 0: F0n = Fn0, 1: only F0n, 2: only Fn0, 3: F0n = -Fn0
  switch (violation) {
    case LemmaViolation::none: {
      const double f = tight ? budget : budget * (0.05 + 0.95 * rng.uniform());
      f01 = scaled(random_direction(probe_dim, rng), std::sqrt(f));
      f10 = f01;
      f01_sq = f10_sq = f;
      break;
    }
    case LemmaViolation::f01_vs_f10: {
      // Independent F01, F10 saturating their groups when the probe is small.
      const double t1 = tight ? 1.0 : 0.05 + 0.95 * rng.uniform();
      const double t2 = tight ? 1.0 : 0.05 + 0.95 * rng.uniform();
      f01_sq = a01 * t1;
      f10_sq = a10 * t2;
      do {
        f01 = scaled(random_direction(probe_dim, rng), std::sqrt(f01_sq));
        f10 = scaled(random_direction(probe_dim, rng), std::sqrt(f10_sq));
        ProbeVector d(probe_dim);
        for (std::size_t i = 0; i < probe_dim; ++i) d[i] = f01[i] - f10[i];
        if (norm_squared(d) > 1e-4) break;
      } while (true);
      break;
    }
    case LemmaViolation::higher_n: {
      extra_n = 2 + static_cast<int>(rng.uniform() * (n_max - 1));
      extra_kind = static_cast<int>(rng.uniform() * 4);
      const double g = budget * (0.1 + 0.4 * rng.uniform());
      const double f = tight ? budget - g : (budget - g) * (0.05 + 0.95 * rng.uniform());
      f01 = scaled(random_direction(probe_dim, rng), std::sqrt(f));
      f10 = f01;
      f01_sq = f10_sq = f;
      extra_sq = g;
      const ProbeVector gvec = scaled(random_direction(probe_dim, rng), std::sqrt(g));
      ProbeVector neg = gvec;
      for (auto& x : neg) x = -x;
      if (extra_kind != 2) ret.f0n[extra_n] = gvec;
      if (extra_kind != 1) ret.fn0[extra_n] = extra_kind == 3 ? neg : gvec;
      break;
    }
  }
  ret.f0n[1] = f01;
  ret.fn0[1] = f10;

  const double extra01 = ret.f0n.count(extra_n) && extra_n > 0 ? extra_sq : 0.0;
  const double extra10 = ret.fn0.count(extra_n) && extra_n > 0 ? extra_sq : 0.0;
  const double h01_sq = std::max(0.0, a01 - f01_sq - extra01);
  const double h10_sq = std::max(0.0, a10 - f10_sq - extra10);
  std::size_t needed = 0;
  for (double x : {a00, h01_sq, h10_sq})
    if (x > 1e-14) ++needed;
  if (needed > probe_dim)
    throw infeasible_completion("probe of dimension " + std::to_string(probe_dim) +
                                " cannot hold " + std::to_string(needed) +
                                " orthogonal H vectors");
  const auto basis = linalg::random_orthonormal(probe_dim, probe_dim, rng);
  std::size_t next = 0;
  auto h_vector = [&](double sq) {
    if (sq <= 1e-14) return ProbeVector(probe_dim);
    return scaled(basis[next++], std::sqrt(sq));
  };
  ret.h00 = h_vector(a00);
  ret.h01 = h_vector(h01_sq);
  ret.h10 = h_vector(h10_sq);

  const char* tag = violation == LemmaViolation::none         ? "constrained-random"
                    : violation == LemmaViolation::f01_vs_f10 ? "violating-f01"
                                                              : "violating-higher-n";
  AttackSpec a = attack_from_profiles(tag, probe_dim, n_max, plus_state(n_max), out, ret);
  return {std::move(a), std::move(out), std::move(ret)};
}

inline AttackSpec constrained_random_attack(std::uint64_t seed, std::size_t probe_dim,
                                            int n_max = kDefaultMaxPhotons,
                                            LemmaViolation violation = LemmaViolation::none) {
  return sample_random_attack(seed, probe_dim, n_max, violation).attack;
}

}  // namespace cqkd
