#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "cqkd/joint.hpp"
#include "cqkd/rng.hpp"

namespace cqkd::linalg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Row/column of |probe>|occupation> in dense matrices over probe (x) channel.
inline std::size_t dense_index(const JointKey& k, int n_max) {
  return k.probe * occupation_count(n_max) + occupation_index(k.channel);
}

inline JointKey dense_key(std::size_t i, int n_max) {
  const std::size_t occ = occupation_count(n_max);
  return {i / occ, occupation_at(i % occ)};
}

inline Vector to_dense(const JointState& s) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(s.probe_dim() * occupation_count(s.n_max())));
  for (const auto& [k, a] : s.amplitudes()) v(static_cast<Eigen::Index>(dense_index(k, s.n_max()))) = a;
  return v;
}

inline JointState from_dense(const Vector& v, std::size_t probe_dim, int n_max) {
  JointState s(probe_dim, n_max);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > kAmplitudeFloor) s.add(dense_key(static_cast<std::size_t>(i), n_max), v(i));
  return s;
}

/// Standard complex normal draw (Box-Muller on the round stream).
inline Amplitude complex_normal(RoundRng& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0, 1]
  const double u2 = rng.uniform();
  const double r = std::sqrt(-std::log(u1));
  return {r * std::cos(2.0 * std::numbers::pi * u2), r * std::sin(2.0 * std::numbers::pi * u2)};
}

inline Matrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, RoundRng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

/// Orthonormal basis of the whole space whose first columns are those of
/// `cols` (which must already be orthonormal).
inline Matrix complete_basis(const Matrix& cols) {
  const Eigen::Index d = cols.rows();
  const Eigen::Index m = cols.cols();
  Eigen::HouseholderQR<Matrix> qr(cols);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  q.leftCols(m) = cols;
  return q;
}

/// Unitary W with W * from.col(i) = to.col(i); both sets orthonormal.
inline Matrix unitary_completion(const Matrix& from, const Matrix& to) {
  return complete_basis(to) * complete_basis(from).adjoint();
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
inline Matrix haar_unitary(Eigen::Index dim, RoundRng& rng) {
  Eigen::HouseholderQR<Matrix> qr(complex_normal_matrix(dim, dim, rng));
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Orthonormal probe vectors drawn at random (k <= dim).
inline std::vector<ProbeVector> random_orthonormal(std::size_t dim, std::size_t k, RoundRng& rng) {
  const Matrix u = haar_unitary(static_cast<Eigen::Index>(dim), rng);
  std::vector<ProbeVector> out;
  for (std::size_t j = 0; j < k; ++j) {
    ProbeVector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out.push_back(std::move(v));
  }
  return out;
}

/// Mixed state given as an ensemble of unnormalized vectors:
/// rho = sum_i |v_i><v_i|.
using Ensemble = std::vector<ProbeVector>;

inline Matrix ensemble_matrix(const Ensemble& e, std::size_t dim) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(e.size()));
  for (std::size_t j = 0; j < e.size(); ++j)
    for (std::size_t i = 0; i < e[j].size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e[j][i];
  return m;
}

inline double trace(const Ensemble& e) {
  double t = 0.0;
  for (const auto& v : e) t += norm_squared(v);
  return t;
}

/// Root fidelity || sqrt(rho) sqrt(sigma) ||_1 of the normalized ensembles,
/// evaluated as the trace norm of A^dagger B (rho = A A^dagger); reduces to
/// |<a|b>| for pure states without square roots of tiny eigenvalues.
inline double fidelity(const Ensemble& a, const Ensemble& b, std::size_t dim) {
  const Matrix ma = ensemble_matrix(a, dim) / std::sqrt(trace(a));
  const Matrix mb = ensemble_matrix(b, dim) / std::sqrt(trace(b));
  const Matrix overlap = ma.adjoint() * mb;
  Eigen::JacobiSVD<Matrix> svd(overlap);
  return std::min(1.0, svd.singularValues().sum());
}

inline Matrix density(const Ensemble& e, std::size_t dim) {
  const Matrix m = ensemble_matrix(e, dim);
  return m * m.adjoint() / trace(e);
}

/// (1/2) || rho - sigma ||_1 of the normalized ensembles.
inline double trace_distance(const Ensemble& a, const Ensemble& b, std::size_t dim) {
  const Matrix diff = density(a, dim) - density(b, dim);
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
  return std::min(1.0, 0.5 * es.eigenvalues().cwiseAbs().sum());
}

}  // namespace cqkd::linalg
