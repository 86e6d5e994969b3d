#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rabi/error.hpp"

namespace rabi {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;

/// Truncated space Fock(n_max) x C^2. Basis index of |k, s> is 2k + s with
/// s = 0 for the ground and s = 1 for the excited atomic level.
class SpaceDims {
 public:
  static constexpr int kAtomLevels = 2;

  explicit SpaceDims(int n_max);

  int n_max() const { return n_max_; }
  int dim() const { return kAtomLevels * (n_max_ + 1); }
  int index(int photons, int atom) const { return kAtomLevels * photons + atom; }
  int photons_of(int index) const { return index / kAtomLevels; }
  int atom_of(int index) const { return index % kAtomLevels; }

  friend bool operator==(const SpaceDims&, const SpaceDims&) = default;

 private:
  int n_max_;
};

struct Entry {
  int row;
  int col;
  Complex value;
};

/// Immutable sparse operator bound to a SpaceDims.
class SparseOperator {
 public:
  /// Throws DimensionError if the matrix shape differs from dims.dim(), and
  /// Error if hermitian_hint is set but max |M - M^dag| > 1e-12.
  SparseOperator(SpaceDims dims, SparseMatrix matrix, bool hermitian_hint = false);

  static SparseOperator identity(SpaceDims dims);
  static SparseOperator zero(SpaceDims dims);

  const SpaceDims& dims() const { return dims_; }
  const SparseMatrix& matrix() const { return matrix_; }
  bool hermitian_hint() const { return hermitian_hint_; }

  Complex coeff(int row, int col) const { return matrix_.coeff(row, col); }
  std::size_t nonzeros() const { return static_cast<std::size_t>(matrix_.nonZeros()); }

  /// Entries in canonical (row, col) order.
  std::vector<Entry> entries() const;
  SparseOperator adjoint() const;
  DenseMatrix to_dense() const { return DenseMatrix(matrix_); }

  /// max |M - M^dag| over all entries.
  double hermiticity_error() const;

 private:
  SpaceDims dims_;
  SparseMatrix matrix_;
  bool hermitian_hint_;
};

SparseOperator op_mul(const SparseOperator& a, const SparseOperator& b);

/// a + c * b.
SparseOperator op_add_scaled(const SparseOperator& a, const SparseOperator& b, Complex c);

SparseOperator op_scale(const SparseOperator& a, Complex c);

/// Integer power by repeated multiplication; power 0 is the identity.
SparseOperator op_pow(const SparseOperator& a, int power);

/// a b - b a.
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

/// Largest entry magnitude.
double max_abs(const SparseOperator& a);

inline SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) { return op_mul(a, b); }
inline SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  return op_add_scaled(a, b, 1.0);
}
inline SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  return op_add_scaled(a, b, -1.0);
}
inline SparseOperator operator*(Complex c, const SparseOperator& a) { return op_scale(a, c); }

/// Photon annihilator a (x) I_2, with a|k> = sqrt(k)|k-1>.
SparseOperator make_annihilator(SpaceDims dims);

struct AtomicOps {
  SparseOperator sigma;      // |g><e|
  SparseOperator sigma_dag;  // |e><g|
  SparseOperator inversion;  // sigma_dag sigma - sigma sigma_dag
};

AtomicOps make_atomic_ops(SpaceDims dims);

enum class AtomicFactor { none, sigma, sigma_dag, population };

/// Normal-ordered moment observables of the J = 0 sector:
///   none        a^dag^n a^n
///   population  a^dag^n a^n sigma_dag sigma
///   sigma       a^dag^n a^(n-1) sigma
///   sigma_dag   a^dag^(n-1) a^n sigma_dag
/// Requires 1 <= n <= n_max; TruncationError otherwise.
SparseOperator make_moment_observable(SpaceDims dims, int n, AtomicFactor atomic);

/// k! / (k - n)! for k >= n, else 0.
double falling_factorial(int k, int n);

}  // namespace rabi
