#include "rabi/operator_algebra.hpp"

#include <cmath>
#include <string>

namespace rabi {

namespace {

constexpr double kHermitianTolerance = 1e-12;

void require_same_dims(const SparseOperator& a, const SparseOperator& b, const char* what) {
  if (!(a.dims() == b.dims())) {
    throw DimensionError(std::string(what) + ": operand dims differ (n_max " +
                         std::to_string(a.dims().n_max()) + " vs " +
                         std::to_string(b.dims().n_max()) + ")");
  }
}

SparseMatrix from_triplets(const SpaceDims& dims, const std::vector<Eigen::Triplet<Complex>>& triplets) {
  SparseMatrix m(dims.dim(), dims.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpaceDims::SpaceDims(int n_max) : n_max_(n_max) {
  if (n_max < 1) {
    throw ConfigError("n_max must be >= 1, got " + std::to_string(n_max));
  }
}

SparseOperator::SparseOperator(SpaceDims dims, SparseMatrix matrix, bool hermitian_hint)
    : dims_(dims), matrix_(std::move(matrix)), hermitian_hint_(hermitian_hint) {
  if (matrix_.rows() != dims_.dim() || matrix_.cols() != dims_.dim()) {
    throw DimensionError("operator shape " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + " does not match dim " +
                         std::to_string(dims_.dim()));
  }
  matrix_.prune(Complex(0.0, 0.0), 0.0);
  matrix_.makeCompressed();
  if (hermitian_hint_) {
    const double err = hermiticity_error();
    if (err > kHermitianTolerance) {
      throw Error("operator flagged Hermitian deviates by " + std::to_string(err));
    }
  }
}

SparseOperator SparseOperator::identity(SpaceDims dims) {
  SparseMatrix m(dims.dim(), dims.dim());
  m.setIdentity();
  return SparseOperator(dims, std::move(m), true);
}

SparseOperator SparseOperator::zero(SpaceDims dims) {
  return SparseOperator(dims, SparseMatrix(dims.dim(), dims.dim()), true);
}

std::vector<Entry> SparseOperator::entries() const {
  std::vector<Entry> out;
  out.reserve(nonzeros());
  for (int r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    }
  }
  return out;
}

SparseOperator SparseOperator::adjoint() const {
  SparseMatrix adj = matrix_.adjoint();
  return SparseOperator(dims_, std::move(adj), hermitian_hint_);
}

double SparseOperator::hermiticity_error() const {
  const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double worst = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

SparseOperator op_mul(const SparseOperator& a, const SparseOperator& b) {
  require_same_dims(a, b, "op_mul");
  SparseMatrix product = a.matrix() * b.matrix();
  return SparseOperator(a.dims(), std::move(product));
}

SparseOperator op_add_scaled(const SparseOperator& a, const SparseOperator& b, Complex c) {
  require_same_dims(a, b, "op_add_scaled");
  SparseMatrix sum = a.matrix() + c * b.matrix();
  return SparseOperator(a.dims(), std::move(sum));
}

SparseOperator op_scale(const SparseOperator& a, Complex c) {
  SparseMatrix scaled = c * a.matrix();
  return SparseOperator(a.dims(), std::move(scaled));
}

SparseOperator op_pow(const SparseOperator& a, int power) {
  if (power < 0) {
    throw Error("op_pow: negative power " + std::to_string(power));
  }
  SparseOperator result = SparseOperator::identity(a.dims());
  for (int i = 0; i < power; ++i) {
    result = op_mul(result, a);
  }
  return result;
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  return op_mul(a, b) - op_mul(b, a);
}

double max_abs(const SparseOperator& a) {
  double worst = 0.0;
  for (const auto& e : a.entries()) {
    worst = std::max(worst, std::abs(e.value));
  }
  return worst;
}

SparseOperator make_annihilator(SpaceDims dims) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(2 * dims.n_max());
  for (int k = 1; k <= dims.n_max(); ++k) {
    const double amp = std::sqrt(static_cast<double>(k));
    for (int s = 0; s < SpaceDims::kAtomLevels; ++s) {
      t.emplace_back(dims.index(k - 1, s), dims.index(k, s), amp);
    }
  }
  return SparseOperator(dims, from_triplets(dims, t));
}

AtomicOps make_atomic_ops(SpaceDims dims) {
  std::vector<Eigen::Triplet<Complex>> lower;
  std::vector<Eigen::Triplet<Complex>> inv;
  for (int k = 0; k <= dims.n_max(); ++k) {
    lower.emplace_back(dims.index(k, 0), dims.index(k, 1), 1.0);
    inv.emplace_back(dims.index(k, 1), dims.index(k, 1), 1.0);
    inv.emplace_back(dims.index(k, 0), dims.index(k, 0), -1.0);
  }
  SparseOperator sigma(dims, from_triplets(dims, lower));
  SparseOperator sigma_dag = sigma.adjoint();
  SparseOperator inversion(dims, from_triplets(dims, inv), true);
  return {std::move(sigma), std::move(sigma_dag), std::move(inversion)};
}

SparseOperator make_moment_observable(SpaceDims dims, int n, AtomicFactor atomic) {
  if (n < 1 || n > dims.n_max()) {
    throw TruncationError("moment order " + std::to_string(n) + " outside [1, n_max=" +
                          std::to_string(dims.n_max()) + "]");
  }
  const SparseOperator a = make_annihilator(dims);
  const SparseOperator a_dag = a.adjoint();
  const AtomicOps atom = make_atomic_ops(dims);
  switch (atomic) {
    case AtomicFactor::none: {
      SparseOperator m = op_pow(a_dag, n) * op_pow(a, n);
      return SparseOperator(dims, m.matrix(), true);
    }
    case AtomicFactor::population: {
      SparseOperator m = op_pow(a_dag, n) * op_pow(a, n) * atom.sigma_dag * atom.sigma;
      return SparseOperator(dims, m.matrix(), true);
    }
    case AtomicFactor::sigma:
      return op_pow(a_dag, n) * op_pow(a, n - 1) * atom.sigma;
    case AtomicFactor::sigma_dag:
      return op_pow(a_dag, n - 1) * op_pow(a, n) * atom.sigma_dag;
  }
  throw Error("unknown atomic factor");
}

double falling_factorial(int k, int n) {
  if (n < 0 || k < n) {
    return 0.0;
  }
  double result = 1.0;
  for (int i = 0; i < n; ++i) {
    result *= static_cast<double>(k - i);
  }
  return result;
}

}  // namespace rabi
