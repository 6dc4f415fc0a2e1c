#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gp2d::linalg {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;
using Apply = std::function<Vector(const Vector&)>;

/// exp(A) by scaling and squaring with a degree-13 Pade approximant.
DenseMatrix expm(const DenseMatrix& a);

struct KrylovOptions {
  int krylov_dim = 30;
  double tol = 1e-13;
  int max_substeps = 10000;
};

/// exp(t A) v by Arnoldi projection with substepping; norm_a bounds |A|.
Vector expv(const Apply& a, const Vector& v, double t, double norm_a, const KrylovOptions& opts = {});

struct EigenPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
  int iterations = 0;
};

struct LanczosOptions {
  int basis = 60;
  int max_restarts = 200;
  double tol = 1e-10;
  std::uint64_t seed = 12345;
};

/// Smallest eigenpair of a Hermitian operator by restarted Lanczos with
/// full reorthogonalization.
EigenPair lanczos_smallest(const Apply& h, Eigen::Index dim, const LanczosOptions& opts = {});

/// Smallest eigenpair of a dense Hermitian matrix.
EigenPair smallest_eigenpair(const DenseMatrix& h);
double min_eigenvalue(const DenseMatrix& h);

/// Finest index partition that makes every matrix block diagonal
/// (connected components of the joint sparsity graph). Blocks are sorted
/// by their smallest index, indices ascending within a block.
std::vector<std::vector<Eigen::Index>> connected_blocks(const std::vector<const SparseMatrix*>& ms, Eigen::Index dim);

DenseMatrix extract_block(const SparseMatrix& m, const std::vector<Eigen::Index>& idx);

/// Smallest eigenpair of a sparse Hermitian matrix, solved densely one
/// connected block at a time.
EigenPair smallest_eigenpair(const SparseMatrix& h);

/// max |M - M^dagger| over entries.
double hermitian_defect(const DenseMatrix& m);
double max_abs(const DenseMatrix& m);

}  // namespace gp2d::linalg
