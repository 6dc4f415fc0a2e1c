#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "gp2d/kernels.hpp"
#include "gp2d/linalg.hpp"
#include "gp2d/potential.hpp"

namespace gp2d {

struct Mode {
  int n1 = 0;
  int n2 = 0;
  double norm = 0.0;  // |p| = 2 pi |n|
};

/// Negation-closed shells around the origin: 4 (|n| = 1), 8 (adds |n| = sqrt 2)
/// or 12 (adds |n| = 2) points.
std::vector<Mode> shell_modes(int count);

/// Occupation-number basis of the excitation space truncated at `cap`
/// particles. `particles` is the N entering b = sqrt((N - N_+)/N) a; it
/// defaults to the cap.
class FockBasis {
public:
  FockBasis() = default;
  FockBasis(std::vector<Mode> modes, int cap, int particles = -1, std::size_t max_dim = 200000);

  std::size_t dim() const { return totals_.size(); }
  int cap() const { return cap_; }
  int particles() const { return particles_; }
  std::size_t mode_count() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }

  const std::uint8_t* occupation(std::size_t i) const { return occ_.data() + i * modes_.size(); }
  int total(std::size_t i) const { return totals_[i]; }
  long index(const std::uint8_t* occ) const;

  /// Mode ordinal of 2 pi (n1, n2), or -1.
  int mode_index(int n1, int n2) const;
  int negative(int mode) const { return neg_[static_cast<std::size_t>(mode)]; }
  /// Ordinal of p_a + p_b, or -1 when the sum is not a mode.
  int sum_mode(int a, int b) const;

private:
  std::uint64_t key(const std::uint8_t* occ) const;

  std::vector<Mode> modes_;
  int cap_ = 0;
  int particles_ = 0;
  std::vector<std::uint8_t> occ_;
  std::vector<int> totals_;
  std::vector<int> neg_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

FockBasis build_basis(const std::vector<Mode>& modes, int cap, int particles = -1, std::size_t max_dim = 200000);

struct LinearOperator {
  linalg::SparseMatrix matrix;
  std::string symbol;
  bool hermitian = false;

  LinearOperator() = default;
  LinearOperator(linalg::SparseMatrix m, std::string sym, bool herm);
  static LinearOperator from_dense(const linalg::DenseMatrix& m, std::string sym, bool herm);
  static LinearOperator identity(std::size_t dim, std::string sym = "1");
  static LinearOperator zero(std::size_t dim, std::string sym = "0");

  Eigen::Index dim() const { return matrix.rows(); }
  linalg::DenseMatrix dense() const { return linalg::DenseMatrix(matrix); }
  linalg::Vector apply(const linalg::Vector& v) const { return matrix * v; }
  LinearOperator adjoint() const;
  double hermitian_defect() const;
  /// Throws internal-consistency when tagged Hermitian but not within tol.
  void check_hermitian(double tol = 1e-12) const;
  void write_triplets(std::ostream& out) const;
};

LinearOperator operator+(const LinearOperator& x, const LinearOperator& y);
LinearOperator operator-(const LinearOperator& x, const LinearOperator& y);
LinearOperator operator*(const LinearOperator& x, const LinearOperator& y);
LinearOperator operator*(linalg::cplx s, const LinearOperator& x);
LinearOperator commutator(const LinearOperator& x, const LinearOperator& y);

struct FockVector {
  linalg::Vector amplitudes;
  double norm = 0.0;

  explicit FockVector(linalg::Vector v);
  static FockVector vacuum(const FockBasis& basis);
  /// Gaussian random amplitudes, normalized.
  static FockVector random(const FockBasis& basis, std::uint64_t seed);
  bool consistent(double tol = 1e-12) const;
};

enum class Ladder { a, a_dag, b, b_dag };

struct LadderFactor {
  Ladder kind;
  int mode;
};

/// A product of ladder operators, rightmost factor acting first.
using LadderWord = std::vector<LadderFactor>;

struct WordTerm {
  linalg::cplx coefficient;
  LadderWord word;
};

/// Sum of ladder words as a matrix. Creations above the cap give zero.
LinearOperator assemble(const FockBasis& basis, const std::vector<WordTerm>& terms, std::string symbol, bool hermitian);
/// g(N_+) as a diagonal operator.
LinearOperator number_function(const FockBasis& basis, const std::function<double(int)>& g, std::string symbol);
LinearOperator number_operator(const FockBasis& basis);

LinearOperator ladder(const FockBasis& basis, int mode, Ladder kind);
/// Same, addressed by lattice coordinates; throws index when not a mode.
LinearOperator ladder_at(const FockBasis& basis, int n1, int n2, Ladder kind);

/// V_hat(p / e^N) for lattice coordinates n, cached by |n|^2.
class ScaledTransform {
public:
  ScaledTransform(const RadialPotential& pot, int N);
  double operator()(int n1, int n2) const;

private:
  const RadialPotential* pot_;
  double inv_eN_;
  mutable std::unordered_map<long, double> cache_;
};

struct HamiltonianPieces {
  LinearOperator K;
  LinearOperator V_N;
  LinearOperator L0;
  LinearOperator L2;
  LinearOperator L3;
  LinearOperator L4;
  LinearOperator H;  // K + V_N
  LinearOperator L;  // L0 + L2 + L3 + L4
};

HamiltonianPieces hamiltonian_pieces(const FockBasis& basis, const RadialPotential& pot);

/// True when every nonzero entry joins states with equal total momentum.
bool momentum_conserving(const FockBasis& basis, const LinearOperator& op);

/// eta per basis mode, read from the kernel table's lattice.
std::vector<double> eta_for_modes(const FockBasis& basis, const KernelTable& table);

struct Generators {
  LinearOperator B;
  LinearOperator A;
};

Generators generators(const FockBasis& basis, const std::vector<double>& eta_modes);

struct Conjugation {
  bool dense = true;
  LinearOperator op;         // e^{-G} X e^{G} when dense
  linalg::Apply apply;       // always available
  double unitarity_defect = 0.0;
};

/// e^{-gen} op e^{gen}; dense while every joint sparsity block has at most
/// dense_cap states, Krylov application beyond.
Conjugation conjugate(const LinearOperator& op, const LinearOperator& gen, std::size_t dense_cap = 4000);

/// e^{gen} as a dense matrix, with |U^dagger U - 1|_max.
linalg::DenseMatrix unitary_exponential(const LinearOperator& gen, double* defect = nullptr);

/// d_p = e^{-B} b_p e^{B} - cosh(eta_p) b_p - sinh(eta_p) b^*_{-p}.
LinearOperator remainder_dp(const FockBasis& basis, const LinearOperator& B, int mode, double eta_p);

struct EffectiveHamiltonians {
  LinearOperator G_eff;
  LinearOperator R_eff;
};

EffectiveHamiltonians effective_hamiltonians(const FockBasis& basis, const RenormPotential& renorm,
                                             const HamiltonianPieces& pieces, const RadialPotential& pot);

struct ExcitationMapReport {
  bool skipped = false;
  std::string reason;
  std::size_t full_dim = 0;
  std::size_t fock_dim = 0;
  double unitarity = 0.0;       // |U U^dagger - 1| and |U^dagger U - 1|
  double zero_number = 0.0;     // U a_0^* a_0 U^* = N - N_+
  double create_from_zero = 0.0;  // U a_p^* a_0 U^* = a_p^* sqrt(N - N_+)
  double annihilate_to_zero = 0.0;  // U a_0^* a_p U^* = sqrt(N - N_+) a_p
  double hopping = 0.0;         // U a_p^* a_q U^* = a_p^* a_q
  double max_residual() const;
};

/// Builds U_N from its sector formula on the N-particle space over the modes
/// and the zero mode, and checks the conjugation rules.
ExcitationMapReport unitary_excitation_map(const std::vector<Mode>& modes, int N, std::size_t dense_cap = 4000);

struct AlgebraCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass() const { return residual <= tolerance; }
};

/// Commutators of b, b^* and a^* a on the basis, all pairs of modes.
std::vector<AlgebraCheck> commutator_checks(const FockBasis& basis, double tol = 1e-12);

}  // namespace gp2d
