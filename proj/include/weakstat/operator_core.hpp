#pragma once

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weakstat/errors.hpp"

namespace weakstat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Structural tolerance: traces, idempotency, completeness, norms.
inline constexpr double kStructuralTol = 1e-10;
/// Spectral tolerance: eigendecomposition residues.
inline constexpr double kSpectralTol = 1e-9;

// ---------------------------------------------------------------------------
// Raw matrix helpers
// ---------------------------------------------------------------------------

/// Build a matrix row by row. Throws ValidationError on ragged rows.
Matrix matrix_from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

bool all_finite(const Matrix &m);
void require_finite(const Matrix &m, const std::string &what);
void require_square(const Matrix &m, const std::string &what);

/// Largest entry magnitude; 0 for empty matrices.
double max_abs(const Matrix &m);

Matrix identity(Eigen::Index dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

double hermitian_defect(const Matrix &m);
bool is_hermitian(const Matrix &m, double tol = kStructuralTol);

// ---------------------------------------------------------------------------
// Validated operator types
// ---------------------------------------------------------------------------

/// Square matrix with M = M^dagger within a relative tolerance. The matrix is
/// stored exactly as given; Hermiticity is a checked invariant, not a repair.
class HermitianOperator {
  public:
    explicit HermitianOperator(Matrix m, double herm_tolerance = kStructuralTol);

    const Matrix &matrix() const { return mat_; }
    Eigen::Index dim() const { return mat_.rows(); }
    double herm_tolerance() const { return tol_; }

  private:
    Matrix mat_;
    double tol_;
};

/// Unit-norm complex vector.
class KetVector {
  public:
    explicit KetVector(Vector amplitudes, double tol = kStructuralTol);

    /// Scale an arbitrary nonzero vector to unit norm.
    static KetVector normalized(Vector amplitudes);

    const Vector &amplitudes() const { return amps_; }
    Eigen::Index dim() const { return amps_.size(); }
    /// Entrywise complex conjugate (same basis).
    KetVector conjugated() const;

  private:
    Vector amps_;
};

/// Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
  public:
    explicit DensityMatrix(HermitianOperator op);
    explicit DensityMatrix(Matrix m);
    static DensityMatrix pure(const KetVector &psi);
    /// identity/d.
    static DensityMatrix maximally_mixed(Eigen::Index dim);

    const HermitianOperator &op() const { return op_; }
    const Matrix &matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }

  private:
    HermitianOperator op_;
};

/// Hermitian idempotent: ||P^2 - P||_max <= tol.
class Projector {
  public:
    explicit Projector(HermitianOperator op);
    explicit Projector(Matrix m);
    static Projector onto(const KetVector &psi);

    const HermitianOperator &op() const { return op_; }
    const Matrix &matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }

  private:
    HermitianOperator op_;
};

/// Hermitian with spectrum inside [0, 1] (within tolerance).
class EffectOperator {
  public:
    explicit EffectOperator(HermitianOperator op);
    explicit EffectOperator(Matrix m);

    const HermitianOperator &op() const { return op_; }
    const Matrix &matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }

  private:
    HermitianOperator op_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Conjugate transpose.
Matrix adjoint(const Matrix &m);

/// Sum of diagonal entries. Throws NonSquareError.
Complex mat_trace(const Matrix &m);

/// Matrix product with an explicit inner-dimension check.
Matrix matmul(const Matrix &a, const Matrix &b);

/// Symmetrized product (AB + BA)/2; Hermitian whenever A and B are.
Matrix jordan_product(const Matrix &a, const Matrix &b);
HermitianOperator jordan_product(const HermitianOperator &a, const HermitianOperator &b);

/// Kronecker product; the left factor's indices are major, so subsystem A of
/// a composite lives in the left factor.
Matrix tensor_product(const Matrix &a, const Matrix &b);

enum class Subsystem { A, B };

/// Reduce a (dim_a*dim_b)-dimensional operator to one subsystem by summing
/// out the other. Trace preserving.
Matrix partial_trace(const Matrix &m, Eigen::Index dim_a, Eigen::Index dim_b, Subsystem keep);

/// Spectral decomposition of a Hermitian operator.
///
/// Eigenvalues ascend; eigenvector columns are orthonormal with the phase
/// fixed so the first nonvanishing amplitude is real and positive.
struct EigenSystem {
    RealVector values;
    Matrix vectors; // column k pairs with values[k]
};

EigenSystem hermitian_eig(const HermitianOperator &h);
/// Validates Hermiticity first; throws NotHermitianError.
EigenSystem hermitian_eig(const Matrix &m, double tol = kStructuralTol);

/// Rank-one |u><v|.
Matrix outer(const KetVector &u, const KetVector &v);

/// Largest eigenvalue magnitude.
double spectral_norm(const HermitianOperator &h);

/// Smallest eigenvalue.
double min_eigenvalue(const HermitianOperator &h);

/// Principal square root of a positive semidefinite operator; eigenvalues in
/// [-tol, 0) are clamped to zero.
Matrix sqrt_psd(const HermitianOperator &h);

/// Generalized Gell-Mann matrices: d^2-1 traceless Hermitian operators with
/// Tr{S_j S_k} = 2 delta_jk. For d = 2 these are the Pauli matrices X, Y, Z.
std::vector<Matrix> gell_mann_matrices(Eigen::Index dim);

/// Stable names for the operators above ("X","Y","Z" for qubits, otherwise
/// "sym(j,k)" / "asym(j,k)" / "diag(l)").
std::vector<std::string> gell_mann_labels(Eigen::Index dim);

/// Extend a unit vector to a full orthonormal basis (first column equals the
/// input). Deterministic Gram-Schmidt against the computational basis.
Matrix orthonormal_basis_containing(const KetVector &first);

} // namespace weakstat
