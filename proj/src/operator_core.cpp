#include "weakstat/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace weakstat {

namespace {

std::string dim_string(const Matrix &m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

} // namespace

Matrix matrix_from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    if (n_rows == 0)
        throw ValidationError("matrix_from_rows: no rows given");
    const auto n_cols = static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(n_rows, n_cols);
    Eigen::Index r = 0;
    for (const auto &row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != n_cols)
            throw ValidationError("matrix_from_rows: ragged rows");
        Eigen::Index c = 0;
        for (const auto &v : row)
            m(r, c++) = v;
        ++r;
    }
    require_finite(m, "matrix_from_rows");
    return m;
}

bool all_finite(const Matrix &m) {
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            if (!std::isfinite(m(j, k).real()) || !std::isfinite(m(j, k).imag()))
                return false;
    return true;
}

void require_finite(const Matrix &m, const std::string &what) {
    if (!all_finite(m))
        throw ValidationError(what + ": non-finite entry");
}

void require_square(const Matrix &m, const std::string &what) {
    if (m.rows() != m.cols())
        throw NonSquareError(what + ": matrix is " + dim_string(m) + ", expected square");
}

double max_abs(const Matrix &m) {
    if (m.size() == 0)
        return 0.0;
    return m.cwiseAbs().maxCoeff();
}

Matrix identity(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

Matrix pauli_x() { return matrix_from_rows({{0, 1}, {1, 0}}); }

Matrix pauli_y() {
    return matrix_from_rows({{0, Complex(0, -1)}, {Complex(0, 1), 0}});
}

Matrix pauli_z() { return matrix_from_rows({{1, 0}, {0, -1}}); }

double hermitian_defect(const Matrix &m) {
    if (m.rows() != m.cols())
        return std::numeric_limits<double>::infinity();
    return max_abs(m - m.adjoint());
}

bool is_hermitian(const Matrix &m, double tol) {
    return hermitian_defect(m) <= tol * (1.0 + max_abs(m));
}

// --- HermitianOperator ------------------------------------------------------

HermitianOperator::HermitianOperator(Matrix m, double herm_tolerance)
    : mat_(std::move(m)), tol_(herm_tolerance) {
    require_square(mat_, "HermitianOperator");
    require_finite(mat_, "HermitianOperator");
    if (tol_ < 0.0)
        throw ValidationError("HermitianOperator: negative tolerance");
    if (!is_hermitian(mat_, tol_)) {
        std::ostringstream os;
        os << "HermitianOperator: defect " << hermitian_defect(mat_)
           << " exceeds tolerance " << tol_ * (1.0 + max_abs(mat_));
        throw NotHermitianError(os.str());
    }
}

// --- KetVector ---------------------------------------------------------------

KetVector::KetVector(Vector amplitudes, double tol) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0)
        throw ValidationError("KetVector: empty amplitude vector");
    for (Eigen::Index j = 0; j < amps_.size(); ++j)
        if (!std::isfinite(amps_[j].real()) || !std::isfinite(amps_[j].imag()))
            throw ValidationError("KetVector: non-finite amplitude");
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > tol) {
        std::ostringstream os;
        os << "KetVector: norm " << norm << " is not 1 within " << tol;
        throw ValidationError(os.str());
    }
}

KetVector KetVector::normalized(Vector amplitudes) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw ValidationError("KetVector::normalized: zero or non-finite vector");
    return KetVector(amplitudes / norm);
}

KetVector KetVector::conjugated() const { return KetVector(amps_.conjugate()); }

// --- DensityMatrix ------------------------------------------------------------

DensityMatrix::DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > kStructuralTol) {
        std::ostringstream os;
        os << "DensityMatrix: trace " << tr << " is not 1 within " << kStructuralTol;
        throw ValidationError(os.str());
    }
    const double lambda_min = min_eigenvalue(op_);
    if (lambda_min < -kStructuralTol) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << lambda_min;
        throw ValidationError(os.str());
    }
}

DensityMatrix::DensityMatrix(Matrix m) : DensityMatrix(HermitianOperator(std::move(m))) {}

DensityMatrix DensityMatrix::pure(const KetVector &psi) {
    return DensityMatrix(outer(psi, psi));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    if (dim <= 0)
        throw BadDimensionError("DensityMatrix::maximally_mixed: dim must be positive");
    return DensityMatrix(Matrix(identity(dim) / static_cast<double>(dim)));
}

// --- Projector -----------------------------------------------------------------

Projector::Projector(HermitianOperator op) : op_(std::move(op)) {
    const Matrix &p = op_.matrix();
    const double defect = max_abs(p * p - p);
    if (defect > kStructuralTol) {
        std::ostringstream os;
        os << "Projector: ||P^2 - P||_max = " << defect;
        throw ValidationError(os.str());
    }
}

Projector::Projector(Matrix m) : Projector(HermitianOperator(std::move(m))) {}

Projector Projector::onto(const KetVector &psi) { return Projector(outer(psi, psi)); }

// --- EffectOperator ---------------------------------------------------------------

EffectOperator::EffectOperator(HermitianOperator op) : op_(std::move(op)) {
    const EigenSystem eig = hermitian_eig(op_);
    const double lo = eig.values.minCoeff();
    const double hi = eig.values.maxCoeff();
    if (lo < -kStructuralTol || hi > 1.0 + kStructuralTol) {
        std::ostringstream os;
        os << "EffectOperator: spectrum [" << lo << ", " << hi << "] outside [0, 1]";
        throw ValidationError(os.str());
    }
}

EffectOperator::EffectOperator(Matrix m) : EffectOperator(HermitianOperator(std::move(m))) {}

// --- operations ---------------------------------------------------------------------

Matrix adjoint(const Matrix &m) { return m.adjoint(); }

Complex mat_trace(const Matrix &m) {
    require_square(m, "mat_trace");
    return m.trace();
}

Matrix matmul(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "matmul: " << dim_string(a) << " times " << dim_string(b);
        throw DimMismatchError(os.str());
    }
    return a * b;
}

Matrix jordan_product(const Matrix &a, const Matrix &b) {
    require_square(a, "jordan_product");
    require_square(b, "jordan_product");
    if (a.rows() != b.rows()) {
        std::ostringstream os;
        os << "jordan_product: " << dim_string(a) << " vs " << dim_string(b);
        throw DimMismatchError(os.str());
    }
    return 0.5 * (a * b + b * a);
}

HermitianOperator jordan_product(const HermitianOperator &a, const HermitianOperator &b) {
    return HermitianOperator(jordan_product(a.matrix(), b.matrix()));
}

Matrix tensor_product(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index ja = 0; ja < a.rows(); ++ja)
        for (Eigen::Index ka = 0; ka < a.cols(); ++ka)
            out.block(ja * b.rows(), ka * b.cols(), b.rows(), b.cols()) = a(ja, ka) * b;
    return out;
}

Matrix partial_trace(const Matrix &m, Eigen::Index dim_a, Eigen::Index dim_b, Subsystem keep) {
    require_square(m, "partial_trace");
    if (dim_a <= 0 || dim_b <= 0 || m.rows() != dim_a * dim_b) {
        std::ostringstream os;
        os << "partial_trace: matrix is " << dim_string(m) << ", expected "
           << dim_a * dim_b << "x" << dim_a * dim_b;
        throw DimMismatchError(os.str());
    }
    if (keep == Subsystem::B) {
        Matrix out = Matrix::Zero(dim_b, dim_b);
        for (Eigen::Index a = 0; a < dim_a; ++a)
            out += m.block(a * dim_b, a * dim_b, dim_b, dim_b);
        return out;
    }
    Matrix out = Matrix::Zero(dim_a, dim_a);
    for (Eigen::Index j = 0; j < dim_a; ++j)
        for (Eigen::Index k = 0; k < dim_a; ++k) {
            Complex sum = 0.0;
            for (Eigen::Index b = 0; b < dim_b; ++b)
                sum += m(j * dim_b + b, k * dim_b + b);
            out(j, k) = sum;
        }
    return out;
}

EigenSystem hermitian_eig(const HermitianOperator &h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    if (solver.info() != Eigen::Success)
        throw Error("hermitian_eig: eigensolver failed to converge");
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};
    // Phase convention: first amplitude that is clearly nonzero made real-positive.
    for (Eigen::Index k = 0; k < sys.vectors.cols(); ++k) {
        for (Eigen::Index j = 0; j < sys.vectors.rows(); ++j) {
            const Complex a = sys.vectors(j, k);
            if (std::abs(a) > 1e-12) {
                sys.vectors.col(k) *= std::conj(a) / std::abs(a);
                break;
            }
        }
    }
    return sys;
}

EigenSystem hermitian_eig(const Matrix &m, double tol) {
    return hermitian_eig(HermitianOperator(m, tol));
}

Matrix outer(const KetVector &u, const KetVector &v) {
    if (u.dim() != v.dim()) {
        std::ostringstream os;
        os << "outer: dims " << u.dim() << " vs " << v.dim();
        throw DimMismatchError(os.str());
    }
    return u.amplitudes() * v.amplitudes().adjoint();
}

double spectral_norm(const HermitianOperator &h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const HermitianOperator &h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Matrix sqrt_psd(const HermitianOperator &h) {
    const EigenSystem eig = hermitian_eig(h);
    if (eig.values.minCoeff() < -kStructuralTol) {
        std::ostringstream os;
        os << "sqrt_psd: operator has eigenvalue " << eig.values.minCoeff();
        throw ValidationError(os.str());
    }
    RealVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

std::vector<Matrix> gell_mann_matrices(Eigen::Index dim) {
    if (dim <= 0)
        throw BadDimensionError("gell_mann_matrices: dim must be positive");
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(dim * dim - 1));
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = j + 1; k < dim; ++k) {
            Matrix sym = Matrix::Zero(dim, dim);
            sym(j, k) = 1.0;
            sym(k, j) = 1.0;
            ops.push_back(sym);
            Matrix asym = Matrix::Zero(dim, dim);
            asym(j, k) = Complex(0, -1);
            asym(k, j) = Complex(0, 1);
            ops.push_back(asym);
        }
    for (Eigen::Index l = 1; l < dim; ++l) {
        Matrix diag = Matrix::Zero(dim, dim);
        const double scale = std::sqrt(2.0 / (static_cast<double>(l) * (l + 1)));
        for (Eigen::Index j = 0; j < l; ++j)
            diag(j, j) = scale;
        diag(l, l) = -scale * static_cast<double>(l);
        ops.push_back(diag);
    }
    return ops;
}

std::vector<std::string> gell_mann_labels(Eigen::Index dim) {
    if (dim == 2)
        return {"X", "Y", "Z"};
    std::vector<std::string> labels;
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = j + 1; k < dim; ++k) {
            std::ostringstream s1, s2;
            s1 << "sym(" << j << "," << k << ")";
            s2 << "asym(" << j << "," << k << ")";
            labels.push_back(s1.str());
            labels.push_back(s2.str());
        }
    for (Eigen::Index l = 1; l < dim; ++l) {
        std::ostringstream s;
        s << "diag(" << l << ")";
        labels.push_back(s.str());
    }
    return labels;
}

Matrix orthonormal_basis_containing(const KetVector &first) {
    const Eigen::Index d = first.dim();
    Matrix basis(d, d);
    basis.col(0) = first.amplitudes();
    Eigen::Index filled = 1;
    for (Eigen::Index e = 0; e < d && filled < d; ++e) {
        Vector v = Vector::Zero(d);
        v[e] = 1.0;
        for (Eigen::Index k = 0; k < filled; ++k)
            v -= basis.col(k) * (basis.col(k).adjoint() * v)(0, 0);
        const double norm = v.norm();
        if (norm > 1e-8) {
            basis.col(filled++) = v / norm;
        }
    }
    if (filled != d)
        throw Error("orthonormal_basis_containing: completion failed");
    return basis;
}

} // namespace weakstat
