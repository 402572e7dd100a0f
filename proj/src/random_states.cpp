#include "weakstat/random_states.hpp"

#include <cmath>
#include <numbers>

namespace weakstat {

double StateSampler::normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - rng_.next_unit();
    const double u2 = rng_.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex StateSampler::complex_normal() {
    const double u1 = 1.0 - rng_.next_unit();
    const double u2 = rng_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
}

KetVector StateSampler::random_ket(Eigen::Index dim) {
    Vector v(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        v[j] = complex_normal();
    return KetVector::normalized(std::move(v));
}

DensityMatrix StateSampler::random_density(Eigen::Index dim) {
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = 0; k < dim; ++k)
            g(j, k) = complex_normal();
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint().eval()); // scrub rounding asymmetry
    return DensityMatrix(rho);
}

Matrix StateSampler::random_unitary(Eigen::Index dim) {
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = 0; k < dim; ++k)
            g(j, k) = complex_normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Complex d = r(k, k);
        if (std::abs(d) > 0.0)
            q.col(k) *= d / std::abs(d);
    }
    return q;
}

std::vector<Projector> StateSampler::random_rank1_pvm(Eigen::Index dim) {
    const Matrix u = random_unitary(dim);
    std::vector<Projector> pvm;
    pvm.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Vector col = u.col(k);
        pvm.emplace_back(Matrix(col * col.adjoint()));
    }
    return pvm;
}

Matrix StateSampler::random_hermitian(Eigen::Index dim, double scale) {
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index k = 0; k < dim; ++k)
            g(j, k) = complex_normal();
    return scale * 0.5 * (g + g.adjoint().eval());
}

EffectOperator StateSampler::random_effect(Eigen::Index dim) {
    const HermitianOperator h(random_hermitian(dim));
    const EigenSystem eig = hermitian_eig(h);
    const double lo = eig.values.minCoeff();
    const double hi = eig.values.maxCoeff();
    if (hi - lo < 1e-12)
        return EffectOperator(Matrix(0.5 * identity(dim)));
    return EffectOperator(Matrix((h.matrix() - lo * identity(dim)) / (hi - lo)));
}

} // namespace weakstat
