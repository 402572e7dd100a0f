#include "weakstat/weak_tomography.hpp"

#include <cmath>
#include <sstream>

namespace weakstat {

// --- WeakPOVM ----------------------------------------------------------------

WeakPOVM::WeakPOVM(Eigen::Index dim, double strength, std::vector<WeakOutcome> outcomes)
    : dim_(dim), strength_(strength), outcomes_(std::move(outcomes)) {
    if (dim_ <= 0)
        throw BadDimensionError("WeakPOVM: dim must be positive");
    if (!(strength_ > 0.0) || strength_ > 1.0)
        throw ValidationError("WeakPOVM: strength must lie in (0, 1]");
    if (outcomes_.empty())
        throw ValidationError("WeakPOVM: no outcomes");
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (const auto &out : outcomes_) {
        if (out.probe.dim() != dim_)
            throw DimMismatchError("WeakPOVM: probe dimension mismatch");
        if (!(out.weight > 0.0) || out.weight > 1.0)
            throw ValidationError("WeakPOVM: weight must lie in (0, 1]");
        if (strength_ * spectral_norm(out.probe) > 1.0 + kStructuralTol) {
            std::ostringstream os;
            os << "WeakPOVM: ||eps S|| = " << strength_ * spectral_norm(out.probe)
               << " > 1 for outcome " << out.label;
            throw StrengthTooLargeError(os.str());
        }
        sum += out.weight * (identity(dim_) + strength_ * out.probe.matrix());
    }
    if (max_abs(sum - identity(dim_)) > kStructuralTol)
        throw ValidationError("WeakPOVM: effects do not sum to the identity");
}

Matrix WeakPOVM::effect_matrix(std::size_t m) const {
    const WeakOutcome &out = outcomes_.at(m);
    return out.weight * (identity(dim_) + strength_ * out.probe.matrix());
}

EffectOperator WeakPOVM::effect(std::size_t m) const {
    return EffectOperator(effect_matrix(m));
}

// --- TomographyBasis ------------------------------------------------------------

TomographyBasis::TomographyBasis(Eigen::Index dim, std::vector<std::string> labels,
                                 std::vector<HermitianOperator> traceless)
    : dim_(dim), labels_(std::move(labels)), traceless_(std::move(traceless)) {
    if (dim_ <= 0)
        throw BadDimensionError("TomographyBasis: dim must be positive");
    if (labels_.size() != traceless_.size())
        throw ValidationError("TomographyBasis: labels/operators length mismatch");
    if (traceless_.empty())
        throw ValidationError("TomographyBasis: no traceless operators");
    const auto n = static_cast<Eigen::Index>(traceless_.size());
    for (const auto &op : traceless_) {
        if (op.dim() != dim_)
            throw DimMismatchError("TomographyBasis: operator dimension mismatch");
        if (std::abs(op.matrix().trace()) > kStructuralTol * dim_)
            throw ValidationError("TomographyBasis: operator is not traceless");
    }
    gram_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            gram_(j, k) = (traceless_[j].matrix() * traceless_[k].matrix()).trace().real();
    const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram_);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > hi * 1e-12)) {
        std::ostringstream os;
        os << "TomographyBasis: Gram matrix is singular (eigenvalues in [" << lo << ", "
           << hi << "])";
        throw SingularGramError(os.str());
    }
}

TomographyBasis TomographyBasis::gell_mann(Eigen::Index dim) {
    std::vector<HermitianOperator> ops;
    for (auto &m : gell_mann_matrices(dim))
        ops.emplace_back(std::move(m));
    return TomographyBasis(dim, gell_mann_labels(dim), std::move(ops));
}

// --- ConditionalState -------------------------------------------------------------

ConditionalState::ConditionalState(HermitianOperator op, double preparation_prob)
    : op_(std::move(op)), preparation_prob_(preparation_prob) {
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > kStructuralTol) {
        std::ostringstream os;
        os << "ConditionalState: trace " << tr << " is not 1";
        throw ValidationError(os.str());
    }
    if (!(preparation_prob_ >= 0.0) || preparation_prob_ > 1.0 + kStructuralTol)
        throw ValidationError("ConditionalState: preparation probability outside [0, 1]");
}

// --- operations ----------------------------------------------------------------------

WeakPOVM build_weak_povm(const TomographyBasis &basis, double strength) {
    if (!(strength > 0.0))
        throw ValidationError("build_weak_povm: strength must be positive");
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double norm = spectral_norm(basis.traceless()[k]);
        if (strength * norm > 1.0 + kStructuralTol) {
            std::ostringstream os;
            os << "build_weak_povm: ||eps S|| = " << strength * norm << " > 1 for probe "
               << basis.labels()[k];
            throw StrengthTooLargeError(os.str());
        }
    }
    const double weight = 1.0 / (2.0 * static_cast<double>(basis.size()));
    std::vector<WeakOutcome> outcomes;
    outcomes.reserve(2 * basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto &s = basis.traceless()[k];
        const auto &label = basis.labels()[k];
        outcomes.push_back({"+" + label, weight, s, k, +1});
        outcomes.push_back({"-" + label, weight, HermitianOperator(Matrix(-s.matrix())), k, -1});
    }
    return WeakPOVM(basis.dim(), strength, std::move(outcomes));
}

std::vector<double> outcome_probabilities(const DensityMatrix &rho, const WeakPOVM &povm) {
    if (rho.dim() != povm.dim())
        throw DimMismatchError("outcome_probabilities: state/POVM dimension mismatch");
    std::vector<double> probs;
    probs.reserve(povm.size());
    for (const auto &out : povm.outcomes()) {
        const double expectation = (rho.matrix() * out.probe.matrix()).trace().real();
        probs.push_back(out.weight * (1.0 + povm.strength() * expectation));
    }
    return probs;
}

std::vector<ProbeExpectation> reconstruct_expectations(const std::vector<double> &probs,
                                                       const WeakPOVM &povm) {
    if (probs.size() != povm.size())
        throw DimMismatchError("reconstruct_expectations: probability count mismatch");
    std::size_t pairs = 0;
    for (const auto &out : povm.outcomes())
        pairs = std::max(pairs, out.pair_index + 1);
    std::vector<double> sums(pairs, 0.0);
    std::vector<int> hits(pairs, 0);
    std::vector<std::string> labels(pairs);
    const double eps = povm.strength();
    for (std::size_t m = 0; m < povm.size(); ++m) {
        const WeakOutcome &out = povm.outcomes()[m];
        // (p - w) / (w eps) estimates <S_m>; flip the sign back for -S probes.
        const double estimate = out.sign * (probs[m] - out.weight) / (out.weight * eps);
        sums[out.pair_index] += estimate;
        hits[out.pair_index] += 1;
        // strip the +/- prefix produced by build_weak_povm
        const std::string &l = out.label;
        labels[out.pair_index] = (l.size() > 1 && (l[0] == '+' || l[0] == '-')) ? l.substr(1) : l;
    }
    std::vector<ProbeExpectation> result;
    result.reserve(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
        if (hits[k] == 0)
            throw ValidationError("reconstruct_expectations: probe pair with no outcomes");
        result.push_back({labels[k], sums[k] / hits[k]});
    }
    return result;
}

HermitianOperator reconstruct_density(const std::vector<ProbeExpectation> &expectations,
                                      const TomographyBasis &basis) {
    if (expectations.size() != basis.size())
        throw ValidationError("reconstruct_density: expectations do not cover the basis");
    for (std::size_t k = 0; k < basis.size(); ++k)
        if (expectations[k].label != basis.labels()[k])
            throw ValidationError("reconstruct_density: expectation labels do not match basis order");
    const auto n = static_cast<Eigen::Index>(basis.size());
    RealVector e(n);
    for (Eigen::Index k = 0; k < n; ++k)
        e[k] = expectations[static_cast<std::size_t>(k)].value;
    // <S_k> = sum_j G_kj c_j with G the Hilbert-Schmidt Gram matrix.
    const Eigen::LDLT<RealMatrix> solver(basis.gram());
    if (solver.info() != Eigen::Success)
        throw SingularGramError("reconstruct_density: Gram solve failed");
    const RealVector c = solver.solve(e);
    Matrix rho = identity(basis.dim()) / static_cast<double>(basis.dim());
    for (Eigen::Index k = 0; k < n; ++k)
        rho += c[k] * basis.traceless()[static_cast<std::size_t>(k)].matrix();
    return HermitianOperator(rho);
}

double joint_outcome_probability(const DensityMatrix &rho, const EffectOperator &effect,
                                 const Projector &final) {
    if (rho.dim() != effect.dim() || rho.dim() != final.dim())
        throw DimMismatchError("joint_outcome_probability: dimension mismatch");
    const Matrix sym = jordan_product(rho.matrix(), final.matrix());
    return (effect.matrix() * sym).trace().real();
}

ConditionalState conditional_state(const DensityMatrix &rho, const Projector &final,
                                   double cutoff) {
    if (rho.dim() != final.dim())
        throw DimMismatchError("conditional_state: dimension mismatch");
    const double prob = (rho.matrix() * final.matrix()).trace().real();
    if (prob <= cutoff) {
        std::ostringstream os;
        os << "conditional_state: outcome probability " << prob << " below cutoff " << cutoff;
        throw ZeroProbabilityOutcomeError(os.str());
    }
    const Matrix r = jordan_product(rho.matrix(), final.matrix()) / prob;
    return ConditionalState(HermitianOperator(r), prob);
}

void require_complete_pvm(const std::vector<Projector> &pvm, Eigen::Index dim) {
    if (pvm.empty())
        throw IncompletePvmError("PVM is empty");
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto &p : pvm) {
        if (p.dim() != dim)
            throw DimMismatchError("PVM projector dimension mismatch");
        sum += p.matrix();
    }
    if (max_abs(sum - identity(dim)) > kStructuralTol) {
        std::ostringstream os;
        os << "PVM incomplete: ||sum - 1||_max = " << max_abs(sum - identity(dim));
        throw IncompletePvmError(os.str());
    }
    for (std::size_t j = 0; j < pvm.size(); ++j)
        for (std::size_t k = j + 1; k < pvm.size(); ++k)
            if (max_abs(pvm[j].matrix() * pvm[k].matrix()) > kStructuralTol)
                throw IncompletePvmError("PVM projectors are not mutually orthogonal");
}

std::vector<DecompositionTerm> decompose(const DensityMatrix &rho,
                                         const std::vector<Projector> &pvm, double cutoff) {
    require_complete_pvm(pvm, rho.dim());
    std::vector<DecompositionTerm> terms;
    for (std::size_t f = 0; f < pvm.size(); ++f) {
        const double prob = (rho.matrix() * pvm[f].matrix()).trace().real();
        if (prob <= cutoff)
            continue;
        terms.push_back({f, conditional_state(rho, pvm[f], cutoff)});
    }
    return terms;
}

double conditional_probability(const ConditionalState &cond, const EffectOperator &effect) {
    if (cond.dim() != effect.dim())
        throw DimMismatchError("conditional_probability: dimension mismatch");
    return (cond.matrix() * effect.matrix()).trace().real();
}

double joint_probability(const DensityMatrix &rho, const Projector &final,
                         const EffectOperator &effect) {
    if (rho.dim() != final.dim() || rho.dim() != effect.dim())
        throw DimMismatchError("joint_probability: dimension mismatch");
    const Matrix sym = jordan_product(final.matrix(), effect.matrix());
    return (rho.matrix() * sym).trace().real();
}

double conditional_quasi_probability(const ConditionalState &cond,
                                     const HermitianOperator &query) {
    if (cond.dim() != query.dim())
        throw DimMismatchError("conditional_quasi_probability: dimension mismatch");
    return (cond.matrix() * query.matrix()).trace().real();
}

double joint_quasi_probability(const DensityMatrix &rho, const Projector &final,
                               const HermitianOperator &query) {
    if (rho.dim() != final.dim() || rho.dim() != query.dim())
        throw DimMismatchError("joint_quasi_probability: dimension mismatch");
    const Matrix sym = jordan_product(final.matrix(), query.matrix());
    return (rho.matrix() * sym).trace().real();
}

} // namespace weakstat
