#pragma once

#include <string>
#include <vector>

#include "weakstat/operator_core.hpp"

namespace weakstat {

/// Probability below which a post-selected outcome is treated as impossible
/// and the conditional state is refused instead of dividing by ~0.
inline constexpr double kZeroProbabilityCutoff = 1e-12;

// ---------------------------------------------------------------------------
// Weak POVM: effects E_m = w_m (1 + eps S_m)
// ---------------------------------------------------------------------------

struct WeakOutcome {
    std::string label;       // e.g. "+X", "-diag(1)"
    double weight;           // w_m in (0, 1]
    HermitianOperator probe; // S_m with the sign folded in
    std::size_t pair_index;  // which tomography-basis operator this probes
    int sign;                // +1 or -1
};

/// Complete set of weak effects. Construction checks the strength condition
/// ||eps S_m|| <= 1 for every outcome and completeness sum_m E_m = 1.
class WeakPOVM {
  public:
    WeakPOVM(Eigen::Index dim, double strength, std::vector<WeakOutcome> outcomes);

    Eigen::Index dim() const { return dim_; }
    double strength() const { return strength_; }
    const std::vector<WeakOutcome> &outcomes() const { return outcomes_; }
    std::size_t size() const { return outcomes_.size(); }

    /// The effect operator w_m (1 + eps S_m) for outcome m.
    EffectOperator effect(std::size_t m) const;
    Matrix effect_matrix(std::size_t m) const;

  private:
    Eigen::Index dim_;
    double strength_;
    std::vector<WeakOutcome> outcomes_;
};

// ---------------------------------------------------------------------------
// Tomography basis: identity plus d^2 - 1 traceless Hermitian operators
// ---------------------------------------------------------------------------

class TomographyBasis {
  public:
    /// Identity plus the given traceless operators. Throws SingularGramError
    /// when the Hilbert-Schmidt Gram matrix of the traceless set is singular.
    TomographyBasis(Eigen::Index dim, std::vector<std::string> labels,
                    std::vector<HermitianOperator> traceless);

    /// The standard choice: generalized Gell-Mann operators.
    static TomographyBasis gell_mann(Eigen::Index dim);

    Eigen::Index dim() const { return dim_; }
    /// Number of traceless operators (d^2 - 1 for a complete basis).
    std::size_t size() const { return traceless_.size(); }
    const std::vector<HermitianOperator> &traceless() const { return traceless_; }
    const std::vector<std::string> &labels() const { return labels_; }
    /// Hilbert-Schmidt inner products Tr{S_j S_k} of the traceless set.
    const RealMatrix &gram() const { return gram_; }

  private:
    Eigen::Index dim_;
    std::vector<std::string> labels_;
    std::vector<HermitianOperator> traceless_;
    RealMatrix gram_;
};

// ---------------------------------------------------------------------------
// Conditional (post-selected) states
// ---------------------------------------------------------------------------

/// Unit-trace Hermitian operator describing the statistics between
/// preparation and a final outcome. Eigenvalues may be negative; that
/// negativity is physical content, so it is never clipped.
class ConditionalState {
  public:
    ConditionalState(HermitianOperator op, double preparation_prob);

    const HermitianOperator &op() const { return op_; }
    const Matrix &matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }
    /// p(f|i): probability of the final outcome this state is conditioned on.
    double preparation_prob() const { return preparation_prob_; }

  private:
    HermitianOperator op_;
    double preparation_prob_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Pair every traceless basis operator S with effects w(1 +/- eps S) at equal
/// weights w = 1 / (2 * basis size), which makes the set complete by
/// construction. Throws StrengthTooLargeError if ||eps S|| > 1 for any probe.
WeakPOVM build_weak_povm(const TomographyBasis &basis, double strength);

/// p(m) = Tr{rho E_m} for every outcome.
std::vector<double> outcome_probabilities(const DensityMatrix &rho, const WeakPOVM &povm);

struct ProbeExpectation {
    std::string label;
    double value;
};

/// Invert p(m) = w_m (1 + eps <S_m>) per probe, averaging the +/- pair
/// estimates.
std::vector<ProbeExpectation> reconstruct_expectations(const std::vector<double> &probs,
                                                       const WeakPOVM &povm);

/// Solve for rho = 1/d + sum_k c_k S_k from the expectation values. Returns a
/// Hermitian operator (not a DensityMatrix): reconstructed post-selected
/// states may be non-positive.
HermitianOperator reconstruct_density(const std::vector<ProbeExpectation> &expectations,
                                      const TomographyBasis &basis);

/// p(m, f | i) = Tr{E_m (rho Pi_f + Pi_f rho) / 2}.
double joint_outcome_probability(const DensityMatrix &rho, const EffectOperator &effect,
                                 const Projector &final);

/// R_if = (rho Pi_f + Pi_f rho) / (2 p(f|i)). Throws
/// ZeroProbabilityOutcomeError when p(f|i) <= cutoff.
ConditionalState conditional_state(const DensityMatrix &rho, const Projector &final,
                                   double cutoff = kZeroProbabilityCutoff);

/// Check sum_f Pi_f = 1 and mutual orthogonality; throws IncompletePvmError.
void require_complete_pvm(const std::vector<Projector> &pvm, Eigen::Index dim);

struct DecompositionTerm {
    std::size_t outcome; // index into the PVM
    ConditionalState state;
};

/// Split rho into the mixture rho = sum_f p(f|i) R_if over a complete PVM.
/// Outcomes with p(f|i) <= cutoff are omitted.
std::vector<DecompositionTerm> decompose(const DensityMatrix &rho,
                                         const std::vector<Projector> &pvm,
                                         double cutoff = kZeroProbabilityCutoff);

/// p(g|i,f) = Tr{R_if Phi_g}. May be negative or exceed 1.
double conditional_probability(const ConditionalState &cond, const EffectOperator &effect);

/// p(f,g|i) = Tr{rho (Pi_f Phi_g + Phi_g Pi_f) / 2}. Symmetric in the two
/// measurements; may be negative.
double joint_probability(const DensityMatrix &rho, const Projector &final,
                         const EffectOperator &effect);

/// Same formulas for a general Hermitian query operator. Needed for compound
/// outcomes whose operator is itself a symmetrized product of projectors
/// (e.g. the Bell operators (1 +/- X +/- Y)/4, which have a negative
/// eigenvalue and are not effects).
double conditional_quasi_probability(const ConditionalState &cond,
                                     const HermitianOperator &query);
double joint_quasi_probability(const DensityMatrix &rho, const Projector &final,
                               const HermitianOperator &query);

} // namespace weakstat
