#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakstat/scenarios.hpp"
#include "weakstat/weak_tomography.hpp"

namespace weakstat {

struct SampleConfig {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    /// Parallelism hint only: results are a pure function of (shots, seed).
    unsigned shards = 1;
};

/// Histogram of sampled outcomes. Weak-only tables have final_outcomes = 0
/// and one cell per weak outcome; sequential tables are row-major over
/// (weak outcome m, final outcome f).
struct CountTable {
    std::vector<std::string> weak_labels;
    std::vector<std::string> final_labels; // empty for weak-only tables
    std::vector<std::uint64_t> counts;
    std::uint64_t shots = 0;

    std::size_t weak_outcomes() const { return weak_labels.size(); }
    std::size_t final_outcomes() const { return final_labels.size(); }
    std::uint64_t at(std::size_t m, std::size_t f) const {
        return counts.at(m * final_labels.size() + f);
    }
    /// Flattened cell labels ("+X" or "+X|path-1").
    std::vector<std::string> labels() const;
};

struct Estimate {
    double mean = 0.0;
    double stderr = 0.0;
};

struct EstimateReport {
    std::vector<std::pair<std::string, Estimate>> estimates;
    std::uint64_t shots_used = 0;

    const Estimate *find(const std::string &label) const;
};

/// Draw i.i.d. weak-measurement outcomes from p(m) = Tr{rho E_m}.
CountTable sample_weak(const DensityMatrix &rho, const WeakPOVM &povm,
                       const SampleConfig &cfg);

/// Invert the sampled frequencies into probe expectation estimates with
/// propagated binomial standard errors.
EstimateReport estimate_expectations(const CountTable &counts, const WeakPOVM &povm);

/// Weak measurement followed by a projective measurement on the disturbed
/// state. The weak outcome acts through the minimal-disturbance Kraus
/// operator M_m = sqrt(E_m), so the joint distribution reproduces the
/// symmetrized joint probability up to O(eps^2) back-action terms.
CountTable sample_sequential(const DensityMatrix &rho, const WeakPOVM &povm,
                             const std::vector<NamedProjector> &pvm,
                             const SampleConfig &cfg);

/// Exact per-shot distribution of sample_sequential: entry (m, f) is
/// Tr{Pi_f M_m rho M_m}. Useful as the model-bias oracle.
RealMatrix sequential_joint_probabilities(const DensityMatrix &rho, const WeakPOVM &povm,
                                          const std::vector<NamedProjector> &pvm);

/// Exact symmetrized joint probabilities Tr{E_m (rho Pi_f + Pi_f rho)/2} in
/// the same (m, f) layout.
RealMatrix symmetrized_joint_probabilities(const DensityMatrix &rho, const WeakPOVM &povm,
                                           const std::vector<NamedProjector> &pvm);

/// Reconstructed conditional state from post-selected counts.
struct ConditionalStateEstimate {
    ConditionalState state;
    /// Probe expectation estimates within the post-selected sample.
    EstimateReport expectations;
    /// Propagated per-entry magnitude standard error of the matrix.
    RealMatrix entry_stderr;
    std::uint64_t postselected_shots = 0;
};

inline constexpr std::uint64_t kMinShotsPerProbePair = 100;

/// Post-select a sequential count table on one final outcome, invert the
/// weak statistics and rebuild the conditional state R_if. Throws
/// InsufficientPostSelectionError when any probe pair has fewer than
/// min_pair_shots post-selected counts.
ConditionalStateEstimate estimate_conditional_state(
    const CountTable &counts, const WeakPOVM &povm, const TomographyBasis &basis,
    const std::string &outcome_f, std::uint64_t min_pair_shots = kMinShotsPerProbePair);

} // namespace weakstat
