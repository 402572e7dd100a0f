#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weakstat/weak_tomography.hpp"

namespace weakstat {

struct NamedProjector {
    std::string label;
    Projector projector;
};

/// One complete projective measurement setting.
struct Pvm {
    std::string label;
    std::vector<NamedProjector> outcomes;
};

struct NamedProbe {
    std::string label;
    HermitianOperator op;
};

enum class QueryKind { Joint, Conditional };

struct Query {
    std::string label;
    QueryKind kind;
    std::string final_label; // a PVM outcome
    std::string probe_label;
};

/// Declarative description of one experiment: initial state, one or more
/// final measurement settings, named query operators, and the probabilities
/// to evaluate. All operators live on the composite dim_a * dim_b space.
struct Scenario {
    std::string name;
    Eigen::Index dim_a = 1;
    Eigen::Index dim_b = 1;
    DensityMatrix initial;
    std::vector<Pvm> pvms;
    std::vector<NamedProbe> probes;
    std::vector<Query> queries;

    Eigen::Index dim() const { return dim_a * dim_b; }
};

/// Check dimensions, PVM completeness/orthogonality, label uniqueness and
/// query references. Throws on violation.
void validate_scenario(const Scenario &scenario);

struct ScenarioReport {
    std::string name;
    /// query label -> exact (quasi)probability
    std::vector<std::pair<std::string, double>> exact_values;
    /// outcome label -> conditional state R_if (plus B marginals on
    /// composite scenarios, keyed "marginal_B(<outcome>)")
    std::vector<std::pair<std::string, ConditionalState>> conditional_states;
    /// label -> ascending eigenvalues
    std::vector<std::pair<std::string, std::vector<double>>> eigen_summaries;
    /// e.g. the CHSH value
    std::optional<double> aggregate;

    const double *find_value(const std::string &label) const;
    const ConditionalState *find_state(const std::string &label) const;
};

/// Evaluate every query and conditional state of a scenario exactly.
ScenarioReport run_exact(const Scenario &scenario);

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

/// Two-slit superposition with a which-path measurement. The coherence probe
/// shows up at full strength in both path branches.
Scenario double_slit_scenario();

/// Maximally entangled pair of d-level systems with a final projection onto
/// |f> in A; post-selection leaves B in the conjugate pure state.
Scenario entangled_scenario(Eigen::Index d, const KetVector &f);

/// Two qubits, maximally entangled. A is measured so that B collapses onto
/// eigenstates of the diagonal spin components S+ = (X+Y)/sqrt(2) or
/// S- = (X-Y)/sqrt(2); the queries are the four compound spin operators
/// (1 +/- X +/- Y)/4.
Scenario bell_chsh_scenario();

/// The four single-qubit operators (1 +/- X +/- Y)/4 with their labels.
std::vector<std::pair<std::string, Matrix>> bell_pi_operators();

/// Joint quasi-probability table for the Bell scenario: the 16 atoms
/// p(setting outcome, X, Y) plus the four compound events
/// (X+Y)S+ = +/-2 and (X-Y)S- = +/-2. Aggregate = CHSH value.
ScenarioReport bell_joint_table(const Scenario &scenario);

/// Sum of value * probability over the four compound events; 2*sqrt(2) for
/// the maximally entangled state.
double chsh_value(const ScenarioReport &report);

// Compound event labels used by bell_joint_table and chsh_value.
inline constexpr const char *kBellEventLabels[4] = {
    "(X+Y)S+=+2",
    "(X-Y)S-=+2",
    "(X+Y)S+=-2",
    "(X-Y)S-=-2",
};
inline constexpr double kBellEventValues[4] = {+2.0, +2.0, -2.0, -2.0};

} // namespace weakstat
