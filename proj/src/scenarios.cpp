#include "weakstat/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace weakstat {

namespace {

const NamedProjector *find_outcome(const Scenario &scenario, const std::string &label) {
    for (const auto &pvm : scenario.pvms)
        for (const auto &outcome : pvm.outcomes)
            if (outcome.label == label)
                return &outcome;
    return nullptr;
}

const NamedProbe *find_probe(const Scenario &scenario, const std::string &label) {
    for (const auto &probe : scenario.probes)
        if (probe.label == label)
            return &probe;
    return nullptr;
}

std::vector<double> ascending_eigenvalues(const HermitianOperator &op) {
    const EigenSystem eig = hermitian_eig(op);
    return {eig.values.data(), eig.values.data() + eig.values.size()};
}

} // namespace

void validate_scenario(const Scenario &scenario) {
    if (scenario.dim_a <= 0 || scenario.dim_b <= 0)
        throw BadDimensionError("scenario: dimensions must be positive");
    const Eigen::Index d = scenario.dim();
    if (scenario.initial.dim() != d)
        throw DimMismatchError("scenario: initial state dimension mismatch");
    if (scenario.pvms.empty())
        throw IncompletePvmError("scenario: no final measurement declared");
    std::set<std::string> outcome_labels;
    for (const auto &pvm : scenario.pvms) {
        std::vector<Projector> projectors;
        projectors.reserve(pvm.outcomes.size());
        for (const auto &outcome : pvm.outcomes) {
            projectors.push_back(outcome.projector);
            if (!outcome_labels.insert(outcome.label).second)
                throw ValidationError("scenario: duplicate outcome label " + outcome.label);
        }
        require_complete_pvm(projectors, d);
    }
    std::set<std::string> probe_labels;
    for (const auto &probe : scenario.probes) {
        if (probe.op.dim() != d)
            throw DimMismatchError("scenario: probe dimension mismatch for " + probe.label);
        if (!probe_labels.insert(probe.label).second)
            throw ValidationError("scenario: duplicate probe label " + probe.label);
    }
    for (const auto &query : scenario.queries) {
        if (!find_outcome(scenario, query.final_label))
            throw ValidationError("scenario: query " + query.label +
                                  " references unknown outcome " + query.final_label);
        if (!find_probe(scenario, query.probe_label))
            throw ValidationError("scenario: query " + query.label +
                                  " references unknown probe " + query.probe_label);
    }
}

const double *ScenarioReport::find_value(const std::string &label) const {
    for (const auto &[key, value] : exact_values)
        if (key == label)
            return &value;
    return nullptr;
}

const ConditionalState *ScenarioReport::find_state(const std::string &label) const {
    for (const auto &[key, state] : conditional_states)
        if (key == label)
            return &state;
    return nullptr;
}

ScenarioReport run_exact(const Scenario &scenario) {
    validate_scenario(scenario);
    ScenarioReport report;
    report.name = scenario.name;

    for (const auto &pvm : scenario.pvms) {
        for (const auto &outcome : pvm.outcomes) {
            const double prob =
                (scenario.initial.matrix() * outcome.projector.matrix()).trace().real();
            if (prob <= kZeroProbabilityCutoff)
                continue;
            ConditionalState state = conditional_state(scenario.initial, outcome.projector);
            report.eigen_summaries.emplace_back(outcome.label,
                                                ascending_eigenvalues(state.op()));
            if (scenario.dim_b > 1) {
                const Matrix marginal = partial_trace(state.matrix(), scenario.dim_a,
                                                      scenario.dim_b, Subsystem::B);
                ConditionalState marginal_state(HermitianOperator(marginal), prob);
                const std::string label = "marginal_B(" + outcome.label + ")";
                report.eigen_summaries.emplace_back(label,
                                                    ascending_eigenvalues(marginal_state.op()));
                report.conditional_states.emplace_back(label, std::move(marginal_state));
            }
            report.conditional_states.emplace_back(outcome.label, std::move(state));
        }
    }

    for (const auto &query : scenario.queries) {
        const NamedProjector *outcome = find_outcome(scenario, query.final_label);
        const NamedProbe *probe = find_probe(scenario, query.probe_label);
        double value = 0.0;
        if (query.kind == QueryKind::Joint) {
            value = joint_quasi_probability(scenario.initial, outcome->projector, probe->op);
        } else {
            const ConditionalState state =
                conditional_state(scenario.initial, outcome->projector);
            value = conditional_quasi_probability(state, probe->op);
        }
        report.exact_values.emplace_back(query.label, value);
    }
    return report;
}

// --- double slit -------------------------------------------------------------

Scenario double_slit_scenario() {
    const Matrix rho = matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}});
    const Matrix path1 = matrix_from_rows({{1, 0}, {0, 0}});
    const Matrix path2 = matrix_from_rows({{0, 0}, {0, 1}});
    const Matrix coherence = matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}});
    const Matrix anti = matrix_from_rows({{0.5, -0.5}, {-0.5, 0.5}});

    Scenario scenario{
        "double-slit",
        2,
        1,
        DensityMatrix(rho),
        {Pvm{"which-path",
             {{"path-1", Projector(path1)}, {"path-2", Projector(path2)}}}},
        {{"coherence", HermitianOperator(coherence)},
         {"anti-coherence", HermitianOperator(anti)}},
        {},
    };
    for (const char *path : {"path-1", "path-2"})
        for (const char *probe : {"coherence", "anti-coherence"}) {
            std::ostringstream label;
            label << "p(" << probe << "|" << path << ")";
            scenario.queries.push_back({label.str(), QueryKind::Conditional, path, probe});
        }
    validate_scenario(scenario);
    return scenario;
}

// --- entangled qudits -----------------------------------------------------------

namespace {

KetVector maximally_entangled_ket(Eigen::Index d) {
    Vector amps = Vector::Zero(d * d);
    for (Eigen::Index k = 0; k < d; ++k)
        amps[k * d + k] = 1.0;
    return KetVector::normalized(std::move(amps));
}

} // namespace

Scenario entangled_scenario(Eigen::Index d, const KetVector &f) {
    if (d < 2 || d > 8)
        throw BadDimensionError("entangled_scenario: d must lie in [2, 8]");
    if (f.dim() != d)
        throw DimMismatchError("entangled_scenario: |f> dimension mismatch");

    const Matrix basis = orthonormal_basis_containing(f);
    Scenario scenario{
        "entangled",
        d,
        d,
        DensityMatrix::pure(maximally_entangled_ket(d)),
        {Pvm{"A-basis", {}}},
        {},
        {},
    };
    for (Eigen::Index k = 0; k < d; ++k) {
        const Vector col = basis.col(k);
        const Matrix proj_a = col * col.adjoint();
        std::string label = (k == 0) ? "A=f" : ("A=perp" + std::to_string(k));
        scenario.pvms[0].outcomes.push_back(
            {std::move(label), Projector(tensor_product(proj_a, identity(d)))});
    }
    validate_scenario(scenario);
    return scenario;
}

// --- Bell / CHSH ------------------------------------------------------------------

std::vector<std::pair<std::string, Matrix>> bell_pi_operators() {
    std::vector<std::pair<std::string, Matrix>> ops;
    for (const int x : {+1, -1})
        for (const int y : {+1, -1}) {
            std::ostringstream label;
            label << "P(X=" << (x > 0 ? "+1" : "-1") << ",Y=" << (y > 0 ? "+1" : "-1") << ")";
            const Matrix pi =
                0.25 * (identity(2) + static_cast<double>(x) * pauli_x() +
                        static_cast<double>(y) * pauli_y());
            ops.emplace_back(label.str(), pi);
        }
    return ops;
}

namespace {

// A-side projectors of one Bell setting: conjugated eigenprojectors of the
// spin component, so that post-selecting in A leaves B in that component's
// eigenstate.
std::vector<NamedProjector> bell_setting(const std::string &name, const Matrix &spin,
                                         Eigen::Index dim_b) {
    const EigenSystem eig = hermitian_eig(HermitianOperator(spin));
    std::vector<NamedProjector> outcomes;
    for (const int value : {+1, -1}) {
        // eigenvalues ascend, so +1 sits in the last column
        const Eigen::Index col = (value > 0) ? eig.values.size() - 1 : 0;
        const Vector v = eig.vectors.col(col).conjugate();
        const Matrix proj_a = v * v.adjoint();
        outcomes.push_back({name + "=" + (value > 0 ? "+1" : "-1"),
                            Projector(tensor_product(proj_a, identity(dim_b)))});
    }
    return outcomes;
}

} // namespace

Scenario bell_chsh_scenario() {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Matrix s_plus = inv_sqrt2 * (pauli_x() + pauli_y());
    const Matrix s_minus = inv_sqrt2 * (pauli_x() - pauli_y());

    Scenario scenario{
        "bell-chsh",
        2,
        2,
        DensityMatrix::pure(maximally_entangled_ket(2)),
        {Pvm{"S+", bell_setting("S+", s_plus, 2)},
         Pvm{"S-", bell_setting("S-", s_minus, 2)}},
        {},
        {},
    };
    for (const auto &[label, pi] : bell_pi_operators())
        scenario.probes.push_back({label, HermitianOperator(tensor_product(identity(2), pi))});

    for (const char *setting : {"S+", "S-"})
        for (const char *sign : {"+1", "-1"})
            for (const auto &[probe_label, pi] : bell_pi_operators()) {
                (void)pi;
                const std::string final_label = std::string(setting) + "=" + sign;
                // "P(X=+1,Y=-1)" -> "X=+1,Y=-1"
                const std::string xy = probe_label.substr(2, probe_label.size() - 3);
                scenario.queries.push_back({"p(" + final_label + "," + xy + ")",
                                            QueryKind::Joint, final_label, probe_label});
            }
    validate_scenario(scenario);
    return scenario;
}

namespace {

double atom_value(const ScenarioReport &report, const std::string &setting,
                  const std::string &s, const std::string &x, const std::string &y) {
    const std::string label = "p(" + setting + "=" + s + ",X=" + x + ",Y=" + y + ")";
    const double *value = report.find_value(label);
    if (!value)
        throw WrongScenarioError("bell_joint_table: missing query " + label);
    return *value;
}

} // namespace

ScenarioReport bell_joint_table(const Scenario &scenario) {
    if (scenario.pvms.size() != 2 || scenario.pvms[0].label != "S+" ||
        scenario.pvms[1].label != "S-" || scenario.probes.size() != 4)
        throw WrongScenarioError("bell_joint_table: expected the bell-chsh scenario layout");

    ScenarioReport report = run_exact(scenario);

    // Compound events. Whether (X+Y)S+ or (X-Y)S- is the nonzero factor is
    // decided by X = Y or X != Y, so the four events partition the outcomes.
    const double plus_2 = atom_value(report, "S+", "+1", "+1", "+1") +
                          atom_value(report, "S+", "-1", "-1", "-1");
    const double plus_m2 = atom_value(report, "S+", "+1", "-1", "-1") +
                           atom_value(report, "S+", "-1", "+1", "+1");
    const double minus_2 = atom_value(report, "S-", "+1", "+1", "-1") +
                           atom_value(report, "S-", "-1", "-1", "+1");
    const double minus_m2 = atom_value(report, "S-", "+1", "-1", "+1") +
                            atom_value(report, "S-", "-1", "+1", "-1");

    report.exact_values.emplace_back(kBellEventLabels[0], plus_2);
    report.exact_values.emplace_back(kBellEventLabels[1], minus_2);
    report.exact_values.emplace_back(kBellEventLabels[2], plus_m2);
    report.exact_values.emplace_back(kBellEventLabels[3], minus_m2);

    for (const auto &[label, pi] : bell_pi_operators())
        report.eigen_summaries.emplace_back(
            label, ascending_eigenvalues(HermitianOperator(pi)));

    ScenarioReport with_aggregate = std::move(report);
    with_aggregate.aggregate = chsh_value(with_aggregate);
    return with_aggregate;
}

double chsh_value(const ScenarioReport &report) {
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double *prob = report.find_value(kBellEventLabels[k]);
        if (!prob)
            throw MissingEventsError(std::string("chsh_value: missing event ") +
                                     kBellEventLabels[k]);
        total += kBellEventValues[k] * *prob;
    }
    return total;
}

} // namespace weakstat
