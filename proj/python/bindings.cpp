#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weakstat/random_states.hpp"
#include "weakstat/sampler.hpp"
#include "weakstat/scenario_dsl.hpp"
#include "weakstat/scenarios.hpp"
#include "weakstat/self_check.hpp"
#include "weakstat/weak_tomography.hpp"

namespace py = pybind11;
using namespace weakstat;

namespace {

py::dict report_to_dict(const ScenarioReport &report) {
    py::dict exact;
    for (const auto &[label, value] : report.exact_values)
        exact[py::str(label)] = value;
    py::dict states;
    for (const auto &[label, state] : report.conditional_states)
        states[py::str(label)] =
            py::make_tuple(Matrix(state.matrix()), state.preparation_prob());
    py::dict eigs;
    for (const auto &[label, values] : report.eigen_summaries)
        eigs[py::str(label)] = values;
    py::dict out;
    out["name"] = report.name;
    out["exact_values"] = exact;
    out["conditional_states"] = states;
    out["eigen_summaries"] = eigs;
    if (report.aggregate)
        out["aggregate"] = *report.aggregate;
    return out;
}

py::list diagnostics_to_list(const std::vector<dsl::Diagnostic> &diags) {
    py::list out;
    for (const auto &d : diags) {
        py::dict item;
        item["severity"] = d.severity == dsl::Diagnostic::Severity::Error ? "error" : "warning";
        item["message"] = d.message;
        item["line"] = d.line;
        item["column"] = d.column;
        out.append(item);
    }
    return out;
}

py::dict count_table_to_dict(const CountTable &table) {
    py::dict out;
    out["weak_labels"] = table.weak_labels;
    out["final_labels"] = table.final_labels;
    out["counts"] = table.counts;
    out["shots"] = table.shots;
    return out;
}

py::dict estimates_to_dict(const EstimateReport &report) {
    py::dict est;
    for (const auto &[label, e] : report.estimates)
        est[py::str(label)] = py::make_tuple(e.mean, e.stderr);
    py::dict out;
    out["estimates"] = est;
    out["shots_used"] = report.shots_used;
    return out;
}

std::vector<NamedProjector> pvm_from_pairs(
    const std::vector<std::pair<std::string, Matrix>> &pvm) {
    std::vector<NamedProjector> out;
    out.reserve(pvm.size());
    for (const auto &[label, m] : pvm)
        out.push_back({label, Projector(m)});
    return out;
}

} // namespace

PYBIND11_MODULE(_weakstat, m) {
    m.doc() = "Weak measurement statistics: conditional states, quasi-probabilities, "
              "Bell/CHSH numbers, and seeded Monte Carlo sampling";

    py::register_exception<Error>(m, "WeakstatError");

    // --- operator core ---
    m.def("adjoint", [](const Matrix &a) { return adjoint(a); });
    m.def("mat_trace", [](const Matrix &a) { return mat_trace(a); });
    m.def("matmul", [](const Matrix &a, const Matrix &b) { return matmul(a, b); });
    m.def("jordan_product",
          [](const Matrix &a, const Matrix &b) { return jordan_product(a, b); });
    m.def("tensor_product",
          [](const Matrix &a, const Matrix &b) { return tensor_product(a, b); });
    m.def(
        "partial_trace",
        [](const Matrix &m_, Eigen::Index dim_a, Eigen::Index dim_b, const std::string &keep) {
            if (keep != "A" && keep != "B")
                throw py::value_error("keep must be 'A' or 'B'");
            return partial_trace(m_, dim_a, dim_b,
                                 keep == "A" ? Subsystem::A : Subsystem::B);
        },
        py::arg("matrix"), py::arg("dim_a"), py::arg("dim_b"), py::arg("keep"));
    m.def("hermitian_eig", [](const Matrix &m_) {
        const EigenSystem sys = hermitian_eig(m_);
        return py::make_tuple(RealVector(sys.values), Matrix(sys.vectors));
    });
    m.def("outer", [](const Vector &u, const Vector &v) {
        return outer(KetVector::normalized(u), KetVector::normalized(v));
    });
    m.def("gell_mann_matrices", [](Eigen::Index dim) { return gell_mann_matrices(dim); });
    m.def("gell_mann_labels", [](Eigen::Index dim) { return gell_mann_labels(dim); });

    // --- weak tomography ---
    py::class_<TomographyBasis>(m, "TomographyBasis")
        .def_static("gell_mann", &TomographyBasis::gell_mann, py::arg("dim"))
        .def_property_readonly("dim", &TomographyBasis::dim)
        .def_property_readonly("labels", &TomographyBasis::labels);

    py::class_<WeakPOVM>(m, "WeakPOVM")
        .def_property_readonly("dim", &WeakPOVM::dim)
        .def_property_readonly("strength", &WeakPOVM::strength)
        .def_property_readonly("labels",
                               [](const WeakPOVM &povm) {
                                   std::vector<std::string> labels;
                                   for (const auto &out : povm.outcomes())
                                       labels.push_back(out.label);
                                   return labels;
                               })
        .def_property_readonly("weights",
                               [](const WeakPOVM &povm) {
                                   std::vector<double> weights;
                                   for (const auto &out : povm.outcomes())
                                       weights.push_back(out.weight);
                                   return weights;
                               })
        .def("effect", [](const WeakPOVM &povm, std::size_t k) {
            return povm.effect_matrix(k);
        });

    m.def(
        "build_weak_povm",
        [](Eigen::Index dim, double strength) {
            return build_weak_povm(TomographyBasis::gell_mann(dim), strength);
        },
        py::arg("dim"), py::arg("strength"));
    m.def("outcome_probabilities", [](const Matrix &rho, const WeakPOVM &povm) {
        return outcome_probabilities(DensityMatrix(rho), povm);
    });
    m.def("reconstruct_expectations",
          [](const std::vector<double> &probs, const WeakPOVM &povm) {
              py::dict out;
              for (const auto &e : reconstruct_expectations(probs, povm))
                  out[py::str(e.label)] = e.value;
              return out;
          });
    m.def(
        "reconstruct_density",
        [](const std::vector<double> &expectations, Eigen::Index dim) {
            const TomographyBasis basis = TomographyBasis::gell_mann(dim);
            if (expectations.size() != basis.size())
                throw py::value_error("expected d^2-1 expectation values");
            std::vector<ProbeExpectation> named;
            for (std::size_t k = 0; k < expectations.size(); ++k)
                named.push_back({basis.labels()[k], expectations[k]});
            return reconstruct_density(named, basis).matrix();
        },
        py::arg("expectations"), py::arg("dim"));
    m.def("joint_outcome_probability",
          [](const Matrix &rho, const Matrix &effect, const Matrix &final) {
              return joint_outcome_probability(DensityMatrix(rho), EffectOperator(effect),
                                               Projector(final));
          });
    m.def(
        "conditional_state",
        [](const Matrix &rho, const Matrix &final) {
            const ConditionalState state =
                conditional_state(DensityMatrix(rho), Projector(final));
            return py::make_tuple(Matrix(state.matrix()), state.preparation_prob());
        },
        py::arg("rho"), py::arg("final"));
    m.def("decompose", [](const Matrix &rho, const std::vector<Matrix> &pvm) {
        std::vector<Projector> projectors;
        projectors.reserve(pvm.size());
        for (const auto &p : pvm)
            projectors.emplace_back(p);
        py::list out;
        for (const auto &term : decompose(DensityMatrix(rho), projectors))
            out.append(py::make_tuple(term.outcome, Matrix(term.state.matrix()),
                                      term.state.preparation_prob()));
        return out;
    });
    m.def("conditional_probability", [](const Matrix &cond, const Matrix &effect) {
        return conditional_quasi_probability(
            ConditionalState(HermitianOperator(cond), 1.0), HermitianOperator(effect));
    });
    m.def("joint_probability", [](const Matrix &rho, const Matrix &final, const Matrix &query) {
        return joint_quasi_probability(DensityMatrix(rho), Projector(final),
                                       HermitianOperator(query));
    });

    // --- scenarios ---
    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("name", [](const Scenario &s) { return s.name; })
        .def_property_readonly("dim_a", [](const Scenario &s) { return s.dim_a; })
        .def_property_readonly("dim_b", [](const Scenario &s) { return s.dim_b; })
        .def_property_readonly("initial",
                               [](const Scenario &s) { return Matrix(s.initial.matrix()); })
        .def_property_readonly("pvms",
                               [](const Scenario &s) {
                                   py::dict out;
                                   for (const auto &pvm : s.pvms) {
                                       py::dict outcomes;
                                       for (const auto &o : pvm.outcomes)
                                           outcomes[py::str(o.label)] =
                                               Matrix(o.projector.matrix());
                                       out[py::str(pvm.label)] = outcomes;
                                   }
                                   return out;
                               })
        .def_property_readonly("probes", [](const Scenario &s) {
            py::dict out;
            for (const auto &probe : s.probes)
                out[py::str(probe.label)] = Matrix(probe.op.matrix());
            return out;
        });

    m.def("double_slit_scenario", &double_slit_scenario);
    m.def(
        "entangled_scenario",
        [](Eigen::Index d, const Vector &f) {
            return entangled_scenario(d, KetVector::normalized(f));
        },
        py::arg("d"), py::arg("f"));
    m.def("bell_chsh_scenario", &bell_chsh_scenario);
    m.def("bell_pi_operators", []() {
        py::dict out;
        for (const auto &[label, pi] : bell_pi_operators())
            out[py::str(label)] = pi;
        return out;
    });
    m.def("run_exact", [](const Scenario &s) { return report_to_dict(run_exact(s)); });
    m.def("bell_joint_table",
          [](const Scenario &s) { return report_to_dict(bell_joint_table(s)); });
    m.def("chsh_value", []() {
        return chsh_value(bell_joint_table(bell_chsh_scenario()));
    });

    // --- sampler ---
    m.def(
        "sample_weak",
        [](const Matrix &rho, const WeakPOVM &povm, std::uint64_t shots, std::uint64_t seed,
           unsigned shards) {
            return count_table_to_dict(
                sample_weak(DensityMatrix(rho), povm, {shots, seed, shards}));
        },
        py::arg("rho"), py::arg("povm"), py::arg("shots"), py::arg("seed") = 0,
        py::arg("shards") = 1);
    m.def(
        "sample_and_estimate",
        [](const Matrix &rho, const WeakPOVM &povm, std::uint64_t shots, std::uint64_t seed,
           unsigned shards) {
            const CountTable counts =
                sample_weak(DensityMatrix(rho), povm, {shots, seed, shards});
            return estimates_to_dict(estimate_expectations(counts, povm));
        },
        py::arg("rho"), py::arg("povm"), py::arg("shots"), py::arg("seed") = 0,
        py::arg("shards") = 1);
    m.def(
        "tomograph_conditional_state",
        [](const Matrix &rho, const std::vector<std::pair<std::string, Matrix>> &pvm,
           const std::string &outcome, double epsilon, std::uint64_t shots,
           std::uint64_t seed, unsigned shards) {
            const DensityMatrix state(rho);
            const TomographyBasis basis = TomographyBasis::gell_mann(state.dim());
            const WeakPOVM povm = build_weak_povm(basis, epsilon);
            const CountTable counts =
                sample_sequential(state, povm, pvm_from_pairs(pvm), {shots, seed, shards});
            const ConditionalStateEstimate estimate =
                estimate_conditional_state(counts, povm, basis, outcome);
            py::dict out;
            out["matrix"] = Matrix(estimate.state.matrix());
            out["preparation_probability"] = estimate.state.preparation_prob();
            out["entry_stderr"] = RealMatrix(estimate.entry_stderr);
            out["postselected_shots"] = estimate.postselected_shots;
            out["expectations"] = estimates_to_dict(estimate.expectations);
            return out;
        },
        py::arg("rho"), py::arg("pvm"), py::arg("outcome"), py::arg("epsilon") = 0.05,
        py::arg("shots") = 100000, py::arg("seed") = 0, py::arg("shards") = 1);

    // --- DSL ---
    m.def("parse_scenario", [](const std::string &text) {
        const dsl::ElaborateResult result = dsl::load_scenario(text);
        py::object scenario = py::none();
        if (result.ok())
            scenario = py::cast(*result.scenario);
        return py::make_tuple(scenario, diagnostics_to_list(result.diagnostics));
    });

    // --- self checks ---
    m.def(
        "self_check",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto &result : run_self_checks(seed)) {
                py::dict item;
                item["name"] = result.name;
                item["passed"] = result.passed;
                item["detail"] = result.detail;
                out.append(item);
            }
            return out;
        },
        py::arg("seed") = 0);

    m.attr("__version__") = "0.1.0";
}
