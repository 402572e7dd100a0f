#include "weakstat/self_check.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "weakstat/random_states.hpp"
#include "weakstat/scenario_dsl.hpp"
#include "weakstat/scenarios.hpp"
#include "weakstat/weak_tomography.hpp"

namespace weakstat {

namespace {

struct Checker {
    std::uint64_t seed;
    std::vector<CheckResult> results;

    void run(const std::string &name, double tolerance,
             const std::function<double(StateSampler &)> &residue) {
        CheckResult result{name, false, ""};
        try {
            StateSampler sampler(seed, std::hash<std::string>{}(name));
            const double worst = residue(sampler);
            result.passed = worst <= tolerance;
            std::ostringstream os;
            os << "max residue " << worst << " (tolerance " << tolerance << ")";
            result.detail = os.str();
        } catch (const std::exception &e) {
            result.passed = false;
            result.detail = std::string("exception: ") + e.what();
        }
        results.push_back(std::move(result));
    }
};

double abs_diff(double a, double b) { return std::abs(a - b); }

} // namespace

std::vector<CheckResult> run_self_checks(std::uint64_t seed) {
    Checker checker{seed, {}};

    checker.run("jordan-product-hermitian", 1e-12, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const HermitianOperator a(s.random_hermitian(4));
            const HermitianOperator b(s.random_hermitian(4));
            const Matrix j = jordan_product(a.matrix(), b.matrix());
            worst = std::max(worst, hermitian_defect(j) / (1.0 + max_abs(j)));
        }
        return worst;
    });

    checker.run("trace-cyclicity", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix a = s.random_hermitian(8);
            const Matrix b = s.random_hermitian(8);
            worst = std::max(worst, std::abs(mat_trace(matmul(a, b)) - mat_trace(matmul(b, a))));
        }
        return worst;
    });

    checker.run("partial-trace-preserves-trace", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const DensityMatrix rho = s.random_density(6);
            for (const Subsystem keep : {Subsystem::A, Subsystem::B}) {
                const Matrix reduced = partial_trace(rho.matrix(), 2, 3, keep);
                worst = std::max(worst,
                                 std::abs((reduced.trace() - rho.matrix().trace())));
            }
        }
        return worst;
    });

    checker.run("eig-reconstruction", 1e-9, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const HermitianOperator h(s.random_hermitian(8));
            const EigenSystem eig = hermitian_eig(h);
            const Matrix rebuilt =
                eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
            worst = std::max(worst, max_abs(rebuilt - h.matrix()));
        }
        return worst;
    });

    checker.run("tensor-partial-roundtrip", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix a = s.random_hermitian(3);
            const Matrix b = s.random_hermitian(4);
            const Matrix keep_b = partial_trace(tensor_product(a, b), 3, 4, Subsystem::B);
            worst = std::max(worst, max_abs(keep_b - Matrix(a.trace() * b)));
        }
        return worst;
    });

    checker.run("weak-povm-completeness", 1e-10, [](StateSampler &) {
        double worst = 0.0;
        for (const Eigen::Index d : {2, 3, 4}) {
            const WeakPOVM povm = build_weak_povm(TomographyBasis::gell_mann(d), 0.1);
            Matrix sum = Matrix::Zero(d, d);
            for (std::size_t m = 0; m < povm.size(); ++m)
                sum += povm.effect_matrix(m);
            worst = std::max(worst, max_abs(sum - identity(d)));
        }
        return worst;
    });

    checker.run("decomposition-identity", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (const Eigen::Index d : {2, 3, 4, 5}) {
            for (int trial = 0; trial < 10; ++trial) {
                const DensityMatrix rho = s.random_density(d);
                const auto pvm = s.random_rank1_pvm(d);
                Matrix mixture = Matrix::Zero(d, d);
                for (const auto &term : decompose(rho, pvm))
                    mixture += term.state.preparation_prob() * term.state.matrix();
                worst = std::max(worst, max_abs(mixture - rho.matrix()));
            }
        }
        return worst;
    });

    checker.run("consistency-chain", 1e-12, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
            const Eigen::Index d = 2 + trial % 3;
            const DensityMatrix rho = s.random_density(d);
            const auto pvm = s.random_rank1_pvm(d);
            const EffectOperator effect = s.random_effect(d);
            for (const auto &term : decompose(rho, pvm)) {
                const double joint =
                    joint_probability(rho, pvm[term.outcome], effect);
                const double chained = term.state.preparation_prob() *
                                       conditional_probability(term.state, effect);
                worst = std::max(worst, abs_diff(joint, chained));
            }
        }
        return worst;
    });

    checker.run("joint-probability-symmetry", 1e-12, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const DensityMatrix rho = s.random_density(3);
            const auto pvm = s.random_rank1_pvm(3);
            const auto other = s.random_rank1_pvm(3);
            const Projector &p = pvm[0];
            const Projector &q = other[1];
            const double a = joint_probability(rho, p, EffectOperator(q.op()));
            const double b = joint_probability(rho, q, EffectOperator(p.op()));
            worst = std::max(worst, abs_diff(a, b));
        }
        return worst;
    });

    checker.run("joint-probability-marginals", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Index d = 3;
            const DensityMatrix rho = s.random_density(d);
            const auto finals = s.random_rank1_pvm(d);
            const auto effects = s.random_rank1_pvm(d);
            for (const auto &f : finals) {
                double total = 0.0;
                for (const auto &g : effects)
                    total += joint_probability(rho, f, EffectOperator(g.op()));
                const double marginal = (rho.matrix() * f.matrix()).trace().real();
                worst = std::max(worst, abs_diff(total, marginal));
            }
        }
        return worst;
    });

    checker.run("tomography-roundtrip", 1e-9, [](StateSampler &s) {
        double worst = 0.0;
        for (const Eigen::Index d : {2, 3, 4}) {
            const TomographyBasis basis = TomographyBasis::gell_mann(d);
            const WeakPOVM povm = build_weak_povm(basis, 0.1);
            for (int trial = 0; trial < 5; ++trial) {
                const DensityMatrix rho = s.random_density(d);
                const auto probs = outcome_probabilities(rho, povm);
                const auto expectations = reconstruct_expectations(probs, povm);
                const HermitianOperator rebuilt = reconstruct_density(expectations, basis);
                worst = std::max(worst, max_abs(rebuilt.matrix() - rho.matrix()));
            }
        }
        return worst;
    });

    checker.run("double-slit-branches", 1e-12, [](StateSampler &) {
        const ScenarioReport report = run_exact(double_slit_scenario());
        const double *c1 = report.find_value("p(coherence|path-1)");
        const double *c2 = report.find_value("p(coherence|path-2)");
        if (!c1 || !c2)
            return 1.0;
        return std::max(abs_diff(*c1, 1.0), std::max(abs_diff(*c2, 1.0), abs_diff(*c1, *c2)));
    });

    checker.run("entangled-marginal", 1e-10, [](StateSampler &s) {
        double worst = 0.0;
        for (const Eigen::Index d : {2, 3, 4}) {
            for (int trial = 0; trial < 5; ++trial) {
                const KetVector f = s.random_ket(d);
                const Scenario scenario = entangled_scenario(d, f);
                const ScenarioReport report = run_exact(scenario);
                const ConditionalState *marginal = report.find_state("marginal_B(A=f)");
                if (!marginal)
                    return 1.0;
                const Matrix expected = outer(f.conjugated(), f.conjugated());
                worst = std::max(worst, max_abs(marginal->matrix() - expected));
            }
        }
        return worst;
    });

    checker.run("bell-spectra", 1e-12, [](StateSampler &) {
        double worst = 0.0;
        const double lo = (1.0 - std::sqrt(2.0)) / 4.0;
        const double hi = (1.0 + std::sqrt(2.0)) / 4.0;
        for (const auto &[label, pi] : bell_pi_operators()) {
            (void)label;
            const EigenSystem eig = hermitian_eig(HermitianOperator(pi));
            worst = std::max(worst, abs_diff(eig.values[0], lo));
            worst = std::max(worst, abs_diff(eig.values[1], hi));
        }
        return worst;
    });

    checker.run("bell-table-and-chsh", 1e-10, [](StateSampler &) {
        const ScenarioReport table = bell_joint_table(bell_chsh_scenario());
        const double hi = (1.0 + std::sqrt(2.0)) / 4.0;
        const double lo = (1.0 - std::sqrt(2.0)) / 4.0;
        double worst = 0.0;
        double total = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double *prob = table.find_value(kBellEventLabels[k]);
            if (!prob)
                return 1.0;
            total += *prob;
            worst = std::max(worst, abs_diff(*prob, kBellEventValues[k] > 0 ? hi : lo));
        }
        worst = std::max(worst, abs_diff(total, 1.0));
        worst = std::max(worst, abs_diff(chsh_value(table), 2.0 * std::sqrt(2.0)));
        return worst;
    });

    checker.run("dsl-roundtrip", 0.0, [](StateSampler &) {
        const char *source = "dim 2\n"
                             "state psi = ket[1, 1]\n"
                             "op p1 = outer(ket[1, 0], ket[1, 0])\n"
                             "op p2 = outer(ket[0, 1], ket[0, 1])\n"
                             "pvm paths = { p1, p2 }\n"
                             "probe coh = outer(ket[1, 1], ket[1, 1])\n"
                             "query c1 = cond(p1, coh)\n";
        const auto first = dsl::parse(source);
        if (!first.ok())
            return 1.0;
        const auto second = dsl::parse(dsl::pretty_print(*first.doc));
        if (!second.ok() || !dsl::structurally_equal(*first.doc, *second.doc))
            return 1.0;
        const auto loaded = dsl::load_scenario(source);
        return loaded.ok() ? 0.0 : 1.0;
    });

    return checker.results;
}

} // namespace weakstat
