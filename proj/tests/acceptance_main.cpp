// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "weakstat/random_states.hpp"
#include "weakstat/rng.hpp"
#include "weakstat/sampler.hpp"
#include "weakstat/scenario_dsl.hpp"
#include "weakstat/scenarios.hpp"

using namespace weakstat;

namespace {

const double kSqrt2 = std::sqrt(2.0);

std::string fail(const std::string &detail) { return detail; }

std::string check_tol(const char *what, double value, double expected, double tol) {
    if (std::abs(value - expected) <= tol)
        return {};
    std::ostringstream os;
    os << what << " = " << value << ", expected " << expected << " within " << tol;
    return os.str();
}

// ---- 1. Bell spectra -------------------------------------------------------

std::string criterion_bell_spectra() {
    const double lo = (1.0 - kSqrt2) / 4.0;
    const double hi = (1.0 + kSqrt2) / 4.0;
    for (const auto &[label, pi] : bell_pi_operators()) {
        const EigenSystem eig = hermitian_eig(HermitianOperator(pi));
        if (std::abs(eig.values[0] - lo) > 1e-12 || std::abs(eig.values[1] - hi) > 1e-12)
            return fail(label + ": spectrum off (1 +/- sqrt2)/4 beyond 1e-12");
    }
    return {};
}

// ---- 2. Bell table ---------------------------------------------------------

std::string criterion_bell_table() {
    const ScenarioReport table = bell_joint_table(bell_chsh_scenario());
    const double expected[4] = {0.6035533906, 0.6035533906, -0.1035533906, -0.1035533906};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double *prob = table.find_value(kBellEventLabels[k]);
        if (!prob)
            return fail(std::string("missing event ") + kBellEventLabels[k]);
        if (std::abs(*prob - expected[k]) > 1e-10)
            return fail(std::string(kBellEventLabels[k]) + ": value off beyond 1e-10");
        total += *prob;
    }
    return check_tol("total probability mass", total, 1.0, 1e-10);
}

// ---- 3. CHSH ---------------------------------------------------------------

std::string criterion_chsh() {
    const ScenarioReport table = bell_joint_table(bell_chsh_scenario());
    if (auto err = check_tol("chsh", chsh_value(table), 2.8284271247, 1e-10); !err.empty())
        return err;
    Scenario product = bell_chsh_scenario();
    Matrix rho00 = Matrix::Zero(4, 4);
    rho00(0, 0) = 1.0;
    product.initial = DensityMatrix(rho00);
    const double control = chsh_value(bell_joint_table(product));
    if (std::abs(control) > 2.0 + 1e-10) {
        std::ostringstream os;
        os << "product-state control |CHSH| = " << std::abs(control) << " exceeds 2";
        return fail(os.str());
    }
    return {};
}

// ---- 4. Double slit --------------------------------------------------------

std::string criterion_double_slit() {
    const Scenario scenario = double_slit_scenario();
    std::vector<Projector> pvm;
    for (const auto &outcome : scenario.pvms[0].outcomes)
        pvm.push_back(outcome.projector);
    const auto terms = decompose(scenario.initial, pvm);
    if (terms.size() != 2)
        return fail("decompose did not produce two branches");
    const Matrix r1 = matrix_from_rows({{1, 0.5}, {0.5, 0}});
    const Matrix r2 = matrix_from_rows({{0, 0.5}, {0.5, 1}});
    if (max_abs(terms[0].state.matrix() - r1) > 1e-12 ||
        max_abs(terms[1].state.matrix() - r2) > 1e-12)
        return fail("branch states off the closed form beyond 1e-12");
    const ScenarioReport report = run_exact(scenario);
    const double *c1 = report.find_value("p(coherence|path-1)");
    const double *c2 = report.find_value("p(coherence|path-2)");
    if (!c1 || !c2)
        return fail("missing coherence queries");
    if (std::abs(*c1 - 1.0) > 1e-12 || std::abs(*c2 - 1.0) > 1e-12)
        return fail("coherence query is not 1.0 in both branches");
    return {};
}

// ---- 5. Mixture identity ---------------------------------------------------

std::string criterion_mixture_identity() {
    StateSampler sampler(505);
    for (const Eigen::Index d : {2, 3, 4, 5}) {
        for (int trial = 0; trial < 100; ++trial) {
            const DensityMatrix rho = sampler.random_density(d);
            const auto pvm = sampler.random_rank1_pvm(d);
            Matrix mixture = Matrix::Zero(d, d);
            for (const auto &term : decompose(rho, pvm))
                mixture += term.state.preparation_prob() * term.state.matrix();
            if (max_abs(mixture - rho.matrix()) > 1e-10) {
                std::ostringstream os;
                os << "d=" << d << " trial " << trial << ": residue "
                   << max_abs(mixture - rho.matrix());
                return fail(os.str());
            }
        }
    }
    return {};
}

// ---- 6. Entanglement locality identity -------------------------------------

std::string criterion_entangled_marginal() {
    StateSampler sampler(606);
    for (const Eigen::Index d : {2, 3, 4}) {
        for (int trial = 0; trial < 50; ++trial) {
            const KetVector f = sampler.random_ket(d);
            const Scenario scenario = entangled_scenario(d, f);
            const ConditionalState state =
                conditional_state(scenario.initial, scenario.pvms[0].outcomes[0].projector);
            // trace out system A, keep B
            const Matrix marginal = partial_trace(state.matrix(), d, d, Subsystem::B);
            const Matrix expected = outer(f.conjugated(), f.conjugated());
            if (max_abs(marginal - expected) > 1e-10) {
                std::ostringstream os;
                os << "d=" << d << " trial " << trial << ": marginal residue "
                   << max_abs(marginal - expected);
                return fail(os.str());
            }
        }
    }
    return {};
}

// ---- 7. Consistency chain --------------------------------------------------

std::string criterion_consistency_chain() {
    StateSampler sampler(707);
    for (int instance = 0; instance < 200; ++instance) {
        const Eigen::Index d = 2 + instance % 4;
        const DensityMatrix rho = sampler.random_density(d);
        const auto pvm = sampler.random_rank1_pvm(d);
        const EffectOperator effect = sampler.random_effect(d);
        for (const auto &term : decompose(rho, pvm)) {
            const double joint = joint_probability(rho, pvm[term.outcome], effect);
            const double chained = term.state.preparation_prob() *
                                   conditional_probability(term.state, effect);
            if (std::abs(joint - chained) > 1e-12) {
                std::ostringstream os;
                os << "instance " << instance << ": |p(f,g) - p(f)p(g|f)| = "
                   << std::abs(joint - chained);
                return fail(os.str());
            }
        }
    }
    return {};
}

// ---- 8. Statistical reconstruction -----------------------------------------

std::string criterion_statistical_reconstruction() {
    const double eps = 0.05;
    const std::uint64_t shots = 10000000;
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, eps);
    const Scenario scenario = double_slit_scenario();

    const CountTable counts =
        sample_sequential(scenario.initial, povm, scenario.pvms[0].outcomes,
                          {shots, 20260809, 4});
    const ConditionalStateEstimate estimate =
        estimate_conditional_state(counts, povm, basis, "path-1");

    const Matrix expected = matrix_from_rows({{1, 0.5}, {0.5, 0}});
    for (Eigen::Index j = 0; j < 2; ++j)
        for (Eigen::Index k = 0; k < 2; ++k) {
            const double tol = 5.0 * estimate.entry_stderr(j, k) + 0.25 * eps;
            const double dev = std::abs(estimate.state.matrix()(j, k) - expected(j, k));
            if (dev > tol) {
                std::ostringstream os;
                os << "entry (" << j << "," << k << ") off by " << dev << " > " << tol;
                return fail(os.str());
            }
        }
    const EigenSystem eig = hermitian_eig(estimate.state.op());
    if (!(eig.values[0] < 0.0)) {
        std::ostringstream os;
        os << "smallest eigenvalue " << eig.values[0] << " is not negative";
        return fail(os.str());
    }
    return {};
}

// ---- 9. Weak-limit order check ----------------------------------------------

std::string criterion_weak_limit_order() {
    // Sampled joint frequencies vs the symmetrized formula. The probing cell
    // is the one with the largest exact model gap, instances are drawn with a
    // measurable quadratic coefficient, and both strengths share one random
    // stream, which keeps sampling noise out of the gap ratio.
    StateSampler sampler(909);
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const std::uint64_t shots = 100000000;

    int accepted = 0;
    int attempts = 0;
    while (accepted < 10 && attempts < 200) {
        ++attempts;
        const DensityMatrix rho = sampler.random_density(2);
        const auto raw_pvm = sampler.random_rank1_pvm(2);
        const std::vector<NamedProjector> pvm{{"f0", raw_pvm[0]}, {"f1", raw_pvm[1]}};

        const WeakPOVM povm_small = build_weak_povm(basis, 0.01);
        const double quad =
            (sequential_joint_probabilities(rho, povm_small, pvm) -
             symmetrized_joint_probabilities(rho, povm_small, pvm))
                .cwiseAbs()
                .maxCoeff() /
            (0.01 * 0.01);
        if (quad < 0.01)
            continue; // degenerate instance: no measurable quadratic term
        ++accepted;

        const auto sampled_gap = [&](double eps) {
            const WeakPOVM povm = build_weak_povm(basis, eps);
            const RealMatrix model = sequential_joint_probabilities(rho, povm, pvm);
            const RealMatrix exact = symmetrized_joint_probabilities(rho, povm, pvm);
            Eigen::Index cell_m = 0, cell_f = 0;
            (model - exact).cwiseAbs().maxCoeff(&cell_m, &cell_f);
            const CountTable table =
                sample_sequential(rho, povm, pvm, {shots, 9000 + static_cast<std::uint64_t>(accepted), 4});
            const double freq =
                static_cast<double>(table.at(static_cast<std::size_t>(cell_m),
                                             static_cast<std::size_t>(cell_f))) /
                static_cast<double>(shots);
            return std::abs(freq - exact(cell_m, cell_f));
        };

        const double g1 = sampled_gap(0.2);
        const double g2 = sampled_gap(0.1);
        if (!(g2 > 0.0))
            return fail("zero gap at the smaller strength");
        const double factor = g1 / g2;
        if (factor < 1.5 || factor > 4.5) {
            std::ostringstream os;
            os << "instance " << accepted << ": gap ratio " << factor
               << " outside [1.5, 4.5]";
            return fail(os.str());
        }
    }
    if (accepted < 10)
        return fail("could not draw 10 usable instances");
    return {};
}

// ---- 10. Determinism ---------------------------------------------------------

std::string run_command(const std::string &command, int &exit_code) {
    std::string output;
    FILE *pipe = popen(command.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return output;
    }
    std::array<char, 4096> buffer{};
    std::size_t got = 0;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
        output.append(buffer.data(), got);
    exit_code = pclose(pipe);
    return output;
}

std::string criterion_determinism() {
    // library level: shard independence
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, 0.05);
    const Scenario scenario = double_slit_scenario();
    const CountTable t1 = sample_sequential(scenario.initial, povm,
                                            scenario.pvms[0].outcomes, {400000, 17, 1});
    const CountTable t4 = sample_sequential(scenario.initial, povm,
                                            scenario.pvms[0].outcomes, {400000, 17, 4});
    if (t1.counts != t4.counts)
        return fail("shards 1 vs 4 changed the counts");

    // CLI level: byte-identical reruns
    const char *cli = std::getenv("WEAKSTAT_CLI");
    if (!cli)
        return fail("WEAKSTAT_CLI not set; cannot exercise the binary");
    const std::string base = std::string("\"") + cli + "\"";
    const std::vector<std::string> invocations{
        base + " bell --format json 2>/dev/null",
        base + " tomo double-slit --shots 200000 --epsilon 0.05 --seed 42 --format json"
               " 2>/dev/null",
        base + " tomo double-slit --shots 200000 --epsilon 0.05 --seed 42 --format csv"
               " --shards 4 2>/dev/null",
    };
    for (const std::string &invocation : invocations) {
        int code1 = 0, code2 = 0;
        const std::string first = run_command(invocation, code1);
        const std::string second = run_command(invocation, code2);
        if (code1 != 0 || code2 != 0)
            return fail("CLI exited nonzero: " + invocation);
        if (first.empty() || first != second)
            return fail("outputs differ between identical runs: " + invocation);
    }

    // shard flag must not show up in the results either
    int code = 0;
    const std::string one = run_command(
        base + " tomo double-slit --shots 200000 --epsilon 0.05 --seed 42 --format csv"
               " --shards 1 2>/dev/null",
        code);
    const std::string four = run_command(
        base + " tomo double-slit --shots 200000 --epsilon 0.05 --seed 42 --format csv"
               " --shards 4 2>/dev/null",
        code);
    if (one != four)
        return fail("shards 1 vs 4 changed the CLI report");
    return {};
}

// ---- 11. DSL -----------------------------------------------------------------

std::string read_bell_ws(std::string &source) {
    const char *env = std::getenv("WEAKSTAT_BELL_WS");
    for (const char *path : {env, "bell.ws", "../bell.ws", "../../bell.ws"}) {
        if (!path)
            continue;
        std::ifstream file(path);
        if (file) {
            std::ostringstream text;
            text << file.rdbuf();
            source = text.str();
            return {};
        }
    }
    return fail("bell.ws not found (set WEAKSTAT_BELL_WS)");
}

std::string criterion_dsl() {
    std::string source;
    if (auto err = read_bell_ws(source); !err.empty())
        return err;
    const dsl::ElaborateResult loaded = dsl::load_scenario(source, "bell.ws");
    if (!loaded.ok())
        return fail("bell.ws failed to elaborate");
    const Scenario &ours = *loaded.scenario;
    const Scenario builtin = bell_chsh_scenario();
    if (max_abs(ours.initial.matrix() - builtin.initial.matrix()) > 1e-12)
        return fail("initial state differs from the built-in scenario");
    if (ours.pvms.size() != 2 || ours.probes.size() != 4)
        return fail("bell.ws layout differs from the built-in scenario");
    for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t k = 0; k < 2; ++k)
            if (max_abs(ours.pvms[p].outcomes[k].projector.matrix() -
                        builtin.pvms[p].outcomes[k].projector.matrix()) > 1e-12)
                return fail("PVM projectors differ beyond 1e-12");
    for (std::size_t k = 0; k < 4; ++k)
        if (max_abs(ours.probes[k].op.matrix() - builtin.probes[k].op.matrix()) > 1e-12)
            return fail("probe operators differ beyond 1e-12");

    // fuzz: random deletions must produce diagnostics, never crashes
    int lines = 1;
    for (const char c : source)
        lines += (c == '\n') ? 1 : 0;
    CounterRng rng(1111, 0);
    for (int round = 0; round < 1000; ++round) {
        std::string mutated = source;
        const int deletions = 1 + static_cast<int>(rng.next_unit() * 4);
        for (int k = 0; k < deletions && !mutated.empty(); ++k) {
            const std::size_t at = static_cast<std::size_t>(
                rng.next_unit() * static_cast<double>(mutated.size()));
            const std::size_t len = 1 + static_cast<std::size_t>(rng.next_unit() * 12);
            mutated.erase(at, std::min(len, mutated.size() - at));
        }
        try {
            const dsl::ElaborateResult result = dsl::load_scenario(mutated);
            if (!result.ok()) {
                bool positioned = false;
                for (const auto &d : result.diagnostics) {
                    if (d.severity != dsl::Diagnostic::Severity::Error)
                        continue;
                    if (d.line < 1 || d.line > lines + 1 || d.column < 1) {
                        std::ostringstream os;
                        os << "diagnostic position " << d.line << ":" << d.column
                           << " outside the source (round " << round << ")";
                        return fail(os.str());
                    }
                    positioned = true;
                }
                if (!positioned)
                    return fail("failure without an error diagnostic");
            }
        } catch (const std::exception &e) {
            std::ostringstream os;
            os << "round " << round << " threw: " << e.what();
            return fail(os.str());
        }
    }
    return {};
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char *title;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "bell operator spectra are (1 +/- sqrt2)/4 within 1e-12", criterion_bell_spectra},
        {2, "bell table events are +0.6035533906 / -0.1035533906, mass 1", criterion_bell_table},
        {3, "chsh = 2.8284271247; product control stays classical", criterion_chsh},
        {4, "double slit branches and full coherence in both", criterion_double_slit},
        {5, "mixture identity on 100 random instances at d = 2..5", criterion_mixture_identity},
        {6, "B marginal of the entangled branch is |f*><f*| (50 x d = 2..4)",
         criterion_entangled_marginal},
        {7, "consistency chain p(f,g) = p(f) p(g|f) on 200 instances", criterion_consistency_chain},
        {8, "sampled reconstruction of the non-positive branch state", criterion_statistical_reconstruction},
        {9, "sequential-model gap shrinks x[1.5,4.5] when eps halves", criterion_weak_limit_order},
        {10, "byte-identical CLI reruns; shard-count invariance", criterion_determinism},
        {11, "bell.ws equals the built-in; 1000 fuzz rounds stay graceful", criterion_dsl},
    };

    int failures = 0;
    for (const auto &criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        try {
            detail = criterion.run();
        } catch (const std::exception &e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2d: %s (%.2fs)%s%s\n", detail.empty() ? "PASS" : "FAIL",
                    criterion.number, criterion.title, seconds, detail.empty() ? "" : " -- ",
                    detail.c_str());
        std::fflush(stdout);
        failures += detail.empty() ? 0 : 1;
    }
    if (failures)
        std::printf("%d criterion(s) failed\n", failures);
    else
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return failures;
}
