#include "weakstat/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "weakstat/sampler.hpp"
#include "weakstat/scenario_dsl.hpp"
#include "weakstat/self_check.hpp"

namespace weakstat {

namespace {

std::uint64_t resolve_seed(const CliInvocation &invocation) {
    if (invocation.seed)
        return *invocation.seed;
    if (const char *env = std::getenv("WEAKSTAT_SEED")) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0')
            return v;
    }
    return 0;
}

KetVector default_entangled_probe_state(Eigen::Index d) {
    // (sum_k i^k |k>)/sqrt(d): complex so the conjugation in B is visible.
    Vector amps(d);
    Complex phase{1.0, 0.0};
    for (Eigen::Index k = 0; k < d; ++k) {
        amps[k] = phase;
        phase *= Complex(0.0, 1.0);
    }
    return KetVector::normalized(std::move(amps));
}

Scenario resolve_scenario(const std::string &ref, std::ostream &err, bool &failed) {
    failed = false;
    if (ref.empty() || ref == "double-slit")
        return double_slit_scenario();
    if (ref == "bell-chsh")
        return bell_chsh_scenario();
    if (ref.rfind("entangled:d=", 0) == 0) {
        const std::string arg = ref.substr(std::string("entangled:d=").size());
        char *end = nullptr;
        const long d = std::strtol(arg.c_str(), &end, 10);
        if (!end || *end != '\0' || d < 2 || d > 8) {
            err << "error: bad entangled scenario '" << ref << "' (want entangled:d=2..8)\n";
            failed = true;
            return double_slit_scenario();
        }
        return entangled_scenario(d, default_entangled_probe_state(d));
    }

    std::ifstream file(ref);
    if (!file) {
        err << "error: unknown scenario '" << ref
            << "' (expected double-slit, bell-chsh, entangled:d=<n> or a .ws file)\n";
        failed = true;
        return double_slit_scenario();
    }
    std::ostringstream text;
    text << file.rdbuf();
    dsl::ElaborateResult loaded = dsl::load_scenario(text.str(), ref);
    for (const auto &diag : loaded.diagnostics)
        err << ref << ":" << dsl::format_diagnostic(diag) << "\n";
    if (!loaded.ok()) {
        failed = true;
        return double_slit_scenario();
    }
    return std::move(*loaded.scenario);
}

int emit(const Report &report, const CliInvocation &invocation, std::ostream &out,
         std::ostream &err) {
    const std::string text = render(report, invocation.format);
    if (invocation.output_path) {
        std::ofstream file(*invocation.output_path, std::ios::binary);
        if (!file) {
            err << "error: cannot write " << *invocation.output_path << "\n";
            return 1;
        }
        file << text;
        return 0;
    }
    out << text;
    return 0;
}

int run_exact_command(const CliInvocation &invocation, std::ostream &out, std::ostream &err) {
    bool failed = false;
    const Scenario scenario = resolve_scenario(invocation.scenario_ref, err, failed);
    if (failed)
        return 1;
    const ScenarioReport result = (scenario.name == "bell-chsh")
                                      ? bell_joint_table(scenario)
                                      : run_exact(scenario);
    return emit(report_from_scenario(result), invocation, out, err);
}

int run_bell_command(const CliInvocation &invocation, std::ostream &out, std::ostream &err) {
    const ScenarioReport table = bell_joint_table(bell_chsh_scenario());
    Report report = report_from_scenario(table);
    // compound events lead, atoms follow
    std::stable_sort(report.events.begin(), report.events.end(),
                     [](const ReportEvent &a, const ReportEvent &b) {
                         const auto rank = [](const ReportEvent &e) {
                             return e.label.rfind("p(", 0) == 0 ? 1 : 0;
                         };
                         return rank(a) < rank(b);
                     });
    return emit(report, invocation, out, err);
}

int run_sample_command(const CliInvocation &invocation, std::ostream &out, std::ostream &err) {
    bool failed = false;
    const Scenario scenario = resolve_scenario(invocation.scenario_ref, err, failed);
    if (failed)
        return 1;
    const std::uint64_t seed = resolve_seed(invocation);
    const SampleConfig cfg{*invocation.shots, seed, invocation.shards};
    const TomographyBasis basis = TomographyBasis::gell_mann(scenario.dim());
    const WeakPOVM povm = build_weak_povm(basis, invocation.epsilon);

    const CountTable counts = sample_weak(scenario.initial, povm, cfg);
    const EstimateReport estimates = estimate_expectations(counts, povm);

    Report report;
    report.scenario = scenario.name;
    report.epsilon = invocation.epsilon;
    report.shots = cfg.shots;
    report.seed = seed;
    for (const auto &[label, est] : estimates.estimates)
        report.events.push_back({label, est.mean, est.stderr, false});
    return emit(report, invocation, out, err);
}

int run_tomo_command(const CliInvocation &invocation, std::ostream &out, std::ostream &err) {
    bool failed = false;
    const Scenario scenario = resolve_scenario(invocation.scenario_ref, err, failed);
    if (failed)
        return 1;
    const std::uint64_t seed = resolve_seed(invocation);
    const TomographyBasis basis = TomographyBasis::gell_mann(scenario.dim());
    const WeakPOVM povm = build_weak_povm(basis, invocation.epsilon);

    Report report;
    report.scenario = scenario.name;
    report.epsilon = invocation.epsilon;
    report.shots = *invocation.shots;
    report.seed = seed;

    for (std::size_t p = 0; p < scenario.pvms.size(); ++p) {
        const Pvm &pvm = scenario.pvms[p];
        // separate seed stream space per measurement setting
        const SampleConfig cfg{*invocation.shots, seed + p, invocation.shards};
        const CountTable counts = sample_sequential(scenario.initial, povm, pvm.outcomes, cfg);
        for (const auto &outcome : pvm.outcomes) {
            try {
                ConditionalStateEstimate estimate =
                    estimate_conditional_state(counts, povm, basis, outcome.label);
                const EigenSystem eig = hermitian_eig(estimate.state.op());
                ReportState state;
                state.label = outcome.label;
                state.matrix = estimate.state.matrix();
                state.preparation_prob = estimate.state.preparation_prob();
                state.eigenvalues.assign(eig.values.data(),
                                         eig.values.data() + eig.values.size());
                state.entry_stderr = std::move(estimate.entry_stderr);
                report.states.push_back(std::move(state));
                for (const auto &[label, est] : estimate.expectations.estimates)
                    report.events.push_back(
                        {outcome.label + ":" + label, est.mean, est.stderr, false});
            } catch (const InsufficientPostSelectionError &e) {
                err << "note: skipping outcome " << outcome.label << " (" << e.what() << ")\n";
            }
        }
    }
    return emit(report, invocation, out, err);
}

int run_check_command(const CliInvocation &invocation, std::ostream &out, std::ostream &) {
    const auto results = run_self_checks(resolve_seed(invocation));
    bool all_passed = true;
    for (const auto &result : results) {
        out << (result.passed ? "PASS" : "FAIL") << " " << result.name;
        if (!result.passed)
            out << ": " << result.detail;
        out << "\n";
        all_passed &= result.passed;
    }
    out << (all_passed ? "all checks passed" : "CHECKS FAILED") << " (" << results.size()
        << " checks)\n";
    return all_passed ? 0 : 1;
}

} // namespace

int run(const CliInvocation &invocation, std::ostream &out, std::ostream &err) {
    try {
        switch (invocation.command) {
        case CliInvocation::Command::Exact:
            return run_exact_command(invocation, out, err);
        case CliInvocation::Command::Bell:
            return run_bell_command(invocation, out, err);
        case CliInvocation::Command::Sample:
            if (!invocation.shots) {
                err << "error: sample requires --shots\n";
                return 1;
            }
            return run_sample_command(invocation, out, err);
        case CliInvocation::Command::Tomo:
            if (!invocation.shots) {
                err << "error: tomo requires --shots\n";
                return 1;
            }
            return run_tomo_command(invocation, out, err);
        case CliInvocation::Command::Check:
            return run_check_command(invocation, out, err);
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace weakstat
