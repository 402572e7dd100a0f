#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "weakstat/cli.hpp"

namespace {

void add_format_option(CLI::App *cmd, std::string &format) {
    cmd->add_option("--format", format, "Output format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}))
        ->capture_default_str();
}

weakstat::ReportFormat parse_format(const std::string &format) {
    if (format == "json")
        return weakstat::ReportFormat::Json;
    if (format == "csv")
        return weakstat::ReportFormat::Csv;
    return weakstat::ReportFormat::Text;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"weakstat: exact and Monte Carlo weak-measurement statistics"};
    app.require_subcommand(1);

    std::string scenario_ref;
    std::string format = "text";
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    unsigned shards = 1;
    double epsilon = 0.05;
    std::string output_path;

    auto *exact = app.add_subcommand(
        "exact", "Evaluate a scenario exactly (conditional states and query values)");
    exact->add_option("scenario", scenario_ref,
                      "double-slit | bell-chsh | entangled:d=<n> | path to a .ws file")
        ->required();

    auto *sample = app.add_subcommand(
        "sample", "Sample weak measurements of the initial state and estimate expectations");
    sample->add_option("scenario", scenario_ref, "Scenario name or .ws file")->required();

    auto *bell = app.add_subcommand(
        "bell", "Print the Bell joint quasi-probability table and the CHSH value");

    auto *tomo = app.add_subcommand(
        "tomo", "Sample weak-then-final sequences and reconstruct each conditional state");
    tomo->add_option("scenario", scenario_ref, "Scenario name or .ws file")->required();

    auto *check = app.add_subcommand("check", "Run the invariant self-test suite");

    for (auto *cmd : {exact, sample, bell, tomo, check}) {
        add_format_option(cmd, format);
        cmd->add_option("--output", output_path, "Write the report to a file");
        cmd->add_option("--seed", seed, "RNG seed (WEAKSTAT_SEED overrides the default)");
    }
    for (auto *cmd : {sample, tomo}) {
        cmd->add_option("--shots", shots, "Number of Monte Carlo shots")->required();
        cmd->add_option("--epsilon", epsilon, "Weak measurement strength")
            ->capture_default_str();
        cmd->add_option("--shards", shards, "Worker count (does not change results)")
            ->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    weakstat::CliInvocation invocation;
    invocation.scenario_ref = scenario_ref;
    invocation.format = parse_format(format);
    invocation.epsilon = epsilon;
    invocation.shards = shards;
    if (!output_path.empty())
        invocation.output_path = output_path;

    CLI::App *cmd = app.get_subcommands().front();
    if (cmd == exact)
        invocation.command = weakstat::CliInvocation::Command::Exact;
    else if (cmd == sample)
        invocation.command = weakstat::CliInvocation::Command::Sample;
    else if (cmd == bell)
        invocation.command = weakstat::CliInvocation::Command::Bell;
    else if (cmd == tomo)
        invocation.command = weakstat::CliInvocation::Command::Tomo;
    else
        invocation.command = weakstat::CliInvocation::Command::Check;

    if (const CLI::Option *opt = cmd->get_option_no_throw("--shots"); opt && opt->count())
        invocation.shots = shots;
    if (const CLI::Option *opt = cmd->get_option_no_throw("--seed"); opt && opt->count())
        invocation.seed = seed;

    return weakstat::run(invocation, std::cout, std::cerr);
}
