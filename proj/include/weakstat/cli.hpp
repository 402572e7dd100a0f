#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "weakstat/reports.hpp"

namespace weakstat {

/// Parsed command line. Seed resolution order: explicit --seed, then the
/// WEAKSTAT_SEED environment variable, then 0.
struct CliInvocation {
    enum class Command { Exact, Sample, Bell, Tomo, Check };

    Command command = Command::Exact;
    std::string scenario_ref; // builtin name or .ws file path
    std::optional<std::uint64_t> shots;
    double epsilon = 0.05;
    std::optional<std::uint64_t> seed;
    unsigned shards = 1;
    ReportFormat format = ReportFormat::Text;
    std::optional<std::string> output_path;
};

/// Execute one invocation. Returns 0 on success, 1 on diagnostics or runtime
/// errors (reported on `err`, never as a stack trace). Usage errors are the
/// argv parser's job and exit with 2.
int run(const CliInvocation &invocation, std::ostream &out, std::ostream &err);

} // namespace weakstat
