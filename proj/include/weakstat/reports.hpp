#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakstat/operator_core.hpp"
#include "weakstat/scenarios.hpp"

namespace weakstat {

enum class ReportFormat { Text, Json, Csv };

/// Round to `digits` digits after the decimal point. Report numbers pass
/// through this so serialized output is stable and matches the documented
/// 10-digit precision.
double round_sig(double v, int digits = 10);

/// Render a report number (rounded, trailing zeros stripped).
std::string format_number(double v);

struct ReportEvent {
    std::string label;
    double value = 0.0;
    std::optional<double> stderr_value;
    /// Probability-like values get the "quasi" marker when negative;
    /// expectation estimates are legitimately signed and do not.
    bool probability_like = true;
};

struct ReportState {
    std::string label;
    Matrix matrix;
    double preparation_prob = 0.0;
    std::vector<double> eigenvalues; // ascending
    std::optional<RealMatrix> entry_stderr;
};

/// Serializable result of one invocation. JSON fields:
/// {scenario, epsilon?, shots?, seed?, events[], conditional_states[], chsh?}
struct Report {
    std::string scenario;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    std::vector<ReportEvent> events;
    std::vector<ReportState> states;
    std::optional<double> chsh;
};

/// Collect an exact scenario run into a report.
Report report_from_scenario(const ScenarioReport &result);

std::string render(const Report &report, ReportFormat format);

} // namespace weakstat
