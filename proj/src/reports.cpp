#include "weakstat/reports.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace weakstat {

double round_sig(double v, int digits) {
    if (!std::isfinite(v))
        return v;
    const double scale = std::pow(10.0, digits);
    const double rounded = std::round(v * scale) / scale;
    return rounded == 0.0 ? 0.0 : rounded; // normalize -0
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", round_sig(v));
    return buf;
}

namespace {

std::string format_complex(Complex c) {
    const double re = c.real() == 0.0 ? 0.0 : c.real();
    const double im = c.imag() == 0.0 ? 0.0 : c.imag();
    if (im == 0.0)
        return format_number(re);
    std::string out = format_number(re);
    out += (im < 0.0) ? "-" : "+";
    out += format_number(std::abs(im));
    out += "i";
    return out;
}

nlohmann::json matrix_to_json(const Matrix &m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back({round_sig(m(j, k).real()), round_sig(m(j, k).imag())});
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json real_matrix_to_json(const RealMatrix &m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(round_sig(m(j, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_json(const Report &report) {
    nlohmann::json doc;
    doc["scenario"] = report.scenario;
    if (report.epsilon)
        doc["epsilon"] = round_sig(*report.epsilon);
    if (report.shots)
        doc["shots"] = *report.shots;
    if (report.seed)
        doc["seed"] = *report.seed;
    doc["events"] = nlohmann::json::array();
    for (const auto &event : report.events) {
        nlohmann::json e;
        e["label"] = event.label;
        e["value"] = round_sig(event.value);
        if (event.stderr_value)
            e["stderr"] = round_sig(*event.stderr_value);
        e["quasi"] = event.probability_like && event.value < 0.0;
        doc["events"].push_back(std::move(e));
    }
    doc["conditional_states"] = nlohmann::json::array();
    for (const auto &state : report.states) {
        nlohmann::json s;
        s["label"] = state.label;
        s["preparation_probability"] = round_sig(state.preparation_prob);
        s["matrix"] = matrix_to_json(state.matrix);
        nlohmann::json eig = nlohmann::json::array();
        bool negative = false;
        for (const double v : state.eigenvalues) {
            eig.push_back(round_sig(v));
            negative |= v < 0.0;
        }
        s["eigenvalues"] = std::move(eig);
        s["quasi"] = negative;
        if (state.entry_stderr)
            s["entry_stderr"] = real_matrix_to_json(*state.entry_stderr);
        doc["conditional_states"].push_back(std::move(s));
    }
    if (report.chsh)
        doc["chsh"] = round_sig(*report.chsh);
    return doc.dump(2) + "\n";
}

std::string render_csv(const Report &report) {
    std::ostringstream out;
    out << "label,value,stderr\n";
    for (const auto &event : report.events) {
        out << event.label << "," << format_number(round_sig(event.value)) << ",";
        if (event.stderr_value)
            out << format_number(round_sig(*event.stderr_value));
        out << "\n";
    }
    for (const auto &state : report.states) {
        out << "p(" << state.label << ")," << format_number(round_sig(state.preparation_prob))
            << ",\n";
        for (std::size_t k = 0; k < state.eigenvalues.size(); ++k)
            out << "eig(" << state.label << ")[" << k << "],"
                << format_number(round_sig(state.eigenvalues[k])) << ",\n";
        for (Eigen::Index j = 0; j < state.matrix.rows(); ++j)
            for (Eigen::Index k = 0; k < state.matrix.cols(); ++k) {
                const Complex c = state.matrix(j, k);
                out << state.label << "[" << j << "," << k << "].re,"
                    << format_number(round_sig(c.real())) << ",";
                if (state.entry_stderr)
                    out << format_number(round_sig((*state.entry_stderr)(j, k)));
                out << "\n";
                out << state.label << "[" << j << "," << k << "].im,"
                    << format_number(round_sig(c.imag())) << ",";
                if (state.entry_stderr)
                    out << format_number(round_sig((*state.entry_stderr)(j, k)));
                out << "\n";
            }
    }
    if (report.chsh)
        out << "chsh," << format_number(round_sig(*report.chsh)) << ",\n";
    return out.str();
}

std::string render_text(const Report &report) {
    std::ostringstream out;
    out << "scenario: " << report.scenario << "\n";
    if (report.epsilon)
        out << "epsilon: " << format_number(*report.epsilon) << "\n";
    if (report.shots)
        out << "shots: " << *report.shots << "\n";
    if (report.seed)
        out << "seed: " << *report.seed << "\n";
    if (!report.events.empty()) {
        std::size_t width = 5;
        for (const auto &event : report.events)
            width = std::max(width, event.label.size());
        out << "\nevents:\n";
        for (const auto &event : report.events) {
            out << "  " << std::left << std::setw(static_cast<int>(width) + 2)
                << event.label << std::right << std::setw(14)
                << format_number(round_sig(event.value));
            if (event.stderr_value)
                out << "  +/- " << format_number(round_sig(*event.stderr_value));
            if (event.probability_like && event.value < 0.0)
                out << "  quasi";
            out << "\n";
        }
    }
    for (const auto &state : report.states) {
        out << "\nconditional state " << state.label
            << "  p(f|i) = " << format_number(round_sig(state.preparation_prob)) << "\n";
        for (Eigen::Index j = 0; j < state.matrix.rows(); ++j) {
            out << "  [";
            for (Eigen::Index k = 0; k < state.matrix.cols(); ++k) {
                if (k)
                    out << "  ";
                out << std::setw(14) << format_complex(Complex(
                    round_sig(state.matrix(j, k).real()), round_sig(state.matrix(j, k).imag())));
            }
            out << " ]\n";
        }
        out << "  eigenvalues:";
        bool negative = false;
        for (const double v : state.eigenvalues) {
            out << " " << format_number(round_sig(v));
            negative |= v < 0.0;
        }
        if (negative)
            out << "  quasi";
        out << "\n";
        if (state.entry_stderr) {
            out << "  entry stderr:\n";
            for (Eigen::Index j = 0; j < state.entry_stderr->rows(); ++j) {
                out << "  [";
                for (Eigen::Index k = 0; k < state.entry_stderr->cols(); ++k) {
                    if (k)
                        out << "  ";
                    out << std::setw(12) << format_number(round_sig((*state.entry_stderr)(j, k)));
                }
                out << " ]\n";
            }
        }
    }
    if (report.chsh)
        out << "\nchsh: " << format_number(round_sig(*report.chsh)) << "\n";
    return out.str();
}

} // namespace

Report report_from_scenario(const ScenarioReport &result) {
    Report report;
    report.scenario = result.name;
    for (const auto &[label, value] : result.exact_values)
        report.events.push_back({label, value, std::nullopt, true});
    for (const auto &[label, state] : result.conditional_states) {
        ReportState rs;
        rs.label = label;
        rs.matrix = state.matrix();
        rs.preparation_prob = state.preparation_prob();
        for (const auto &[eig_label, values] : result.eigen_summaries)
            if (eig_label == label)
                rs.eigenvalues = values;
        report.states.push_back(std::move(rs));
    }
    report.chsh = result.aggregate;
    return report;
}

std::string render(const Report &report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Json:
        return render_json(report);
    case ReportFormat::Csv:
        return render_csv(report);
    case ReportFormat::Text:
        break;
    }
    return render_text(report);
}

} // namespace weakstat
