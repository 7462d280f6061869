#include "trialmeta/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace trialmeta::report {

namespace {

std::string fmt(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt3(double v) { return fmt(v, 3); }

}  // namespace

ForestPlotModel build_forest_model(const std::vector<stats::EffectEstimate>& estimates,
                                   const stats::PooledEstimate& pooled) {
    if (estimates.empty()) throw ContractViolation("build_forest_model: no estimates");
    ForestPlotModel model;
    model.measure = estimates.front().measure;
    double sum_w = 0.0;
    for (const auto& e : estimates) {
        if (e.measure != model.measure)
            throw ContractViolation("build_forest_model: mixed effect measures");
        sum_w += 1.0 / e.variance;
    }
    for (const auto& e : estimates) {
        ForestRow row;
        row.study_id = e.study_id;
        row.point = e.point;
        double half = stats::kZ95 * std::sqrt(e.variance);
        row.ci_low = e.point - half;
        row.ci_high = e.point + half;
        row.weight_pct = 100.0 * (1.0 / e.variance) / sum_w;
        model.rows.push_back(row);
    }
    model.pooled_point = pooled.point;
    model.pooled_ci_low = pooled.ci_low;
    model.pooled_ci_high = pooled.ci_high;
    return model;
}

double axis_position(const ForestPlotModel& model, double value) {
    // Analysis scale is already log for odds ratios, so positioning is linear
    // in the stored values; only the labels differ.
    double lo = model.log_scale() ? 0.0 : 0.0;  // null effect at 0 on the analysis scale
    double min_v = lo, max_v = lo;
    for (const auto& r : model.rows) {
        min_v = std::min(min_v, r.ci_low);
        max_v = std::max(max_v, r.ci_high);
    }
    min_v = std::min(min_v, model.pooled_ci_low);
    max_v = std::max(max_v, model.pooled_ci_high);
    if (max_v == min_v) {
        min_v -= 1.0;
        max_v += 1.0;
    }
    double pad = 0.05 * (max_v - min_v);
    min_v -= pad;
    max_v += pad;
    return kSvgPlotLeft + (value - min_v) / (max_v - min_v) * (kSvgPlotRight - kSvgPlotLeft);
}

std::string render_forest_svg(const ForestPlotModel& model) {
    const int n = static_cast<int>(model.rows.size());
    const int height = kSvgTopMargin + (n + 2) * kSvgRowHeight + 60;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kSvgWidth
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";

    const double null_x = axis_position(model, 0.0);
    const int axis_y = kSvgTopMargin + (n + 2) * kSvgRowHeight + 10;

    // null-effect reference line (odds ratio 1 on the display scale, 0 for SMD)
    svg << "<line x1=\"" << fmt(null_x) << "\" y1=\"" << kSvgTopMargin - 10 << "\" x2=\""
        << fmt(null_x) << "\" y2=\"" << axis_y << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";

    auto display = [&](double v) { return model.log_scale() ? std::exp(v) : v; };

    int y = kSvgTopMargin;
    for (const auto& row : model.rows) {
        const double cy = y + kSvgRowHeight / 2.0;
        const double x_lo = axis_position(model, row.ci_low);
        const double x_hi = axis_position(model, row.ci_high);
        const double x_pt = axis_position(model, row.point);
        const double side = 6.0 + row.weight_pct * 0.10;
        svg << "<text x=\"10\" y=\"" << fmt(cy + 4) << "\">" << row.study_id << "</text>\n";
        svg << "<line x1=\"" << fmt(x_lo) << "\" y1=\"" << fmt(cy) << "\" x2=\"" << fmt(x_hi)
            << "\" y2=\"" << fmt(cy) << "\" stroke=\"black\"/>\n";
        svg << "<rect class=\"study-marker\" x=\"" << fmt(x_pt - side / 2) << "\" y=\""
            << fmt(cy - side / 2) << "\" width=\"" << fmt(side) << "\" height=\"" << fmt(side)
            << "\" fill=\"#2b6cb0\"/>\n";
        svg << "<text x=\"" << kSvgPlotRight + 12 << "\" y=\"" << fmt(cy + 4) << "\">"
            << fmt(display(row.point)) << " [" << fmt(display(row.ci_low)) << ", "
            << fmt(display(row.ci_high)) << "]  " << fmt(row.weight_pct, 1) << "%</text>\n";
        y += kSvgRowHeight;
    }

    // pooled diamond
    {
        const double cy = y + kSvgRowHeight;
        const double x_lo = axis_position(model, model.pooled_ci_low);
        const double x_hi = axis_position(model, model.pooled_ci_high);
        const double x_pt = axis_position(model, model.pooled_point);
        const double h = 8.0;
        svg << "<text x=\"10\" y=\"" << fmt(cy + 4) << "\">Pooled (fixed effects)</text>\n";
        svg << "<polygon class=\"pooled-diamond\" points=\"" << fmt(x_lo) << "," << fmt(cy) << " "
            << fmt(x_pt) << "," << fmt(cy - h) << " " << fmt(x_hi) << "," << fmt(cy) << " "
            << fmt(x_pt) << "," << fmt(cy + h) << "\" fill=\"#1a202c\"/>\n";
        svg << "<text x=\"" << kSvgPlotRight + 12 << "\" y=\"" << fmt(cy + 4) << "\">"
            << fmt(display(model.pooled_point)) << " [" << fmt(display(model.pooled_ci_low)) << ", "
            << fmt(display(model.pooled_ci_high)) << "]</text>\n";
    }

    // axis with ticks at the extremes and the null effect
    double min_v = model.pooled_ci_low, max_v = model.pooled_ci_high;
    for (const auto& r : model.rows) {
        min_v = std::min(min_v, r.ci_low);
        max_v = std::max(max_v, r.ci_high);
    }
    svg << "<line x1=\"" << kSvgPlotLeft << "\" y1=\"" << axis_y << "\" x2=\"" << kSvgPlotRight
        << "\" y2=\"" << axis_y << "\" stroke=\"black\"/>\n";
    for (double tick : {min_v, 0.0, max_v}) {
        double x = axis_position(model, tick);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << axis_y << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << axis_y + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(x - 10) << "\" y=\"" << axis_y + 18 << "\">"
            << fmt(display(tick)) << "</text>\n";
    }
    svg << "<text x=\"" << kSvgPlotLeft << "\" y=\"" << axis_y + 36 << "\">"
        << (model.log_scale() ? "Odds ratio (log scale)" : "Standardized mean difference")
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string forest_model_to_json(const ForestPlotModel& model) {
    nlohmann::json j;
    j["measure"] = stats::to_string(model.measure);
    j["scale"] = model.log_scale() ? "log" : "linear";
    j["rows"] = nlohmann::json::array();
    for (const auto& r : model.rows)
        j["rows"].push_back({{"study_id", r.study_id},
                             {"point", r.point},
                             {"ci_low", r.ci_low},
                             {"ci_high", r.ci_high},
                             {"weight_pct", r.weight_pct}});
    j["pooled"] = {{"point", model.pooled_point},
                   {"ci_low", model.pooled_ci_low},
                   {"ci_high", model.pooled_ci_high}};
    return j.dump(2);
}

namespace {

void render_match_table(std::ostringstream& out, const std::string& title,
                        const evaluation::MatchReport& match, const evaluation::MseReport& mse,
                        const std::vector<std::string>& field_names) {
    out << "## " << title << " (n=" << match.n_records << ")\n\n";
    out << "| Metric | Value |\n|---|---|\n";
    out << "| Exact Match - Total | " << fmt3(match.total_exact) << " |\n";
    for (const auto& name : field_names) {
        double v = match.per_field_exact.count(name) ? match.per_field_exact.at(name) : 0.0;
        out << "| Exact Match - " << name << " | " << fmt3(v) << " |\n";
    }
    for (const auto& [k, v] : match.partial_at_k)
        out << "| Partial Match (>=" << k << " fields) | " << fmt3(v) << " |\n";
    if (mse.empty()) {
        out << "| MSE | - |\n";
    } else {
        out << "| MSE | " << fmt3(mse.mse) << " (" << fmt3(mse.ci_low) << ", "
            << fmt3(mse.ci_high) << ") |\n";
    }
    out << "| # Unknowns | " << match.n_unknown_mistakes << " |\n";
    out << "| % Complete | " << fmt(match.pct_complete) << " |\n\n";
}

}  // namespace

std::string render_tables(const evaluation::EvaluationReport& report) {
    std::ostringstream out;
    out << "## Outcome Type Inference (n=" << report.types.n_records << ")\n\n";
    out << "| Metric | Value |\n|---|---|\n";
    out << "| Accuracy | " << fmt3(report.types.accuracy) << " |\n";
    out << "| F1 - Binary | " << fmt3(report.types.f1_binary) << " |\n";
    out << "| F1 - Continuous | " << fmt3(report.types.f1_continuous) << " |\n";
    out << "| # Unknowns | " << report.types.n_unknowns << " |\n\n";

    render_match_table(out, "Binary Outcomes", report.binary_match, report.binary_mse,
                       BinaryFinding::field_names());
    render_match_table(out, "Continuous Outcomes", report.continuous_match, report.continuous_mse,
                       ContinuousFinding::field_names());

    out << "## Error Breakdown\n\n";
    out << "| Category | Count |\n|---|---|\n";
    out << "| Incorrect numbers | " << report.errors.wrong_number << " |\n";
    out << "| Unknown for known reference | " << report.errors.unknown_for_known << " |\n";
    out << "| Value for unknown reference | " << report.errors.value_for_unknown_reference
        << " |\n";
    out << "| Bad output format | " << report.errors.bad_format << " |\n";
    out << "| Binary predicted as continuous | " << report.errors.wrong_type_binary_as_continuous
        << " |\n";
    out << "| Continuous predicted as binary | " << report.errors.wrong_type_continuous_as_binary
        << " |\n";
    out << "| Type unknown | " << report.errors.type_unknown << " |\n";
    return out.str();
}

}  // namespace trialmeta::report
