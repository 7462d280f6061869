#ifndef TRIALMETA_REPORT_HPP
#define TRIALMETA_REPORT_HPP

#include <string>
#include <vector>

#include "trialmeta/evaluation.hpp"
#include "trialmeta/stats.hpp"

namespace trialmeta::report {

struct ForestRow {
    std::string study_id;
    double point = 0.0;     // on the analysis scale (log for odds ratios)
    double ci_low = 0.0;
    double ci_high = 0.0;
    double weight_pct = 0.0;
};

struct ForestPlotModel {
    std::vector<ForestRow> rows;
    double pooled_point = 0.0;
    double pooled_ci_low = 0.0;
    double pooled_ci_high = 0.0;
    stats::Measure measure = stats::Measure::log_odds_ratio;
    bool log_scale() const { return measure == stats::Measure::log_odds_ratio; }
};

ForestPlotModel build_forest_model(const std::vector<stats::EffectEstimate>& estimates,
                                   const stats::PooledEstimate& pooled);

// Fixed layout constants; the renderer is deterministic for a fixed model.
inline constexpr int kSvgWidth = 760;
inline constexpr int kSvgRowHeight = 28;
inline constexpr int kSvgPlotLeft = 220;
inline constexpr int kSvgPlotRight = 600;
inline constexpr int kSvgTopMargin = 40;

/// Pixel x-position of a value on the plot axis for a given model.
double axis_position(const ForestPlotModel& model, double value_on_analysis_scale);

/// Standalone SVG 1.1: one square marker per study sized by weight, CI
/// whiskers, a diamond for the pooled estimate, and a null-effect line.
std::string render_forest_svg(const ForestPlotModel& model);

std::string forest_model_to_json(const ForestPlotModel& model);

/// Markdown tables mirroring the per-task evaluation layout; empty MSE cells
/// render "-".
std::string render_tables(const evaluation::EvaluationReport& report);

}  // namespace trialmeta::report

#endif
