#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "trialmeta/report.hpp"
#include "trialmeta/xml.hpp"

using namespace trialmeta;
using stats::EffectEstimate;
using stats::Measure;

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
    int count = 0;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::vector<EffectEstimate> sample_estimates() {
    return {
        {Measure::log_odds_ratio, 0.4, 0.2, "Trial A"},
        {Measure::log_odds_ratio, -0.1, 0.4, "Trial B"},
        {Measure::log_odds_ratio, 0.8, 0.3, "Trial C"},
    };
}

}  // namespace

TEST_CASE("forest weights are normalized inverse variances") {
    std::vector<EffectEstimate> equal = {
        {Measure::smd, 0.5, 0.3, "a"},
        {Measure::smd, 0.2, 0.3, "b"},
    };
    auto model = report::build_forest_model(equal, stats::fixed_effect_pool(equal));
    REQUIRE(model.rows.size() == 2);
    CHECK(model.rows[0].weight_pct == doctest::Approx(50.0));
    CHECK(model.rows[1].weight_pct == doctest::Approx(50.0));

    std::vector<EffectEstimate> uneven = {
        {Measure::smd, 0.5, 1.0, "a"},
        {Measure::smd, 0.2, 3.0, "b"},
    };
    auto model2 = report::build_forest_model(uneven, stats::fixed_effect_pool(uneven));
    CHECK(model2.rows[0].weight_pct == doctest::Approx(75.0));
    CHECK(model2.rows[1].weight_pct == doctest::Approx(25.0));

    double sum = 0;
    for (const auto& r : model2.rows) sum += r.weight_pct;
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-4));
}

TEST_CASE("single-study forest equals the pooled row") {
    std::vector<EffectEstimate> one = {{Measure::smd, 0.5, 0.3, "solo"}};
    auto pooled = stats::fixed_effect_pool(one);
    auto model = report::build_forest_model(one, pooled);
    REQUIRE(model.rows.size() == 1);
    CHECK(model.rows[0].weight_pct == doctest::Approx(100.0));
    CHECK(model.rows[0].point == doctest::Approx(model.pooled_point));
    CHECK(model.rows[0].ci_low == doctest::Approx(model.pooled_ci_low).epsilon(1e-9));
}

TEST_CASE("row confidence intervals contain their points") {
    auto estimates = sample_estimates();
    auto model = report::build_forest_model(estimates, stats::fixed_effect_pool(estimates));
    for (const auto& row : model.rows) {
        CHECK(row.ci_low < row.point);
        CHECK(row.point < row.ci_high);
    }
    CHECK(model.log_scale());
}

TEST_CASE("mixed measures are rejected") {
    std::vector<EffectEstimate> mixed = {
        {Measure::smd, 0.5, 0.3, "a"},
        {Measure::log_odds_ratio, 0.2, 0.3, "b"},
    };
    std::vector<EffectEstimate> smd_only = {mixed[0]};
    CHECK_THROWS_AS(report::build_forest_model(mixed, stats::fixed_effect_pool(smd_only)),
                    ContractViolation);
}

TEST_CASE("svg output is deterministic well-formed xml with k squares and a diamond") {
    auto estimates = sample_estimates();
    auto model = report::build_forest_model(estimates, stats::fixed_effect_pool(estimates));
    std::string svg = report::render_forest_svg(model);
    CHECK(svg == report::render_forest_svg(model));

    CHECK_NOTHROW(xml::parse(svg));
    CHECK(count_occurrences(svg, "class=\"study-marker\"") == 3);
    CHECK(count_occurrences(svg, "class=\"pooled-diamond\"") == 1);
}

TEST_CASE("null-effect reference line sits at the axis position of zero") {
    auto estimates = sample_estimates();
    auto model = report::build_forest_model(estimates, stats::fixed_effect_pool(estimates));
    std::string svg = report::render_forest_svg(model);
    char expected[64];
    std::snprintf(expected, sizeof(expected), "%.2f", report::axis_position(model, 0.0));
    CHECK(svg.find(std::string("x1=\"") + expected + "\"") != std::string::npos);
}

TEST_CASE("diamond center matches the pooled point position") {
    auto estimates = sample_estimates();
    auto pooled = stats::fixed_effect_pool(estimates);
    auto model = report::build_forest_model(estimates, pooled);
    std::string svg = report::render_forest_svg(model);

    auto pos = svg.find("class=\"pooled-diamond\" points=\"");
    REQUIRE(pos != std::string::npos);
    pos = svg.find("points=\"", pos) + 8;
    auto end = svg.find('"', pos);
    std::istringstream points(svg.substr(pos, end - pos));
    // points: left, top, right, bottom as "x,y"
    std::vector<double> xs;
    std::string pair;
    while (points >> pair) xs.push_back(std::stod(pair.substr(0, pair.find(','))));
    REQUIRE(xs.size() == 4);
    double center = xs[1];  // top vertex x == pooled point position
    CHECK(std::abs(center - report::axis_position(model, pooled.point)) <= 0.5);
}

TEST_CASE("markdown tables mirror the per-task layout") {
    evaluation::EvaluationReport rep;
    rep.types.accuracy = 1.0;
    rep.types.f1_binary = 1.0;
    rep.types.f1_continuous = 1.0;
    rep.types.n_records = 4;
    rep.binary_match.total_exact = 1.0;
    rep.binary_match.per_field_exact["intervention_events"] = 1.0;
    rep.binary_match.partial_at_k[1] = 1.0;
    rep.binary_match.pct_complete = 100.0;
    rep.binary_match.n_records = 2;
    rep.binary_mse.n_pairs = 2;
    rep.binary_mse.mse = 0.0;
    // continuous side left empty: renders "-" for MSE

    std::string md = report::render_tables(rep);
    CHECK(md.find("| Accuracy | 1.000 |") != std::string::npos);
    CHECK(md.find("| Exact Match - Total | 1.000 |") != std::string::npos);
    CHECK(md.find("| MSE | - |") != std::string::npos);
    CHECK(md.find("| MSE | 0.000 (0.000, 0.000) |") != std::string::npos);
    CHECK(md.find("| % Complete | 100.00 |") != std::string::npos);

    // Total row precedes the per-field rows
    auto total_pos = md.find("Exact Match - Total");
    auto field_pos = md.find("Exact Match - intervention_events");
    REQUIRE(total_pos != std::string::npos);
    REQUIRE(field_pos != std::string::npos);
    CHECK(total_pos < field_pos);
}

TEST_CASE("forest model json serialization") {
    auto estimates = sample_estimates();
    auto model = report::build_forest_model(estimates, stats::fixed_effect_pool(estimates));
    std::string json = report::forest_model_to_json(model);
    CHECK(json.find("\"measure\": \"log_odds_ratio\"") != std::string::npos);
    CHECK(json.find("\"scale\": \"log\"") != std::string::npos);
    CHECK(json.find("Trial A") != std::string::npos);
}
