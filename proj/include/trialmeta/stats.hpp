#ifndef TRIALMETA_STATS_HPP
#define TRIALMETA_STATS_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trialmeta/types.hpp"

namespace trialmeta::stats {

enum class Measure { log_odds_ratio, smd };

std::string to_string(Measure m);

struct EffectEstimate {
    Measure measure = Measure::log_odds_ratio;
    double point = 0.0;
    double variance = 0.0;  // strictly positive
    std::string study_id;
};

struct PooledEstimate {
    double point = 0.0;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int k = 0;
};

inline constexpr double kZ95 = 1.959964;

/// Log odds ratio with Haldane-Anscombe correction: when any cell of the 2x2
/// table is zero, 0.5 is added to all four cells.
EffectEstimate log_odds_ratio(const BinaryFinding& f, const std::string& study_id = "");

/// Hedges g: Cohen's d against the pooled SD, scaled by the small-sample
/// correction J = 1 - 3/(4(n1+n2)-9).
EffectEstimate standardized_mean_difference(const ContinuousFinding& f,
                                            const std::string& study_id = "");

/// Back-calculates an SD from a 95% confidence interval of a mean:
/// sqrt(n) * width / divisor, divisor = 3.92 for n > 60, else twice the
/// two-sided t quantile at df = n-1.
double sd_from_ci(int n, double ci_low, double ci_high, double level = 0.95);

/// Inverse-variance weighted fixed-effects pool with a normal-quantile CI.
PooledEstimate fixed_effect_pool(const std::vector<EffectEstimate>& estimates);

/// Outcome of attempting an effect estimate from (possibly partial) data.
struct EstimateResult {
    std::optional<EffectEstimate> estimate;
    std::string skip_reason;  // non-empty when absent: "incomplete", "double_zero", ...
    bool complete() const { return estimate.has_value(); }
};

EstimateResult estimate_for_finding(OutcomeType type,
                                    const std::optional<BinaryFinding>& binary,
                                    const std::optional<ContinuousFinding>& continuous,
                                    const std::string& study_id = "");

/// Dispatches on the record's reference annotation.
EstimateResult estimate_for_record(const ICORecord& ico);

}  // namespace trialmeta::stats

#endif
