#include "trialmeta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

namespace trialmeta::stats {

std::string to_string(Measure m) {
    return m == Measure::log_odds_ratio ? "log_odds_ratio" : "smd";
}

namespace {

double require_known(const MaybeNumber& v, const char* what) {
    if (!v.is_known()) throw DataError(std::string("incomplete data: ") + what + " is unknown");
    return v.value();
}

double require_count(const MaybeNumber& v, const char* what) {
    double x = require_known(v, what);
    if (x < 0 || std::floor(x) != x)
        throw DomainError(std::string(what) + " must be a non-negative integer, got " +
                          v.to_string());
    return x;
}

}  // namespace

EffectEstimate log_odds_ratio(const BinaryFinding& f, const std::string& study_id) {
    double ie = require_count(f.intervention_events, "intervention_events");
    double ign = require_count(f.intervention_group_size, "intervention_group_size");
    double ce = require_count(f.comparator_events, "comparator_events");
    double cgn = require_count(f.comparator_group_size, "comparator_group_size");
    if (ign <= 0 || cgn <= 0) throw DomainError("group sizes must be positive");
    if (ie > ign || ce > cgn) throw DomainError("events exceed group size");

    double a = ie, b = ign - ie, c = ce, d = cgn - ce;
    if (a == 0 || b == 0 || c == 0 || d == 0) {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    EffectEstimate est;
    est.measure = Measure::log_odds_ratio;
    est.point = std::log((a * d) / (b * c));
    est.variance = 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d;
    est.study_id = study_id;
    return est;
}

EffectEstimate standardized_mean_difference(const ContinuousFinding& f,
                                            const std::string& study_id) {
    double m1 = require_known(f.intervention_mean, "intervention_mean");
    double s1 = require_known(f.intervention_sd, "intervention_sd");
    double n1 = require_count(f.intervention_group_size, "intervention_group_size");
    double m2 = require_known(f.comparator_mean, "comparator_mean");
    double s2 = require_known(f.comparator_sd, "comparator_sd");
    double n2 = require_count(f.comparator_group_size, "comparator_group_size");
    if (s1 < 0 || s2 < 0) throw DomainError("standard deviations must be non-negative");
    if (n1 < 2 || n2 < 2) throw DomainError("group sizes must be at least 2");

    double pooled_var = ((n1 - 1) * s1 * s1 + (n2 - 1) * s2 * s2) / (n1 + n2 - 2);
    double s = std::sqrt(pooled_var);
    if (s == 0) throw DomainError("degenerate variance: pooled SD is zero");
    double d = (m1 - m2) / s;
    double n = n1 + n2;
    double j = 1.0 - 3.0 / (4.0 * n - 9.0);

    EffectEstimate est;
    est.measure = Measure::smd;
    est.point = j * d;
    est.variance = j * j * (n / (n1 * n2) + d * d / (2.0 * n));
    est.study_id = study_id;
    return est;
}

double sd_from_ci(int n, double ci_low, double ci_high, double level) {
    if (n < 2) throw DomainError("sd_from_ci: n must be at least 2");
    if (!(ci_high > ci_low)) throw DomainError("sd_from_ci: ci_high must exceed ci_low");
    if (!(level > 0 && level < 1)) throw DomainError("sd_from_ci: level must be in (0,1)");
    double width = ci_high - ci_low;
    double divisor;
    if (n > 60 && level == 0.95) {
        divisor = 3.92;
    } else {
        boost::math::students_t dist(n - 1);
        divisor = 2.0 * boost::math::quantile(dist, 0.5 + level / 2.0);
    }
    return std::sqrt(static_cast<double>(n)) * width / divisor;
}

PooledEstimate fixed_effect_pool(const std::vector<EffectEstimate>& estimates) {
    if (estimates.empty()) throw DomainError("fixed_effect_pool: no estimates");
    Measure measure = estimates.front().measure;
    for (const auto& e : estimates) {
        if (e.measure != measure)
            throw ContractViolation("fixed_effect_pool: mixed effect measures");
        if (!(e.variance > 0) || !std::isfinite(e.variance) || !std::isfinite(e.point))
            throw DomainError("fixed_effect_pool: estimate with non-positive or non-finite variance");
    }
    // accumulate in a canonical order so the pooled value is bitwise
    // independent of the input permutation
    std::vector<std::pair<double, double>> terms;  // (variance, point)
    terms.reserve(estimates.size());
    for (const auto& e : estimates) terms.emplace_back(e.variance, e.point);
    std::sort(terms.begin(), terms.end());
    double sum_w = 0.0, sum_wt = 0.0;
    for (const auto& [variance, point] : terms) {
        double w = 1.0 / variance;
        sum_w += w;
        sum_wt += w * point;
    }
    PooledEstimate pooled;
    pooled.point = sum_wt / sum_w;
    pooled.variance = 1.0 / sum_w;
    double half = kZ95 * std::sqrt(pooled.variance);
    pooled.ci_low = pooled.point - half;
    pooled.ci_high = pooled.point + half;
    pooled.k = static_cast<int>(estimates.size());
    return pooled;
}

EstimateResult estimate_for_finding(OutcomeType type,
                                    const std::optional<BinaryFinding>& binary,
                                    const std::optional<ContinuousFinding>& continuous,
                                    const std::string& study_id) {
    EstimateResult result;
    try {
        if (type == OutcomeType::binary && binary) {
            if (!binary->all_known()) {
                result.skip_reason = "incomplete";
                return result;
            }
            // no events in either arm carries no signal for an odds ratio
            if (binary->intervention_events.value() == 0 &&
                binary->comparator_events.value() == 0) {
                result.skip_reason = "double_zero";
                return result;
            }
            result.estimate = log_odds_ratio(*binary, study_id);
        } else if (type == OutcomeType::continuous && continuous) {
            if (!continuous->all_known()) {
                result.skip_reason = "incomplete";
                return result;
            }
            result.estimate = standardized_mean_difference(*continuous, study_id);
        } else {
            result.skip_reason = "incomplete";
        }
    } catch (const DomainError& e) {
        result.skip_reason = std::string("invalid: ") + e.what();
    } catch (const DataError&) {
        result.skip_reason = "incomplete";
    }
    return result;
}

EstimateResult estimate_for_record(const ICORecord& ico) {
    return estimate_for_finding(ico.reference_type, ico.reference_binary,
                                ico.reference_continuous, ico.document_id);
}

}  // namespace trialmeta::stats
