#include "trialmeta/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace trialmeta::evaluation {

namespace {

using extraction::Finding;

// Pairs each reference with its trace; every reference must have exactly one
// trace and vice versa.
std::vector<const ExtractionTrace*> align(const std::vector<ExtractionTrace>& predictions,
                                          const std::vector<ICORecord>& references) {
    std::map<std::string, const ExtractionTrace*> by_key;
    for (const auto& t : predictions) by_key[t.record_key] = &t;
    std::vector<const ExtractionTrace*> aligned;
    std::string missing;
    for (const auto& r : references) {
        auto it = by_key.find(record_key(r));
        if (it == by_key.end()) {
            missing += (missing.empty() ? "" : ", ") + record_key(r);
            continue;
        }
        aligned.push_back(it->second);
        by_key.erase(it);
    }
    if (!missing.empty())
        throw ContractViolation("predictions missing for records: " + missing);
    if (!by_key.empty()) {
        std::string extra;
        for (const auto& [k, _] : by_key) extra += (extra.empty() ? "" : ", ") + k;
        throw ContractViolation("predictions without matching records: " + extra);
    }
    return aligned;
}

double f1_for_class(const std::vector<const ExtractionTrace*>& preds,
                    const std::vector<ICORecord>& refs, OutcomeType cls) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < refs.size(); ++i) {
        bool pred_pos = preds[i]->inferred_type == cls;
        bool ref_pos = refs[i].reference_type == cls;
        if (pred_pos && ref_pos) ++tp;
        else if (pred_pos) ++fp;
        else if (ref_pos) ++fn;
    }
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / (tp + fp);
    double recall = static_cast<double>(tp) / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

std::vector<MaybeNumber> fields_of(const Finding& f) {
    return std::visit([](const auto& x) { return x.fields(); }, f);
}

stats::EstimateResult estimate_for_prediction(const ExtractionTrace& trace, OutcomeType shape) {
    Finding f = prediction_in_shape(trace, shape);
    if (shape == OutcomeType::binary)
        return stats::estimate_for_finding(shape, std::get<BinaryFinding>(f), std::nullopt,
                                           trace.document_id);
    return stats::estimate_for_finding(shape, std::nullopt, std::get<ContinuousFinding>(f),
                                       trace.document_id);
}

}  // namespace

Finding prediction_in_shape(const ExtractionTrace& trace, OutcomeType shape) {
    if (trace.merged) {
        bool is_binary = std::holds_alternative<BinaryFinding>(*trace.merged);
        if ((shape == OutcomeType::binary) == is_binary) return *trace.merged;
    }
    if (shape == OutcomeType::binary) return BinaryFinding{};
    return ContinuousFinding{};
}

TypeMetrics score_types(const std::vector<ExtractionTrace>& predictions,
                        const std::vector<ICORecord>& references) {
    auto aligned = align(predictions, references);
    TypeMetrics m;
    m.n_records = static_cast<int>(references.size());
    if (references.empty()) return m;
    int correct = 0;
    for (size_t i = 0; i < references.size(); ++i) {
        if (aligned[i]->inferred_type == references[i].reference_type) ++correct;
        if (aligned[i]->inferred_type == OutcomeType::unknown &&
            references[i].reference_type != OutcomeType::unknown)
            ++m.n_unknowns;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(references.size());
    m.f1_binary = f1_for_class(aligned, references, OutcomeType::binary);
    m.f1_continuous = f1_for_class(aligned, references, OutcomeType::continuous);
    return m;
}

MatchReport score_findings(const std::vector<ExtractionTrace>& predictions,
                           const std::vector<ICORecord>& references, OutcomeType shape) {
    if (shape == OutcomeType::unknown)
        throw ContractViolation("score_findings: shape must be binary or continuous");
    auto aligned = align(predictions, references);

    const auto& names = shape == OutcomeType::binary ? BinaryFinding::field_names()
                                                     : ContinuousFinding::field_names();
    const int nfields = static_cast<int>(names.size());

    MatchReport report;
    std::map<std::string, int> field_hits;
    std::map<int, int> at_least_k;
    int exact = 0;
    int model_computable = 0, reference_computable = 0;

    for (size_t i = 0; i < references.size(); ++i) {
        const ICORecord& ref = references[i];
        if (ref.reference_type != shape) continue;
        ++report.n_records;

        std::vector<MaybeNumber> ref_fields =
            shape == OutcomeType::binary
                ? ref.reference_binary.value_or(BinaryFinding{}).fields()
                : ref.reference_continuous.value_or(ContinuousFinding{}).fields();
        std::vector<MaybeNumber> model_fields = fields_of(prediction_in_shape(*aligned[i], shape));

        int matches = 0;
        for (int f = 0; f < nfields; ++f) {
            bool match = model_fields[f] == ref_fields[f];
            if (match) {
                ++matches;
                ++field_hits[names[f]];
            }
            if (!model_fields[f].is_known() && ref_fields[f].is_known())
                ++report.n_unknown_mistakes;
        }
        if (matches == nfields) ++exact;
        for (int k = 1; k <= matches; ++k) ++at_least_k[k];

        if (stats::estimate_for_finding(shape, ref.reference_binary, ref.reference_continuous)
                .complete()) {
            ++reference_computable;
            if (estimate_for_prediction(*aligned[i], shape).complete()) ++model_computable;
        }
    }

    if (report.n_records > 0) {
        double n = report.n_records;
        report.total_exact = exact / n;
        for (const auto& name : names) report.per_field_exact[name] = field_hits[name] / n;
        for (int k = 1; k < nfields; ++k) report.partial_at_k[k] = at_least_k[k] / n;
    } else {
        for (const auto& name : names) report.per_field_exact[name] = 0.0;
        for (int k = 1; k < nfields; ++k) report.partial_at_k[k] = 0.0;
    }
    report.pct_complete = reference_computable > 0
                              ? 100.0 * model_computable / reference_computable
                              : 0.0;
    return report;
}

MseReport mean_standardized_error(const std::vector<stats::EstimateResult>& model_estimates,
                                  const std::vector<stats::EstimateResult>& reference_estimates) {
    if (model_estimates.size() != reference_estimates.size())
        throw ContractViolation("mean_standardized_error: unaligned estimate lists");
    std::vector<double> diffs;
    for (size_t i = 0; i < model_estimates.size(); ++i) {
        if (!model_estimates[i].complete() || !reference_estimates[i].complete()) continue;
        if (model_estimates[i].estimate->measure != reference_estimates[i].estimate->measure)
            throw ContractViolation("mean_standardized_error: mixed measures in a pair");
        diffs.push_back(
            std::abs(model_estimates[i].estimate->point - reference_estimates[i].estimate->point));
    }
    MseReport report;
    report.n_pairs = static_cast<int>(diffs.size());
    if (diffs.empty()) return report;  // rendered as "-"

    double n = static_cast<double>(diffs.size());
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= n;
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    double sd = diffs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    report.mse = mean;
    report.standard_error = sd / std::sqrt(n);
    report.ci_low = mean - stats::kZ95 * report.standard_error;
    report.ci_high = mean + stats::kZ95 * report.standard_error;
    return report;
}

ErrorBreakdown classify_errors(const std::vector<ExtractionTrace>& predictions,
                               const std::vector<ICORecord>& references) {
    auto aligned = align(predictions, references);
    ErrorBreakdown errors;
    for (size_t i = 0; i < references.size(); ++i) {
        const ICORecord& ref = references[i];
        const ExtractionTrace& trace = *aligned[i];
        errors.bad_format += trace.format_error_count;

        if (ref.reference_type != OutcomeType::unknown &&
            trace.inferred_type != ref.reference_type) {
            if (trace.inferred_type == OutcomeType::unknown) ++errors.type_unknown;
            else if (ref.reference_type == OutcomeType::binary)
                ++errors.wrong_type_binary_as_continuous;
            else
                ++errors.wrong_type_continuous_as_binary;
        }

        if (ref.reference_type == OutcomeType::unknown) continue;
        std::vector<MaybeNumber> ref_fields =
            ref.reference_type == OutcomeType::binary
                ? ref.reference_binary.value_or(BinaryFinding{}).fields()
                : ref.reference_continuous.value_or(ContinuousFinding{}).fields();
        std::vector<MaybeNumber> model_fields =
            fields_of(prediction_in_shape(trace, ref.reference_type));
        for (size_t f = 0; f < ref_fields.size(); ++f) {
            if (model_fields[f] == ref_fields[f]) continue;
            if (!model_fields[f].is_known()) ++errors.unknown_for_known;
            else if (!ref_fields[f].is_known()) ++errors.value_for_unknown_reference;
            else ++errors.wrong_number;
        }
    }
    return errors;
}

EvaluationReport evaluate_all(const std::vector<ExtractionTrace>& predictions,
                              const std::vector<ICORecord>& references) {
    EvaluationReport report;
    report.types = score_types(predictions, references);
    report.binary_match = score_findings(predictions, references, OutcomeType::binary);
    report.continuous_match = score_findings(predictions, references, OutcomeType::continuous);

    auto aligned = align(predictions, references);
    for (OutcomeType shape : {OutcomeType::binary, OutcomeType::continuous}) {
        std::vector<stats::EstimateResult> model, reference;
        for (size_t i = 0; i < references.size(); ++i) {
            if (references[i].reference_type != shape) continue;
            reference.push_back(stats::estimate_for_record(references[i]));
            model.push_back(estimate_for_prediction(*aligned[i], shape));
        }
        auto mse = mean_standardized_error(model, reference);
        if (shape == OutcomeType::binary) report.binary_mse = mse;
        else report.continuous_mse = mse;
    }
    report.errors = classify_errors(predictions, references);
    return report;
}

std::string report_to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["types"] = {{"accuracy", r.types.accuracy},
                  {"f1_binary", r.types.f1_binary},
                  {"f1_continuous", r.types.f1_continuous},
                  {"n_unknowns", r.types.n_unknowns},
                  {"n_records", r.types.n_records}};
    auto match_json = [](const MatchReport& m) {
        nlohmann::json mj;
        mj["total_exact"] = m.total_exact;
        mj["per_field_exact"] = m.per_field_exact;
        nlohmann::json pk;
        for (const auto& [k, v] : m.partial_at_k) pk[std::to_string(k)] = v;
        mj["partial_at_k"] = pk;
        mj["n_unknown_mistakes"] = m.n_unknown_mistakes;
        mj["pct_complete"] = m.pct_complete;
        mj["n_records"] = m.n_records;
        return mj;
    };
    auto mse_json = [](const MseReport& m) {
        nlohmann::json mj;
        mj["n_pairs"] = m.n_pairs;
        if (m.empty()) {
            mj["mse"] = nullptr;
        } else {
            mj["mse"] = m.mse;
            mj["standard_error"] = m.standard_error;
            mj["ci_low"] = m.ci_low;
            mj["ci_high"] = m.ci_high;
        }
        return mj;
    };
    j["binary_match"] = match_json(r.binary_match);
    j["continuous_match"] = match_json(r.continuous_match);
    j["binary_mse"] = mse_json(r.binary_mse);
    j["continuous_mse"] = mse_json(r.continuous_mse);
    j["errors"] = {{"wrong_number", r.errors.wrong_number},
                   {"unknown_for_known", r.errors.unknown_for_known},
                   {"value_for_unknown_reference", r.errors.value_for_unknown_reference},
                   {"bad_format", r.errors.bad_format},
                   {"wrong_type_binary_as_continuous", r.errors.wrong_type_binary_as_continuous},
                   {"wrong_type_continuous_as_binary", r.errors.wrong_type_continuous_as_binary},
                   {"type_unknown", r.errors.type_unknown}};
    return j.dump(2);
}

}  // namespace trialmeta::evaluation
