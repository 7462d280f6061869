#ifndef TRIALMETA_EVALUATION_HPP
#define TRIALMETA_EVALUATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trialmeta/extraction.hpp"
#include "trialmeta/stats.hpp"
#include "trialmeta/types.hpp"

namespace trialmeta::evaluation {

using extraction::ExtractionTrace;

struct TypeMetrics {
    double accuracy = 0.0;
    double f1_binary = 0.0;
    double f1_continuous = 0.0;
    int n_unknowns = 0;  // predicted unknown where the reference type is known
    int n_records = 0;
};

struct MatchReport {
    double total_exact = 0.0;
    std::map<std::string, double> per_field_exact;
    std::map<int, double> partial_at_k;  // fraction with >= k matching fields, k = 1..F-1
    int n_unknown_mistakes = 0;          // model unknown where reference is known, per field
    double pct_complete = 0.0;           // model-computable / reference-computable, as percent
    int n_records = 0;
};

struct MseReport {
    double mse = 0.0;  // mean absolute difference between paired effect estimates
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_pairs = 0;
    bool empty() const { return n_pairs == 0; }
};

struct ErrorBreakdown {
    int wrong_number = 0;
    int unknown_for_known = 0;
    int value_for_unknown_reference = 0;
    int bad_format = 0;
    int wrong_type_binary_as_continuous = 0;   // reference binary, predicted continuous
    int wrong_type_continuous_as_binary = 0;   // reference continuous, predicted binary
    int type_unknown = 0;                      // predicted unknown where reference type known
};

/// All per-task metrics for one model run.
struct EvaluationReport {
    TypeMetrics types;
    MatchReport binary_match;
    MatchReport continuous_match;
    MseReport binary_mse;
    MseReport continuous_mse;
    ErrorBreakdown errors;
};

TypeMetrics score_types(const std::vector<ExtractionTrace>& predictions,
                        const std::vector<ICORecord>& references);

MatchReport score_findings(const std::vector<ExtractionTrace>& predictions,
                           const std::vector<ICORecord>& references, OutcomeType shape);

MseReport mean_standardized_error(const std::vector<stats::EstimateResult>& model_estimates,
                                  const std::vector<stats::EstimateResult>& reference_estimates);

ErrorBreakdown classify_errors(const std::vector<ExtractionTrace>& predictions,
                               const std::vector<ICORecord>& references);

EvaluationReport evaluate_all(const std::vector<ExtractionTrace>& predictions,
                              const std::vector<ICORecord>& references);

std::string report_to_json(const EvaluationReport& report);

/// The model's finding for a record, coerced to the reference shape: absent
/// or wrong-shape findings become all-unknown.
extraction::Finding prediction_in_shape(const ExtractionTrace& trace, OutcomeType shape);

}  // namespace trialmeta::evaluation

#endif
