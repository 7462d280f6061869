#ifndef TRIALMETA_TYPES_HPP
#define TRIALMETA_TYPES_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trialmeta {

// Error hierarchy shared across modules.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The sentinel by which a model (or annotator) abstains from a numeric field.
inline constexpr const char* kUnknownToken = "x";

/// A numeric cell that is either a known finite value or the unknown token "x".
class MaybeNumber {
public:
    MaybeNumber() = default;

    static MaybeNumber known(double v);
    static MaybeNumber unknown() { return MaybeNumber{}; }

    bool is_known() const { return value_.has_value(); }
    double value() const;

    bool operator==(const MaybeNumber& other) const {
        if (is_known() != other.is_known()) return false;
        if (!is_known()) return true;
        return *value_ == *other.value_;
    }
    bool operator!=(const MaybeNumber& other) const { return !(*this == other); }

    /// Serializes to a decimal literal, or "x" when unknown.
    std::string to_string() const;

    /// Parses a decimal literal or the unknown token. Blank counts as unknown.
    /// Returns nullopt for anything else (non-numeric garbage).
    static std::optional<MaybeNumber> parse(const std::string& cell);

private:
    std::optional<double> value_;
};

enum class OutcomeType { binary, continuous, unknown };

std::string to_string(OutcomeType t);
std::optional<OutcomeType> outcome_type_from_string(const std::string& label);

/// 2x2 contingency table cells for a dichotomous outcome.
struct BinaryFinding {
    MaybeNumber intervention_events;
    MaybeNumber intervention_group_size;
    MaybeNumber comparator_events;
    MaybeNumber comparator_group_size;

    bool operator==(const BinaryFinding&) const = default;

    bool all_known() const {
        return intervention_events.is_known() && intervention_group_size.is_known() &&
               comparator_events.is_known() && comparator_group_size.is_known();
    }
    std::vector<MaybeNumber> fields() const {
        return {intervention_events, intervention_group_size, comparator_events,
                comparator_group_size};
    }
    static const std::vector<std::string>& field_names();
};

/// Per-arm mean, standard deviation and group size for a continuous outcome.
struct ContinuousFinding {
    MaybeNumber intervention_mean;
    MaybeNumber intervention_sd;
    MaybeNumber intervention_group_size;
    MaybeNumber comparator_mean;
    MaybeNumber comparator_sd;
    MaybeNumber comparator_group_size;

    bool operator==(const ContinuousFinding&) const = default;

    bool all_known() const {
        for (const auto& f : fields())
            if (!f.is_known()) return false;
        return true;
    }
    std::vector<MaybeNumber> fields() const {
        return {intervention_mean,   intervention_sd, intervention_group_size,
                comparator_mean,     comparator_sd,   comparator_group_size};
    }
    static const std::vector<std::string>& field_names();
};

/// One intervention/comparator/outcome triplet bound to a trial document,
/// with its reference annotation.
struct ICORecord {
    std::string document_id;
    std::string intervention;
    std::string comparator;
    std::string outcome;
    OutcomeType reference_type = OutcomeType::unknown;
    std::optional<BinaryFinding> reference_binary;
    std::optional<ContinuousFinding> reference_continuous;
    bool in_table_or_figure = false;
    bool has_complete_reference = false;
};

/// Stable identifier for aligning predictions with references.
std::string record_key(const ICORecord& r);

struct TrialDocument {
    std::string id;
    std::string abstract_xml;
    std::string results_xml;
    std::string markdown;     // derived
    int token_count = 0;      // derived, under the configured tokenizer
};

struct Chunk {
    std::string document_id;
    int index = 0;
    std::string text;
    int token_count = 0;
    bool hard_split = false;  // set when a single oversize segment was cut at a token boundary
};

}  // namespace trialmeta

#endif
