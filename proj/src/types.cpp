#include "trialmeta/types.hpp"

#include <charconv>
#include <cstdlib>

namespace trialmeta {

MaybeNumber MaybeNumber::known(double v) {
    if (!std::isfinite(v)) throw DomainError("MaybeNumber: value must be finite");
    MaybeNumber m;
    m.value_ = v;
    return m;
}

double MaybeNumber::value() const {
    if (!value_) throw DomainError("MaybeNumber: value() on unknown");
    return *value_;
}

std::string MaybeNumber::to_string() const {
    if (!value_) return kUnknownToken;
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), *value_);
    return std::string(buf, res.ptr);
}

static std::string trim_copy(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<MaybeNumber> MaybeNumber::parse(const std::string& cell) {
    std::string t = trim_copy(cell);
    if (t.empty() || t == "x" || t == "X") return MaybeNumber::unknown();
    const char* begin = t.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) return std::nullopt;
    return MaybeNumber::known(v);
}

std::string to_string(OutcomeType t) {
    switch (t) {
        case OutcomeType::binary: return "binary";
        case OutcomeType::continuous: return "continuous";
        default: return kUnknownToken;
    }
}

std::optional<OutcomeType> outcome_type_from_string(const std::string& label) {
    std::string t = trim_copy(label);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "binary") return OutcomeType::binary;
    if (t == "continuous") return OutcomeType::continuous;
    if (t == "x" || t == "unknown") return OutcomeType::unknown;
    return std::nullopt;
}

const std::vector<std::string>& BinaryFinding::field_names() {
    static const std::vector<std::string> names = {
        "intervention_events", "intervention_group_size", "comparator_events",
        "comparator_group_size"};
    return names;
}

const std::vector<std::string>& ContinuousFinding::field_names() {
    static const std::vector<std::string> names = {
        "intervention_mean", "intervention_sd", "intervention_group_size",
        "comparator_mean",   "comparator_sd",   "comparator_group_size"};
    return names;
}

std::string record_key(const ICORecord& r) {
    return r.document_id + "|" + r.intervention + "|" + r.comparator + "|" + r.outcome;
}

}  // namespace trialmeta
