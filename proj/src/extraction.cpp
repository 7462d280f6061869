#include "trialmeta/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trialmeta/tokenizer.hpp"

namespace trialmeta::extraction {

namespace {

// Prompt templates, version 1. Kept as in-source constants so a run is fully
// reproducible from the binary alone.
constexpr const char* kInferTypePrompt =
    "You are assisting with data extraction for a statistical meta-analysis of "
    "randomized controlled trials.\n"
    "Given only the description of an outcome, decide whether the outcome is binary "
    "(an event counted per participant, summarized as a 2x2 contingency table) or "
    "continuous (a measured quantity per arm, summarized by mean, standard deviation, "
    "and group size).\n"
    "Answer with exactly one word: binary, continuous, or x if you cannot tell.\n"
    "\n"
    "Outcome: {outcome}\n"
    "Answer:";

constexpr const char* kExtractBinaryPrompt =
    "You are assisting with data extraction for a statistical meta-analysis of "
    "randomized controlled trials.\n"
    "From the trial report text below, extract the 2x2 contingency table for the given "
    "intervention, comparator, and binary outcome.\n"
    "Respond with YAML only, using exactly these keys:\n"
    "intervention_events: <number or x>\n"
    "intervention_group_size: <number or x>\n"
    "comparator_events: <number or x>\n"
    "comparator_group_size: <number or x>\n"
    "Use the token x for any value that is not reported in the text. Do not guess or "
    "compute values that are not stated.\n"
    "\n"
    "Intervention: {intervention}\n"
    "Comparator: {comparator}\n"
    "Outcome: {outcome}\n"
    "\n"
    "Trial report text:\n"
    "{chunk}\n"
    "\n"
    "YAML:";

constexpr const char* kExtractContinuousPrompt =
    "You are assisting with data extraction for a statistical meta-analysis of "
    "randomized controlled trials.\n"
    "From the trial report text below, extract the per-arm summary statistics for the "
    "given intervention, comparator, and continuous outcome.\n"
    "Respond with YAML only, using exactly these keys:\n"
    "intervention_mean: <number or x>\n"
    "intervention_sd: <number or x>\n"
    "intervention_group_size: <number or x>\n"
    "comparator_mean: <number or x>\n"
    "comparator_sd: <number or x>\n"
    "comparator_group_size: <number or x>\n"
    "Use the token x for any value that is not reported in the text. Do not guess or "
    "compute values that are not stated.\n"
    "\n"
    "Intervention: {intervention}\n"
    "Comparator: {comparator}\n"
    "Outcome: {outcome}\n"
    "\n"
    "Trial report text:\n"
    "{chunk}\n"
    "\n"
    "YAML:";

std::string replace_all(std::string text, const std::string& slot, const std::string& value) {
    size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
    return text;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string to_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const char* template_for(Task task) {
    switch (task) {
        case Task::infer_type: return kInferTypePrompt;
        case Task::extract_binary: return kExtractBinaryPrompt;
        case Task::extract_continuous: return kExtractContinuousPrompt;
    }
    throw ContractViolation("unreachable task");
}

}  // namespace

std::string render_prompt(Task task, const ICORecord& ico, const std::optional<Chunk>& chunk) {
    const bool needs_chunk = task != Task::infer_type;
    if (needs_chunk != chunk.has_value())
        throw ContractViolation("render_prompt: chunk must be present iff task extracts data");
    std::string text = template_for(task);
    text = replace_all(text, "{outcome}", ico.outcome);
    if (needs_chunk) {
        text = replace_all(text, "{intervention}", ico.intervention);
        text = replace_all(text, "{comparator}", ico.comparator);
        text = replace_all(text, "{chunk}", chunk->text);
    }
    return text;
}

int prompt_scaffold_tokens(Task task) {
    return count_tokens(template_for(task));
}

int chunk_token_budget(const ModelConfig& config, int output_reserve) {
    int scaffold = std::max(prompt_scaffold_tokens(Task::extract_binary),
                            prompt_scaffold_tokens(Task::extract_continuous));
    int budget = config.max_context_tokens - scaffold - output_reserve;
    if (budget <= 0)
        throw DomainError("model context too small for the extraction prompt scaffold");
    return budget;
}

ParsedType parse_outcome_type(const std::string& model_text) {
    std::string t = to_lower(trim(model_text));
    // tolerate a trailing period or surrounding quotes
    while (!t.empty() && (t.back() == '.' || t.back() == '"' || t.back() == '\'')) t.pop_back();
    while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(t.begin());
    if (t == "binary") return {OutcomeType::binary, false};
    if (t == "continuous") return {OutcomeType::continuous, false};
    if (t == "x") return {OutcomeType::unknown, false};
    return {OutcomeType::unknown, true};
}

namespace {

// Flat key: value lines from a (possibly fenced) YAML block. Deliberately
// lenient: any line that does not parse contributes nothing.
std::map<std::string, std::string> yaml_pairs(const std::string& model_text) {
    std::string body = model_text;
    auto fence = body.find("```");
    if (fence != std::string::npos) {
        auto line_end = body.find('\n', fence);
        auto close = line_end == std::string::npos ? std::string::npos : body.find("```", line_end);
        if (line_end != std::string::npos && close != std::string::npos)
            body = body.substr(line_end + 1, close - line_end - 1);
    }
    std::map<std::string, std::string> pairs;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = trim(line.substr(0, colon));
        std::string value = trim(line.substr(colon + 1));
        if (key.empty()) continue;
        if (!key.empty() && key.front() == '-') key = trim(key.substr(1));
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        pairs[to_lower(key)] = value;
    }
    return pairs;
}

}  // namespace

ParsedFinding parse_finding(const std::string& model_text, OutcomeType type) {
    if (type == OutcomeType::unknown)
        throw ContractViolation("parse_finding: type must be binary or continuous");
    auto pairs = yaml_pairs(model_text);
    const auto& names = type == OutcomeType::binary ? BinaryFinding::field_names()
                                                    : ContinuousFinding::field_names();
    std::vector<MaybeNumber> values(names.size(), MaybeNumber::unknown());
    int recognized = 0;
    for (size_t i = 0; i < names.size(); ++i) {
        auto it = pairs.find(names[i]);
        if (it == pairs.end()) continue;
        auto parsed = MaybeNumber::parse(it->second);
        if (parsed) {
            values[i] = *parsed;
            ++recognized;
        }
    }
    ParsedFinding out;
    out.format_error = recognized == 0;
    if (type == OutcomeType::binary) {
        BinaryFinding f;
        f.intervention_events = values[0];
        f.intervention_group_size = values[1];
        f.comparator_events = values[2];
        f.comparator_group_size = values[3];
        out.finding = f;
    } else {
        ContinuousFinding f;
        f.intervention_mean = values[0];
        f.intervention_sd = values[1];
        f.intervention_group_size = values[2];
        f.comparator_mean = values[3];
        f.comparator_sd = values[4];
        f.comparator_group_size = values[5];
        out.finding = f;
    }
    return out;
}

std::string serialize_finding(const Finding& finding) {
    std::ostringstream out;
    std::visit(
        [&](const auto& f) {
            const auto& names = std::decay_t<decltype(f)>::field_names();
            auto fields = f.fields();
            for (size_t i = 0; i < names.size(); ++i)
                out << names[i] << ": " << fields[i].to_string() << "\n";
        },
        finding);
    return out.str();
}

namespace {

std::vector<MaybeNumber> finding_fields(const Finding& f) {
    return std::visit([](const auto& x) { return x.fields(); }, f);
}

Finding finding_from_fields(bool binary, const std::vector<MaybeNumber>& v) {
    if (binary) {
        BinaryFinding f;
        f.intervention_events = v[0];
        f.intervention_group_size = v[1];
        f.comparator_events = v[2];
        f.comparator_group_size = v[3];
        return f;
    }
    ContinuousFinding f;
    f.intervention_mean = v[0];
    f.intervention_sd = v[1];
    f.intervention_group_size = v[2];
    f.comparator_mean = v[3];
    f.comparator_sd = v[4];
    f.comparator_group_size = v[5];
    return f;
}

}  // namespace

MergeResult merge_chunk_findings(const std::vector<Finding>& findings) {
    if (findings.empty()) throw ContractViolation("merge_chunk_findings: empty input");
    const bool binary = std::holds_alternative<BinaryFinding>(findings.front());
    for (const auto& f : findings)
        if (std::holds_alternative<BinaryFinding>(f) != binary)
            throw ContractViolation("merge_chunk_findings: mixed finding shapes");

    const auto& names = binary ? BinaryFinding::field_names() : ContinuousFinding::field_names();
    std::vector<MaybeNumber> merged(names.size(), MaybeNumber::unknown());
    MergeResult result;
    for (size_t chunk = 0; chunk < findings.size(); ++chunk) {
        auto fields = finding_fields(findings[chunk]);
        for (size_t i = 0; i < fields.size(); ++i) {
            if (!fields[i].is_known()) continue;
            if (!merged[i].is_known()) {
                merged[i] = fields[i];
            } else if (merged[i] != fields[i]) {
                result.conflicts.push_back(names[i] + ": kept " + merged[i].to_string() +
                                           ", saw " + fields[i].to_string() + " (chunk " +
                                           std::to_string(chunk) + ")");
            }
        }
    }
    result.finding = finding_from_fields(binary, merged);
    return result;
}

ExtractionTrace run_record(ChatClient& client, const ModelConfig& config, const ICORecord& ico,
                           const std::vector<Chunk>& chunks,
                           std::optional<OutcomeType> type_override) {
    if (chunks.empty()) throw ContractViolation("run_record: chunks must be non-empty");
    ExtractionTrace trace;
    trace.record_key = record_key(ico);
    trace.document_id = ico.document_id;

    try {
        if (type_override) {
            trace.inferred_type = *type_override;
            trace.type_overridden = true;
        } else {
            std::string prompt = render_prompt(Task::infer_type, ico);
            trace.type_raw_text = client.complete(config, prompt);
            ++trace.type_calls;
            ParsedType parsed = parse_outcome_type(trace.type_raw_text);
            trace.inferred_type = parsed.type;
            trace.type_format_error = parsed.format_error;
            if (parsed.format_error) ++trace.format_error_count;
        }

        if (trace.inferred_type == OutcomeType::unknown) {
            // No extraction when the type cannot be inferred.
            return trace;
        }

        Task task = trace.inferred_type == OutcomeType::binary ? Task::extract_binary
                                                               : Task::extract_continuous;
        for (const auto& chunk : chunks) {
            std::string prompt = render_prompt(task, ico, chunk);
            std::string raw = client.complete(config, prompt);
            ++trace.extraction_calls;
            trace.chunk_raw_texts.push_back(raw);
            ParsedFinding parsed = parse_finding(raw, trace.inferred_type);
            if (parsed.format_error) ++trace.format_error_count;
            trace.chunk_findings.push_back(parsed.finding);
        }
        MergeResult merged = merge_chunk_findings(trace.chunk_findings);
        trace.merged = merged.finding;
        trace.merge_conflicts = merged.conflicts;
    } catch (const TransportError& e) {
        throw TransportError("record " + trace.record_key + ": " + e.what());
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Trace serialization

namespace {

nlohmann::json finding_to_json(const Finding& f) {
    nlohmann::json j;
    std::visit(
        [&](const auto& x) {
            const auto& names = std::decay_t<decltype(x)>::field_names();
            auto fields = x.fields();
            j["shape"] = names.size() == 4 ? "binary" : "continuous";
            for (size_t i = 0; i < names.size(); ++i) j[names[i]] = fields[i].to_string();
        },
        f);
    return j;
}

Finding finding_from_json(const nlohmann::json& j) {
    const bool binary = j.at("shape").get<std::string>() == "binary";
    const auto& names = binary ? BinaryFinding::field_names() : ContinuousFinding::field_names();
    std::vector<MaybeNumber> values;
    for (const auto& name : names) {
        auto parsed = MaybeNumber::parse(j.at(name).get<std::string>());
        if (!parsed) throw DataError("trace finding field '" + name + "' is malformed");
        values.push_back(*parsed);
    }
    return finding_from_fields(binary, values);
}

}  // namespace

std::string trace_to_json(const ExtractionTrace& t) {
    nlohmann::json j;
    j["record_key"] = t.record_key;
    j["document_id"] = t.document_id;
    j["inferred_type"] = to_string(t.inferred_type);
    j["type_overridden"] = t.type_overridden;
    j["type_format_error"] = t.type_format_error;
    j["type_raw_text"] = t.type_raw_text;
    j["chunk_raw_texts"] = t.chunk_raw_texts;
    j["chunk_findings"] = nlohmann::json::array();
    for (const auto& f : t.chunk_findings) j["chunk_findings"].push_back(finding_to_json(f));
    if (t.merged) j["merged"] = finding_to_json(*t.merged);
    else j["merged"] = nullptr;
    j["merge_conflicts"] = t.merge_conflicts;
    j["format_error_count"] = t.format_error_count;
    j["type_calls"] = t.type_calls;
    j["extraction_calls"] = t.extraction_calls;
    return j.dump();
}

ExtractionTrace trace_from_json(const std::string& json_line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed trace line: ") + e.what());
    }
    ExtractionTrace t;
    t.record_key = j.at("record_key").get<std::string>();
    t.document_id = j.value("document_id", "");
    auto type = outcome_type_from_string(j.at("inferred_type").get<std::string>());
    if (!type) throw DataError("malformed trace line: bad inferred_type");
    t.inferred_type = *type;
    t.type_overridden = j.value("type_overridden", false);
    t.type_format_error = j.value("type_format_error", false);
    t.type_raw_text = j.value("type_raw_text", "");
    t.chunk_raw_texts = j.value("chunk_raw_texts", std::vector<std::string>{});
    for (const auto& f : j.value("chunk_findings", nlohmann::json::array()))
        t.chunk_findings.push_back(finding_from_json(f));
    if (j.contains("merged") && !j["merged"].is_null()) t.merged = finding_from_json(j["merged"]);
    t.merge_conflicts = j.value("merge_conflicts", std::vector<std::string>{});
    t.format_error_count = j.value("format_error_count", 0);
    t.type_calls = j.value("type_calls", 0);
    t.extraction_calls = j.value("extraction_calls", 0);
    return t;
}

}  // namespace trialmeta::extraction
