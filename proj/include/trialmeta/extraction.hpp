#ifndef TRIALMETA_EXTRACTION_HPP
#define TRIALMETA_EXTRACTION_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trialmeta/client.hpp"
#include "trialmeta/types.hpp"

namespace trialmeta::extraction {

enum class Task { infer_type, extract_binary, extract_continuous };

using Finding = std::variant<BinaryFinding, ContinuousFinding>;

/// Instantiates the versioned prompt template for a task. infer_type prompts
/// contain only the outcome description, never document text.
std::string render_prompt(Task task, const ICORecord& ico,
                          const std::optional<Chunk>& chunk = std::nullopt);

/// Token cost of the prompt scaffold alone (templates with empty slots);
/// used to derive the per-model chunk budget.
int prompt_scaffold_tokens(Task task);

/// max_context - scaffold - reserved output budget (default reserve 512).
int chunk_token_budget(const ModelConfig& config, int output_reserve = 512);

struct ParsedType {
    OutcomeType type = OutcomeType::unknown;
    bool format_error = false;
};

/// Total: trims, matches binary/continuous/x case-insensitively; anything
/// else is unknown with the format-error flag set.
ParsedType parse_outcome_type(const std::string& model_text);

struct ParsedFinding {
    Finding finding;
    bool format_error = false;
};

/// Total: pulls the YAML block (fenced or bare) out of the model text and
/// reads the schema fields; unparseable fields degrade to unknown.
ParsedFinding parse_finding(const std::string& model_text, OutcomeType type);

/// YAML serialization of a finding with the wire-format field names.
std::string serialize_finding(const Finding& finding);

struct MergeResult {
    Finding finding;
    std::vector<std::string> conflicts;  // "field: kept a, saw b (chunk i)"
};

/// Field-wise first-known-wins over chunk order. Mixed shapes are a contract
/// violation.
MergeResult merge_chunk_findings(const std::vector<Finding>& findings);

struct ExtractionTrace {
    std::string record_key;
    std::string document_id;
    OutcomeType inferred_type = OutcomeType::unknown;
    bool type_overridden = false;
    bool type_format_error = false;
    std::string type_raw_text;
    std::vector<std::string> chunk_raw_texts;
    std::vector<Finding> chunk_findings;
    std::optional<Finding> merged;
    std::vector<std::string> merge_conflicts;
    int format_error_count = 0;
    int type_calls = 0;
    int extraction_calls = 0;
};

/// Full per-record pipeline: infer type (unless overridden), extract over
/// every chunk, parse, merge. An unknown type skips extraction entirely.
ExtractionTrace run_record(ChatClient& client, const ModelConfig& config, const ICORecord& ico,
                           const std::vector<Chunk>& chunks,
                           std::optional<OutcomeType> type_override = std::nullopt);

std::string trace_to_json(const ExtractionTrace& trace);
ExtractionTrace trace_from_json(const std::string& json_line);

}  // namespace trialmeta::extraction

#endif
