#ifndef TRIALMETA_PIPELINE_HPP
#define TRIALMETA_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "trialmeta/extraction.hpp"
#include "trialmeta/types.hpp"

namespace trialmeta::pipeline {

enum class Mode { live, replay };

struct RunConfig {
    std::string dataset_path;    // file, or a directory holding <split>.csv
    std::string documents_dir;   // per-article <pmcid>.xml / <pmcid>.md
    std::string output_dir;
    std::string cache_dir;       // replay cache / live response cache
    std::string split = "test";  // used when dataset_path is a directory
    extraction::ModelConfig model;
    Mode mode = Mode::replay;
    int concurrency = 4;
};

struct IcoFilter {
    std::string intervention;  // empty matches anything
    std::string comparator;
    std::string outcome;
    bool case_fold = false;
    bool use_reference = false;
};

// Exit codes shared with the CLI: 0 success, 1 usage/config, 2 data, 3 transport.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitTransport = 3;

/// Preprocesses every source document into <out>/documents/<id>.md and writes
/// a manifest with token counts.
int cmd_ingest(const RunConfig& config);

/// Chunks, infers, extracts and merges every dataset record; appends
/// JSON-lines traces to <out>/traces.jsonl. Resumable: records with an
/// existing trace row are skipped, with no new model calls.
int cmd_run(const RunConfig& config);

/// Scores traces against the dataset references; writes evaluation.json and
/// evaluation.md into the output directory.
int cmd_evaluate(const RunConfig& config);

/// Pools the selected records into a fixed-effects meta-analysis; writes
/// forest.svg and pooled.json.
int cmd_meta_analyze(const RunConfig& config, const IcoFilter& filter);

/// Resolved dataset file for a config (applies the split when dataset_path is
/// a directory).
std::string dataset_file(const RunConfig& config);

std::vector<extraction::ExtractionTrace> load_traces(const std::string& path);

}  // namespace trialmeta::pipeline

#endif
