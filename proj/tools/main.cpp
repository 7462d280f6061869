#include <iostream>

#include <CLI11.hpp>

#include "trialmeta/pipeline.hpp"

using namespace trialmeta;

int main(int argc, char** argv) {
    CLI::App app{"Numerical data extraction and fixed-effects meta-analysis for trial reports"};
    app.require_subcommand(1);

    pipeline::RunConfig config;
    pipeline::IcoFilter filter;
    std::string mode = "replay";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", config.dataset_path,
                        "Dataset file (CSV/JSONL) or directory of <split>.csv files");
        cmd->add_option("--docs", config.documents_dir, "Directory of <pmcid>.xml / <pmcid>.md");
        cmd->add_option("--out", config.output_dir, "Output directory")->required();
        cmd->add_option("--model", config.model.model_name, "Model name");
        cmd->add_option("--endpoint", config.model.endpoint, "Chat-completions endpoint URL");
        cmd->add_option("--api-key-env", config.model.api_key_env,
                        "Environment variable holding the API key");
        cmd->add_option("--max-context", config.model.max_context_tokens,
                        "Model context window in tokens");
        cmd->add_option("--mode", mode, "live or replay")
            ->check(CLI::IsMember({"live", "replay"}));
        cmd->add_option("--cache-dir", config.cache_dir, "Response cache / replay directory");
        cmd->add_option("--concurrency", config.concurrency, "Concurrent in-flight records");
        cmd->add_option("--split", config.split, "Dataset split when --dataset is a directory")
            ->check(CLI::IsMember({"dev", "test"}));
    };

    auto* ingest = app.add_subcommand("ingest", "Preprocess XML articles into markdown");
    add_common(ingest);
    auto* run = app.add_subcommand("run", "Infer outcome types and extract findings");
    add_common(run);
    auto* evaluate = app.add_subcommand("evaluate", "Score traces against the references");
    add_common(evaluate);
    auto* meta = app.add_subcommand("meta-analyze", "Pool selected records and render a forest plot");
    add_common(meta);
    meta->add_option("--intervention", filter.intervention, "Exact intervention filter");
    meta->add_option("--comparator", filter.comparator, "Exact comparator filter");
    meta->add_option("--outcome", filter.outcome, "Exact outcome filter");
    meta->add_flag("--case-fold", filter.case_fold, "Case-insensitive ICO matching");
    meta->add_flag("--use-reference", filter.use_reference,
                   "Pool reference annotations instead of model findings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : pipeline::kExitUsage;
    }

    config.mode = mode == "live" ? pipeline::Mode::live : pipeline::Mode::replay;

    try {
        if (ingest->parsed()) return pipeline::cmd_ingest(config);
        if (run->parsed()) return pipeline::cmd_run(config);
        if (evaluate->parsed()) return pipeline::cmd_evaluate(config);
        if (meta->parsed()) return pipeline::cmd_meta_analyze(config, filter);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitUsage;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::kExitData;
    }
    return pipeline::kExitUsage;
}
