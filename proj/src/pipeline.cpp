#include "trialmeta/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "trialmeta/corpus.hpp"
#include "trialmeta/evaluation.hpp"
#include "trialmeta/report.hpp"
#include "trialmeta/stats.hpp"
#include "trialmeta/tokenizer.hpp"

namespace trialmeta::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

std::string to_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

fs::path traces_path(const RunConfig& config) {
    return fs::path(config.output_dir) / "traces.jsonl";
}

/// Markdown for a record's document: prefers the ingested copy, falls back to
/// a .md or .xml source next to the dataset.
std::string document_markdown(const RunConfig& config, const std::string& id) {
    fs::path ingested = fs::path(config.output_dir) / "documents" / (id + ".md");
    if (fs::exists(ingested)) return read_file(ingested);
    fs::path md = fs::path(config.documents_dir) / (id + ".md");
    if (fs::exists(md)) return read_file(md);
    fs::path xml = fs::path(config.documents_dir) / (id + ".xml");
    if (fs::exists(xml))
        return corpus::make_document(id, "", read_file(xml)).markdown;
    throw DataError("no document found for article " + id + " (looked for " + ingested.string() +
                    ", " + md.string() + ", " + xml.string() + ")");
}

}  // namespace

std::string dataset_file(const RunConfig& config) {
    if (fs::is_directory(config.dataset_path)) {
        for (const char* ext : {".csv", ".jsonl", ".json"}) {
            fs::path candidate = fs::path(config.dataset_path) / (config.split + ext);
            if (fs::exists(candidate)) return candidate.string();
        }
        throw DataError("no dataset for split '" + config.split + "' in " + config.dataset_path);
    }
    return config.dataset_path;
}

std::vector<extraction::ExtractionTrace> load_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open traces file: " + path);
    std::vector<extraction::ExtractionTrace> traces;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        traces.push_back(extraction::trace_from_json(line));
    }
    return traces;
}

int cmd_ingest(const RunConfig& config) {
    if (!fs::is_directory(config.documents_dir)) {
        std::cerr << "documents directory not found: " << config.documents_dir << "\n";
        return kExitUsage;
    }
    fs::create_directories(fs::path(config.output_dir) / "documents");

    std::vector<fs::path> sources;
    for (const auto& entry : fs::directory_iterator(config.documents_dir)) {
        auto ext = entry.path().extension().string();
        if (ext == ".xml" || ext == ".md") sources.push_back(entry.path());
    }
    std::sort(sources.begin(), sources.end());

    nlohmann::json manifest = nlohmann::json::array();
    std::vector<std::string> failures;
    for (const auto& src : sources) {
        const std::string id = src.stem().string();
        try {
            std::string markdown;
            if (src.extension() == ".xml") {
                markdown = corpus::make_document(id, "", read_file(src)).markdown;
            } else {
                markdown = read_file(src);
            }
            write_file(fs::path(config.output_dir) / "documents" / (id + ".md"), markdown);
            manifest.push_back({{"id", id}, {"token_count", count_tokens(markdown)}});
        } catch (const std::exception& e) {
            failures.push_back(src.string() + ": " + e.what());
        }
    }
    write_file(fs::path(config.output_dir) / "manifest.json", manifest.dump(2) + "\n");
    if (!failures.empty()) {
        for (const auto& f : failures) std::cerr << "ingest failed: " << f << "\n";
        return kExitData;
    }
    return kExitOk;
}

int cmd_run(const RunConfig& config) {
    if (config.mode == Mode::replay && !fs::is_directory(config.cache_dir)) {
        std::cerr << "replay mode requires an existing cache directory: " << config.cache_dir
                  << "\n";
        return kExitUsage;
    }
    if (config.mode == Mode::live) {
        const char* key = std::getenv(config.model.api_key_env.c_str());
        if (!key || !*key) {
            std::cerr << "live mode requires the API key environment variable "
                      << config.model.api_key_env << "\n";
            return kExitUsage;
        }
    }

    auto records = corpus::load_annotations(dataset_file(config));
    fs::create_directories(config.output_dir);

    // resume: never touch rows already on disk
    std::set<std::string> done;
    if (fs::exists(traces_path(config)))
        for (const auto& t : load_traces(traces_path(config).string())) done.insert(t.record_key);

    struct Job {
        const ICORecord* record;
        std::optional<extraction::ExtractionTrace> trace;
        std::string error;
    };
    std::vector<Job> jobs;
    for (const auto& r : records)
        if (!done.count(record_key(r))) jobs.push_back({&r, std::nullopt, ""});

    const int budget = extraction::chunk_token_budget(config.model);
    std::unique_ptr<extraction::ChatClient> client;
    if (config.mode == Mode::replay)
        client = std::make_unique<extraction::ReplayClient>(config.cache_dir);
    else
        client = std::make_unique<extraction::HttpChatClient>(config.cache_dir);

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            Job& job = jobs[i];
            try {
                std::string markdown = document_markdown(config, job.record->document_id);
                std::string normalized = corpus::normalize_numbers(markdown);
                auto chunks =
                    corpus::chunk_document(normalized, budget, job.record->document_id);
                if (chunks.empty()) {
                    Chunk empty;
                    empty.document_id = job.record->document_id;
                    chunks.push_back(empty);
                }
                job.trace = extraction::run_record(*client, config.model, *job.record, chunks);
            } catch (const std::exception& e) {
                job.error = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(config.concurrency,
                                                   static_cast<int>(jobs.size())));
    std::vector<std::thread> threads;
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    // append completed traces in dataset order so replay runs are byte-stable
    std::ofstream out(traces_path(config), std::ios::binary | std::ios::app);
    bool transport_failure = false;
    for (const auto& job : jobs) {
        if (job.trace) {
            out << extraction::trace_to_json(*job.trace) << "\n";
        } else {
            std::cerr << "record " << record_key(*job.record) << " failed: " << job.error << "\n";
            transport_failure = true;
        }
    }
    return transport_failure ? kExitTransport : kExitOk;
}

int cmd_evaluate(const RunConfig& config) {
    if (!fs::exists(traces_path(config))) {
        std::cerr << "no traces at " << traces_path(config) << "; run the 'run' command first\n";
        return kExitData;
    }
    auto records = corpus::load_annotations(dataset_file(config));
    auto traces = load_traces(traces_path(config).string());
    auto report = evaluation::evaluate_all(traces, records);
    write_file(fs::path(config.output_dir) / "evaluation.json",
               evaluation::report_to_json(report) + "\n");
    write_file(fs::path(config.output_dir) / "evaluation.md", report::render_tables(report));
    return kExitOk;
}

int cmd_meta_analyze(const RunConfig& config, const IcoFilter& filter) {
    auto records = corpus::load_annotations(dataset_file(config));
    std::vector<extraction::ExtractionTrace> traces;
    if (!filter.use_reference) {
        if (!fs::exists(traces_path(config))) {
            std::cerr << "no traces at " << traces_path(config)
                      << "; run the 'run' command first or pass --use-reference\n";
            return kExitData;
        }
        traces = load_traces(traces_path(config).string());
    }
    std::map<std::string, const extraction::ExtractionTrace*> trace_by_key;
    for (const auto& t : traces) trace_by_key[t.record_key] = &t;

    auto matches = [&](const std::string& want, const std::string& got) {
        if (want.empty()) return true;
        if (filter.case_fold) return to_lower(want) == to_lower(got);
        return want == got;
    };

    std::vector<stats::EffectEstimate> estimates;
    for (const auto& r : records) {
        if (!matches(filter.intervention, r.intervention)) continue;
        if (!matches(filter.comparator, r.comparator)) continue;
        if (!matches(filter.outcome, r.outcome)) continue;

        stats::EstimateResult result;
        if (filter.use_reference) {
            result = stats::estimate_for_record(r);
        } else {
            auto it = trace_by_key.find(record_key(r));
            if (it == trace_by_key.end()) continue;
            if (r.reference_type == OutcomeType::unknown) continue;
            auto finding = evaluation::prediction_in_shape(*it->second, r.reference_type);
            if (r.reference_type == OutcomeType::binary)
                result = stats::estimate_for_finding(r.reference_type,
                                                     std::get<BinaryFinding>(finding),
                                                     std::nullopt, r.document_id);
            else
                result = stats::estimate_for_finding(r.reference_type, std::nullopt,
                                                     std::get<ContinuousFinding>(finding),
                                                     r.document_id);
        }
        if (result.complete()) estimates.push_back(*result.estimate);
    }

    if (estimates.empty()) {
        std::cerr << "empty analysis: no complete estimates match the ICO filter\n";
        return kExitData;
    }
    for (const auto& e : estimates)
        if (e.measure != estimates.front().measure) {
            std::cerr << "selection mixes binary and continuous outcomes; narrow the filter\n";
            return kExitData;
        }

    auto pooled = stats::fixed_effect_pool(estimates);
    auto model = report::build_forest_model(estimates, pooled);
    write_file(fs::path(config.output_dir) / "forest.svg", report::render_forest_svg(model));
    nlohmann::json j = nlohmann::json::parse(report::forest_model_to_json(model));
    j["pooled"]["variance"] = pooled.variance;
    j["pooled"]["k"] = pooled.k;
    write_file(fs::path(config.output_dir) / "pooled.json", j.dump(2) + "\n");
    return kExitOk;
}

}  // namespace trialmeta::pipeline
