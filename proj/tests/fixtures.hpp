// Shared builders for offline end-to-end fixtures: a dev-split-shaped dataset
// (10 articles, 43 ICO records: 11 binary, 32 continuous), per-article
// documents, and replay caches that either echo the references or always
// abstain.
#ifndef TRIALMETA_TESTS_FIXTURES_HPP
#define TRIALMETA_TESTS_FIXTURES_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trialmeta/client.hpp"
#include "trialmeta/corpus.hpp"
#include "trialmeta/extraction.hpp"
#include "trialmeta/pipeline.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace trialmeta;

struct DevFixture {
    fs::path root;
    std::string dataset_path;
    std::string documents_dir;
    std::vector<ICORecord> records;
};

inline std::vector<ICORecord> dev_records() {
    std::vector<ICORecord> records;
    for (int i = 0; i < 43; ++i) {
        ICORecord r;
        r.document_id = "PMCdev" + std::to_string(i % 10 + 1);
        r.intervention = "drug " + std::to_string(i % 3 + 1);
        r.comparator = "placebo";
        r.outcome = "outcome " + std::to_string(i);
        const bool incomplete = i % 5 == 4;
        if (i < 11) {
            r.reference_type = OutcomeType::binary;
            BinaryFinding f;
            f.intervention_events = MaybeNumber::known(i + 1);
            f.intervention_group_size = MaybeNumber::known(20 + i);
            f.comparator_events = incomplete ? MaybeNumber::unknown() : MaybeNumber::known(i);
            f.comparator_group_size = MaybeNumber::known(20 + i);
            r.reference_binary = f;
            r.has_complete_reference = f.all_known();
        } else {
            r.reference_type = OutcomeType::continuous;
            ContinuousFinding f;
            f.intervention_mean = MaybeNumber::known(10.0 + i * 0.25);
            f.intervention_sd = incomplete ? MaybeNumber::unknown() : MaybeNumber::known(2.5);
            f.intervention_group_size = MaybeNumber::known(30 + i);
            f.comparator_mean = MaybeNumber::known(9.0 + i * 0.25);
            f.comparator_sd = MaybeNumber::known(2.0);
            f.comparator_group_size = MaybeNumber::known(30 + i);
            r.reference_continuous = f;
            r.has_complete_reference = f.all_known();
        }
        records.push_back(r);
    }
    return records;
}

inline void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Dataset + documents under root; returns the paths and records.
inline DevFixture make_dev_fixture(const fs::path& root) {
    DevFixture fixture;
    fixture.root = root;
    fs::remove_all(root);
    fs::create_directories(root);

    fixture.records = dev_records();
    fixture.dataset_path = (root / "dev.csv").string();
    corpus::save_annotations_csv(fixture.records, fixture.dataset_path);

    fixture.documents_dir = (root / "docs").string();
    for (int a = 1; a <= 10; ++a) {
        std::string id = "PMCdev" + std::to_string(a);
        std::string md = "# Results\n\nArticle " + std::to_string(a) +
                         " reported 12 events in 40 patients versus 7 in 40 controls.\n";
        write_file(fs::path(fixture.documents_dir) / (id + ".md"), md);
    }
    return fixture;
}

/// Replay cache whose responses reproduce the reference annotations exactly.
inline void prime_echo_cache(const DevFixture& fixture, const pipeline::RunConfig& config) {
    const int budget = extraction::chunk_token_budget(config.model);
    for (const auto& r : fixture.records) {
        std::string md;
        {
            std::ifstream in(fs::path(fixture.documents_dir) / (r.document_id + ".md"),
                             std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            md = buf.str();
        }
        std::string normalized = corpus::normalize_numbers(md);
        auto chunks = corpus::chunk_document(normalized, budget, r.document_id);

        extraction::prime_replay_cache(config.cache_dir, config.model.model_name,
                                       extraction::render_prompt(extraction::Task::infer_type, r),
                                       to_string(r.reference_type));

        extraction::Task task = r.reference_type == OutcomeType::binary
                                    ? extraction::Task::extract_binary
                                    : extraction::Task::extract_continuous;
        extraction::Finding reference = r.reference_binary
                                            ? extraction::Finding(*r.reference_binary)
                                            : extraction::Finding(*r.reference_continuous);
        for (const auto& chunk : chunks)
            extraction::prime_replay_cache(config.cache_dir, config.model.model_name,
                                           extraction::render_prompt(task, r, chunk),
                                           extraction::serialize_finding(reference));
    }
}

/// Replay cache for a model that always answers the unknown token.
inline void prime_always_x_cache(const DevFixture& fixture, const pipeline::RunConfig& config) {
    for (const auto& r : fixture.records)
        extraction::prime_replay_cache(config.cache_dir, config.model.model_name,
                                       extraction::render_prompt(extraction::Task::infer_type, r),
                                       "x");
}

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace fixtures

#endif
