#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trialmeta/evaluation.hpp"

using namespace trialmeta;
using namespace trialmeta::evaluation;
using extraction::ExtractionTrace;
using extraction::Finding;

namespace {

BinaryFinding bin(const char* a, const char* b, const char* c, const char* d) {
    BinaryFinding f;
    f.intervention_events = *MaybeNumber::parse(a);
    f.intervention_group_size = *MaybeNumber::parse(b);
    f.comparator_events = *MaybeNumber::parse(c);
    f.comparator_group_size = *MaybeNumber::parse(d);
    return f;
}

ICORecord ref_binary(const std::string& id, const std::string& outcome, BinaryFinding f) {
    ICORecord r;
    r.document_id = id;
    r.intervention = "drug";
    r.comparator = "placebo";
    r.outcome = outcome;
    r.reference_type = OutcomeType::binary;
    r.reference_binary = f;
    r.has_complete_reference = f.all_known();
    return r;
}

ICORecord ref_continuous(const std::string& id, const std::string& outcome, ContinuousFinding f) {
    ICORecord r;
    r.document_id = id;
    r.intervention = "drug";
    r.comparator = "placebo";
    r.outcome = outcome;
    r.reference_type = OutcomeType::continuous;
    r.reference_continuous = f;
    r.has_complete_reference = f.all_known();
    return r;
}

ExtractionTrace echo_trace(const ICORecord& r) {
    ExtractionTrace t;
    t.record_key = record_key(r);
    t.document_id = r.document_id;
    t.inferred_type = r.reference_type;
    if (r.reference_binary) t.merged = Finding(*r.reference_binary);
    if (r.reference_continuous) t.merged = Finding(*r.reference_continuous);
    return t;
}

ContinuousFinding cont(const char* m1, const char* s1, const char* n1, const char* m2,
                       const char* s2, const char* n2) {
    ContinuousFinding f;
    f.intervention_mean = *MaybeNumber::parse(m1);
    f.intervention_sd = *MaybeNumber::parse(s1);
    f.intervention_group_size = *MaybeNumber::parse(n1);
    f.comparator_mean = *MaybeNumber::parse(m2);
    f.comparator_sd = *MaybeNumber::parse(s2);
    f.comparator_group_size = *MaybeNumber::parse(n2);
    return f;
}

std::vector<ICORecord> mixed_references() {
    return {
        ref_binary("PMC1", "mortality", bin("10", "20", "5", "20")),
        ref_binary("PMC2", "relapse", bin("3", "40", "x", "40")),
        ref_continuous("PMC3", "pain", cont("12", "2", "50", "10", "2", "50")),
        ref_continuous("PMC4", "weight", cont("x", "x", "30", "x", "x", "30")),
    };
}

}  // namespace

TEST_CASE("self-comparison yields perfect type metrics") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) traces.push_back(echo_trace(r));
    auto m = score_types(traces, refs);
    CHECK(m.accuracy == doctest::Approx(1.0));
    CHECK(m.f1_binary == doctest::Approx(1.0));
    CHECK(m.f1_continuous == doctest::Approx(1.0));
    CHECK(m.n_unknowns == 0);
}

TEST_CASE("all-unknown predictions on known references") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) {
        auto t = echo_trace(r);
        t.inferred_type = OutcomeType::unknown;
        t.merged.reset();
        traces.push_back(t);
    }
    auto m = score_types(traces, refs);
    CHECK(m.accuracy == doctest::Approx(0.0));
    CHECK(m.n_unknowns == static_cast<int>(refs.size()));
    CHECK(m.f1_binary == doctest::Approx(0.0));
}

TEST_CASE("majority-class prediction: high accuracy, zero minority f1") {
    // 1 binary in 4 records; predicting all-continuous
    std::vector<ICORecord> refs = {
        ref_binary("PMC1", "mortality", bin("10", "20", "5", "20")),
        ref_continuous("PMC2", "pain", cont("12", "2", "50", "10", "2", "50")),
        ref_continuous("PMC3", "weight", cont("1", "1", "30", "1", "1", "30")),
        ref_continuous("PMC4", "bmi", cont("2", "1", "30", "2", "1", "30")),
    };
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) {
        auto t = echo_trace(r);
        t.inferred_type = OutcomeType::continuous;
        traces.push_back(t);
    }
    auto m = score_types(traces, refs);
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.f1_binary == doctest::Approx(0.0));
    // recall 1.0, precision 0.75 for continuous
    CHECK(m.f1_continuous == doctest::Approx(2 * 0.75 / 1.75));
}

TEST_CASE("alignment mismatches are contract violations naming ids") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces = {echo_trace(refs[0])};
    try {
        score_types(traces, refs);
        FAIL("expected contract violation");
    } catch (const ContractViolation& e) {
        CHECK(std::string(e.what()).find(record_key(refs[1])) != std::string::npos);
    }
}

TEST_CASE("finding match scoring basics") {
    std::vector<ICORecord> refs = {ref_binary("PMC1", "mortality", bin("10", "20", "5", "20"))};
    auto t = echo_trace(refs[0]);
    t.merged = Finding(bin("10", "20", "5", "21"));
    auto report = score_findings({t}, refs, OutcomeType::binary);
    CHECK(report.total_exact == doctest::Approx(0.0));
    CHECK(report.partial_at_k.at(1) == doctest::Approx(1.0));
    CHECK(report.partial_at_k.at(2) == doctest::Approx(1.0));
    CHECK(report.partial_at_k.at(3) == doctest::Approx(1.0));
    CHECK(report.n_unknown_mistakes == 0);
}

TEST_CASE("self-comparison match report is perfect") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) traces.push_back(echo_trace(r));
    for (OutcomeType shape : {OutcomeType::binary, OutcomeType::continuous}) {
        auto report = score_findings(traces, refs, shape);
        CHECK(report.total_exact == doctest::Approx(1.0));
        for (const auto& [k, v] : report.partial_at_k) CHECK(v == doctest::Approx(1.0));
        CHECK(report.pct_complete == doctest::Approx(100.0));
        CHECK(report.n_unknown_mistakes == 0);
        CHECK(report.n_records == 2);
    }
}

TEST_CASE("unknown-equals-unknown counts as a match") {
    std::vector<ICORecord> refs = {ref_binary("PMC1", "m", bin("10", "20", "x", "20"))};
    auto t = echo_trace(refs[0]);
    auto report = score_findings({t}, refs, OutcomeType::binary);
    CHECK(report.total_exact == doctest::Approx(1.0));
}

TEST_CASE("all-unknown model output and pct complete") {
    std::vector<ICORecord> refs = {
        ref_binary("PMC1", "m1", bin("10", "20", "5", "20")),
        ref_binary("PMC2", "m2", bin("x", "x", "x", "x")),
    };
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) {
        auto t = echo_trace(r);
        t.merged = Finding(bin("x", "x", "x", "x"));
        traces.push_back(t);
    }
    auto report = score_findings(traces, refs, OutcomeType::binary);
    CHECK(report.total_exact == doctest::Approx(0.5));  // only the all-unknown reference matches
    CHECK(report.pct_complete == doctest::Approx(0.0));
    CHECK(report.n_unknown_mistakes == 4);
}

TEST_CASE("mean standardized error over overlapping complete pairs") {
    stats::EstimateResult a, b, none;
    a.estimate = stats::EffectEstimate{stats::Measure::log_odds_ratio, 1.0, 0.5, "s1"};
    b.estimate = stats::EffectEstimate{stats::Measure::log_odds_ratio, 2.0, 0.5, "s2"};
    none.skip_reason = "incomplete";

    stats::EstimateResult a_off = a, b_off = b;
    a_off.estimate->point = 1.1;
    b_off.estimate->point = 1.7;

    auto report = mean_standardized_error({a_off, b_off, none}, {a, b, b});
    CHECK(report.n_pairs == 2);
    CHECK(report.mse == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(report.ci_low <= report.mse);
    CHECK(report.ci_high >= report.mse);

    auto identical = mean_standardized_error({a, b}, {a, b});
    CHECK(identical.mse == doctest::Approx(0.0));
    CHECK(identical.standard_error == doctest::Approx(0.0));

    auto empty = mean_standardized_error({none, none}, {a, b});
    CHECK(empty.empty());
}

TEST_CASE("error classification") {
    std::vector<ICORecord> refs = {
        ref_binary("PMC1", "m1", bin("10", "20", "5", "20")),
        ref_binary("PMC2", "m2", bin("x", "20", "5", "20")),
    };
    auto t1 = echo_trace(refs[0]);
    t1.merged = Finding(bin("7", "20", "x", "20"));  // wrong number + unknown-for-known
    auto t2 = echo_trace(refs[1]);
    t2.merged = Finding(bin("3", "20", "5", "20"));  // value for unknown reference
    t2.format_error_count = 1;

    auto errors = classify_errors({t1, t2}, refs);
    CHECK(errors.wrong_number == 1);
    CHECK(errors.unknown_for_known == 1);
    CHECK(errors.value_for_unknown_reference == 1);
    CHECK(errors.bad_format == 1);
    CHECK(errors.wrong_type_binary_as_continuous == 0);

    // totals reconcile with field mismatches
    int mismatches = 0;
    for (size_t i = 0; i < refs.size(); ++i) {
        auto rf = refs[i].reference_binary->fields();
        auto mf = std::get<BinaryFinding>(*(i == 0 ? t1 : t2).merged).fields();
        for (size_t f = 0; f < rf.size(); ++f)
            if (!(rf[f] == mf[f])) ++mismatches;
    }
    CHECK(errors.wrong_number + errors.unknown_for_known + errors.value_for_unknown_reference ==
          mismatches);
}

TEST_CASE("wrong type classification") {
    std::vector<ICORecord> refs = {
        ref_binary("PMC1", "m1", bin("10", "20", "5", "20")),
        ref_continuous("PMC2", "p", cont("12", "2", "50", "10", "2", "50")),
    };
    auto t1 = echo_trace(refs[0]);
    t1.inferred_type = OutcomeType::continuous;
    t1.merged = Finding(ContinuousFinding{});
    auto t2 = echo_trace(refs[1]);
    t2.inferred_type = OutcomeType::binary;
    t2.merged = Finding(BinaryFinding{});

    auto errors = classify_errors({t1, t2}, refs);
    CHECK(errors.wrong_type_binary_as_continuous == 1);
    CHECK(errors.wrong_type_continuous_as_binary == 1);
    // the wrong-shape findings score as all-unknown against known references
    CHECK(errors.unknown_for_known == 4 + 6);
}

TEST_CASE("perfect predictions have zero error counts") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) traces.push_back(echo_trace(r));
    auto errors = classify_errors(traces, refs);
    CHECK(errors.wrong_number == 0);
    CHECK(errors.unknown_for_known == 0);
    CHECK(errors.value_for_unknown_reference == 0);
    CHECK(errors.bad_format == 0);
    CHECK(errors.type_unknown == 0);
}

TEST_CASE("fuzz: partial-match lattice monotonicity and self identities") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> val(0, 30);
    std::uniform_int_distribution<int> coin(0, 3);

    auto random_bin = [&] {
        BinaryFinding f;
        auto cell = [&]() {
            return coin(rng) == 0 ? MaybeNumber::unknown() : MaybeNumber::known(val(rng));
        };
        f.intervention_events = cell();
        f.intervention_group_size = cell();
        f.comparator_events = cell();
        f.comparator_group_size = cell();
        return f;
    };

    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<ICORecord> refs;
        std::vector<ExtractionTrace> traces;
        int n = std::uniform_int_distribution<int>(1, 8)(rng);
        for (int i = 0; i < n; ++i) {
            auto r = ref_binary("PMC" + std::to_string(i), "o" + std::to_string(i), random_bin());
            refs.push_back(r);
            auto t = echo_trace(r);
            t.merged = Finding(random_bin());
            traces.push_back(t);
        }
        auto report = score_findings(traces, refs, OutcomeType::binary);
        double prev = 1.0;
        for (const auto& [k, v] : report.partial_at_k) {
            CHECK(v <= prev + 1e-12);
            CHECK(v >= report.total_exact - 1e-12);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        CHECK(report.total_exact >= 0.0);
        CHECK(report.total_exact <= 1.0);
        CHECK(report.pct_complete >= 0.0);
        CHECK(report.pct_complete <= 100.0);

        // self comparison identities
        std::vector<ExtractionTrace> self;
        for (const auto& r : refs) self.push_back(echo_trace(r));
        auto self_report = score_findings(self, refs, OutcomeType::binary);
        CHECK(self_report.total_exact == doctest::Approx(1.0));
        auto self_types = score_types(self, refs);
        CHECK(self_types.accuracy == doctest::Approx(1.0));
        auto self_errors = classify_errors(self, refs);
        CHECK(self_errors.wrong_number == 0);
        CHECK(self_errors.unknown_for_known == 0);
        CHECK(self_errors.value_for_unknown_reference == 0);
    }
}

TEST_CASE("evaluate_all aggregates and serializes") {
    auto refs = mixed_references();
    std::vector<ExtractionTrace> traces;
    for (const auto& r : refs) traces.push_back(echo_trace(r));
    auto report = evaluate_all(traces, refs);
    CHECK(report.types.accuracy == doctest::Approx(1.0));
    CHECK(report.binary_match.total_exact == doctest::Approx(1.0));
    CHECK(report.continuous_match.pct_complete == doctest::Approx(100.0));
    CHECK(report.binary_mse.n_pairs == 1);  // PMC2 reference is incomplete
    CHECK(report.binary_mse.mse == doctest::Approx(0.0));

    std::string json = report_to_json(report);
    CHECK(json.find("\"accuracy\"") != std::string::npos);
    CHECK(json.find("\"pct_complete\"") != std::string::npos);
}
