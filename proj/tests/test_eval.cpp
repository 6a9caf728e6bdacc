#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "peerscout/eval.hpp"
#include "test_support.hpp"

using namespace peerscout;
using testsupport::fixtures_dir;

namespace {

ProductSet set_of(std::initializer_list<std::string_view> items) {
    return ProductSet::from_strings(items);
}

ExtractionResult result_for(std::int64_t page_id, const ProductSet& predicted,
                            ExtractionStatus status = ExtractionStatus::ok) {
    ExtractionResult r;
    r.page_id = page_id;
    r.extractor_id = "test";
    r.predicted = predicted;
    r.status = status;
    return r;
}

}  // namespace

TEST_CASE("the worked example scores tp=4 fp=0 fn=1") {
    const auto gold = set_of({"chemical", "industrial chemicals", "iodine",
                              "lithium", "plant nutrients"});
    const auto predicted =
        set_of({"plant nutrients", "iodine", "lithium", "industrial chemicals"});

    const auto counts = confusion_counts(gold, predicted);
    CHECK(counts.tp == 4);
    CHECK(counts.fp == 0);
    CHECK(counts.fn == 1);
    CHECK(precision(counts) == 1.0);
    CHECK(recall(counts) == doctest::Approx(0.8));
    CHECK(f_score(counts) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(f_score(counts) >= 0.88);
    CHECK(f_score(counts) <= 0.89);
}

TEST_CASE("exact matching scores gas against natural gas as a miss") {
    const auto counts =
        confusion_counts(set_of({"natural gas"}), set_of({"gas"}));
    CHECK(counts.tp == 0);
    CHECK(counts.fp == 1);
    CHECK(counts.fn == 1);
}

TEST_CASE("degenerate denominators score zero") {
    CHECK(precision(ConfusionCounts{}) == 0.0);
    CHECK(recall(ConfusionCounts{}) == 0.0);
    CHECK(f_score(ConfusionCounts{}) == 0.0);
    CHECK(precision(ConfusionCounts{0, 0, 3}) == 0.0);
    CHECK(recall(ConfusionCounts{0, 2, 0}) == 0.0);
    CHECK(f_score(ConfusionCounts{0, 2, 3}) == 0.0);
}

TEST_CASE("harmonic-mean and count forms of the f-score agree") {
    std::mt19937_64 rng(31337);
    for (int i = 0; i < 10000; ++i) {
        const ConfusionCounts counts{rng() % 1000, rng() % 1000, rng() % 1000};
        const double p = precision(counts);
        const double r = recall(counts);
        const double harmonic = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        const double direct = f_score(counts);
        CHECK(std::fabs(harmonic - direct) <= 1e-12);
    }
}

TEST_CASE("confusion_counts matches an exhaustive pairwise comparison") {
    std::mt19937_64 rng(271828);
    std::vector<std::string> vocab;
    for (int i = 0; i < 30; ++i) vocab.push_back("item" + std::to_string(i));

    for (int iter = 0; iter < 1000; ++iter) {
        ProductSet gold, predicted;
        for (const auto& item : vocab) {
            if (rng() % 4 == 0) gold.insert(item);
            if (rng() % 4 == 0) predicted.insert(item);
        }

        std::size_t tp = 0;
        for (const auto& g : gold) {
            for (const auto& p : predicted) {
                if (g == p) ++tp;
            }
        }
        const ConfusionCounts expected{tp, predicted.size() - tp, gold.size() - tp};
        CHECK(confusion_counts(gold, predicted) == expected);
    }
}

TEST_CASE("swapping gold and predicted swaps precision and recall") {
    std::mt19937_64 rng(99);
    std::vector<std::string> vocab;
    for (int i = 0; i < 12; ++i) vocab.push_back("v" + std::to_string(i));
    for (int iter = 0; iter < 200; ++iter) {
        ProductSet a, b;
        for (const auto& item : vocab) {
            if (rng() % 3 == 0) a.insert(item);
            if (rng() % 3 == 0) b.insert(item);
        }
        const auto ab = confusion_counts(a, b);
        const auto ba = confusion_counts(b, a);
        CHECK(ab.tp == ba.tp);
        CHECK(ab.fp == ba.fn);
        CHECK(ab.fn == ba.fp);
        CHECK(precision(ab) == recall(ba));
        CHECK(recall(ab) == precision(ba));
        CHECK(f_score(ab) == f_score(ba));

        for (const double v : {precision(ab), recall(ab), f_score(ab)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        // The harmonic mean sits between its arguments.
        if (precision(ab) > 0.0 && recall(ab) > 0.0) {
            CHECK(f_score(ab) >= std::min(precision(ab), recall(ab)) - 1e-12);
            CHECK(f_score(ab) <= std::max(precision(ab), recall(ab)) + 1e-12);
        }
    }
}

TEST_CASE("evaluate pairs results by page id and macro averages") {
    std::vector<AnnotatedDocument> gold(3);
    gold[0].company.page_id = 1;
    gold[0].company.name = "A";
    gold[0].gold = set_of({"x", "y"});
    gold[1].company.page_id = 2;
    gold[1].company.name = "B";
    gold[1].gold = set_of({"z"});
    gold[2].company.page_id = 3;
    gold[2].company.name = "C";
    gold[2].gold = set_of({"w"});

    // Doc 1: perfect. Doc 2: a failed extraction counts as empty. Doc 3 has
    // no result row at all and also scores as empty.
    std::vector<ExtractionResult> results = {
        result_for(1, set_of({"x", "y"})),
        result_for(2, set_of({"z"}), ExtractionStatus::service_failed),
        result_for(99, set_of({"ignored"})),
    };

    const auto report = evaluate(gold, results);
    REQUIRE(report.documents.size() == 3);
    CHECK(report.documents[0].f_score == 1.0);
    CHECK(report.documents[1].counts == ConfusionCounts{0, 0, 1});
    CHECK(report.documents[1].status == ExtractionStatus::service_failed);
    CHECK(report.documents[2].counts == ConfusionCounts{0, 0, 1});
    CHECK(report.mean_precision == doctest::Approx(1.0 / 3.0));
    CHECK(report.mean_recall == doctest::Approx(1.0 / 3.0));
    CHECK(report.mean_f_score == doctest::Approx(1.0 / 3.0));
    CHECK(report.pooled == ConfusionCounts{2, 0, 2});
}

TEST_CASE("empty-status predictions are trusted, failed ones discarded") {
    std::vector<AnnotatedDocument> gold(1);
    gold[0].company.page_id = 1;
    gold[0].gold = set_of({"x"});

    auto parse_failed = result_for(1, set_of({"x"}), ExtractionStatus::parse_failed);
    const auto report = evaluate(gold, {&parse_failed, 1});
    CHECK(report.documents[0].counts == ConfusionCounts{0, 0, 1});
}

TEST_CASE("trial seeds derive deterministically and distinctly") {
    CHECK(derive_trial_seed(42, 0, 0) == derive_trial_seed(42, 0, 0));
    std::set<std::uint64_t> seen;
    for (int n = 0; n < 13; ++n) {
        for (int t = 0; t < 5; ++t) seen.insert(derive_trial_seed(42, n, t));
    }
    CHECK(seen.size() == 13 * 5);
    CHECK(derive_trial_seed(42, 1, 0) != derive_trial_seed(43, 1, 0));
}

TEST_CASE("gazetteer sweep is deterministic and zero-shot scores zero") {
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;

    const std::vector<int> shots = {0, 1, 3};
    const auto first = run_sweep(config, corpus, shots, 3, 42);
    const auto second = run_sweep(config, corpus, shots, 3, 42);
    CHECK(sweep_csv(first) == sweep_csv(second));

    REQUIRE(first.points.size() == 3);
    CHECK(first.points[0].n_shot == 0);
    // An empty dictionary predicts nothing anywhere: mean F is exactly zero.
    CHECK(first.points[0].mean_f_score == 0.0);
    CHECK(first.points[0].mean_precision == 0.0);
    CHECK(first.points[0].mean_recall == 0.0);
    // One or more training documents seed the dictionary; summaries mention
    // their own products, so the score moves off the floor.
    CHECK(first.points[2].mean_f_score > 0.0);

    for (const auto& point : first.points) {
        REQUIRE(point.trials.size() == 3);
        for (const auto& trial : point.trials) {
            CHECK(trial.test_size == corpus.size() - point.n_shot);
            CHECK(trial.seed == derive_trial_seed(42, point.n_shot, trial.trial));
        }
    }
}

TEST_CASE("sweep hook receives the trial config and drives scoring") {
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    ExtractorConfig config;
    config.kind = ExtractorKind::replay;
    config.model_name = "m";
    config.response_dir = "/unused";

    int calls = 0;
    ExtractionHook hook = [&](const ExtractorConfig& trial_config,
                              std::span<const CompanyRecord> targets) {
        ++calls;
        CHECK(trial_config.train_examples.size() == 1);
        std::vector<ExtractionResult> results;
        for (const auto& target : targets) {
            ExtractionResult r;
            r.page_id = target.page_id;
            r.extractor_id = trial_config.extractor_id();
            r.status = ExtractionStatus::empty;
            results.push_back(std::move(r));
        }
        return results;
    };

    const std::vector<int> shots = {1};
    const auto sweep = run_sweep(config, corpus, shots, 2, 7, hook);
    CHECK(calls == 2);
    REQUIRE(sweep.points.size() == 1);
    CHECK(sweep.points[0].mean_f_score == 0.0);
    CHECK(sweep.extractor_id == "replay:m");
    CHECK(sweep.base_seed == 7);
}

TEST_CASE("replay sweep over the recordings reproduces the pinned curve") {
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    ExtractorConfig config;
    config.kind = ExtractorKind::replay;
    config.model_name = "gpt-3.5-turbo";
    config.response_dir = fixtures_dir() / "cache" / "responses";

    const std::vector<int> shots = {0, 9};
    const auto sweep = run_sweep(config, corpus, shots, 3, 42);
    REQUIRE(sweep.points.size() == 2);
    CHECK(sweep.points[0].mean_f_score == doctest::Approx(0.676467).epsilon(5e-6));
    CHECK(sweep.points[1].mean_f_score == doctest::Approx(0.934164).epsilon(5e-6));
    CHECK(sweep.points[1].mean_f_score > sweep.points[0].mean_f_score);
}

TEST_CASE("sweep csv carries the documented header and fixed precision") {
    SweepResult sweep;
    sweep.extractor_id = "gazetteer";
    sweep.base_seed = 42;
    sweep.trials = 3;
    SweepPoint point;
    point.n_shot = 2;
    point.mean_precision = 0.5;
    point.mean_recall = 0.25;
    point.mean_f_score = 1.0 / 3.0;
    sweep.points.push_back(point);

    CHECK(sweep_csv(sweep) ==
          "extractor,n_shot,trials,mean_precision,mean_recall,mean_f\n"
          "gazetteer,2,3,0.500000,0.250000,0.333333\n");
}
