#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peerscout/corpus.hpp"
#include "peerscout/extract.hpp"

namespace peerscout {

// Set-level confusion counts from exact matching of canonical product items.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& other) {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion_counts(const ProductSet& gold, const ProductSet& predicted);

// All three degrade to 0 when their denominator is 0.
double precision(const ConfusionCounts& counts);
double recall(const ConfusionCounts& counts);
double f_score(const ConfusionCounts& counts);

struct DocumentScore {
    std::int64_t page_id = 0;
    std::string name;
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    ExtractionStatus status = ExtractionStatus::ok;
};

// Macro average over documents plus the pooled (micro) counts.
struct EvalReport {
    std::vector<DocumentScore> documents;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_score = 0.0;
    ConfusionCounts pooled;
};

// Pairs results with gold annotations by page id. Results without a matching
// annotation are ignored; annotated documents without a result are scored as
// empty predictions.
EvalReport evaluate(std::span<const AnnotatedDocument> gold,
                    std::span<const ExtractionResult> results);

struct TrialScore {
    int n_shot = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_score = 0.0;
    std::size_t test_size = 0;
};

struct SweepPoint {
    int n_shot = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_score = 0.0;
    std::vector<TrialScore> trials;
};

struct SweepResult {
    std::string extractor_id;
    std::uint64_t base_seed = 0;
    int trials = 0;
    std::vector<SweepPoint> points;
};

std::uint64_t derive_trial_seed(std::uint64_t base_seed, int n_shot, int trial);

// Runs one extraction per (n_shot, trial, test document): splits the corpus
// with the derived trial seed, extracts over the test partition, and macro
// averages scores over documents then trials. The extraction hook receives
// the ready-to-run config so callers choose llm, replay, or gazetteer.
using ExtractionHook = std::function<std::vector<ExtractionResult>(
    const ExtractorConfig&, std::span<const CompanyRecord>)>;

SweepResult run_sweep(const ExtractorConfig& config,
                      std::span<const AnnotatedDocument> corpus,
                      std::span<const int> shot_counts, int trials,
                      std::uint64_t base_seed, const ExtractionHook& hook = {});

// CSV with one row per shot count: extractor,n_shot,trials,mean_precision,
// mean_recall,mean_f. Values use six decimal places.
std::string sweep_csv(const SweepResult& sweep);
std::string format_sweep_table(const SweepResult& sweep);
std::string format_eval_table(const EvalReport& report);

}  // namespace peerscout
