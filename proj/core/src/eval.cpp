#include "peerscout/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "peerscout/rand.hpp"

namespace peerscout {

ConfusionCounts confusion_counts(const ProductSet& gold, const ProductSet& predicted) {
    ConfusionCounts counts;
    for (const auto& item : predicted) {
        if (gold.contains(item)) {
            ++counts.tp;
        } else {
            ++counts.fp;
        }
    }
    for (const auto& item : gold) {
        if (!predicted.contains(item)) ++counts.fn;
    }
    return counts;
}

double precision(const ConfusionCounts& counts) {
    const auto denom = counts.tp + counts.fp;
    return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts& counts) {
    const auto denom = counts.tp + counts.fn;
    return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double f_score(const ConfusionCounts& counts) {
    const auto denom = 2 * counts.tp + counts.fp + counts.fn;
    return denom == 0 ? 0.0
                      : 2.0 * static_cast<double>(counts.tp) / static_cast<double>(denom);
}

EvalReport evaluate(std::span<const AnnotatedDocument> gold,
                    std::span<const ExtractionResult> results) {
    std::unordered_map<std::int64_t, const ExtractionResult*> by_page;
    for (const auto& result : results) by_page[result.page_id] = &result;

    EvalReport report;
    static const ProductSet kEmpty;
    for (const auto& doc : gold) {
        DocumentScore score;
        score.page_id = doc.company.page_id;
        score.name = doc.company.name;

        const auto it = by_page.find(doc.company.page_id);
        const ProductSet* predicted = &kEmpty;
        if (it != by_page.end()) {
            score.status = it->second->status;
            // Failed extractions still count, as if nothing was predicted.
            if (score.status == ExtractionStatus::ok ||
                score.status == ExtractionStatus::empty) {
                predicted = &it->second->predicted;
            }
        }
        score.counts = confusion_counts(doc.gold, *predicted);
        score.precision = precision(score.counts);
        score.recall = recall(score.counts);
        score.f_score = f_score(score.counts);

        report.pooled += score.counts;
        report.mean_precision += score.precision;
        report.mean_recall += score.recall;
        report.mean_f_score += score.f_score;
        report.documents.push_back(std::move(score));
    }
    if (!report.documents.empty()) {
        const auto n = static_cast<double>(report.documents.size());
        report.mean_precision /= n;
        report.mean_recall /= n;
        report.mean_f_score /= n;
    }
    return report;
}

std::uint64_t derive_trial_seed(std::uint64_t base_seed, int n_shot, int trial) {
    const auto mixed = splitmix64((static_cast<std::uint64_t>(n_shot) << 32) |
                                  static_cast<std::uint64_t>(trial));
    return base_seed + mixed;
}

SweepResult run_sweep(const ExtractorConfig& config,
                      std::span<const AnnotatedDocument> corpus,
                      std::span<const int> shot_counts, int trials,
                      std::uint64_t base_seed, const ExtractionHook& hook) {
    SweepResult sweep;
    sweep.extractor_id = config.extractor_id();
    sweep.base_seed = base_seed;
    sweep.trials = trials;

    const auto run_extraction = [&](const ExtractorConfig& trial_config,
                                    std::span<const CompanyRecord> targets) {
        if (hook) return hook(trial_config, targets);
        return extract_batch(trial_config, targets, 1);
    };

    for (const int n_shot : shot_counts) {
        SweepPoint point;
        point.n_shot = n_shot;
        for (int trial = 0; trial < trials; ++trial) {
            TrialScore score;
            score.n_shot = n_shot;
            score.trial = trial;
            score.seed = derive_trial_seed(base_seed, n_shot, trial);

            const auto split =
                split_train_test(corpus, static_cast<std::size_t>(n_shot), score.seed);
            ExtractorConfig trial_config = config;
            trial_config.train_examples = split.train;

            std::vector<CompanyRecord> targets;
            std::vector<AnnotatedDocument> gold;
            targets.reserve(split.test.size());
            gold.reserve(split.test.size());
            for (const auto& doc : split.test) {
                targets.push_back(doc.company);
                gold.push_back(doc);
            }

            const auto results = run_extraction(trial_config, targets);
            const auto report = evaluate(gold, results);
            score.mean_precision = report.mean_precision;
            score.mean_recall = report.mean_recall;
            score.mean_f_score = report.mean_f_score;
            score.test_size = split.test.size();

            point.mean_precision += score.mean_precision;
            point.mean_recall += score.mean_recall;
            point.mean_f_score += score.mean_f_score;
            point.trials.push_back(score);
        }
        if (trials > 0) {
            point.mean_precision /= trials;
            point.mean_recall /= trials;
            point.mean_f_score /= trials;
        }
        sweep.points.push_back(std::move(point));
    }
    return sweep;
}

namespace {

std::string format_fixed(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

}  // namespace

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "extractor,n_shot,trials,mean_precision,mean_recall,mean_f\n";
    for (const auto& point : sweep.points) {
        out << sweep.extractor_id << ',' << point.n_shot << ',' << sweep.trials << ','
            << format_fixed(point.mean_precision) << ','
            << format_fixed(point.mean_recall) << ','
            << format_fixed(point.mean_f_score) << '\n';
    }
    return out.str();
}

std::string format_sweep_table(const SweepResult& sweep) {
    std::ostringstream out;
    out << "extractor: " << sweep.extractor_id << "  trials: " << sweep.trials
        << "  seed: " << sweep.base_seed << '\n';
    out << "n_shot  precision  recall  f_score\n";
    for (const auto& point : sweep.points) {
        char row[96];
        std::snprintf(row, sizeof(row), "%6d  %9.4f  %6.4f  %7.4f\n", point.n_shot,
                      point.mean_precision, point.mean_recall, point.mean_f_score);
        out << row;
    }
    return out.str();
}

std::string format_eval_table(const EvalReport& report) {
    std::ostringstream out;
    out << "company                         tp  fp  fn  precision  recall  f_score\n";
    for (const auto& doc : report.documents) {
        char row[160];
        std::string name = doc.name.empty() ? std::to_string(doc.page_id) : doc.name;
        if (name.size() > 30) name.resize(30);
        std::snprintf(row, sizeof(row), "%-30s %3zu %3zu %3zu  %9.4f  %6.4f  %7.4f\n",
                      name.c_str(), doc.counts.tp, doc.counts.fp, doc.counts.fn,
                      doc.precision, doc.recall, doc.f_score);
        out << row;
    }
    char totals[160];
    std::snprintf(totals, sizeof(totals),
                  "%-30s %3zu %3zu %3zu  %9.4f  %6.4f  %7.4f\n", "macro average",
                  report.pooled.tp, report.pooled.fp, report.pooled.fn,
                  report.mean_precision, report.mean_recall, report.mean_f_score);
    out << totals;
    return out.str();
}

}  // namespace peerscout
