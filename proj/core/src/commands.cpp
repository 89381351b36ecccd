#include "editodds/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <variant>

#include "editodds/analysis.hpp"
#include "editodds/checkpoint.hpp"
#include "editodds/parallel.hpp"
#include "editodds/quality.hpp"

namespace editodds {

namespace {

std::string manifest_or_default(const std::string& manifest, const std::string& checkpoint) {
    return manifest.empty() ? checkpoint + ".split.json" : manifest;
}

std::pair<Dataset, Dataset> load_and_split(const std::string& observations_path, bool prune,
                                           const std::string& manifest_path,
                                           std::optional<double> split_fraction,
                                           std::ostream& log) {
    Dataset ds = load_observations(observations_path, {prune});
    if (std::filesystem::exists(manifest_path)) {
        const SplitManifest manifest = read_split_manifest(manifest_path);
        if (manifest.train_rows + manifest.val_rows != ds.size()) {
            throw std::runtime_error("observation count " + std::to_string(ds.size()) +
                                     " does not match the split manifest (" +
                                     std::to_string(manifest.train_rows + manifest.val_rows) +
                                     " rows); load the file with the flags it was trained with");
        }
        log << "split manifest " << manifest_path << ": train " << manifest.train_rows
            << " rows, validation " << manifest.val_rows << " rows\n";
        return split_at_row(ds, manifest.train_rows);
    }
    if (!split_fraction) {
        throw std::runtime_error("no split manifest at " + manifest_path +
                                 "; pass --split-fraction to define the validation portion");
    }
    return chronological_split(ds, *split_fraction);
}

}  // namespace

long run_quality(const QualityOptions& opt, std::ostream& log) {
    const std::vector<ArticleHistory> articles = read_revisions_jsonl(opt.revisions_path);
    ThreadPool pool(opt.threads);
    const std::vector<ScoredEdit> edits =
        score_articles(articles, opt.cutoff_ts, &pool, opt.horizon);

    std::unordered_map<std::string, long> counts;
    for (const auto& e : edits) ++counts[e.article];
    for (const auto& a : articles) {
        const auto it = counts.find(a.article_id);
        const long n = it == counts.end() ? 0 : it->second;
        log << a.article_id << ": " << n << " scored edits from " << a.revisions.size()
            << " revisions\n";
    }
    log << "total: " << edits.size() << " observations from " << articles.size()
        << " articles\n";
    if (edits.empty()) {
        log << "warning: no edit had a scorable future; writing only the header\n";
    }
    write_observations_tsv(opt.out_path, edits);
    return static_cast<long>(edits.size());
}

void run_train(const TrainOptions& opt, std::ostream& log) {
    const Dataset ds = load_observations(opt.observations_path, {opt.prune});
    log << "loaded " << ds.size() << " observations, " << ds.users.size() << " users, "
        << ds.items.size() << " items\n";
    auto [train, val] = chronological_split(ds, opt.split_fraction);
    log << "train " << train.size() << " rows, validation " << val.size() << " rows\n";

    Predictor pred = [&] {
        if (opt.config.variant == Variant::average) return fit_average(train);

        ThreadPool pool(opt.threads);
        std::ofstream epoch_file;
        std::ostream* epoch_out = &log;
        if (!opt.log_file.empty()) {
            epoch_file.open(opt.log_file, std::ios::binary);
            if (!epoch_file) {
                throw std::runtime_error("cannot open training log for writing: " + opt.log_file);
            }
            epoch_out = &epoch_file;
        }
        *epoch_out << "epoch\ttrain_nll\twall_seconds\n";
        const auto on_epoch = [&](const EpochLog& e) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%d\t%.9g\t%.3f\n", e.epoch, e.train_nll,
                          e.wall_seconds);
            *epoch_out << buf;
            epoch_out->flush();
        };
        return sgd_fit(train, opt.config, &pool, on_epoch);
    }();

    save_checkpoint(pred, opt.checkpoint_path);
    SplitManifest manifest;
    manifest.train_rows = train.size();
    manifest.val_rows = val.size();
    manifest.boundary_ts = val.observations.front().ts;
    const std::string manifest_path = manifest_or_default(opt.manifest_path, opt.checkpoint_path);
    write_split_manifest(manifest_path, manifest);
    log << "checkpoint " << opt.checkpoint_path << ", split manifest " << manifest_path << "\n";
}

EvalReport run_evaluate(const EvaluateOptions& opt, std::ostream& log) {
    const Predictor pred = load_checkpoint(opt.checkpoint_path);
    const auto [train, val] =
        load_and_split(opt.observations_path, opt.prune,
                       manifest_or_default(opt.manifest_path, opt.checkpoint_path),
                       opt.split_fraction, log);
    const EvalReport report = evaluate(pred, train, val, opt.positive);

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "validation rows %ld, avg log-likelihood %.6f, auprc %.6f, positive class %s\n",
                  report.rows, report.avg_log_likelihood, report.auprc,
                  positive_class_name(report.positive_class).data());
    log << buf;
    if (!opt.report_path.empty()) write_eval_report_json(opt.report_path, report);
    if (!opt.pr_path.empty()) write_pr_curve_tsv(opt.pr_path, report.pr);
    return report;
}

double run_predict(const PredictOptions& opt, std::ostream& out) {
    const Predictor pred = load_checkpoint(opt.checkpoint_path);
    const double p = pred.predict(std::string_view(opt.user), std::string_view(opt.item));
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g\n", p);
    out << buf;
    return p;
}

AnalysisKind analysis_kind_from_name(std::string_view name) {
    if (name == "percentiles") return AnalysisKind::percentiles;
    if (name == "difficulty") return AnalysisKind::difficulty;
    if (name == "pca") return AnalysisKind::pca;
    if (name == "correlation") return AnalysisKind::correlation;
    if (name == "churn") return AnalysisKind::churn;
    throw std::invalid_argument("unknown analysis kind '" + std::string(name) +
                                "'; expected percentiles, difficulty, pca, correlation or churn");
}

void run_analyze(const AnalyzeOptions& opt, std::ostream& log) {
    // Statistics describe the training side of the split when one is on
    // record; without any split information every row counts.
    const auto train_side = [&]() -> Dataset {
        Dataset ds = load_observations(opt.observations_path, {opt.prune});
        if (!opt.manifest_path.empty() || !opt.checkpoint_path.empty()) {
            const std::string manifest_path =
                manifest_or_default(opt.manifest_path, opt.checkpoint_path);
            if (std::filesystem::exists(manifest_path)) {
                const SplitManifest manifest = read_split_manifest(manifest_path);
                if (manifest.train_rows + manifest.val_rows == ds.size()) {
                    return split_at_row(ds, manifest.train_rows).first;
                }
                log << "warning: split manifest does not match " << opt.observations_path
                    << "; using every row\n";
                return ds;
            }
        }
        if (opt.split_fraction) return chronological_split(ds, *opt.split_fraction).first;
        return ds;
    };

    switch (opt.kind) {
        case AnalysisKind::percentiles: {
            const Predictor pred = load_checkpoint(opt.checkpoint_path);
            write_percentile_tsv(opt.out_path, difficulty_percentiles(pred));
            break;
        }
        case AnalysisKind::difficulty: {
            const Predictor pred = load_checkpoint(opt.checkpoint_path);
            const Dataset train = train_side();
            const auto [top, bottom] = top_bottom_difficulty(pred, train, opt.top_k);
            write_top_bottom_tsv(opt.out_path, top, bottom);
            break;
        }
        case AnalysisKind::pca: {
            const Predictor pred = load_checkpoint(opt.checkpoint_path);
            const auto* full = std::get_if<FullParams>(&pred.params());
            if (full == nullptr) {
                throw std::invalid_argument(
                    "pca needs a checkpoint of the full variant; this one holds '" +
                    std::string(variant_name(pred.variant())) + "'");
            }
            const PcaResult pca =
                pca_items(full->y, pred.n_items(), full->dim, opt.n_components);
            write_pca_json(opt.out_path, pca);
            const std::string extremes_path = opt.extremes_path.empty()
                                                  ? opt.out_path + ".extremes.tsv"
                                                  : opt.extremes_path;
            write_pca_extremes_tsv(extremes_path, pca, pred.items(), opt.top_k);
            log << "explained variance ratios:";
            for (double e : pca.explained) {
                char buf[24];
                std::snprintf(buf, sizeof(buf), " %.4f", e);
                log << buf;
            }
            log << "\nextremes written to " << extremes_path << "\n";
            break;
        }
        case AnalysisKind::correlation: {
            const Dataset train = train_side();
            const CorrelationMatrix matrix = cooccurrence_correlation(train, opt.max_users);
            write_correlation_tsv(opt.out_path, matrix);
            log << "correlated " << matrix.users.size() << " users over " << matrix.items.size()
                << " items\n";
            break;
        }
        case AnalysisKind::churn: {
            const Predictor pred = load_checkpoint(opt.checkpoint_path);
            const Dataset train = train_side();
            const ChurnReport report = churn_quartile_report(pred, train);
            write_churn_json(opt.out_path, report);
            char buf[120];
            std::snprintf(buf, sizeof(buf),
                          "avg churn: first difficulty quartile %.6g, third quartile %.6g\n",
                          report.q1_avg_churn, report.q3_avg_churn);
            log << buf;
            break;
        }
    }
    log << "report written to " << opt.out_path << "\n";
}

}  // namespace editodds
