#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "editodds/evaluation.hpp"
#include "editodds/training.hpp"

namespace editodds {

// Subcommand bodies, separated from argument parsing so tests can drive them
// directly. Progress and summaries go to `log` (standard error in the
// binary); data artifacts go to files only.

struct QualityOptions {
    std::string revisions_path;
    std::string out_path;
    std::optional<std::int64_t> cutoff_ts;
    int horizon = 10;
    int threads = 1;
};

// JSON-lines revisions -> observation TSV. Collapses consecutive same-user
// runs, scores implicit quality, skips edits without usable signal. Returns
// the number of observations written.
long run_quality(const QualityOptions& opt, std::ostream& log);

struct TrainOptions {
    std::string observations_path;
    std::string checkpoint_path;
    std::string manifest_path;  // empty: checkpoint_path + ".split.json"
    std::string log_file;       // per-epoch TSV; empty: the log stream
    TrainConfig config;
    double split_fraction = 0.8;
    bool prune = false;
    int threads = 1;
};

// Chronological split, fit on the train side, write checkpoint and split
// manifest.
void run_train(const TrainOptions& opt, std::ostream& log);

struct EvaluateOptions {
    std::string checkpoint_path;
    std::string observations_path;
    std::string report_path;               // eval report JSON; empty skips
    std::string pr_path;                   // PR curve TSV; empty skips
    std::string manifest_path;             // empty: checkpoint_path + ".split.json"
    std::optional<double> split_fraction;  // fallback when the manifest is absent
    PositiveClass positive = PositiveClass::bad;
    bool prune = false;
};

// Evaluates the checkpoint on the validation side of the stored split.
EvalReport run_evaluate(const EvaluateOptions& opt, std::ostream& log);

struct PredictOptions {
    std::string checkpoint_path;
    std::string user;
    std::string item;
};

// Prints the probability to `out` and returns it.
double run_predict(const PredictOptions& opt, std::ostream& out);

enum class AnalysisKind { percentiles, difficulty, pca, correlation, churn };

AnalysisKind analysis_kind_from_name(std::string_view name);  // throws std::invalid_argument

struct AnalyzeOptions {
    AnalysisKind kind = AnalysisKind::percentiles;
    std::string checkpoint_path;     // unused by `correlation`
    std::string observations_path;
    std::string out_path;
    std::string extremes_path;       // pca only; empty: out_path + ".extremes.tsv"
    std::string manifest_path;       // empty: checkpoint_path + ".split.json"
    std::optional<double> split_fraction;
    int top_k = 5;
    int n_components = 2;
    int max_users = 0;
    bool prune = false;
};

// Writes the requested report. Statistics come from the training side of the
// stored split when a manifest or fraction is available, otherwise from the
// whole file.
void run_analyze(const AnalyzeOptions& opt, std::ostream& log);

}  // namespace editodds
