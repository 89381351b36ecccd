#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "editodds/dataset.hpp"
#include "editodds/model.hpp"

namespace editodds {

// Which outcome counts as the positive class when ranking: "bad" scores edits
// by 1 - p and treats q < 0.5 as positive, "accepted" scores by p and treats
// q >= 0.5 as positive.
enum class PositiveClass { bad, accepted };

std::string_view positive_class_name(PositiveClass c);
PositiveClass positive_class_from_name(std::string_view name);  // throws std::invalid_argument

struct ScoredLabel {
    double score = 0.0;
    bool positive = false;
};

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
    double threshold = 0.0;  // lowest score admitted at this step
};

struct PRCurve {
    std::vector<PrPoint> points;  // strictest threshold first, recall non-decreasing
    double auprc = 0.0;
};

// Threshold sweep over distinct scores, descending; tied scores enter in one
// step. Throws if the set is empty or contains no positive (recall undefined).
PRCurve pr_curve(std::span<const ScoredLabel> data);

// Step-integrated area, sum of (recall_j - recall_{j-1}) * precision_j. This
// is the average-precision convention; no trapezoid interpolation.
double auprc(const PRCurve& curve);

// Mean of q*log(p) + (1-q)*log(1-p) over the validation rows, a negative
// number near 0 for a good predictor. Predictions go through the raw-id path,
// so entities unseen at training time get the fallback rules.
double average_log_likelihood(const Predictor& pred, const Dataset& validation);

struct BinStat {
    long count = 0;
    double avg_log_likelihood = 0.0;
};

// Average log-likelihood broken out by how often the user and item were seen
// during training. Cells that receive no validation rows are absent.
struct ColdStartReport {
    BinSpec spec;
    std::map<std::pair<int, int>, BinStat> cells;  // keyed (user bin, item bin)
    std::map<int, BinStat> user_marginal;
    std::map<int, BinStat> item_marginal;
};

ColdStartReport cold_start_report(const Predictor& pred, const Dataset& train,
                                  const Dataset& validation, const BinSpec& spec = {});

struct EvalReport {
    double avg_log_likelihood = 0.0;
    double auprc = 0.0;
    PositiveClass positive_class = PositiveClass::bad;
    long rows = 0;
    PRCurve pr;
    ColdStartReport cold_start;
};

// Full validation pass: log-likelihood, PR curve for the chosen positive
// class, cold-start breakdown against the training-side counts.
EvalReport evaluate(const Predictor& pred, const Dataset& train, const Dataset& validation,
                    PositiveClass positive, const BinSpec& spec = {});

// Report as JSON (the PR curve itself is left to the TSV form).
void write_eval_report_json(const std::string& path, const EvalReport& report);

// Two columns, "recall\tprecision", one row per threshold step.
void write_pr_curve_tsv(const std::string& path, const PRCurve& curve);

}  // namespace editodds
