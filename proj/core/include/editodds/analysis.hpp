#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "editodds/dataset.hpp"
#include "editodds/model.hpp"

namespace editodds {

// Mid-rank percentiles: 100 * (#strictly below + 0.5 * #tied including self)
// divided by the population size. Ties share one value; a unique maximum in a
// population of 1000 lands at 99.95, a full tie at 50.
std::vector<double> midrank_percentiles(std::span<const double> values);

struct PercentileTable {
    std::vector<std::string> items;  // predictor item order
    std::vector<double> difficulty;
    std::vector<double> percentile;
};

// Difficulty (d, or exp(beta)) of every item with its percentile in the item
// population. Throws for variants without a difficulty parameter.
PercentileTable difficulty_percentiles(const Predictor& pred);

// Single-item lookup; throws for unknown items as well.
double difficulty_percentile(const Predictor& pred, std::string_view item);

struct ItemStat {
    std::string item;
    double difficulty = 0.0;
    double acceptance_rate = 0.0;  // fraction of its rows with q >= 0.5
    long edits = 0;
    long users = 0;  // distinct contributors
};

// Hardest-k (descending difficulty) and easiest-k (ascending) items, with
// usage statistics recomputed from the training rows. Ties break by item id;
// k is clamped to the number of items.
std::pair<std::vector<ItemStat>, std::vector<ItemStat>> top_bottom_difficulty(
    const Predictor& pred, const Dataset& train, int k);

struct PcaResult {
    int dim = 0;
    int n_components = 0;
    std::vector<double> mean;         // dim, the centering vector
    std::vector<double> components;   // n_components x dim, row-major, orthonormal
    std::vector<double> projections;  // rows x n_components
    std::vector<double> explained;    // variance ratios, non-increasing
};

// Mean-centered PCA of a rows x dim matrix via eigendecomposition of the
// covariance. Each component's largest-magnitude coordinate is made positive
// so the axes are deterministic. Throws on fewer than 2 rows, on
// n_components outside [1, min(rows, dim)], and on a zero-variance matrix.
PcaResult pca_items(std::span<const double> matrix, int rows, int dim, int n_components);

struct AxisExtremes {
    // (item, coordinate); lowest ascending, highest descending, so the most
    // extreme end of each list comes first. Coordinate ties break by item id.
    std::vector<std::pair<std::string, double>> lowest;
    std::vector<std::pair<std::string, double>> highest;
};

AxisExtremes extreme_items_along_axis(const PcaResult& pca, const Vocabulary& items, int axis,
                                      int k);

struct CorrelationMatrix {
    std::vector<std::string> users;  // row order: by most-contributed item's rank, then id
    std::vector<std::string> items;  // indicator column order: descending row count, then id
    std::vector<double> r;           // users x users, row-major, symmetric, unit diagonal
};

// Pearson correlation between users' binary has-accepted-edit-on-item
// vectors. Users whose indicator vector has zero variance are excluded.
// max_users > 0 keeps only the most active users (by row count) before
// correlating. Throws when fewer than 2 items exist.
CorrelationMatrix cooccurrence_correlation(const Dataset& data, int max_users = 0);

struct ChurnReport {
    double q1_avg_churn = 0.0;  // easiest quartile of the difficulty ranking
    double q3_avg_churn = 0.0;
    long quartile_size = 0;
};

// churn_i = (#rows on item i) * (acceptance rate of item i), averaged over
// the first and third quartiles of the ascending-difficulty ranking.
// Quartile size is floor(M/4); throws when the model has fewer than 4 items.
ChurnReport churn_quartile_report(const Predictor& pred, const Dataset& train);

// Table emitters used by the command layer.
void write_percentile_tsv(const std::string& path, const PercentileTable& table);
void write_top_bottom_tsv(const std::string& path, const std::vector<ItemStat>& top,
                          const std::vector<ItemStat>& bottom);
void write_pca_extremes_tsv(const std::string& path, const PcaResult& pca,
                            const Vocabulary& items, int k);
void write_pca_json(const std::string& path, const PcaResult& pca);
void write_correlation_tsv(const std::string& path, const CorrelationMatrix& matrix);
void write_churn_json(const std::string& path, const ChurnReport& report);

}  // namespace editodds
