#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editodds/observation.hpp"
#include "editodds/vocabulary.hpp"

namespace editodds {

// Observations with dense indices, sorted by (ts, user, item). After a split
// both sides keep the full vocabulary (so cold-start cases stay addressable)
// while the counts describe only the side's own rows.
struct Dataset {
    std::vector<Observation> observations;
    Vocabulary users;
    Vocabulary items;
    std::vector<long> user_counts;
    std::vector<long> item_counts;

    long size() const { return static_cast<long>(observations.size()); }
    double mean_q() const;

    void recount();  // rebuild counts from observations
};

struct LoadOptions {
    // Drop rows with empty user or item ids, then drop every item that has no
    // accepted (q >= 0.5) row. Mirrors the usual patch-dataset cleanup.
    bool prune = false;
};

// Reads the observation TSV ("user item q ts" header). Rows are stably
// sorted by (ts, user, item) before indices are assigned in first-appearance
// order, so reloading a file reproduces identical indices. Malformed rows,
// q outside [0,1] and duplicated headers are hard errors naming the line.
Dataset load_observations(const std::string& path, const LoadOptions& options = {});

// First floor(K * train_fraction) observations vs. the rest. Throws if either
// side would be empty.
std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, double train_fraction);

// The same split at an explicit row count, as recorded in a split manifest.
std::pair<Dataset, Dataset> split_at_row(const Dataset& ds, long train_rows);

enum class Label { bad, good };

inline Label binarize(double q) { return q < 0.5 ? Label::bad : Label::good; }
inline bool is_good(double q) { return q >= 0.5; }

// Frequency bins for cold-start analysis; edges are left-closed lower bounds
// starting at 0, the last bin is unbounded. Defaults to powers of ten.
struct BinSpec {
    std::vector<long> edges{0, 1, 10, 100, 1000};
};

int bin_index(long count, const BinSpec& spec);
std::string bin_label(const BinSpec& spec, int bin);
std::vector<int> bin_by_frequency(std::span<const long> counts, const BinSpec& spec);

struct SplitManifest {
    long train_rows = 0;
    long val_rows = 0;
    std::int64_t boundary_ts = 0;  // timestamp of the first validation row
};

void write_split_manifest(const std::string& path, const SplitManifest& manifest);
SplitManifest read_split_manifest(const std::string& path);

}  // namespace editodds
