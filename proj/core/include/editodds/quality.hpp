#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace editodds {

class ThreadPool;

// One stored revision of an article. `text` is UTF-8; distances are taken
// over its decoded Unicode scalar values.
struct Revision {
    std::string rev_id;
    std::string user;
    std::int64_t ts = 0;
    std::string text;
};

// Ordered revisions of one article, index 0 = the creation edit. The state
// before the first revision is defined as the empty text, which makes the
// creation edit scorable like any other.
struct ArticleHistory {
    std::string article_id;
    std::vector<Revision> revisions;
};

// An edit scored by the quality pipeline, still keyed by raw ids.
struct ScoredEdit {
    std::string user;
    std::string article;
    double q = 0.0;
    std::int64_t ts = 0;
};

std::u32string decode_utf8(std::string_view utf8);

// Minimum number of single-character insertions, deletions and substitutions
// turning a into b. Exact; prefix/suffix trimming only.
long levenshtein(std::u32string_view a, std::u32string_view b);
long levenshtein_utf8(std::string_view a, std::string_view b);

// How much of edit k survives in the article state l revisions later:
//   1/2 + [d(v_{k-1}, v_{k+l}) - d(v_k, v_{k+l})] / (2 d(v_{k-1}, v_k)),
// guaranteed in [0,1] by the triangle inequality. Edits are 1-based; v_0 is
// the empty text. Returns nullopt when d(v_{k-1}, v_k) = 0 (a null edit
// carries no signal) or when k+l is past the last revision.
std::optional<double> edit_quality_at(const ArticleHistory& history, int k, int l);

// Mean of edit_quality_at over l = 1..L with L = min(#subsequent revisions,
// horizon). Nullopt when the edit is a null edit or has no future revision.
inline constexpr int kQualityHorizon = 10;
std::optional<double> edit_quality(const ArticleHistory& history, int k,
                                   int horizon = kQualityHorizon);

// Replaces each maximal run of consecutive revisions by the same user with
// the run's last revision. Idempotent.
ArticleHistory collapse_consecutive(const ArticleHistory& history);

// Scores every edit of a collapsed history. With a cutoff timestamp, edits at
// or before the cutoff see only revisions at or before it (the horizon is
// truncated; edits left with no usable future are skipped), so later data can
// never leak into their quality. Edits after the cutoff use the full history.
std::vector<ScoredEdit> history_to_observations(const ArticleHistory& history,
                                                std::optional<std::int64_t> cutoff_ts = {},
                                                int horizon = kQualityHorizon);

// JSON-lines ingestion: one object per revision with fields
// {"article", "rev_id", "user", "ts", "text"}. Articles may interleave;
// revisions are grouped by article (first-appearance order) and sorted by
// (ts, rev_id). Parse errors report the line number.
std::vector<ArticleHistory> read_revisions_jsonl(const std::string& path);

// Observation TSV shared with the dataset loader: header "user item q ts",
// q with 9 significant digits. Ids must not contain tabs or newlines.
void write_observations_tsv(const std::string& path, const std::vector<ScoredEdit>& edits);

// Runs collapse + scoring over every article, optionally in parallel
// (articles are independent). Output order follows the input article order.
std::vector<ScoredEdit> score_articles(const std::vector<ArticleHistory>& articles,
                                       std::optional<std::int64_t> cutoff_ts = {},
                                       ThreadPool* pool = nullptr, int horizon = kQualityHorizon);

}  // namespace editodds
