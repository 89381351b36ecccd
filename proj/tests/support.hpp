#pragma once

// Shared fixture builders and independent oracles for the test suites. The
// oracles deliberately use the most literal textbook formulation of each
// computation so they share no shortcuts with the production code.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "editodds/dataset.hpp"
#include "editodds/evaluation.hpp"
#include "editodds/model.hpp"
#include "editodds/training.hpp"

namespace testsupport {

inline std::filesystem::path unique_temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("editodds_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parameters as one flat coordinate vector: offset first, then the per-entity
// arrays in their declaration order. unflatten is the exact inverse.
inline std::vector<double> flatten(const editodds::Params& params) {
    std::vector<double> v;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, editodds::AverageParams>) {
                v.push_back(p.p);
            } else if constexpr (std::is_same_v<T, editodds::UserOnlyParams>) {
                v.push_back(p.b);
                v.insert(v.end(), p.s.begin(), p.s.end());
            } else if constexpr (std::is_same_v<T, editodds::BasicParams>) {
                v.push_back(p.b);
                v.insert(v.end(), p.s.begin(), p.s.end());
                v.insert(v.end(), p.d.begin(), p.d.end());
            } else if constexpr (std::is_same_v<T, editodds::FullParams>) {
                v.push_back(p.base.b);
                v.insert(v.end(), p.base.s.begin(), p.base.s.end());
                v.insert(v.end(), p.base.d.begin(), p.base.d.end());
                v.insert(v.end(), p.x.begin(), p.x.end());
                v.insert(v.end(), p.y.begin(), p.y.end());
            } else {
                v.push_back(p.b);
                v.insert(v.end(), p.s.begin(), p.s.end());
                v.insert(v.end(), p.beta.begin(), p.beta.end());
            }
        },
        params);
    return v;
}

inline void unflatten(editodds::Params& params, std::span<const double> v) {
    size_t at = 0;
    auto take = [&](double& slot) { slot = v[at++]; };
    auto take_all = [&](std::vector<double>& slots) {
        for (auto& s : slots) take(s);
    };
    std::visit(
        [&](auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, editodds::AverageParams>) {
                take(p.p);
            } else if constexpr (std::is_same_v<T, editodds::UserOnlyParams>) {
                take(p.b);
                take_all(p.s);
            } else if constexpr (std::is_same_v<T, editodds::BasicParams>) {
                take(p.b);
                take_all(p.s);
                take_all(p.d);
            } else if constexpr (std::is_same_v<T, editodds::FullParams>) {
                take(p.base.b);
                take_all(p.base.s);
                take_all(p.base.d);
                take_all(p.x);
                take_all(p.y);
            } else {
                take(p.b);
                take_all(p.s);
                take_all(p.beta);
            }
        },
        params);
}

// Central finite differences of the regularized NLL, coordinate by coordinate.
inline std::vector<double> fd_gradient(const editodds::Params& at,
                                       std::span<const editodds::Observation> batch, double l2,
                                       double h = 1e-5) {
    const std::vector<double> center = flatten(at);
    std::vector<double> g(center.size());
    editodds::Params scratch = at;
    for (size_t j = 0; j < center.size(); ++j) {
        std::vector<double> v = center;
        v[j] = center[j] + h;
        unflatten(scratch, v);
        const double up = editodds::negative_log_likelihood(scratch, batch, l2);
        v[j] = center[j] - h;
        unflatten(scratch, v);
        const double down = editodds::negative_log_likelihood(scratch, batch, l2);
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

struct Row {
    int user = 0;
    int item = 0;
    double q = 0.0;
    std::int64_t ts = 0;
};

// Builds a dataset directly, bypassing the TSV loader. Vocabularies get ids
// "u0..uN" / "i0..iM"; rows are sorted by (ts, user, item) to preserve the
// loader's ordering invariant.
inline editodds::Dataset make_dataset(std::vector<Row> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.ts != b.ts) return a.ts < b.ts;
        if (a.user != b.user) return a.user < b.user;
        return a.item < b.item;
    });
    int n_users = 0;
    int n_items = 0;
    for (const auto& r : rows) {
        n_users = std::max(n_users, r.user + 1);
        n_items = std::max(n_items, r.item + 1);
    }
    editodds::Dataset ds;
    for (int u = 0; u < n_users; ++u) ds.users.add("u" + std::to_string(u));
    for (int i = 0; i < n_items; ++i) ds.items.add("i" + std::to_string(i));
    ds.observations.reserve(rows.size());
    for (const auto& r : rows) ds.observations.push_back({r.user, r.item, r.q, r.ts});
    ds.recount();
    return ds;
}

// Brute-force PR curve: enumerate the distinct thresholds descending and
// rescan the whole set for each one.
struct PrOraclePoint {
    double recall = 0.0;
    double precision = 0.0;
    double threshold = 0.0;
};

inline std::vector<PrOraclePoint> pr_points_oracle(std::span<const editodds::ScoredLabel> data) {
    std::vector<double> thresholds;
    long positives = 0;
    for (const auto& sl : data) {
        thresholds.push_back(sl.score);
        if (sl.positive) ++positives;
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<PrOraclePoint> points;
    for (double t : thresholds) {
        long tp = 0;
        long fp = 0;
        for (const auto& sl : data) {
            if (sl.score >= t) (sl.positive ? tp : fp) += 1;
        }
        PrOraclePoint p;
        p.threshold = t;
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        p.recall = static_cast<double>(tp) / static_cast<double>(positives);
        points.push_back(p);
    }
    return points;
}

inline double auprc_oracle(const std::vector<PrOraclePoint>& points) {
    double area = 0.0;
    double prev_recall = 0.0;
    for (const auto& p : points) {
        area += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    return area;
}

// Full-matrix Wagner-Fischer distance, no trimming or banding.
inline long levenshtein_oracle(std::u32string_view a, std::u32string_view b) {
    const size_t n = a.size();
    const size_t m = b.size();
    std::vector<long> dp((n + 1) * (m + 1));
    auto cell = [&](size_t i, size_t j) -> long& { return dp[i * (m + 1) + j]; };
    for (size_t i = 0; i <= n; ++i) cell(i, 0) = static_cast<long>(i);
    for (size_t j = 0; j <= m; ++j) cell(0, j) = static_cast<long>(j);
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            const long sub = cell(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
            cell(i, j) = std::min({cell(i - 1, j) + 1, cell(i, j - 1) + 1, sub});
        }
    }
    return cell(n, m);
}

inline std::string encode_utf8(std::u32string_view text) {
    std::string out;
    for (char32_t cp : text) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

// Random text over a mixed alphabet (ASCII, Latin-1, CJK, an astral plane
// character) so multi-byte encodings are always in play.
inline std::u32string random_text(std::mt19937_64& rng, int max_len) {
    static const std::u32string alphabet = U"abcdeéüñ漢字猫\U0001F600 ";
    std::uniform_int_distribution<int> len_dist(0, max_len);
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    const int len = len_dist(rng);
    std::u32string out;
    out.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) out.push_back(alphabet[pick(rng)]);
    return out;
}

}  // namespace testsupport
