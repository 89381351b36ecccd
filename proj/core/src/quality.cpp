#include "editodds/quality.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "editodds/parallel.hpp"

namespace editodds {

std::u32string decode_utf8(std::string_view utf8) {
    std::u32string out;
    out.reserve(utf8.size());
    size_t i = 0;
    const size_t n = utf8.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(utf8[i]);
        char32_t cp = 0;
        size_t len = 0;
        if (c < 0x80) {
            cp = c;
            len = 1;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            len = 3;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            len = 4;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            const unsigned char cc = static_cast<unsigned char>(utf8[i + k]);
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

long levenshtein(std::u32string_view a, std::u32string_view b) {
    // Shared prefix and suffix never change the distance.
    while (!a.empty() && !b.empty() && a.front() == b.front()) {
        a.remove_prefix(1);
        b.remove_prefix(1);
    }
    while (!a.empty() && !b.empty() && a.back() == b.back()) {
        a.remove_suffix(1);
        b.remove_suffix(1);
    }
    if (a.empty()) return static_cast<long>(b.size());
    if (b.empty()) return static_cast<long>(a.size());
    if (a.size() > b.size()) std::swap(a, b);

    std::vector<long> row(a.size() + 1);
    std::iota(row.begin(), row.end(), 0L);
    for (size_t j = 1; j <= b.size(); ++j) {
        long diag = row[0];
        row[0] = static_cast<long>(j);
        for (size_t i = 1; i <= a.size(); ++i) {
            const long sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[i];
            row[i] = std::min({row[i] + 1, row[i - 1] + 1, sub});
        }
    }
    return row[a.size()];
}

long levenshtein_utf8(std::string_view a, std::string_view b) {
    return levenshtein(decode_utf8(a), decode_utf8(b));
}

namespace {

// Decoded texts of one history with v_0 = empty prepended; text(k) = v_k.
struct DecodedHistory {
    std::vector<std::u32string> states;

    explicit DecodedHistory(const ArticleHistory& history) {
        states.reserve(history.revisions.size() + 1);
        states.emplace_back();
        for (const auto& rev : history.revisions) states.push_back(decode_utf8(rev.text));
    }

    int last_index() const { return static_cast<int>(states.size()) - 1; }

    std::optional<double> quality(int k, int max_future, int horizon) const {
        if (k < 1 || k > last_index()) {
            throw std::out_of_range("edit index " + std::to_string(k) + " out of range [1, " +
                                    std::to_string(last_index()) + "]");
        }
        const long base = levenshtein(states[k - 1], states[k]);
        if (base == 0) return std::nullopt;
        const int available = std::min(max_future, last_index() - k);
        const int L = std::min(available, horizon);
        if (L < 1) return std::nullopt;
        double sum = 0.0;
        for (int l = 1; l <= L; ++l) {
            const long to_prev = levenshtein(states[k - 1], states[k + l]);
            const long to_cur = levenshtein(states[k], states[k + l]);
            sum += 0.5 + static_cast<double>(to_prev - to_cur) / (2.0 * static_cast<double>(base));
        }
        return sum / L;
    }
};

}  // namespace

std::optional<double> edit_quality_at(const ArticleHistory& history, int k, int l) {
    if (l < 1) throw std::invalid_argument("future offset l must be >= 1");
    DecodedHistory decoded(history);
    if (k < 1 || k > decoded.last_index()) {
        throw std::out_of_range("edit index " + std::to_string(k) + " out of range [1, " +
                                std::to_string(decoded.last_index()) + "]");
    }
    if (k + l > decoded.last_index()) return std::nullopt;
    const long base = levenshtein(decoded.states[k - 1], decoded.states[k]);
    if (base == 0) return std::nullopt;
    const long to_prev = levenshtein(decoded.states[k - 1], decoded.states[k + l]);
    const long to_cur = levenshtein(decoded.states[k], decoded.states[k + l]);
    return 0.5 + static_cast<double>(to_prev - to_cur) / (2.0 * static_cast<double>(base));
}

std::optional<double> edit_quality(const ArticleHistory& history, int k, int horizon) {
    DecodedHistory decoded(history);
    return decoded.quality(k, decoded.last_index(), horizon);
}

ArticleHistory collapse_consecutive(const ArticleHistory& history) {
    ArticleHistory out;
    out.article_id = history.article_id;
    for (size_t i = 0; i < history.revisions.size(); ++i) {
        if (i + 1 < history.revisions.size() &&
            history.revisions[i + 1].user == history.revisions[i].user) {
            continue;  // not the last revision of this user's run
        }
        out.revisions.push_back(history.revisions[i]);
    }
    return out;
}

std::vector<ScoredEdit> history_to_observations(const ArticleHistory& history,
                                                std::optional<std::int64_t> cutoff_ts,
                                                int horizon) {
    std::vector<ScoredEdit> out;
    if (history.revisions.empty()) return out;
    DecodedHistory decoded(history);
    const int n = decoded.last_index();

    // Number of revisions at or before the cutoff; edits in that prefix may
    // only look at the prefix.
    int cut_n = n;
    if (cutoff_ts) {
        cut_n = 0;
        while (cut_n < n && history.revisions[static_cast<size_t>(cut_n)].ts <= *cutoff_ts) {
            ++cut_n;
        }
    }

    for (int k = 1; k <= n; ++k) {
        const bool guarded = cutoff_ts && k <= cut_n;
        const int max_future = guarded ? cut_n - k : n - k;
        const auto q = decoded.quality(k, max_future, horizon);
        if (!q) continue;
        const Revision& rev = history.revisions[static_cast<size_t>(k - 1)];
        out.push_back({rev.user, history.article_id, *q, rev.ts});
    }
    return out;
}

std::vector<ArticleHistory> read_revisions_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open revision file: " + path);

    std::vector<ArticleHistory> articles;
    std::map<std::string, size_t> index;

    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            Revision rev;
            rev.rev_id = rec.at("rev_id").get<std::string>();
            rev.user = rec.at("user").get<std::string>();
            rev.ts = rec.at("ts").get<std::int64_t>();
            rev.text = rec.at("text").get<std::string>();
            const std::string article = rec.at("article").get<std::string>();
            auto [it, inserted] = index.try_emplace(article, articles.size());
            if (inserted) articles.push_back({article, {}});
            articles[it->second].revisions.push_back(std::move(rev));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad revision record: " + e.what());
        }
    }

    for (auto& article : articles) {
        std::stable_sort(article.revisions.begin(), article.revisions.end(),
                         [](const Revision& a, const Revision& b) {
                             if (a.ts != b.ts) return a.ts < b.ts;
                             return a.rev_id < b.rev_id;
                         });
    }
    return articles;
}

void write_observations_tsv(const std::string& path, const std::vector<ScoredEdit>& edits) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "user\titem\tq\tts\n";
    char qbuf[64];
    for (const auto& e : edits) {
        if (e.user.find_first_of("\t\n") != std::string::npos ||
            e.article.find_first_of("\t\n") != std::string::npos) {
            throw std::runtime_error("id contains tab or newline: " + e.user + " / " + e.article);
        }
        std::snprintf(qbuf, sizeof(qbuf), "%.9g", e.q);
        out << e.user << '\t' << e.article << '\t' << qbuf << '\t' << e.ts << '\n';
    }
    if (!out) throw std::runtime_error("failed writing observations: " + path);
}

std::vector<ScoredEdit> score_articles(const std::vector<ArticleHistory>& articles,
                                       std::optional<std::int64_t> cutoff_ts, ThreadPool* pool,
                                       int horizon) {
    std::vector<std::vector<ScoredEdit>> per_article(articles.size());
    auto score = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t a = begin; a < end; ++a) {
            const auto collapsed = collapse_consecutive(articles[static_cast<size_t>(a)]);
            per_article[static_cast<size_t>(a)] =
                history_to_observations(collapsed, cutoff_ts, horizon);
        }
    };
    if (pool) {
        pool->parallel_for(static_cast<std::int64_t>(articles.size()), score);
    } else {
        score(0, static_cast<std::int64_t>(articles.size()));
    }

    std::vector<ScoredEdit> out;
    for (auto& edits : per_article) {
        out.insert(out.end(), std::make_move_iterator(edits.begin()),
                   std::make_move_iterator(edits.end()));
    }
    return out;
}

}  // namespace editodds
