#include "editodds/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace editodds {

namespace {

constexpr std::string_view kHeader = "user\titem\tq\tts";

struct RawRow {
    std::string user;
    std::string item;
    double q = 0.0;
    std::int64_t ts = 0;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t start = 0;
    for (;;) {
        const size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

[[noreturn]] void fail_line(const std::string& path, long line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_q(std::string_view s, const std::string& path, long line_no) {
    double q = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, q);
    if (res.ec != std::errc{} || res.ptr != end) {
        fail_line(path, line_no, "cannot parse q value '" + std::string(s) + "'");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        fail_line(path, line_no, "q = " + std::string(s) + " outside [0, 1]");
    }
    return q;
}

std::int64_t parse_ts(std::string_view s, const std::string& path, long line_no) {
    std::int64_t ts = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, ts);
    if (res.ec != std::errc{} || res.ptr != end) {
        fail_line(path, line_no, "cannot parse timestamp '" + std::string(s) + "'");
    }
    return ts;
}

void prune_rows(std::vector<RawRow>& rows) {
    std::erase_if(rows, [](const RawRow& r) { return r.user.empty() || r.item.empty(); });
    std::unordered_set<std::string> accepted_items;
    for (const auto& r : rows) {
        if (is_good(r.q)) accepted_items.insert(r.item);
    }
    std::erase_if(rows, [&](const RawRow& r) { return !accepted_items.contains(r.item); });
}

}  // namespace

double Dataset::mean_q() const {
    if (observations.empty()) {
        throw std::invalid_argument("mean outcome of an empty dataset is undefined");
    }
    double sum = 0.0;
    for (const auto& o : observations) sum += o.q;
    return sum / static_cast<double>(observations.size());
}

void Dataset::recount() {
    user_counts.assign(static_cast<size_t>(users.size()), 0);
    item_counts.assign(static_cast<size_t>(items.size()), 0);
    for (const auto& o : observations) {
        ++user_counts[static_cast<size_t>(o.user)];
        ++item_counts[static_cast<size_t>(o.item)];
    }
}

Dataset load_observations(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open observation file: " + path);

    std::string line;
    long line_no = 0;
    bool saw_header = false;
    std::vector<RawRow> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == kHeader) {
            if (saw_header) fail_line(path, line_no, "duplicate header row");
            saw_header = true;
            continue;
        }
        if (!saw_header) fail_line(path, line_no, "expected header '" + std::string(kHeader) + "'");
        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            fail_line(path, line_no,
                      "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        }
        RawRow row;
        row.user = std::string(fields[0]);
        row.item = std::string(fields[1]);
        row.q = parse_q(fields[2], path, line_no);
        row.ts = parse_ts(fields[3], path, line_no);
        rows.push_back(std::move(row));
    }
    if (!saw_header) throw std::runtime_error(path + ": missing header row");

    if (options.prune) prune_rows(rows);

    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
        if (a.ts != b.ts) return a.ts < b.ts;
        if (a.user != b.user) return a.user < b.user;
        return a.item < b.item;
    });

    Dataset ds;
    ds.observations.reserve(rows.size());
    for (const auto& row : rows) {
        Observation obs;
        obs.user = ds.users.add(row.user);
        obs.item = ds.items.add(row.item);
        obs.q = row.q;
        obs.ts = row.ts;
        ds.observations.push_back(obs);
    }
    ds.recount();
    return ds;
}

std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
    }
    const long cut =
        static_cast<long>(std::floor(static_cast<double>(ds.size()) * train_fraction));
    return split_at_row(ds, cut);
}

std::pair<Dataset, Dataset> split_at_row(const Dataset& ds, long train_rows) {
    const long k = ds.size();
    const long cut = train_rows;
    if (cut <= 0 || cut >= k) {
        throw std::invalid_argument("split at row " + std::to_string(cut) +
                                    " leaves an empty side for " + std::to_string(k) + " rows");
    }
    Dataset train;
    train.users = ds.users;
    train.items = ds.items;
    train.observations.assign(ds.observations.begin(), ds.observations.begin() + cut);
    train.recount();

    Dataset val;
    val.users = ds.users;
    val.items = ds.items;
    val.observations.assign(ds.observations.begin() + cut, ds.observations.end());
    val.recount();
    return {std::move(train), std::move(val)};
}

int bin_index(long count, const BinSpec& spec) {
    if (spec.edges.empty() || spec.edges.front() != 0) {
        throw std::invalid_argument("bin edges must start at 0");
    }
    for (size_t i = 1; i < spec.edges.size(); ++i) {
        if (spec.edges[i] <= spec.edges[i - 1]) {
            throw std::invalid_argument("bin edges must be strictly increasing");
        }
    }
    if (count < 0) throw std::invalid_argument("negative frequency count");
    int bin = 0;
    for (size_t i = 1; i < spec.edges.size(); ++i) {
        if (count >= spec.edges[i]) bin = static_cast<int>(i);
    }
    return bin;
}

std::string bin_label(const BinSpec& spec, int bin) {
    const size_t b = static_cast<size_t>(bin);
    if (bin < 0 || b >= spec.edges.size()) throw std::out_of_range("bin out of range");
    const std::string lo = std::to_string(spec.edges[b]);
    if (b + 1 == spec.edges.size()) return "[" + lo + ",inf)";
    return "[" + lo + "," + std::to_string(spec.edges[b + 1]) + ")";
}

std::vector<int> bin_by_frequency(std::span<const long> counts, const BinSpec& spec) {
    std::vector<int> bins(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) bins[i] = bin_index(counts[i], spec);
    return bins;
}

void write_split_manifest(const std::string& path, const SplitManifest& manifest) {
    nlohmann::json doc;
    doc["train_rows"] = manifest.train_rows;
    doc["val_rows"] = manifest.val_rows;
    doc["boundary_ts"] = manifest.boundary_ts;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open split manifest for writing: " + path);
    out << doc.dump(2) << '\n';
}

SplitManifest read_split_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open split manifest: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("split manifest " + path + " is not valid JSON: " + e.what());
    }
    SplitManifest manifest;
    manifest.train_rows = doc.at("train_rows").get<long>();
    manifest.val_rows = doc.at("val_rows").get<long>();
    manifest.boundary_ts = doc.at("boundary_ts").get<std::int64_t>();
    return manifest;
}

}  // namespace editodds
