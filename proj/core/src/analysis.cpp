#include "editodds/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "json.hpp"

namespace editodds {

namespace {

[[noreturn]] void cannot_open(const std::string& path) {
    throw std::runtime_error("cannot open report file for writing: " + path);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Per-item row and acceptance counts from the training rows, in the
// predictor's item index space. Rows whose item the predictor never saw are
// ignored.
struct ItemUsage {
    std::vector<long> edits;
    std::vector<long> good;
};

ItemUsage item_usage(const Predictor& pred, const Dataset& train) {
    ItemUsage usage;
    usage.edits.assign(static_cast<size_t>(pred.n_items()), 0);
    usage.good.assign(static_cast<size_t>(pred.n_items()), 0);
    for (const auto& o : train.observations) {
        const auto idx = pred.items().find(train.items.id(o.item));
        if (!idx) continue;
        ++usage.edits[static_cast<size_t>(*idx)];
        if (is_good(o.q)) ++usage.good[static_cast<size_t>(*idx)];
    }
    return usage;
}

double acceptance_rate(const ItemUsage& usage, int item) {
    const auto i = static_cast<size_t>(item);
    if (usage.edits[i] == 0) return 0.0;
    return static_cast<double>(usage.good[i]) / static_cast<double>(usage.edits[i]);
}

}  // namespace

std::vector<double> midrank_percentiles(std::span<const double> values) {
    const size_t m = values.size();
    if (m == 0) throw std::invalid_argument("cannot rank an empty population");
    std::vector<size_t> idx(m);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> out(m);
    size_t a = 0;
    while (a < m) {
        size_t b = a + 1;
        while (b < m && values[idx[b]] == values[idx[a]]) ++b;
        const double pct =
            100.0 * (static_cast<double>(a) + 0.5 * static_cast<double>(b - a)) /
            static_cast<double>(m);
        for (size_t j = a; j < b; ++j) out[idx[j]] = pct;
        a = b;
    }
    return out;
}

PercentileTable difficulty_percentiles(const Predictor& pred) {
    PercentileTable table;
    table.difficulty = pred.item_difficulties();
    table.percentile = midrank_percentiles(table.difficulty);
    table.items = pred.items().ids();
    return table;
}

double difficulty_percentile(const Predictor& pred, std::string_view item) {
    const auto idx = pred.items().find(item);
    if (!idx) throw std::out_of_range("unknown item '" + std::string(item) + "'");
    const auto d = pred.item_difficulties();
    const double di = d[static_cast<size_t>(*idx)];
    long below = 0;
    long equal = 0;
    for (double v : d) {
        if (v < di) ++below;
        if (v == di) ++equal;
    }
    return 100.0 * (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(d.size());
}

std::pair<std::vector<ItemStat>, std::vector<ItemStat>> top_bottom_difficulty(
    const Predictor& pred, const Dataset& train, int k) {
    if (k < 0) throw std::invalid_argument("list length must be non-negative");
    const auto d = pred.item_difficulties();
    const int m = pred.n_items();
    if (k > m) k = m;

    const ItemUsage usage = item_usage(pred, train);
    std::vector<std::unordered_set<int>> contributors(static_cast<size_t>(m));
    for (const auto& o : train.observations) {
        const auto idx = pred.items().find(train.items.id(o.item));
        if (!idx) continue;
        contributors[static_cast<size_t>(*idx)].insert(o.user);
    }

    const auto make = [&](int idx) {
        ItemStat s;
        s.item = pred.items().id(idx);
        s.difficulty = d[static_cast<size_t>(idx)];
        s.edits = usage.edits[static_cast<size_t>(idx)];
        s.acceptance_rate = acceptance_rate(usage, idx);
        s.users = static_cast<long>(contributors[static_cast<size_t>(idx)].size());
        return s;
    };

    std::vector<int> ord(static_cast<size_t>(m));
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        const double da = d[static_cast<size_t>(a)];
        const double db = d[static_cast<size_t>(b)];
        if (da != db) return da > db;
        return pred.items().id(a) < pred.items().id(b);
    });
    std::vector<ItemStat> top;
    top.reserve(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) top.push_back(make(ord[static_cast<size_t>(j)]));

    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        const double da = d[static_cast<size_t>(a)];
        const double db = d[static_cast<size_t>(b)];
        if (da != db) return da < db;
        return pred.items().id(a) < pred.items().id(b);
    });
    std::vector<ItemStat> bottom;
    bottom.reserve(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) bottom.push_back(make(ord[static_cast<size_t>(j)]));

    return {std::move(top), std::move(bottom)};
}

PcaResult pca_items(std::span<const double> matrix, int rows, int dim, int n_components) {
    if (rows < 2) throw std::invalid_argument("need at least 2 rows for a principal axis");
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    if (matrix.size() != static_cast<size_t>(rows) * static_cast<size_t>(dim)) {
        throw std::invalid_argument("matrix size does not match rows x dim");
    }
    const int max_components = std::min(rows, dim);
    if (n_components < 1 || n_components > max_components) {
        throw std::invalid_argument("component count must lie in [1, min(rows, dim)]");
    }

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> y(matrix.data(), rows, dim);
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const Eigen::MatrixXd centered = y.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(rows - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition did not converge");
    }
    const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
    double total = 0.0;
    for (Eigen::Index j = 0; j < evals.size(); ++j) total += std::max(0.0, evals[j]);
    if (!(total > 0.0)) throw std::invalid_argument("matrix has zero variance");

    PcaResult res;
    res.dim = dim;
    res.n_components = n_components;
    res.mean.assign(mean.data(), mean.data() + dim);
    res.components.resize(static_cast<size_t>(n_components) * static_cast<size_t>(dim));
    res.explained.resize(static_cast<size_t>(n_components));

    Eigen::MatrixXd comp(n_components, dim);
    for (int c = 0; c < n_components; ++c) {
        const Eigen::Index src = evals.size() - 1 - c;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        int arg = 0;
        double best = std::abs(v[0]);
        for (int j = 1; j < dim; ++j) {
            if (std::abs(v[j]) > best) {
                best = std::abs(v[j]);
                arg = j;
            }
        }
        if (v[arg] < 0.0) v = -v;
        comp.row(c) = v.transpose();
        res.explained[static_cast<size_t>(c)] = std::max(0.0, evals[src]) / total;
        for (int j = 0; j < dim; ++j) {
            res.components[static_cast<size_t>(c) * dim + static_cast<size_t>(j)] = v[j];
        }
    }

    const Eigen::MatrixXd proj = centered * comp.transpose();
    res.projections.resize(static_cast<size_t>(rows) * static_cast<size_t>(n_components));
    for (int i = 0; i < rows; ++i) {
        for (int c = 0; c < n_components; ++c) {
            res.projections[static_cast<size_t>(i) * n_components + static_cast<size_t>(c)] =
                proj(i, c);
        }
    }
    return res;
}

AxisExtremes extreme_items_along_axis(const PcaResult& pca, const Vocabulary& items, int axis,
                                      int k) {
    if (axis < 0 || axis >= pca.n_components) {
        throw std::out_of_range("axis " + std::to_string(axis) + " outside [0, " +
                                std::to_string(pca.n_components) + ")");
    }
    if (k < 0) throw std::invalid_argument("list length must be non-negative");
    const int m = items.size();
    if (pca.projections.size() !=
        static_cast<size_t>(m) * static_cast<size_t>(pca.n_components)) {
        throw std::invalid_argument("projection rows do not match the vocabulary");
    }
    if (k > m) k = m;

    const auto coord = [&](int i) {
        return pca.projections[static_cast<size_t>(i) * pca.n_components +
                               static_cast<size_t>(axis)];
    };
    std::vector<int> ord(static_cast<size_t>(m));
    std::iota(ord.begin(), ord.end(), 0);

    AxisExtremes out;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        if (coord(a) != coord(b)) return coord(a) < coord(b);
        return items.id(a) < items.id(b);
    });
    for (int j = 0; j < k; ++j) {
        out.lowest.emplace_back(items.id(ord[static_cast<size_t>(j)]),
                                coord(ord[static_cast<size_t>(j)]));
    }
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        if (coord(a) != coord(b)) return coord(a) > coord(b);
        return items.id(a) < items.id(b);
    });
    for (int j = 0; j < k; ++j) {
        out.highest.emplace_back(items.id(ord[static_cast<size_t>(j)]),
                                 coord(ord[static_cast<size_t>(j)]));
    }
    return out;
}

CorrelationMatrix cooccurrence_correlation(const Dataset& data, int max_users) {
    const int m = data.items.size();
    if (m < 2) throw std::invalid_argument("correlation needs at least 2 items");

    const int n_all = data.users.size();
    std::vector<long> user_rows(static_cast<size_t>(n_all), 0);
    std::vector<std::unordered_map<int, long>> contrib(static_cast<size_t>(n_all));
    std::vector<std::unordered_set<int>> accepted(static_cast<size_t>(n_all));
    for (const auto& o : data.observations) {
        ++user_rows[static_cast<size_t>(o.user)];
        ++contrib[static_cast<size_t>(o.user)][o.item];
        if (is_good(o.q)) accepted[static_cast<size_t>(o.user)].insert(o.item);
    }

    // Indicator columns ordered by how much traffic each item sees.
    std::vector<int> item_ord(static_cast<size_t>(m));
    std::iota(item_ord.begin(), item_ord.end(), 0);
    std::sort(item_ord.begin(), item_ord.end(), [&](int a, int b) {
        const long ca = data.item_counts[static_cast<size_t>(a)];
        const long cb = data.item_counts[static_cast<size_t>(b)];
        if (ca != cb) return ca > cb;
        return data.items.id(a) < data.items.id(b);
    });
    std::vector<int> item_rank(static_cast<size_t>(m), 0);
    for (int r = 0; r < m; ++r) item_rank[static_cast<size_t>(item_ord[static_cast<size_t>(r)])] = r;

    // A constant indicator vector has no variance, so its correlations are
    // undefined; those users are dropped rather than zero-filled.
    std::vector<int> users;
    for (int u = 0; u < n_all; ++u) {
        if (user_rows[static_cast<size_t>(u)] == 0) continue;
        const size_t a = accepted[static_cast<size_t>(u)].size();
        if (a == 0 || a == static_cast<size_t>(m)) continue;
        users.push_back(u);
    }
    if (max_users > 0 && static_cast<int>(users.size()) > max_users) {
        std::sort(users.begin(), users.end(), [&](int a, int b) {
            const long ra = user_rows[static_cast<size_t>(a)];
            const long rb = user_rows[static_cast<size_t>(b)];
            if (ra != rb) return ra > rb;
            return data.users.id(a) < data.users.id(b);
        });
        users.resize(static_cast<size_t>(max_users));
    }

    // Row order groups users by the item they contribute to most.
    const auto main_rank = [&](int u) {
        long best_count = -1;
        int best_rank = m;
        for (const auto& [item, count] : contrib[static_cast<size_t>(u)]) {
            const int rank = item_rank[static_cast<size_t>(item)];
            if (count > best_count || (count == best_count && rank < best_rank)) {
                best_count = count;
                best_rank = rank;
            }
        }
        return best_rank;
    };
    std::sort(users.begin(), users.end(), [&](int a, int b) {
        const int ra = main_rank(a);
        const int rb = main_rank(b);
        if (ra != rb) return ra < rb;
        return data.users.id(a) < data.users.id(b);
    });

    CorrelationMatrix out;
    out.users.reserve(users.size());
    for (int u : users) out.users.push_back(data.users.id(u));
    out.items.reserve(static_cast<size_t>(m));
    for (int i : item_ord) out.items.push_back(data.items.id(i));

    const size_t n = users.size();
    out.r.assign(n * n, 0.0);
    const double md = static_cast<double>(m);
    for (size_t a = 0; a < n; ++a) {
        out.r[a * n + a] = 1.0;
        const auto& sa = accepted[static_cast<size_t>(users[a])];
        const double ca = static_cast<double>(sa.size());
        for (size_t b = a + 1; b < n; ++b) {
            const auto& sb = accepted[static_cast<size_t>(users[b])];
            const double cb = static_cast<double>(sb.size());
            const auto& small = sa.size() <= sb.size() ? sa : sb;
            const auto& large = sa.size() <= sb.size() ? sb : sa;
            long both = 0;
            for (int item : small) both += large.contains(item) ? 1 : 0;
            const double num = md * static_cast<double>(both) - ca * cb;
            const double den = std::sqrt((md * ca - ca * ca) * (md * cb - cb * cb));
            double r = num / den;
            if (r > 1.0) r = 1.0;
            if (r < -1.0) r = -1.0;
            out.r[a * n + b] = r;
            out.r[b * n + a] = r;
        }
    }
    return out;
}

ChurnReport churn_quartile_report(const Predictor& pred, const Dataset& train) {
    const auto d = pred.item_difficulties();
    const int m = pred.n_items();
    if (m < 4) throw std::invalid_argument("churn quartiles need at least 4 items");

    const ItemUsage usage = item_usage(pred, train);
    std::vector<int> ord(static_cast<size_t>(m));
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        const double da = d[static_cast<size_t>(a)];
        const double db = d[static_cast<size_t>(b)];
        if (da != db) return da < db;
        return pred.items().id(a) < pred.items().id(b);
    });

    const long quarter = m / 4;
    const auto avg_churn = [&](long from) {
        double sum = 0.0;
        for (long j = from; j < from + quarter; ++j) {
            const int i = ord[static_cast<size_t>(j)];
            sum += static_cast<double>(usage.edits[static_cast<size_t>(i)]) *
                   acceptance_rate(usage, i);
        }
        return sum / static_cast<double>(quarter);
    };

    ChurnReport report;
    report.quartile_size = quarter;
    report.q1_avg_churn = avg_churn(0);
    report.q3_avg_churn = avg_churn(2 * quarter);
    return report;
}

void write_percentile_tsv(const std::string& path, const PercentileTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    std::vector<size_t> ord(table.items.size());
    std::iota(ord.begin(), ord.end(), size_t{0});
    std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) {
        if (table.difficulty[a] != table.difficulty[b]) {
            return table.difficulty[a] > table.difficulty[b];
        }
        return table.items[a] < table.items[b];
    });
    out << "item\tdifficulty\tpercentile\n";
    for (size_t j : ord) {
        out << table.items[j] << '\t' << fmt(table.difficulty[j]) << '\t'
            << fmt(table.percentile[j]) << '\n';
    }
}

void write_top_bottom_tsv(const std::string& path, const std::vector<ItemStat>& top,
                          const std::vector<ItemStat>& bottom) {
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    out << "group\trank\titem\tdifficulty\tacceptance_rate\tedits\tusers\n";
    const auto rows = [&](const char* group, const std::vector<ItemStat>& list) {
        for (size_t j = 0; j < list.size(); ++j) {
            const auto& s = list[j];
            out << group << '\t' << (j + 1) << '\t' << s.item << '\t' << fmt(s.difficulty)
                << '\t' << fmt(s.acceptance_rate) << '\t' << s.edits << '\t' << s.users << '\n';
        }
    };
    rows("hardest", top);
    rows("easiest", bottom);
}

void write_pca_extremes_tsv(const std::string& path, const PcaResult& pca,
                            const Vocabulary& items, int k) {
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    out << "axis\tend\trank\titem\tcoordinate\n";
    for (int axis = 0; axis < pca.n_components; ++axis) {
        const AxisExtremes ex = extreme_items_along_axis(pca, items, axis, k);
        for (size_t j = 0; j < ex.lowest.size(); ++j) {
            out << axis << "\tlow\t" << (j + 1) << '\t' << ex.lowest[j].first << '\t'
                << fmt(ex.lowest[j].second) << '\n';
        }
        for (size_t j = 0; j < ex.highest.size(); ++j) {
            out << axis << "\thigh\t" << (j + 1) << '\t' << ex.highest[j].first << '\t'
                << fmt(ex.highest[j].second) << '\n';
        }
    }
}

void write_pca_json(const std::string& path, const PcaResult& pca) {
    nlohmann::json doc;
    doc["dim"] = pca.dim;
    doc["n_components"] = pca.n_components;
    doc["explained_variance_ratio"] = pca.explained;
    doc["mean"] = pca.mean;
    nlohmann::json comps = nlohmann::json::array();
    for (int c = 0; c < pca.n_components; ++c) {
        const auto* begin = pca.components.data() + static_cast<size_t>(c) * pca.dim;
        comps.push_back(std::vector<double>(begin, begin + pca.dim));
    }
    doc["components"] = std::move(comps);
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    out << doc.dump(2) << '\n';
}

void write_correlation_tsv(const std::string& path, const CorrelationMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    out << "user";
    for (const auto& u : matrix.users) out << '\t' << u;
    out << '\n';
    const size_t n = matrix.users.size();
    for (size_t a = 0; a < n; ++a) {
        out << matrix.users[a];
        for (size_t b = 0; b < n; ++b) out << '\t' << fmt(matrix.r[a * n + b]);
        out << '\n';
    }
}

void write_churn_json(const std::string& path, const ChurnReport& report) {
    nlohmann::json doc;
    doc["quartile_size"] = report.quartile_size;
    doc["q1_avg_churn"] = report.q1_avg_churn;
    doc["q3_avg_churn"] = report.q3_avg_churn;
    std::ofstream out(path, std::ios::binary);
    if (!out) cannot_open(path);
    out << doc.dump(2) << '\n';
}

}  // namespace editodds
