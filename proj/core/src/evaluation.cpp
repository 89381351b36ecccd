#include "editodds/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "editodds/logistic.hpp"
#include "json.hpp"

namespace editodds {

std::string_view positive_class_name(PositiveClass c) {
    return c == PositiveClass::bad ? "bad" : "accepted";
}

PositiveClass positive_class_from_name(std::string_view name) {
    if (name == "bad") return PositiveClass::bad;
    if (name == "accepted") return PositiveClass::accepted;
    throw std::invalid_argument("unknown positive class '" + std::string(name) +
                                "'; expected bad or accepted");
}

PRCurve pr_curve(std::span<const ScoredLabel> data) {
    if (data.empty()) throw std::invalid_argument("cannot sweep an empty score set");
    long positives = 0;
    for (const auto& d : data) positives += d.positive ? 1 : 0;
    if (positives == 0) {
        throw std::invalid_argument("score set has no positive labels; recall is undefined");
    }

    std::vector<ScoredLabel> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

    PRCurve curve;
    long tp = 0;
    long fp = 0;
    double prev_recall = 0.0;
    double area = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        const double threshold = sorted[i].score;
        for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
            if (sorted[i].positive) {
                ++tp;
            } else {
                ++fp;
            }
        }
        PrPoint pt;
        pt.threshold = threshold;
        pt.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        pt.recall = static_cast<double>(tp) / static_cast<double>(positives);
        area += (pt.recall - prev_recall) * pt.precision;
        prev_recall = pt.recall;
        curve.points.push_back(pt);
    }
    curve.auprc = area;
    return curve;
}

double auprc(const PRCurve& curve) {
    double area = 0.0;
    double prev_recall = 0.0;
    for (const auto& pt : curve.points) {
        area += (pt.recall - prev_recall) * pt.precision;
        prev_recall = pt.recall;
    }
    return area;
}

double average_log_likelihood(const Predictor& pred, const Dataset& validation) {
    if (validation.observations.empty()) {
        throw std::invalid_argument("cannot evaluate on an empty validation set");
    }
    double sum = 0.0;
    for (const auto& o : validation.observations) {
        const double p = clamp_probability(
            pred.predict(validation.users.id(o.user), validation.items.id(o.item)));
        sum += o.q * std::log(p) + (1.0 - o.q) * std::log1p(-p);
    }
    return sum / static_cast<double>(validation.size());
}

ColdStartReport cold_start_report(const Predictor& pred, const Dataset& train,
                                  const Dataset& validation, const BinSpec& spec) {
    if (train.users.size() != validation.users.size() ||
        train.items.size() != validation.items.size()) {
        throw std::invalid_argument("train and validation sides must share a vocabulary");
    }
    ColdStartReport report;
    report.spec = spec;
    for (const auto& o : validation.observations) {
        const double p = clamp_probability(
            pred.predict(validation.users.id(o.user), validation.items.id(o.item)));
        const double ll = o.q * std::log(p) + (1.0 - o.q) * std::log1p(-p);
        const int ub = bin_index(train.user_counts[static_cast<size_t>(o.user)], spec);
        const int ib = bin_index(train.item_counts[static_cast<size_t>(o.item)], spec);
        auto& cell = report.cells[{ub, ib}];
        ++cell.count;
        cell.avg_log_likelihood += ll;
        auto& um = report.user_marginal[ub];
        ++um.count;
        um.avg_log_likelihood += ll;
        auto& im = report.item_marginal[ib];
        ++im.count;
        im.avg_log_likelihood += ll;
    }
    const auto finish = [](auto& m) {
        for (auto& [key, stat] : m) {
            stat.avg_log_likelihood /= static_cast<double>(stat.count);
        }
    };
    finish(report.cells);
    finish(report.user_marginal);
    finish(report.item_marginal);
    return report;
}

EvalReport evaluate(const Predictor& pred, const Dataset& train, const Dataset& validation,
                    PositiveClass positive, const BinSpec& spec) {
    EvalReport report;
    report.positive_class = positive;
    report.rows = validation.size();
    report.avg_log_likelihood = average_log_likelihood(pred, validation);

    std::vector<ScoredLabel> scored(validation.observations.size());
    for (size_t j = 0; j < validation.observations.size(); ++j) {
        const auto& o = validation.observations[j];
        const double p =
            pred.predict(validation.users.id(o.user), validation.items.id(o.item));
        if (positive == PositiveClass::bad) {
            scored[j] = {1.0 - p, o.q < 0.5};
        } else {
            scored[j] = {p, is_good(o.q)};
        }
    }
    report.pr = pr_curve(scored);
    report.auprc = report.pr.auprc;
    report.cold_start = cold_start_report(pred, train, validation, spec);
    return report;
}

void write_eval_report_json(const std::string& path, const EvalReport& report) {
    nlohmann::json doc;
    doc["avg_log_likelihood"] = report.avg_log_likelihood;
    doc["auprc"] = report.auprc;
    doc["positive_class"] = std::string(positive_class_name(report.positive_class));
    doc["rows"] = report.rows;

    nlohmann::json cold;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, stat] : report.cold_start.cells) {
        cells.push_back({{"user_bin", bin_label(report.cold_start.spec, key.first)},
                         {"item_bin", bin_label(report.cold_start.spec, key.second)},
                         {"count", stat.count},
                         {"avg_log_likelihood", stat.avg_log_likelihood}});
    }
    cold["cells"] = std::move(cells);
    const auto marginal = [&](const std::map<int, BinStat>& m) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [bin, stat] : m) {
            arr.push_back({{"bin", bin_label(report.cold_start.spec, bin)},
                           {"count", stat.count},
                           {"avg_log_likelihood", stat.avg_log_likelihood}});
        }
        return arr;
    };
    cold["by_user_bin"] = marginal(report.cold_start.user_marginal);
    cold["by_item_bin"] = marginal(report.cold_start.item_marginal);
    doc["cold_start"] = std::move(cold);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
    out << doc.dump(2) << '\n';
}

void write_pr_curve_tsv(const std::string& path, const PRCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open curve file for writing: " + path);
    out << "recall\tprecision\n";
    char buf[64];
    for (const auto& pt : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.9g\t%.9g\n", pt.recall, pt.precision);
        out << buf;
    }
}

}  // namespace editodds
