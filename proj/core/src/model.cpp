#include "editodds/model.hpp"

#include <cmath>
#include <stdexcept>

#include "editodds/logistic.hpp"

namespace editodds {

namespace {

void check_index(int idx, size_t size, const char* what) {
    if (idx < 0 || static_cast<size_t>(idx) >= size) {
        throw std::out_of_range(std::string(what) + " index " + std::to_string(idx) +
                                " out of range [0, " + std::to_string(size) + ")");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

}  // namespace

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::average: return "average";
        case Variant::user_only: return "user-only";
        case Variant::basic: return "basic";
        case Variant::full: return "full";
        case Variant::glad: return "glad";
    }
    throw std::logic_error("unreachable variant");
}

Variant variant_from_name(std::string_view name) {
    if (name == "average") return Variant::average;
    if (name == "user-only" || name == "user_only") return Variant::user_only;
    if (name == "basic") return Variant::basic;
    if (name == "full") return Variant::full;
    if (name == "glad") return Variant::glad;
    throw std::invalid_argument("unknown model variant: " + std::string(name));
}

Variant variant_of(const Params& params) {
    switch (params.index()) {
        case 0: return Variant::average;
        case 1: return Variant::user_only;
        case 2: return Variant::basic;
        case 3: return Variant::full;
        case 4: return Variant::glad;
    }
    throw std::logic_error("valueless params variant");
}

double predict_average(const AverageParams& params) {
    return params.p;
}

double predict_user_only(double b, std::span<const double> s, int user) {
    check_index(user, s.size(), "user");
    return logistic(s[static_cast<size_t>(user)] + b);
}

double predict_basic(const BasicParams& params, int user, int item) {
    check_index(user, params.s.size(), "user");
    check_index(item, params.d.size(), "item");
    return logistic(params.s[static_cast<size_t>(user)] - params.d[static_cast<size_t>(item)] +
                    params.b);
}

double predict_full(const FullParams& params, int user, int item) {
    check_index(user, params.base.s.size(), "user");
    check_index(item, params.base.d.size(), "item");
    const size_t d = static_cast<size_t>(params.dim);
    const std::span<const double> xu(params.x.data() + static_cast<size_t>(user) * d, d);
    const std::span<const double> yi(params.y.data() + static_cast<size_t>(item) * d, d);
    return logistic(params.base.s[static_cast<size_t>(user)] -
                    params.base.d[static_cast<size_t>(item)] + dot(xu, yi) + params.base.b);
}

double predict_glad(const GladParams& params, int user, int item) {
    check_index(user, params.s.size(), "user");
    check_index(item, params.beta.size(), "item");
    const double difficulty = std::exp(params.beta[static_cast<size_t>(item)]);
    return logistic(params.s[static_cast<size_t>(user)] / difficulty + params.b);
}

Predictor::Predictor(Params params, Vocabulary users, Vocabulary items, double fallback_p)
    : params_(std::move(params)),
      users_(std::move(users)),
      items_(std::move(items)),
      fallback_p_(fallback_p) {
    if (fallback_p_ < 0.0 || fallback_p_ > 1.0 || !std::isfinite(fallback_p_)) {
        throw std::invalid_argument("fallback probability must lie in [0, 1]");
    }
    const size_t n = static_cast<size_t>(users_.size());
    const size_t m = static_cast<size_t>(items_.size());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UserOnlyParams>) {
                if (p.s.size() != n) throw std::invalid_argument("skill size != user vocabulary");
            } else if constexpr (std::is_same_v<T, BasicParams>) {
                if (p.s.size() != n || p.d.size() != m) {
                    throw std::invalid_argument("parameter sizes do not match vocabularies");
                }
            } else if constexpr (std::is_same_v<T, FullParams>) {
                const size_t dim = static_cast<size_t>(p.dim);
                if (p.dim < 1 || p.base.s.size() != n || p.base.d.size() != m ||
                    p.x.size() != n * dim || p.y.size() != m * dim) {
                    throw std::invalid_argument("parameter sizes do not match vocabularies");
                }
            } else if constexpr (std::is_same_v<T, GladParams>) {
                if (p.s.size() != n || p.beta.size() != m) {
                    throw std::invalid_argument("parameter sizes do not match vocabularies");
                }
            } else {
                static_assert(std::is_same_v<T, AverageParams>);
                if (p.p < 0.0 || p.p > 1.0 || !std::isfinite(p.p)) {
                    throw std::invalid_argument("average probability must lie in [0, 1]");
                }
            }
        },
        params_);
}

int Predictor::dim() const {
    if (const auto* full = std::get_if<FullParams>(&params_)) return full->dim;
    return 0;
}

double Predictor::predict(int user, int item) const {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AverageParams>) {
                check_index(user, static_cast<size_t>(users_.size()), "user");
                check_index(item, static_cast<size_t>(items_.size()), "item");
                return predict_average(p);
            } else if constexpr (std::is_same_v<T, UserOnlyParams>) {
                check_index(item, static_cast<size_t>(items_.size()), "item");
                return predict_user_only(p.b, p.s, user);
            } else if constexpr (std::is_same_v<T, BasicParams>) {
                return predict_basic(p, user, item);
            } else if constexpr (std::is_same_v<T, FullParams>) {
                return predict_full(p, user, item);
            } else {
                return predict_glad(p, user, item);
            }
        },
        params_);
}

double Predictor::predict(std::string_view user, std::string_view item) const {
    const std::optional<int> u = users_.find(user);
    const std::optional<int> i = items_.find(item);
    if (!u && !i) return fallback_p_;
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AverageParams>) {
                return predict_average(p);
            } else if constexpr (std::is_same_v<T, UserOnlyParams>) {
                const double su = u ? p.s[static_cast<size_t>(*u)] : 0.0;
                return logistic(su + p.b);
            } else if constexpr (std::is_same_v<T, BasicParams>) {
                const double su = u ? p.s[static_cast<size_t>(*u)] : 0.0;
                const double di = i ? p.d[static_cast<size_t>(*i)] : 0.0;
                return logistic(su - di + p.b);
            } else if constexpr (std::is_same_v<T, FullParams>) {
                const double su = u ? p.base.s[static_cast<size_t>(*u)] : 0.0;
                const double di = i ? p.base.d[static_cast<size_t>(*i)] : 0.0;
                double inter = 0.0;
                if (u && i) {
                    const size_t d = static_cast<size_t>(p.dim);
                    inter = dot({p.x.data() + static_cast<size_t>(*u) * d, d},
                                {p.y.data() + static_cast<size_t>(*i) * d, d});
                }
                return logistic(su - di + inter + p.base.b);
            } else {
                // Unseen item means beta = 0, i.e. a neutral difficulty of 1.
                const double su = u ? p.s[static_cast<size_t>(*u)] : 0.0;
                const double beta = i ? p.beta[static_cast<size_t>(*i)] : 0.0;
                return logistic(su / std::exp(beta) + p.b);
            }
        },
        params_);
}

bool Predictor::has_difficulty() const {
    const Variant v = variant();
    return v == Variant::basic || v == Variant::full || v == Variant::glad;
}

std::vector<double> Predictor::item_difficulties() const {
    if (const auto* basic = std::get_if<BasicParams>(&params_)) return basic->d;
    if (const auto* full = std::get_if<FullParams>(&params_)) return full->base.d;
    if (const auto* glad = std::get_if<GladParams>(&params_)) {
        std::vector<double> d(glad->beta.size());
        for (size_t i = 0; i < d.size(); ++i) d[i] = std::exp(glad->beta[i]);
        return d;
    }
    throw std::invalid_argument(std::string("variant ") + std::string(variant_name(variant())) +
                                " has no item difficulty parameters");
}

}  // namespace editodds
