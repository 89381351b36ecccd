#include "editodds/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "editodds/logistic.hpp"

namespace editodds {

namespace {

double sum_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

struct SquaredNorm {
    double operator()(const AverageParams&) const { return 0.0; }
    double operator()(const UserOnlyParams& p) const { return sum_squares(p.s); }
    double operator()(const BasicParams& p) const { return sum_squares(p.s) + sum_squares(p.d); }
    double operator()(const FullParams& p) const {
        return sum_squares(p.base.s) + sum_squares(p.base.d) + sum_squares(p.x) + sum_squares(p.y);
    }
    double operator()(const GladParams& p) const { return sum_squares(p.s) + sum_squares(p.beta); }
};

double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
}

std::vector<double> scaled_copy(const std::vector<double>& v, double c) {
    std::vector<double> out(v.size());
    for (size_t j = 0; j < v.size(); ++j) out[j] = c * v[j];
    return out;
}

void validate(const TrainConfig& c) {
    if (!(c.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (c.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    if (c.epochs < 0) throw std::invalid_argument("epoch count must be non-negative");
    if (!(c.l2 >= 0.0)) throw std::invalid_argument("l2 strength must be non-negative");
    if (!(c.init_scale >= 0.0)) throw std::invalid_argument("init scale must be non-negative");
    if (c.variant == Variant::full && c.dim < 1) {
        throw std::invalid_argument("latent dimension must be at least 1");
    }
}

Params initial_params(const TrainConfig& c, int n_users, int n_items) {
    const size_t n = static_cast<size_t>(n_users);
    const size_t m = static_cast<size_t>(n_items);
    switch (c.variant) {
        case Variant::user_only: {
            UserOnlyParams p;
            p.s.assign(n, 0.0);
            return p;
        }
        case Variant::basic: {
            BasicParams p;
            p.s.assign(n, 0.0);
            p.d.assign(m, 0.0);
            return p;
        }
        case Variant::full: {
            FullParams p;
            p.base.s.assign(n, 0.0);
            p.base.d.assign(m, 0.0);
            p.dim = c.dim;
            p.x.assign(n * static_cast<size_t>(c.dim), 0.0);
            p.y.assign(m * static_cast<size_t>(c.dim), 0.0);
            // Zero embeddings would make the bilinear term a saddle point, so
            // they start at small Gaussian noise while the scalars start at 0.
            if (c.init_scale > 0.0) {
                std::mt19937_64 rng(c.seed);
                std::normal_distribution<double> gauss(0.0, c.init_scale);
                for (auto& v : p.x) v = gauss(rng);
                for (auto& v : p.y) v = gauss(rng);
            }
            return p;
        }
        case Variant::glad: {
            GladParams p;
            p.s.assign(n, 0.0);
            p.beta.assign(m, 0.0);
            return p;
        }
        case Variant::average:
            break;
    }
    throw std::invalid_argument("the average variant has a closed-form fit; use fit_average");
}

void run_rows(ThreadPool* pool, std::int64_t n,
              const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (pool != nullptr && pool->threads() > 1 && n > 1) {
        pool->parallel_for(n, fn);
    } else {
        fn(0, n);
    }
}

// One minibatch step per variant. Phase one evaluates every row's residual
// (and, where the data gradient depends on more than the residual, the full
// per-row contribution) against the pre-batch parameters, writing to per-row
// slots so threading cannot reorder anything. Phase two shrinks the
// regularized parameters and folds the contributions in row order. Returns
// false if any score came out non-finite; the parameters are then untouched.

bool step_user_only(UserOnlyParams& p, std::span<const Observation> obs,
                    std::span<const std::int64_t> order, std::int64_t start, std::int64_t bs,
                    double lr, double l2, ThreadPool* pool, std::vector<double>& resid) {
    std::atomic<bool> bad{false};
    run_rows(pool, bs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t j = lo; j < hi; ++j) {
            const Observation& o = obs[static_cast<size_t>(order[start + j])];
            const double z = p.s[o.user] + p.b;
            if (!std::isfinite(z)) bad.store(true, std::memory_order_relaxed);
            resid[static_cast<size_t>(j)] = logistic(z) - o.q;
        }
    });
    if (bad.load()) return false;
    const double step = lr / static_cast<double>(bs);
    if (l2 != 0.0) {
        const double shrink = 1.0 - step * l2;
        for (auto& v : p.s) v *= shrink;
    }
    for (std::int64_t j = 0; j < bs; ++j) {
        const Observation& o = obs[static_cast<size_t>(order[start + j])];
        const double r = resid[static_cast<size_t>(j)];
        p.b -= step * r;
        p.s[o.user] -= step * r;
    }
    return true;
}

bool step_basic(BasicParams& p, std::span<const Observation> obs,
                std::span<const std::int64_t> order, std::int64_t start, std::int64_t bs,
                double lr, double l2, ThreadPool* pool, std::vector<double>& resid) {
    std::atomic<bool> bad{false};
    run_rows(pool, bs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t j = lo; j < hi; ++j) {
            const Observation& o = obs[static_cast<size_t>(order[start + j])];
            const double z = p.s[o.user] - p.d[o.item] + p.b;
            if (!std::isfinite(z)) bad.store(true, std::memory_order_relaxed);
            resid[static_cast<size_t>(j)] = logistic(z) - o.q;
        }
    });
    if (bad.load()) return false;
    const double step = lr / static_cast<double>(bs);
    if (l2 != 0.0) {
        const double shrink = 1.0 - step * l2;
        for (auto& v : p.s) v *= shrink;
        for (auto& v : p.d) v *= shrink;
    }
    for (std::int64_t j = 0; j < bs; ++j) {
        const Observation& o = obs[static_cast<size_t>(order[start + j])];
        const double r = resid[static_cast<size_t>(j)];
        p.b -= step * r;
        p.s[o.user] -= step * r;
        p.d[o.item] += step * r;
    }
    return true;
}

bool step_full(FullParams& p, std::span<const Observation> obs,
               std::span<const std::int64_t> order, std::int64_t start, std::int64_t bs,
               double lr, double l2, ThreadPool* pool, std::vector<double>& resid,
               std::vector<double>& gx, std::vector<double>& gy) {
    const int dim = p.dim;
    std::atomic<bool> bad{false};
    run_rows(pool, bs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t j = lo; j < hi; ++j) {
            const Observation& o = obs[static_cast<size_t>(order[start + j])];
            const double* xu = p.x.data() + static_cast<size_t>(o.user) * dim;
            const double* yi = p.y.data() + static_cast<size_t>(o.item) * dim;
            const double z = p.base.s[o.user] - p.base.d[o.item] + p.base.b + dot(xu, yi, dim);
            if (!std::isfinite(z)) bad.store(true, std::memory_order_relaxed);
            const double r = logistic(z) - o.q;
            resid[static_cast<size_t>(j)] = r;
            double* gxj = gx.data() + static_cast<size_t>(j) * dim;
            double* gyj = gy.data() + static_cast<size_t>(j) * dim;
            for (int k = 0; k < dim; ++k) {
                gxj[k] = r * yi[k];
                gyj[k] = r * xu[k];
            }
        }
    });
    if (bad.load()) return false;
    const double step = lr / static_cast<double>(bs);
    if (l2 != 0.0) {
        const double shrink = 1.0 - step * l2;
        for (auto& v : p.base.s) v *= shrink;
        for (auto& v : p.base.d) v *= shrink;
        for (auto& v : p.x) v *= shrink;
        for (auto& v : p.y) v *= shrink;
    }
    for (std::int64_t j = 0; j < bs; ++j) {
        const Observation& o = obs[static_cast<size_t>(order[start + j])];
        const double r = resid[static_cast<size_t>(j)];
        p.base.b -= step * r;
        p.base.s[o.user] -= step * r;
        p.base.d[o.item] += step * r;
        double* xu = p.x.data() + static_cast<size_t>(o.user) * dim;
        double* yi = p.y.data() + static_cast<size_t>(o.item) * dim;
        const double* gxj = gx.data() + static_cast<size_t>(j) * dim;
        const double* gyj = gy.data() + static_cast<size_t>(j) * dim;
        for (int k = 0; k < dim; ++k) {
            xu[k] -= step * gxj[k];
            yi[k] -= step * gyj[k];
        }
    }
    return true;
}

bool step_glad(GladParams& p, std::span<const Observation> obs,
               std::span<const std::int64_t> order, std::int64_t start, std::int64_t bs,
               double lr, double l2, ThreadPool* pool, std::vector<double>& resid,
               std::vector<double>& gs, std::vector<double>& gbeta) {
    std::atomic<bool> bad{false};
    run_rows(pool, bs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t j = lo; j < hi; ++j) {
            const Observation& o = obs[static_cast<size_t>(order[start + j])];
            const double e = std::exp(-p.beta[o.item]);
            const double z = p.s[o.user] * e + p.b;
            if (!std::isfinite(z)) bad.store(true, std::memory_order_relaxed);
            const double r = logistic(z) - o.q;
            resid[static_cast<size_t>(j)] = r;
            gs[static_cast<size_t>(j)] = r * e;
            gbeta[static_cast<size_t>(j)] = -r * p.s[o.user] * e;
        }
    });
    if (bad.load()) return false;
    const double step = lr / static_cast<double>(bs);
    if (l2 != 0.0) {
        const double shrink = 1.0 - step * l2;
        for (auto& v : p.s) v *= shrink;
        for (auto& v : p.beta) v *= shrink;
    }
    for (std::int64_t j = 0; j < bs; ++j) {
        const Observation& o = obs[static_cast<size_t>(order[start + j])];
        p.b -= step * resid[static_cast<size_t>(j)];
        p.s[o.user] -= step * gs[static_cast<size_t>(j)];
        p.beta[o.item] -= step * gbeta[static_cast<size_t>(j)];
    }
    return true;
}

}  // namespace

double negative_log_likelihood(const Params& params, std::span<const Observation> obs, double l2) {
    double total = 0.5 * l2 * std::visit(SquaredNorm{}, params);
    switch (variant_of(params)) {
        case Variant::average: {
            const auto& p = std::get<AverageParams>(params);
            const double prob = clamp_probability(p.p);
            const double log_p = std::log(prob);
            const double log_not_p = std::log1p(-prob);
            for (const auto& o : obs) total -= o.q * log_p + (1.0 - o.q) * log_not_p;
            return total;
        }
        case Variant::user_only: {
            const auto& p = std::get<UserOnlyParams>(params);
            for (const auto& o : obs) total += logistic_loss(p.s[o.user] + p.b, o.q);
            return total;
        }
        case Variant::basic: {
            const auto& p = std::get<BasicParams>(params);
            for (const auto& o : obs) {
                total += logistic_loss(p.s[o.user] - p.d[o.item] + p.b, o.q);
            }
            return total;
        }
        case Variant::full: {
            const auto& p = std::get<FullParams>(params);
            for (const auto& o : obs) {
                const double* xu = p.x.data() + static_cast<size_t>(o.user) * p.dim;
                const double* yi = p.y.data() + static_cast<size_t>(o.item) * p.dim;
                const double z = p.base.s[o.user] - p.base.d[o.item] + p.base.b + dot(xu, yi, p.dim);
                total += logistic_loss(z, o.q);
            }
            return total;
        }
        case Variant::glad: {
            const auto& p = std::get<GladParams>(params);
            for (const auto& o : obs) {
                total += logistic_loss(p.s[o.user] * std::exp(-p.beta[o.item]) + p.b, o.q);
            }
            return total;
        }
    }
    throw std::logic_error("unhandled variant");
}

Params gradient(const Params& params, std::span<const Observation> batch, double l2) {
    switch (variant_of(params)) {
        case Variant::average:
            throw std::invalid_argument("the average variant has no gradient; its fit is closed-form");
        case Variant::user_only: {
            const auto& p = std::get<UserOnlyParams>(params);
            UserOnlyParams g;
            g.b = 0.0;
            g.s = scaled_copy(p.s, l2);
            for (const auto& o : batch) {
                const double r = logistic(p.s[o.user] + p.b) - o.q;
                g.b += r;
                g.s[o.user] += r;
            }
            return g;
        }
        case Variant::basic: {
            const auto& p = std::get<BasicParams>(params);
            BasicParams g;
            g.b = 0.0;
            g.s = scaled_copy(p.s, l2);
            g.d = scaled_copy(p.d, l2);
            for (const auto& o : batch) {
                const double r = logistic(p.s[o.user] - p.d[o.item] + p.b) - o.q;
                g.b += r;
                g.s[o.user] += r;
                g.d[o.item] -= r;
            }
            return g;
        }
        case Variant::full: {
            const auto& p = std::get<FullParams>(params);
            FullParams g;
            g.dim = p.dim;
            g.base.b = 0.0;
            g.base.s = scaled_copy(p.base.s, l2);
            g.base.d = scaled_copy(p.base.d, l2);
            g.x = scaled_copy(p.x, l2);
            g.y = scaled_copy(p.y, l2);
            for (const auto& o : batch) {
                const size_t xo = static_cast<size_t>(o.user) * p.dim;
                const size_t yo = static_cast<size_t>(o.item) * p.dim;
                const double z = p.base.s[o.user] - p.base.d[o.item] + p.base.b +
                                 dot(p.x.data() + xo, p.y.data() + yo, p.dim);
                const double r = logistic(z) - o.q;
                g.base.b += r;
                g.base.s[o.user] += r;
                g.base.d[o.item] -= r;
                for (int k = 0; k < p.dim; ++k) {
                    g.x[xo + k] += r * p.y[yo + k];
                    g.y[yo + k] += r * p.x[xo + k];
                }
            }
            return g;
        }
        case Variant::glad: {
            const auto& p = std::get<GladParams>(params);
            GladParams g;
            g.b = 0.0;
            g.s = scaled_copy(p.s, l2);
            g.beta = scaled_copy(p.beta, l2);
            for (const auto& o : batch) {
                const double e = std::exp(-p.beta[o.item]);
                const double r = logistic(p.s[o.user] * e + p.b) - o.q;
                g.b += r;
                g.s[o.user] += r * e;
                g.beta[o.item] -= r * p.s[o.user] * e;
            }
            return g;
        }
    }
    throw std::logic_error("unhandled variant");
}

Predictor fit_average(const Dataset& train) {
    if (train.observations.empty()) {
        throw std::invalid_argument("cannot fit on an empty training set");
    }
    Vocabulary users;
    Vocabulary items;
    double q_sum = 0.0;
    for (const auto& o : train.observations) {
        users.add(train.users.id(o.user));
        items.add(train.items.id(o.item));
        q_sum += o.q;
    }
    const double mean = q_sum / static_cast<double>(train.observations.size());
    return Predictor(AverageParams{mean}, std::move(users), std::move(items), mean);
}

Predictor sgd_fit(const Dataset& train, const TrainConfig& config, ThreadPool* pool,
                  const EpochCallback& on_epoch) {
    validate(config);
    if (config.variant == Variant::average) {
        throw std::invalid_argument("the average variant has a closed-form fit; use fit_average");
    }
    if (train.observations.empty()) {
        throw std::invalid_argument("cannot fit on an empty training set");
    }

    // Re-index against only the entities the training rows actually contain,
    // in first-appearance order. The incoming dataset may carry a wider
    // vocabulary (a split keeps the whole file's), and prediction-time
    // fallback needs the vocabulary to mean "seen during training".
    Vocabulary users;
    Vocabulary items;
    std::vector<Observation> obs;
    obs.reserve(train.observations.size());
    double q_sum = 0.0;
    for (const auto& o : train.observations) {
        Observation r = o;
        r.user = users.add(train.users.id(o.user));
        r.item = items.add(train.items.id(o.item));
        obs.push_back(r);
        q_sum += o.q;
    }
    const double fallback = q_sum / static_cast<double>(obs.size());

    Params params = initial_params(config, users.size(), items.size());

    const std::int64_t k = static_cast<std::int64_t>(obs.size());
    const std::int64_t batch_size = std::min<std::int64_t>(config.batch_size, k);
    std::vector<std::int64_t> order(obs.size());
    std::iota(order.begin(), order.end(), std::int64_t{0});

    std::vector<double> resid(static_cast<size_t>(batch_size));
    std::vector<double> buf_a;
    std::vector<double> buf_b;
    if (config.variant == Variant::glad) {
        buf_a.resize(resid.size());
        buf_b.resize(resid.size());
    } else if (config.variant == Variant::full) {
        buf_a.resize(resid.size() * static_cast<size_t>(config.dim));
        buf_b.resize(resid.size() * static_cast<size_t>(config.dim));
    }

    double prev_nll = 0.0;
    bool have_prev = false;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        std::int64_t batch_index = 0;
        for (std::int64_t start = 0; start < k; start += batch_size, ++batch_index) {
            const std::int64_t bs = std::min(batch_size, k - start);
            bool ok = true;
            switch (config.variant) {
                case Variant::user_only:
                    ok = step_user_only(std::get<UserOnlyParams>(params), obs, order, start, bs,
                                        config.learning_rate, config.l2, pool, resid);
                    break;
                case Variant::basic:
                    ok = step_basic(std::get<BasicParams>(params), obs, order, start, bs,
                                    config.learning_rate, config.l2, pool, resid);
                    break;
                case Variant::full:
                    ok = step_full(std::get<FullParams>(params), obs, order, start, bs,
                                   config.learning_rate, config.l2, pool, resid, buf_a, buf_b);
                    break;
                case Variant::glad:
                    ok = step_glad(std::get<GladParams>(params), obs, order, start, bs,
                                   config.learning_rate, config.l2, pool, resid, buf_a, buf_b);
                    break;
                case Variant::average:
                    break;
            }
            if (!ok) {
                throw std::runtime_error("non-finite model score in epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index) +
                                         "; lower the learning rate");
            }
        }

        const double nll = negative_log_likelihood(params, obs, config.l2);
        if (!std::isfinite(nll)) {
            throw std::runtime_error("non-finite training loss after epoch " + std::to_string(epoch));
        }
        if (on_epoch) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            on_epoch(EpochLog{epoch, nll, dt.count()});
        }
        if (config.early_stop_tol > 0.0 && have_prev &&
            prev_nll - nll < config.early_stop_tol * std::max(1.0, std::abs(prev_nll))) {
            break;
        }
        prev_nll = nll;
        have_prev = true;
    }

    return Predictor(std::move(params), std::move(users), std::move(items), fallback);
}

}  // namespace editodds
