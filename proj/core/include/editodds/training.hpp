#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "editodds/dataset.hpp"
#include "editodds/model.hpp"
#include "editodds/parallel.hpp"

namespace editodds {

struct TrainConfig {
    Variant variant = Variant::basic;
    int dim = 20;                 // latent dimension, full variant only
    double learning_rate = 0.1;
    int batch_size = 1024;
    int epochs = 20;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
    bool deterministic = false;   // documented guarantee; the update order is fixed either way
    double init_scale = 0.01;     // stddev of the embedding initialization
    double early_stop_tol = 0.0;  // relative per-epoch improvement below which training stops; 0 disables
};

struct EpochLog {
    int epoch = 0;
    double train_nll = 0.0;
    double wall_seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Sum over observations of -q*log(p) - (1-q)*log(1-p) plus (l2/2) times the
// squared norm of every parameter except the offset b.
double negative_log_likelihood(const Params& params, std::span<const Observation> obs, double l2);

// Exact gradient of negative_log_likelihood(params, batch, l2), returned in a
// parameter-shaped container. The regularizer is differentiated densely:
// coordinates the batch never touches still receive their l2 * theta term, so
// the result is the true gradient of the function above. Throws for the
// average variant, whose fit is closed-form.
Params gradient(const Params& params, std::span<const Observation> batch, double l2);

// Constant predictor storing the mean outcome. Throws on an empty dataset.
Predictor fit_average(const Dataset& train);

// Minibatch SGD: per epoch, shuffle with a seed derived from (seed, epoch),
// then for each batch apply theta -= learning_rate/|batch| * gradient. Batch
// residuals are computed in parallel into per-row slots and folded in row
// order, so the result is byte-identical for any thread count. The returned
// predictor's vocabularies contain exactly the entities seen in `train`, in
// first-appearance order; its fallback probability is the training mean
// outcome. Aborts with a diagnostic naming the epoch and batch if the model
// score turns non-finite.
Predictor sgd_fit(const Dataset& train, const TrainConfig& config, ThreadPool* pool = nullptr,
                  const EpochCallback& on_epoch = {});

}  // namespace editodds
