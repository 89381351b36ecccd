#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "editodds/vocabulary.hpp"

namespace editodds {

enum class Variant { average, user_only, basic, full, glad };

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);  // throws std::invalid_argument

// Constant predictor: the training-set mean outcome, regardless of (u, i).
struct AverageParams {
    double p = 0.5;
};

// p_u = logistic(s_u + b); reputation-style, ignores the item.
struct UserOnlyParams {
    double b = 0.0;
    std::vector<double> s;
};

// p_ui = logistic(s_u - d_i + b).
struct BasicParams {
    double b = 0.0;
    std::vector<double> s;  // per-user skill
    std::vector<double> d;  // per-item difficulty
};

// p_ui = logistic(s_u - d_i + x_u . y_i + b); embeddings stored row-major.
struct FullParams {
    BasicParams base;
    int dim = 0;
    std::vector<double> x;  // n_users x dim
    std::vector<double> y;  // n_items x dim
};

// p_ui = logistic(s_u / exp(beta_i) + b). The item difficulty exp(beta_i) is
// positive by construction; a large difficulty diffuses every skill toward 0.
struct GladParams {
    double b = 0.0;
    std::vector<double> s;
    std::vector<double> beta;
};

using Params = std::variant<AverageParams, UserOnlyParams, BasicParams, FullParams, GladParams>;

Variant variant_of(const Params& params);

double predict_average(const AverageParams& params);
double predict_user_only(double b, std::span<const double> s, int user);
double predict_basic(const BasicParams& params, int user, int item);
double predict_full(const FullParams& params, int user, int item);
double predict_glad(const GladParams& params, int user, int item);

// A fully constructed predictor: a parameter payload, the vocabularies it was
// trained with, and the fallback probability (training-set mean outcome) used
// when both ids are unknown. Immutable after construction; concurrent
// read-only prediction is safe.
class Predictor {
public:
    Predictor(Params params, Vocabulary users, Vocabulary items, double fallback_p);

    Variant variant() const { return variant_of(params_); }
    const Params& params() const { return params_; }
    const Vocabulary& users() const { return users_; }
    const Vocabulary& items() const { return items_; }
    double fallback() const { return fallback_p_; }
    int n_users() const { return users_.size(); }
    int n_items() const { return items_.size(); }
    int dim() const;  // latent dimension, 0 unless the full variant

    // Prediction by dense index; throws std::out_of_range on a bad index.
    double predict(int user, int item) const;

    // Prediction by raw id, total over all inputs: a partially unseen pair is
    // scored with the unseen side's parameters at zero, a fully unseen pair
    // gets the stored fallback probability.
    double predict(std::string_view user, std::string_view item) const;

    bool has_difficulty() const;
    // d for basic/full, exp(beta) for glad; throws if the variant has none.
    std::vector<double> item_difficulties() const;

private:
    Params params_;
    Vocabulary users_;
    Vocabulary items_;
    double fallback_p_;
};

}  // namespace editodds
