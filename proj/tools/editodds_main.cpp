#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "editodds/commands.hpp"
#include "editodds/model.hpp"
#include "editodds/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Edit-outcome prediction for peer-production systems"};
    app.require_subcommand(1);
    // Flags beat the config file, the config file beats the defaults.
    app.set_config("--config", "", "read option defaults from an INI/TOML file");

    const int default_threads = editodds::ThreadPool::default_threads();

    editodds::QualityOptions quality;
    quality.threads = default_threads;
    std::int64_t quality_cutoff = 0;
    auto* cmd_quality =
        app.add_subcommand("quality", "Score revision histories into an observation TSV");
    cmd_quality->add_option("--revisions", quality.revisions_path, "JSON-lines revision file")
        ->required();
    cmd_quality->add_option("--out", quality.out_path, "observation TSV to write")->required();
    auto* quality_cutoff_opt = cmd_quality->add_option(
        "--cutoff-ts", quality_cutoff,
        "edits at or before this timestamp are scored without any later revision");
    cmd_quality->add_option("--horizon", quality.horizon,
                            "future revisions contributing to each edit's quality");
    cmd_quality->add_option("--threads", quality.threads, "worker threads");

    editodds::TrainOptions train;
    train.threads = default_threads;
    std::string train_variant = "basic";
    auto* cmd_train = app.add_subcommand("train", "Fit a model on the training side of a split");
    cmd_train->add_option("--observations", train.observations_path, "observation TSV")
        ->required();
    cmd_train->add_option("--checkpoint", train.checkpoint_path, "checkpoint file to write")
        ->required();
    cmd_train->add_option("--manifest", train.manifest_path,
                          "split manifest path (default: <checkpoint>.split.json)");
    cmd_train->add_option("--log-file", train.log_file,
                          "per-epoch TSV log (default: standard error)");
    cmd_train->add_option("--variant", train_variant,
                          "average, user-only, basic, full or glad");
    auto* dim_opt = cmd_train->add_option("--dim", train.config.dim,
                                          "latent dimension of the full variant");
    cmd_train->add_option("--lr", train.config.learning_rate, "learning rate");
    cmd_train->add_option("--batch-size", train.config.batch_size, "minibatch size");
    cmd_train->add_option("--epochs", train.config.epochs, "epoch count");
    cmd_train->add_option("--l2", train.config.l2, "l2 regularization strength");
    cmd_train->add_option("--seed", train.config.seed, "seed for every random draw");
    cmd_train->add_option("--init-scale", train.config.init_scale,
                          "stddev of the embedding initialization");
    cmd_train->add_option("--early-stop-tol", train.config.early_stop_tol,
                          "stop when the relative NLL improvement drops below this; 0 disables");
    cmd_train->add_flag("--deterministic", train.config.deterministic,
                        "byte-identical results for a fixed seed and any --threads");
    cmd_train->add_option("--split-fraction", train.split_fraction,
                          "fraction of rows forming the training side");
    cmd_train->add_flag("--prune", train.prune,
                        "drop empty ids and items without any accepted row");
    cmd_train->add_option("--threads", train.threads, "worker threads");

    editodds::EvaluateOptions evaluate;
    double eval_fraction = 0.8;
    std::string eval_positive = "bad";
    auto* cmd_evaluate =
        app.add_subcommand("evaluate", "Score a checkpoint on the validation side of its split");
    cmd_evaluate->add_option("--checkpoint", evaluate.checkpoint_path, "checkpoint file")
        ->required();
    cmd_evaluate->add_option("--observations", evaluate.observations_path, "observation TSV")
        ->required();
    cmd_evaluate->add_option("--report", evaluate.report_path, "evaluation report JSON");
    cmd_evaluate->add_option("--pr-curve", evaluate.pr_path, "precision-recall TSV");
    cmd_evaluate->add_option("--manifest", evaluate.manifest_path,
                             "split manifest path (default: <checkpoint>.split.json)");
    auto* eval_fraction_opt = cmd_evaluate->add_option(
        "--split-fraction", eval_fraction, "fallback split when the manifest is absent");
    cmd_evaluate->add_option("--positive-class", eval_positive, "bad or accepted");
    cmd_evaluate->add_flag("--prune", evaluate.prune,
                           "drop empty ids and items without any accepted row");

    editodds::PredictOptions predict;
    auto* cmd_predict =
        app.add_subcommand("predict", "Print the outcome probability for one user/item pair");
    cmd_predict->add_option("--checkpoint", predict.checkpoint_path, "checkpoint file")
        ->required();
    cmd_predict->add_option("--user", predict.user, "raw user id")->required();
    cmd_predict->add_option("--item", predict.item, "raw item id")->required();

    editodds::AnalyzeOptions analyze;
    double analyze_fraction = 0.8;
    std::string analyze_kind = "percentiles";
    auto* cmd_analyze = app.add_subcommand("analyze", "Interpret a fitted model");
    cmd_analyze
        ->add_option("--kind", analyze_kind,
                     "percentiles, difficulty, pca, correlation or churn")
        ->required();
    cmd_analyze->add_option("--checkpoint", analyze.checkpoint_path,
                            "checkpoint file (not needed for correlation)");
    cmd_analyze->add_option("--observations", analyze.observations_path,
                            "observation TSV backing the usage statistics");
    cmd_analyze->add_option("--out", analyze.out_path, "report file to write")->required();
    cmd_analyze->add_option("--extremes", analyze.extremes_path,
                            "extremes TSV for pca (default: <out>.extremes.tsv)");
    cmd_analyze->add_option("--manifest", analyze.manifest_path,
                            "split manifest path (default: <checkpoint>.split.json)");
    auto* analyze_fraction_opt = cmd_analyze->add_option(
        "--split-fraction", analyze_fraction, "fallback split when the manifest is absent");
    cmd_analyze->add_option("--top-k", analyze.top_k, "list length for ranked reports");
    cmd_analyze->add_option("--components", analyze.n_components, "pca component count");
    cmd_analyze->add_option("--max-users", analyze.max_users,
                            "cap the correlation matrix to the most active users; 0 keeps all");
    cmd_analyze->add_flag("--prune", analyze.prune,
                          "drop empty ids and items without any accepted row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cmd_quality) {
            if (quality_cutoff_opt->count() > 0) quality.cutoff_ts = quality_cutoff;
            editodds::run_quality(quality, std::cerr);
        } else if (*cmd_train) {
            train.config.variant = editodds::variant_from_name(train_variant);
            if (dim_opt->count() > 0 && train.config.variant != editodds::Variant::full) {
                throw std::invalid_argument("--dim is only meaningful for the full variant");
            }
            editodds::run_train(train, std::cerr);
        } else if (*cmd_evaluate) {
            if (eval_fraction_opt->count() > 0) evaluate.split_fraction = eval_fraction;
            evaluate.positive = editodds::positive_class_from_name(eval_positive);
            editodds::run_evaluate(evaluate, std::cerr);
        } else if (*cmd_predict) {
            editodds::run_predict(predict, std::cout);
        } else if (*cmd_analyze) {
            analyze.kind = editodds::analysis_kind_from_name(analyze_kind);
            if (analyze_fraction_opt->count() > 0) analyze.split_fraction = analyze_fraction;
            editodds::run_analyze(analyze, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
