#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "quorum/dataset.hpp"
#include "quorum/error.hpp"
#include "quorum/experiment.hpp"
#include "quorum/io.hpp"

namespace {

struct FlagSet {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> raw_sets;
};

// Every experiment subcommand exposes the same override surface; values land
// in the config key they shadow.
void add_experiment_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_path, "Config file (key = value lines)");
    auto bind = [cmd, &flags](const std::string& flag, const std::string& key,
                              const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags.overrides[key] = v; }, help);
    };
    bind("--out", "out", "Output directory");
    bind("--seed", "seed", "Base seed");
    bind("--threads", "threads", "Worker threads for cohort training / grid evaluation");
    bind("--epochs", "epochs", "Training epochs");
    bind("--lr", "lr", "SGD learning rate");
    bind("--batch", "batch", "Minibatch size");
    bind("--thresholds", "thresholds", "Threshold grid: lo:step:hi or comma list");
    bind("--alphas", "alphas", "Interpolation grid: lo:step:hi or comma list");
    bind("--dropout", "dropout", "Override every dropout rate in the cohort");
    bind("--dataset", "dataset", "digits | blobs | mnist");
    bind("--data-dir", "data_dir", "Directory with MNIST IDX files");
    bind("--n-train", "n_train", "Training subset size");
    bind("--n-val", "n_val", "Validation subset size");
    bind("--stratified", "stratified", "Stratified subsampling (true/false)");
    bind("--subsample-seed", "subsample_seed", "Seed for dataset selection");
    bind("--cohort", "cohort", "';'-separated entries: preset-or-arch [@ seed]");
    bind("--run", "run", "Stored train-cohort output to analyze");
    bind("--sample-id", "sample_id", "Validation sample to trace");
    bind("--model", "model", "Model index for decompose / histogram");
    bind("--model-a", "model_a", "First interpolation endpoint");
    bind("--model-b", "model_b", "Second interpolation endpoint");
    bind("--epoch", "epoch", "Snapshot to analyze (-1 = final)");
    bind("--k", "k", "Consensus quorum size (defaults to all models)");
    bind("--decision-threshold", "decision_threshold", "Threshold for decisions.csv");
    bind("--scale-factor", "scale_factor", "Logit scale factor for scale-demo");
    cmd->add_option("--set", flags.raw_sets, "Extra config override key=value")
        ->take_all();
}

int run_experiment(const std::string& kind, FlagSet& flags) {
    std::string config_text;
    if (!flags.config_path.empty()) {
        try {
            config_text = quorum::read_text_file(flags.config_path);
        } catch (const quorum::Error& e) {
            std::cerr << e.what() << "\n";
            return 1;
        }
    }
    for (const std::string& kv : flags.raw_sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "config error - --set needs key=value, got '" << kv << "'\n";
            return 1;
        }
        flags.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    flags.overrides["kind"] = kind;

    const quorum::ConfigResult checked = quorum::validate_config(config_text, flags.overrides);
    if (!checked.ok()) {
        for (const std::string& err : checked.errors) {
            std::cerr << "config error - " << err << "\n";
        }
        return 1;
    }
    try {
        const quorum::RunResult result = quorum::run(*checked.config);
        for (const std::string& rel : result.artifacts) {
            std::cout << "wrote " << checked.config->out_dir << "/" << rel << "\n";
        }
        std::cout << "wrote " << result.manifest_path << "\n";
        return 0;
    } catch (const quorum::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run_make_digits(const std::string& out_dir, std::size_t n_train, std::size_t n_val,
                    std::uint64_t seed) {
    namespace fs = std::filesystem;
    try {
        fs::create_directories(out_dir);
        const quorum::LabeledDataset train =
            quorum::synthetic_digits(n_train, quorum::mix_seed(seed, 1));
        const quorum::LabeledDataset val =
            quorum::synthetic_digits(n_val, quorum::mix_seed(seed, 2));
        quorum::save_mnist_idx(train, (fs::path(out_dir) / "train-images-idx3-ubyte").string(),
                               (fs::path(out_dir) / "train-labels-idx1-ubyte").string());
        quorum::save_mnist_idx(val, (fs::path(out_dir) / "t10k-images-idx3-ubyte").string(),
                               (fs::path(out_dir) / "t10k-labels-idx1-ubyte").string());
        std::cout << "wrote " << n_train << " train and " << n_val
                  << " validation digit images under " << out_dir << "\n";
        return 0;
    } catch (const quorum::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "quorum - trains small neural classifiers, records their per-sample training\n"
        "dynamics, and classifies by model consensus with a reject option"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"train-cohort", "Train a cohort of models, saving per-epoch checkpoints"},
        {"sweep", "Consensus threshold sweep over a stored cohort"},
        {"decompose", "Split validation loss by per-epoch correctness"},
        {"histogram", "Loss-density histograms for correct vs incorrect samples"},
        {"trace", "Per-sample probability trace across models and epochs"},
        {"interpolate", "Evaluate linear blends of two trained parameter vectors"},
        {"scale-demo", "Softmax and cross-entropy response to logit scaling"},
        {"compare", "Individual models vs combined consensus over thresholds"},
    };
    std::map<std::string, FlagSet> flag_sets;
    for (const auto& [name, help] : kinds) {
        add_experiment_flags(app.add_subcommand(name, help), flag_sets[name]);
    }

    auto* make_digits =
        app.add_subcommand("make-digits", "Write a synthetic digit dataset as MNIST IDX files");
    std::string digits_out = "data/digits";
    std::size_t digits_train = 60000, digits_val = 10000;
    std::uint64_t digits_seed = 1;
    make_digits->add_option("--out", digits_out, "Output directory");
    make_digits->add_option("--n-train", digits_train, "Training images to render");
    make_digits->add_option("--n-val", digits_val, "Validation images to render");
    make_digits->add_option("--seed", digits_seed, "Render seed");

    CLI11_PARSE(app, argc, argv);

    if (make_digits->parsed()) {
        return run_make_digits(digits_out, digits_train, digits_val, digits_seed);
    }
    for (const auto& [name, help] : kinds) {
        (void)help;
        if (app.get_subcommand(name)->parsed()) {
            return run_experiment(name, flag_sets[name]);
        }
    }
    return 1;
}
