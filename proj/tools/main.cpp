// Command line front end. Every option maps onto a config-file key, so a
// flag given on the command line overrides the same key from --config.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lotenet/commands.hpp"
#include "lotenet/errors.hpp"
#include "lotenet/run_config.hpp"

namespace {

using lotenet::RunConfig;

struct Cli {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string checkpoint_path;
    bool inject_fault = false;
};

void add_key_option(CLI::App* cmd, Cli& cli, const std::string& flag, const std::string& key,
                    const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&cli, key](const std::string& v) { cli.overrides.emplace_back(key, v); }, help);
}

// Options shared by every subcommand. Values stay strings here; the config
// layer parses and validates them exactly like file input.
void add_common(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_path, "config file of 'key = value' lines");
    add_key_option(cmd, cli, "--seed", "seed", "RNG seed for init, splits and shuffles");
    add_key_option(cmd, cli, "--out", "out_dir", "output directory");
    add_key_option(cmd, cli, "--precision", "precision", "narrow (float32) or wide (float64)");
    add_key_option(cmd, cli, "--height", "height", "input image height");
    add_key_option(cmd, cli, "--width", "width", "input image width");
    add_key_option(cmd, cli, "--channels", "channels", "input channels");
    add_key_option(cmd, cli, "--classes", "classes", "logit count");
    add_key_option(cmd, cli, "--layers", "layers", "squeeze + block layers before the decision block");
    add_key_option(cmd, cli, "--kernel", "kernel", "squeeze kernel k");
    cmd->add_option_function<std::string>(
        "--beta",
        [&cli](const std::string& v) {
            cli.overrides.emplace_back("bond_dim", v);
            cli.overrides.emplace_back("out_dim", v);
        },
        "bond dimension (also sets the per-block output width)");
    add_key_option(cmd, cli, "--lr", "learning_rate", "Adam learning rate");
    add_key_option(cmd, cli, "--batch", "batch_size", "minibatch size");
    add_key_option(cmd, cli, "--patience", "patience", "early-stopping patience in epochs");
    add_key_option(cmd, cli, "--epochs", "max_epochs", "epoch cap");
    add_key_option(cmd, cli, "--split", "split", "train,val[,test] fractions");
    cmd->add_flag_callback(
        "--augment", [&cli] { cli.overrides.emplace_back("augment", "true"); },
        "random flips and quarter turns on the training split");
    add_key_option(cmd, cli, "--data-images", "data_images", "LTT image stack");
    add_key_option(cmd, cli, "--data-labels", "data_labels", "LTT label vector");
    add_key_option(cmd, cli, "--data-dir", "data_dir", "image directory for the CSV loader");
    add_key_option(cmd, cli, "--data-csv", "data_csv", "filename,label CSV");
    add_key_option(cmd, cli, "--count", "synth_count", "synthetic sample count");
    add_key_option(cmd, cli, "--size", "synth_size", "synthetic image side");
    add_key_option(cmd, cli, "--betas", "sweep_betas", "comma list of bond dimensions to sweep");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-network image classifier"};
    app.require_subcommand(1);
    Cli cli;

    CLI::App* train = app.add_subcommand("train", "train and write metrics.csv + checkpoints");
    CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
    CLI::App* sweep = app.add_subcommand("sweep", "train once per bond dimension");
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "audit gradients against central differences");
    CLI::App* shapes = app.add_subcommand("shapes", "print the layer-by-layer shape plan");
    CLI::App* synth = app.add_subcommand("synth", "write the synthetic dataset as an LTT pair");

    for (CLI::App* cmd : {train, eval, sweep, gradcheck, shapes, synth}) add_common(cmd, cli);
    eval->add_option("checkpoint", cli.checkpoint_path, "checkpoint to score")->required();
    gradcheck->add_flag("--inject-fault", cli.inject_fault,
                        "corrupt one analytic gradient to prove the audit can fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? lotenet::kExitOk : lotenet::kExitConfig;
    }

    try {
        RunConfig cfg;
        if (!cli.config_path.empty()) cfg = lotenet::parse_run_config(cli.config_path);
        for (const auto& [key, value] : cli.overrides)
            lotenet::apply_config_key(cfg, key, value);

        if (train->parsed()) return lotenet::cmd_train(cfg, std::cout, std::cerr);
        if (eval->parsed())
            return lotenet::cmd_eval(cfg, cli.checkpoint_path, std::cout, std::cerr);
        if (sweep->parsed()) return lotenet::cmd_sweep(cfg, std::cout, std::cerr);
        if (gradcheck->parsed())
            return lotenet::cmd_gradcheck(cfg, cli.inject_fault, std::cout, std::cerr);
        if (shapes->parsed()) return lotenet::cmd_shapes(cfg, std::cout, std::cerr);
        if (synth->parsed()) return lotenet::cmd_synth(cfg, std::cout, std::cerr);
        return lotenet::kExitConfig;
    } catch (const lotenet::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lotenet::kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lotenet::kExitConfig;
    }
}
