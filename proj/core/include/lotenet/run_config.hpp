#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lotenet/model.hpp"

namespace lotenet {

/// Everything a run needs, from one flat "key = value" file plus flag
/// overrides. Empty data paths mean the synthetic generator supplies the
/// dataset.
struct RunConfig {
    LoTeNetConfig model;

    std::string precision = "narrow";  // narrow = float32, wide = float64
    double learning_rate = 5e-4;
    std::size_t batch_size = 512;
    std::size_t patience = 5;
    std::size_t max_epochs = 30;
    std::uint64_t seed = 0;

    std::vector<double> split = {0.6, 0.2, 0.2};
    bool augment = false;

    std::string data_images;  // LTT pair, takes precedence
    std::string data_labels;
    std::string data_dir;  // directory + CSV alternative
    std::string data_csv;

    std::string out_dir = ".";
    std::size_t synth_count = 2000;
    std::size_t synth_size = 16;
    std::vector<std::size_t> sweep_betas = {2, 4, 6, 8, 10};
};

/// Applies one key; unknown keys or unparseable values raise ConfigError.
void apply_config_key(RunConfig& config, const std::string& key, const std::string& value);

/// Parses a flat config file: "key = value" lines, '#' comments, blank
/// lines; later lines override earlier ones.
RunConfig parse_run_config(const std::string& path);

RunConfig parse_run_config_text(const std::string& text, const std::string& origin = "config");

/// Canonical text form: every key, fixed order, floats at full precision.
/// parse_run_config_text(serialize_run_config(c)) reproduces c exactly.
std::string serialize_run_config(const RunConfig& config);

}  // namespace lotenet
