#pragma once

#include <cstdint>
#include <string>

#include "lotenet/model.hpp"
#include "lotenet/run_config.hpp"

namespace lotenet {

struct CheckpointMeta {
    std::uint32_t best_epoch = 0;
    float best_val_auc = 0.0f;
};

template <typename T>
struct LoadedCheckpointT {
    LoTeNetModelT<T> model;
    RunConfig config;
    CheckpointMeta meta;
};

using LoadedCheckpointF = LoadedCheckpointT<float>;
using LoadedCheckpointD = LoadedCheckpointT<double>;

/// Container layout: magic "LTNC", format version u32, config-text length
/// u32 + canonical config text, every parameter tensor as consecutive LTT
/// records in canonical order (layer-major, patch positions row-major,
/// cores left to right, final block last), then best_epoch u32 and
/// best_val_auc f32. All integers little-endian; tensor payloads float32.
template <typename T>
void save_checkpoint(const std::string& path, const LoTeNetModelT<T>& model,
                     const RunConfig& config, const CheckpointMeta& meta);

/// Rebuilds the model from the embedded config and stored tensors. Stored
/// float32 values load bit-exactly at narrow precision.
template <typename T>
LoadedCheckpointT<T> load_checkpoint(const std::string& path);

/// Reads only the header, e.g. to pick the precision before loading.
RunConfig read_checkpoint_config(const std::string& path);

}  // namespace lotenet
