#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lotenet/rng.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

/// One labeled image, H x W x C with values in [0,1].
struct Sample {
    TensorF image;
    std::size_t label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t class_count = 0;

    std::size_t size() const { return samples.size(); }
};

/// Loads images named by a CSV with header "filename,label"; paths resolve
/// relative to dir. 8-bit intensities scale to [0,1]; sample order follows
/// the CSV. Any unreadable row raises DataError naming it.
Dataset load_image_dir(const std::string& dir, const std::string& labels_csv);

/// Bulk pair: images as one rank-4 tensor (count x H x W x C), labels as a
/// rank-1 tensor of the same count holding non-negative integers.
Dataset load_ltt_dataset(const std::string& images_path, const std::string& labels_path);

void save_ltt_dataset(const Dataset& dataset, const std::string& images_path,
                      const std::string& labels_path);

/// x -> ((x - mean)/std + 1)/2, clamped to [0,1]. The default constants make
/// this the identity, matching the embedding's expected input range.
Dataset normalize(const Dataset& dataset, float mean = 0.5f, float std_dev = 0.5f);

/// Seed-shuffled partition; sizes are the rounded fractions with the
/// rounding remainder absorbed by the first part. Disjoint and exhaustive.
std::vector<Dataset> split(const Dataset& dataset, std::span<const double> fractions,
                           std::uint64_t seed);

/// Each enabled transform applies independently with probability 1/2, in
/// the fixed order below; together they generate the full group of axis
/// flips and quarter turns.
struct AugmentConfig {
    bool hflip = true;
    bool vflip = true;
    bool quarter_turn = true;  // one clockwise quarter turn; square images only
};

Sample augment(const Sample& sample, const AugmentConfig& config, Rng& rng);

/// Whole-dataset augmentation; sample i's RNG derives from (seed, i), so the
/// result does not depend on traversal order.
Dataset augment_dataset(const Dataset& dataset, const AugmentConfig& config,
                        std::uint64_t seed);

/// Desk-scale binary task: even samples are background noise (uniform
/// [0, 0.3]), odd samples add a bright Gaussian blob (peak 0.9,
/// sigma = size/8) at a random integer position in the central half.
/// Exactly balanced for even counts; bitwise deterministic by seed.
Dataset synth_generate(std::size_t count, std::size_t size, std::uint64_t seed);

}  // namespace lotenet
