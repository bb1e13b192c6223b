#include "lotenet/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lotenet/errors.hpp"
#include "lotenet/image_io.hpp"
#include "lotenet/ltt_io.hpp"

namespace lotenet {
namespace {

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r\n");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r\n");
    return s.substr(from, to - from + 1);
}

std::size_t parse_label(const std::string& text, std::size_t row) {
    if (text.empty() || !std::all_of(text.begin(), text.end(),
                                     [](unsigned char c) { return std::isdigit(c); }))
        throw DataError("labels row " + std::to_string(row) + ": label '" + text +
                        "' is not a non-negative integer");
    return std::stoull(text);
}

void check_uniform(const Shape& found, const Shape& expected, const std::string& what) {
    if (!(found == expected))
        throw DataError(what + ": image shape " + found.str() + " differs from first sample's " +
                        expected.str());
}

TensorF flip_axis(const TensorF& img, std::size_t axis) {
    const std::size_t h = img.shape().extent(0), w = img.shape().extent(1),
                      c = img.shape().extent(2);
    return TensorF::generate(img.shape(), [&](std::size_t i) {
        std::size_t r = i / (w * c), q = (i / c) % w, ch = i % c;
        if (axis == 0)
            r = h - 1 - r;
        else
            q = w - 1 - q;
        return img.at({r, q, ch});
    });
}

TensorF quarter_turn_cw(const TensorF& img) {
    const std::size_t h = img.shape().extent(0), w = img.shape().extent(1),
                      c = img.shape().extent(2);
    return TensorF::generate(img.shape(), [&](std::size_t i) {
        const std::size_t r = i / (w * c), q = (i / c) % w, ch = i % c;
        return img.at({h - 1 - q, r, ch});
    });
}

}  // namespace

Dataset load_image_dir(const std::string& dir, const std::string& labels_csv) {
    std::ifstream in(labels_csv);
    if (!in) throw DataError("cannot open labels file " + labels_csv);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "filename,label")
        throw DataError(labels_csv + ": first line must be the header \"filename,label\"");

    Dataset ds;
    std::size_t max_label = 0, row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const auto comma = entry.find(',');
        if (comma == std::string::npos)
            throw DataError("labels row " + std::to_string(row) + ": expected filename,label");
        const std::string name = trim(entry.substr(0, comma));
        const std::size_t label = parse_label(trim(entry.substr(comma + 1)), row);

        const std::string path = (std::filesystem::path(dir) / name).string();
        ImageU8 raw;
        try {
            raw = read_image(path);
        } catch (const FormatError& e) {
            throw DataError("labels row " + std::to_string(row) + " (" + name +
                            "): " + e.what());
        }
        const Shape shape({raw.height, raw.width, raw.channels});
        std::vector<float> values(raw.pixels.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = static_cast<float>(raw.pixels[i]) / 255.0f;
        if (!ds.samples.empty()) check_uniform(shape, ds.samples.front().image.shape(), name);
        ds.samples.push_back(Sample{TensorF(shape, std::move(values)), label});
        max_label = std::max(max_label, label);
    }
    if (ds.samples.empty()) throw DataError(labels_csv + ": no samples listed");
    ds.class_count = max_label + 1;
    return ds;
}

Dataset load_ltt_dataset(const std::string& images_path, const std::string& labels_path) {
    const TensorF images = read_ltt_file(images_path);
    const TensorF labels = read_ltt_file(labels_path);
    if (images.rank() != 4)
        throw FormatError(images_path + ": images must be rank 4 (count x H x W x C), got " +
                          images.shape().str());
    if (labels.rank() != 1)
        throw FormatError(labels_path + ": labels must be rank 1, got " +
                          labels.shape().str());
    const std::size_t count = images.shape().extent(0);
    if (labels.shape().extent(0) != count)
        throw FormatError(labels_path + ": " + std::to_string(labels.shape().extent(0)) +
                          " labels for " + std::to_string(count) + " images");
    if (count == 0) throw FormatError(images_path + ": empty dataset");

    const Shape img_shape({images.shape().extent(1), images.shape().extent(2),
                           images.shape().extent(3)});
    const std::size_t stride = img_shape.count();
    Dataset ds;
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const float lf = labels[i];
        if (!(lf >= 0.0f) || lf != std::floor(lf))
            throw FormatError(labels_path + ": label at index " + std::to_string(i) +
                              " is not a non-negative integer");
        const auto view = images.data().subspan(i * stride, stride);
        ds.samples.push_back(Sample{TensorF(img_shape, std::vector<float>(view.begin(),
                                                                          view.end())),
                                    static_cast<std::size_t>(lf)});
        max_label = std::max(max_label, ds.samples.back().label);
    }
    ds.class_count = max_label + 1;
    return ds;
}

void save_ltt_dataset(const Dataset& dataset, const std::string& images_path,
                      const std::string& labels_path) {
    if (dataset.samples.empty()) throw UsageError("save: empty dataset");
    const Shape& img = dataset.samples.front().image.shape();
    if (img.rank() != 3) throw UsageError("save: images must be rank 3");
    std::vector<float> packed;
    packed.reserve(dataset.size() * img.count());
    std::vector<float> labels;
    labels.reserve(dataset.size());
    for (const auto& s : dataset.samples) {
        check_uniform(s.image.shape(), img, "save");
        const auto view = s.image.data();
        packed.insert(packed.end(), view.begin(), view.end());
        labels.push_back(static_cast<float>(s.label));
    }
    write_ltt_file(images_path,
                   TensorF(Shape({dataset.size(), img.extent(0), img.extent(1),
                                  img.extent(2)}),
                           std::move(packed)));
    write_ltt_file(labels_path, TensorF(Shape({dataset.size()}), std::move(labels)));
}

Dataset normalize(const Dataset& dataset, float mean, float std_dev) {
    if (std_dev == 0.0f) throw UsageError("normalize: std must be non-zero");
    Dataset out;
    out.class_count = dataset.class_count;
    out.samples.reserve(dataset.size());
    for (const auto& s : dataset.samples) {
        // Double keeps the mean=std=0.5 round trip bitwise for 8-bit data.
        TensorF img = TensorF::generate(s.image.shape(), [&](std::size_t i) {
            const double centered = (double(s.image[i]) - mean) / std_dev;
            return std::clamp(static_cast<float>((centered + 1.0) / 2.0), 0.0f, 1.0f);
        });
        out.samples.push_back(Sample{std::move(img), s.label});
    }
    return out;
}

std::vector<Dataset> split(const Dataset& dataset, std::span<const double> fractions,
                           std::uint64_t seed) {
    if (fractions.empty()) throw UsageError("split: no fractions");
    double sum = 0;
    for (double f : fractions) {
        if (f <= 0) throw UsageError("split: fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw UsageError("split: fractions sum to " + std::to_string(sum) + ", expected 1");

    const std::size_t n = dataset.size();
    std::vector<std::size_t> sizes(fractions.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        sizes[i] = static_cast<std::size_t>(
            std::llround(fractions[i] * static_cast<double>(n)));
        assigned += sizes[i];
    }
    // Rounding drift lands on the first part.
    if (assigned > n && sizes[0] < assigned - n)
        throw UsageError("split: rounding left the first part negative");
    sizes[0] = sizes[0] + n - assigned;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<Dataset> parts;
    std::size_t next = 0;
    for (std::size_t part = 0; part < sizes.size(); ++part) {
        Dataset d;
        d.class_count = dataset.class_count;
        d.samples.reserve(sizes[part]);
        for (std::size_t i = 0; i < sizes[part]; ++i)
            d.samples.push_back(dataset.samples[order[next++]]);
        parts.push_back(std::move(d));
    }
    return parts;
}

Sample augment(const Sample& sample, const AugmentConfig& config, Rng& rng) {
    if (sample.image.rank() != 3)
        throw UsageError("augment: image must be rank 3, got " + sample.image.shape().str());
    if (config.quarter_turn &&
        sample.image.shape().extent(0) != sample.image.shape().extent(1))
        throw UsageError("augment: quarter turns need square images, got " +
                         sample.image.shape().str());
    TensorF img = sample.image;
    if (config.hflip && rng.next_below(2) == 1) img = flip_axis(img, 1);
    if (config.vflip && rng.next_below(2) == 1) img = flip_axis(img, 0);
    if (config.quarter_turn && rng.next_below(2) == 1) img = quarter_turn_cw(img);
    return Sample{std::move(img), sample.label};
}

Dataset augment_dataset(const Dataset& dataset, const AugmentConfig& config,
                        std::uint64_t seed) {
    Dataset out;
    out.class_count = dataset.class_count;
    out.samples.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Rng rng = Rng::derive(seed, {i});
        out.samples.push_back(augment(dataset.samples[i], config, rng));
    }
    return out;
}

Dataset synth_generate(std::size_t count, std::size_t size, std::uint64_t seed) {
    if (count < 1 || size < 4) throw UsageError("synth: count >= 1 and size >= 4 required");
    Dataset ds;
    ds.class_count = 2;
    ds.samples.reserve(count);
    const double sigma = static_cast<double>(size) / 8.0;
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, {i});
        const std::size_t label = i % 2;
        double cr = 0, cq = 0;
        if (label == 1) {
            cr = static_cast<double>(size / 4 + rng.next_below(size / 2));
            cq = static_cast<double>(size / 4 + rng.next_below(size / 2));
        }
        std::vector<float> px(size * size);
        for (std::size_t p = 0; p < px.size(); ++p) {
            double v = 0.3 * rng.next_unit();
            if (label == 1) {
                const double dr = static_cast<double>(p / size) - cr;
                const double dq = static_cast<double>(p % size) - cq;
                v += 0.9 * std::exp(-(dr * dr + dq * dq) / (2 * sigma * sigma));
            }
            px[p] = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
        }
        ds.samples.push_back(Sample{TensorF(Shape({size, size, 1}), std::move(px)), label});
    }
    return ds;
}

}  // namespace lotenet
