#include "lotenet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "lotenet/errors.hpp"
#include "lotenet/ltt_io.hpp"

namespace lotenet {
namespace {

constexpr char kMagic[4] = {'L', 'T', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t take_u32(std::istream& in, const std::string& what) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw FormatError("checkpoint: truncated reading " + what);
    return std::uint32_t(bytes[0]) | std::uint32_t(bytes[1]) << 8 |
           std::uint32_t(bytes[2]) << 16 | std::uint32_t(bytes[3]) << 24;
}

template <typename T>
TensorF narrow(const TensorT<T>& t) {
    if constexpr (std::is_same_v<T, float>)
        return t;
    else
        return t.template cast<float>();
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const LoTeNetModelT<T>& model,
                     const RunConfig& config, const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot open " + path + " for writing");

    out.write(kMagic, 4);
    put_u32(out, kVersion);
    const std::string text = serialize_run_config(config);
    put_u32(out, std::uint32_t(text.size()));
    out.write(text.data(), std::streamsize(text.size()));

    for (const auto& tensor : model.parameters()) write_ltt(out, narrow(tensor));

    put_u32(out, meta.best_epoch);
    float auc = meta.best_val_auc;
    static_assert(sizeof(auc) == 4);
    char bits[4];
    std::memcpy(bits, &auc, 4);
    out.write(bits, 4);
    if (!out) throw DataError("checkpoint: write to " + path + " failed");
}

namespace {

RunConfig read_header(std::istream& in, const std::string& path) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("checkpoint: " + path + " is not an LTNC file");
    const std::uint32_t version = take_u32(in, "version");
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));

    const std::uint32_t text_len = take_u32(in, "config length");
    std::string text(text_len, '\0');
    if (!in.read(text.data(), text_len))
        throw FormatError("checkpoint: truncated reading config text");
    return parse_run_config_text(text, path + "(embedded config)");
}

}  // namespace

RunConfig read_checkpoint_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path);
    return read_header(in, path);
}

template <typename T>
LoadedCheckpointT<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path);
    const RunConfig config = read_header(in, path);

    LoTeNetModelT<T> model = LoTeNetModelT<T>::init(config.model, config.seed);
    std::vector<TensorT<T>> params;
    params.reserve(model.parameters().size());
    for (std::size_t i = 0, n = model.parameters().size(); i < n; ++i) {
        const TensorF stored = read_ltt(in);
        if constexpr (std::is_same_v<T, float>)
            params.push_back(stored);
        else
            params.push_back(stored.template cast<T>());
    }
    model.set_parameters(params);

    CheckpointMeta meta;
    meta.best_epoch = take_u32(in, "best epoch");
    char bits[4];
    if (!in.read(bits, 4)) throw FormatError("checkpoint: truncated reading best AUC");
    std::memcpy(&meta.best_val_auc, bits, 4);
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("checkpoint: trailing bytes after metadata in " + path);

    return LoadedCheckpointT<T>{std::move(model), config, meta};
}

template void save_checkpoint<float>(const std::string&, const LoTeNetModelT<float>&,
                                     const RunConfig&, const CheckpointMeta&);
template void save_checkpoint<double>(const std::string&, const LoTeNetModelT<double>&,
                                      const RunConfig&, const CheckpointMeta&);
template LoadedCheckpointT<float> load_checkpoint<float>(const std::string&);
template LoadedCheckpointT<double> load_checkpoint<double>(const std::string&);

}  // namespace lotenet
