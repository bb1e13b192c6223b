#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lotenet {

/// 8-bit interleaved image, rows top to bottom. channels is 1 (gray) or 3
/// (RGB); that is all the bundled codecs speak.
struct ImageU8 {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> pixels;  // height * width * channels
};

/// Decodes a PNG (8-bit gray or RGB, non-interlaced) or a binary PGM/PPM
/// file, dispatching on the signature. Anything else is a FormatError.
ImageU8 read_image(const std::string& path);

/// 8-bit non-interlaced PNG, filter type 0, one IDAT chunk.
void write_png(const std::string& path, const ImageU8& image);

/// P5 for single-channel, P6 for three-channel, maxval 255.
void write_pnm(const std::string& path, const ImageU8& image);

}  // namespace lotenet
