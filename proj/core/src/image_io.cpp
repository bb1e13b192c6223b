#include "lotenet/image_io.hpp"

#include <zlib.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lotenet/errors.hpp"

namespace lotenet {
namespace {

constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path);
}

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

std::uint8_t paeth(std::uint8_t a, std::uint8_t b, std::uint8_t c) {
    const int p = int(a) + int(b) - int(c);
    const int pa = std::abs(p - int(a)), pb = std::abs(p - int(b)), pc = std::abs(p - int(c));
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

ImageU8 decode_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::size_t pos = 8;
    bool seen_ihdr = false, seen_iend = false;
    std::size_t w = 0, h = 0, channels = 0;
    std::vector<std::uint8_t> idat;

    while (pos < bytes.size()) {
        if (pos + 12 > bytes.size()) throw FormatError(path + ": truncated chunk header");
        const std::uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) throw FormatError(path + ": truncated chunk body");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* data = &bytes[pos + 8];
        const std::uint32_t stored_crc = be32(&bytes[pos + 8 + len]);
        const std::uint32_t actual_crc = static_cast<std::uint32_t>(
            crc32(crc32(0L, &bytes[pos + 4], 4), data, len));
        if (stored_crc != actual_crc)
            throw FormatError(path + ": crc mismatch in " + std::string(type, 4) + " chunk");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw FormatError(path + ": IHDR length " + std::to_string(len));
            w = be32(data);
            h = be32(data + 4);
            const std::uint8_t depth = data[8], color = data[9], interlace = data[12];
            if (depth != 8)
                throw FormatError(path + ": only 8-bit PNGs supported, got depth " +
                                  std::to_string(depth));
            if (color == 0)
                channels = 1;
            else if (color == 2)
                channels = 3;
            else
                throw FormatError(path + ": unsupported color type " + std::to_string(color));
            if (interlace != 0) throw FormatError(path + ": interlaced PNGs unsupported");
            if (w == 0 || h == 0) throw FormatError(path + ": zero image extent");
            seen_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            if (!seen_ihdr) throw FormatError(path + ": IDAT before IHDR");
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
            break;
        }
        // Ancillary chunks are skipped after their CRC check.
        pos += 12 + len;
    }
    if (!seen_ihdr || !seen_iend || idat.empty())
        throw FormatError(path + ": missing IHDR, IDAT, or IEND");

    const std::size_t row = w * channels;
    const std::size_t raw_size = h * (row + 1);
    std::vector<std::uint8_t> raw(raw_size);
    uLongf dest = raw_size;
    const int rc = uncompress(raw.data(), &dest, idat.data(), idat.size());
    if (rc != Z_OK || dest != raw_size)
        throw FormatError(path + ": corrupt or mis-sized pixel stream");

    ImageU8 img{h, w, channels, std::vector<std::uint8_t>(h * row)};
    const std::size_t bpp = channels;
    for (std::size_t r = 0; r < h; ++r) {
        const std::uint8_t filter = raw[r * (row + 1)];
        const std::uint8_t* src = &raw[r * (row + 1) + 1];
        std::uint8_t* cur = &img.pixels[r * row];
        const std::uint8_t* up = r > 0 ? &img.pixels[(r - 1) * row] : nullptr;
        for (std::size_t i = 0; i < row; ++i) {
            const std::uint8_t a = i >= bpp ? cur[i - bpp] : 0;
            const std::uint8_t b = up ? up[i] : 0;
            const std::uint8_t c = (up && i >= bpp) ? up[i - bpp] : 0;
            int recon = src[i];
            switch (filter) {
                case 0: break;
                case 1: recon += a; break;
                case 2: recon += b; break;
                case 3: recon += (int(a) + int(b)) / 2; break;
                case 4: recon += paeth(a, b, c); break;
                default:
                    throw FormatError(path + ": unknown filter type " +
                                      std::to_string(filter) + " in row " + std::to_string(r));
            }
            cur[i] = std::uint8_t(recon & 0xff);
        }
    }
    return img;
}

// Binary PGM (P5) / PPM (P6): header tokens may be separated by whitespace
// and '#' comments; maxval must be 255 for the 8-bit pipeline.
ImageU8 decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    const auto next_int = [&]() -> std::size_t {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw FormatError(path + ": malformed header");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos]))
            v = v * 10 + std::size_t(bytes[pos++] - '0');
        return v;
    };
    const std::size_t w = next_int(), h = next_int(), maxval = next_int();
    if (w == 0 || h == 0) throw FormatError(path + ": zero image extent");
    if (maxval != 255)
        throw FormatError(path + ": only maxval 255 supported, got " + std::to_string(maxval));
    ++pos;  // single whitespace byte after maxval
    const std::size_t need = h * w * channels;
    if (bytes.size() - pos < need)
        throw FormatError(path + ": pixel data truncated (" +
                          std::to_string(bytes.size() - pos) + " of " + std::to_string(need) +
                          " bytes)");
    ImageU8 img{h, w, channels, {}};
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return img;
}

void check_writable(const ImageU8& image) {
    if (image.channels != 1 && image.channels != 3)
        throw UsageError("image: channels must be 1 or 3, got " +
                         std::to_string(image.channels));
    if (image.height == 0 || image.width == 0) throw UsageError("image: zero extent");
    if (image.pixels.size() != image.height * image.width * image.channels)
        throw UsageError("image: pixel buffer size does not match extents");
}

}  // namespace

ImageU8 read_image(const std::string& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0)
        return decode_png(bytes, path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return decode_pnm(bytes, path);
    throw FormatError(path + ": not a PNG or binary PGM/PPM file");
}

void write_png(const std::string& path, const ImageU8& image) {
    check_writable(image);
    const std::size_t row = image.width * image.channels;
    std::vector<std::uint8_t> raw((row + 1) * image.height);
    for (std::size_t r = 0; r < image.height; ++r) {
        raw[r * (row + 1)] = 0;  // filter: None
        std::memcpy(&raw[r * (row + 1) + 1], &image.pixels[r * row], row);
    }
    uLongf bound = compressBound(raw.size());
    std::vector<std::uint8_t> packed(bound);
    if (compress(packed.data(), &bound, raw.data(), raw.size()) != Z_OK)
        throw FormatError("png: compression failed");
    packed.resize(bound);

    std::vector<std::uint8_t> out(kPngSig, kPngSig + 8);
    const auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
        put_be32(out, static_cast<std::uint32_t>(data.size()));
        const std::size_t type_at = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        uLong crc = crc32(0L, &out[type_at], 4);
        if (!data.empty()) crc = crc32(crc, data.data(), data.size());
        put_be32(out, static_cast<std::uint32_t>(crc));
    };

    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(image.width));
    put_be32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.push_back(8);                                      // bit depth
    ihdr.push_back(image.channels == 1 ? 0 : 2);            // gray or truecolor
    ihdr.insert(ihdr.end(), {0, 0, 0});                     // compression, filter, interlace
    chunk("IHDR", ihdr);
    chunk("IDAT", packed);
    chunk("IEND", {});
    write_file(path, out);
}

void write_pnm(const std::string& path, const ImageU8& image) {
    check_writable(image);
    std::ostringstream header;
    header << (image.channels == 1 ? "P5" : "P6") << "\n"
           << image.width << " " << image.height << "\n255\n";
    const std::string head = header.str();
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    write_file(path, out);
}

}  // namespace lotenet
