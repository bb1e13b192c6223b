#include "lotenet/ltt_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "lotenet/errors.hpp"

namespace lotenet {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        std::ostringstream os;
        os << "tensor record truncated while reading " << what;
        throw FormatError(os.str());
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_ltt(std::ostream& out, const TensorF& t) {
    out.write(kMagic, 4);
    if (t.rank() > std::numeric_limits<std::uint32_t>::max())
        throw FormatError("tensor rank exceeds record format limit");
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t i = 0; i < t.rank(); ++i) {
        const std::size_t e = t.shape().extent(i);
        if (e > std::numeric_limits<std::uint32_t>::max())
            throw FormatError("tensor extent exceeds record format limit");
        put_u32(out, static_cast<std::uint32_t>(e));
    }
    for (std::size_t i = 0; i < t.count(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(t[i]));
    if (!out) throw FormatError("tensor record write failed");
}

TensorF read_ltt(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw FormatError("tensor record truncated while reading magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad tensor record magic (expected LTT1)");
    const std::uint32_t rank = get_u32(in, "rank");
    std::vector<std::size_t> dims(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint32_t e = get_u32(in, "extent");
        if (e == 0) throw FormatError("tensor record declares an extent of zero");
        dims[i] = e;
    }
    Shape shape = rank == 0 ? Shape{} : Shape(dims);
    std::vector<float> values(shape.count());
    for (float& v : values) v = std::bit_cast<float>(get_u32(in, "values"));
    return TensorF(std::move(shape), std::move(values));
}

void write_ltt_file(const std::filesystem::path& path, const TensorF& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::ostringstream os;
        os << "cannot open " << path.string() << " for writing";
        throw FormatError(os.str());
    }
    write_ltt(out, t);
    out.flush();
    if (!out) {
        std::ostringstream os;
        os << "write to " << path.string() << " failed";
        throw FormatError(os.str());
    }
}

TensorF read_ltt_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::ostringstream os;
        os << "cannot open " << path.string() << " for reading";
        throw FormatError(os.str());
    }
    TensorF t = read_ltt(in);
    in.peek();
    if (!in.eof()) {
        std::ostringstream os;
        os << path.string() << " has trailing bytes after the tensor record";
        throw FormatError(os.str());
    }
    return t;
}

}  // namespace lotenet
