#pragma once

#include <filesystem>
#include <iosfwd>

#include "lotenet/tensor.hpp"

namespace lotenet {

/// Binary tensor record: magic "LTT1", then rank and per-axis extents as
/// little-endian u32, then row-major float32 values. No padding, no trailer.
void write_ltt(std::ostream& out, const TensorF& t);

/// Reads exactly one record, leaving the stream positioned after it.
TensorF read_ltt(std::istream& in);

void write_ltt_file(const std::filesystem::path& path, const TensorF& t);

/// Rejects files with trailing bytes after the single record.
TensorF read_ltt_file(const std::filesystem::path& path);

}  // namespace lotenet
