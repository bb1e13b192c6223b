#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace lotenet {

/// Ordered list of positive extents. Rank 0 is a scalar.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims);
    explicit Shape(std::vector<std::size_t> dims);

    std::size_t rank() const { return dims_.size(); }
    std::size_t extent(std::size_t axis) const;
    const std::vector<std::size_t>& dims() const { return dims_; }

    /// Total element count (product of extents; 1 for a scalar).
    std::size_t count() const { return count_; }

    bool operator==(const Shape& other) const { return dims_ == other.dims_; }
    bool operator!=(const Shape& other) const { return !(*this == other); }

    /// "3x4x5", or "scalar" for rank 0.
    std::string str() const;

private:
    void validate();

    std::vector<std::size_t> dims_;
    std::size_t count_ = 1;
};

/// Row-major strides (last index fastest) for a shape.
std::vector<std::size_t> row_major_strides(const Shape& shape);

}  // namespace lotenet
