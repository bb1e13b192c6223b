#include "lotenet/shape.hpp"

#include <limits>

#include "lotenet/errors.hpp"

namespace lotenet {

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

void Shape::validate() {
    count_ = 1;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] == 0) {
            throw ShapeError("shape: extent of axis " + std::to_string(i) +
                             " must be >= 1");
        }
        if (count_ > std::numeric_limits<std::size_t>::max() / dims_[i]) {
            throw ShapeError("shape: element count overflows");
        }
        count_ *= dims_[i];
    }
}

std::size_t Shape::extent(std::size_t axis) const {
    if (axis >= dims_.size()) {
        throw IndexError("shape: axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank()));
    }
    return dims_[axis];
}

std::string Shape::str() const {
    if (dims_.empty()) return "scalar";
    std::string out;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) out += 'x';
        out += std::to_string(dims_[i]);
    }
    return out;
}

std::vector<std::size_t> row_major_strides(const Shape& shape) {
    std::vector<std::size_t> strides(shape.rank(), 1);
    for (std::size_t i = shape.rank(); i-- > 1;) {
        strides[i - 1] = strides[i] * shape.extent(i);
    }
    return strides;
}

}  // namespace lotenet
