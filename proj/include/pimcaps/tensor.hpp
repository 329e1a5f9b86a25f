#ifndef PIMCAPS_TENSOR_HPP
#define PIMCAPS_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimcaps {

/// Dense row-major float32 tensor used for all routing state.
/// Axis names are positional and documented at each call site
/// (k = batch, i = low capsule, j = high capsule, last = scalar component).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count_of(shape_), 0.0f) {}

    Tensor(std::vector<std::size_t> shape, std::vector<float> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count_of(shape_))
            throw std::invalid_argument("tensor: data length does not match shape");
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](std::size_t flat) { return data_[flat]; }
    float operator[](std::size_t flat) const { return data_[flat]; }

    // Row-major flat offsets. Hot loops index manually; these are for tests
    // and small tensors.
    float& at2(std::size_t a, std::size_t b) {
        return data_[a * shape_[1] + b];
    }
    float at2(std::size_t a, std::size_t b) const {
        return data_[a * shape_[1] + b];
    }
    float& at3(std::size_t a, std::size_t b, std::size_t c) {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    float at3(std::size_t a, std::size_t b, std::size_t c) const {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    float& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    float at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    bool all_finite() const;

    static std::size_t count_of(const std::vector<std::size_t>& shape);

private:
    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

/// Thrown when operand shapes disagree; the message names the offending axis.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Checks extent equality on one named axis of two operands.
void require_axis_match(const Tensor& a, std::size_t axis_a,
                        const Tensor& b, std::size_t axis_b,
                        const std::string& axis_name);

void require_rank(const Tensor& t, std::size_t rank, const std::string& what);

void require_finite(const Tensor& t, const std::string& what);

} // namespace pimcaps

#endif
