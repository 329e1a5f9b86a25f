#include "pimcaps/tensor.hpp"

#include <cmath>

namespace pimcaps {

std::size_t Tensor::count_of(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

bool Tensor::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_axis_match(const Tensor& a, std::size_t axis_a,
                        const Tensor& b, std::size_t axis_b,
                        const std::string& axis_name) {
    if (a.extent(axis_a) != b.extent(axis_b))
        throw ShapeError("axis '" + axis_name + "' mismatch: " +
                         std::to_string(a.extent(axis_a)) + " vs " +
                         std::to_string(b.extent(axis_b)));
}

void require_rank(const Tensor& t, std::size_t rank, const std::string& what) {
    if (t.rank() != rank)
        throw ShapeError(what + ": expected rank " + std::to_string(rank) +
                         ", got " + std::to_string(t.rank()));
}

void require_finite(const Tensor& t, const std::string& what) {
    if (!t.all_finite())
        throw std::invalid_argument(what + ": non-finite input value");
}

} // namespace pimcaps
