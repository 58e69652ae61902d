#include "genprof/tensor.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace genprof {

std::size_t checked_entry_count(std::span<const std::size_t> shape, std::size_t cap) {
    std::size_t total = 1;
    for (std::size_t n : shape) {
        if (n == 0) {
            throw std::invalid_argument("tensor axis of length zero");
        }
        if (total > cap / n) {
            throw std::length_error("dense tensor exceeds the oracle cap of " +
                                    std::to_string(cap) + " entries");
        }
        total *= n;
    }
    return total;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
    data_.assign(checked_entry_count(shape_, std::numeric_limits<std::size_t>::max()), fill);
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        flat = flat * shape_[k] + index[k];
    }
    return flat;
}

void DenseTensor::unravel(std::size_t flat, std::span<std::size_t> index) const {
    for (std::size_t k = shape_.size(); k-- > 0;) {
        index[k] = flat % shape_[k];
        flat /= shape_[k];
    }
}

double DenseTensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

}  // namespace genprof
