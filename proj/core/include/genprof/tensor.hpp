#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace genprof {

/// Default upper bound on the number of entries any dense oracle tensor may hold.
inline constexpr std::size_t kDenseEntryCap = 1'000'000;

/// Order-k array with row-major layout (last index fastest). Only used at
/// oracle scale: cost tensors, transport plans.
class DenseTensor {
public:
    DenseTensor() = default;
    DenseTensor(std::vector<std::size_t> shape, double fill = 0.0);

    std::span<const std::size_t> shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }
    double at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }
    double& at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }

    std::size_t flat_index(std::span<const std::size_t> index) const;
    /// Inverse of flat_index.
    void unravel(std::size_t flat, std::span<std::size_t> index) const;

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    double sum() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Product of `shape`, throwing std::length_error if it exceeds `cap`.
std::size_t checked_entry_count(std::span<const std::size_t> shape, std::size_t cap);

}  // namespace genprof
