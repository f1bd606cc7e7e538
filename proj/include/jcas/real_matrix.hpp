// Dense row-major real matrix used by the neural layers.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jcas {

class RealMatrix {
  public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return v_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return v_[r * cols_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const noexcept {
        return v_[r * cols_ + c];
    }

    double* data() noexcept { return v_.data(); }
    const double* data() const noexcept { return v_.data(); }

    std::span<double> row(std::size_t r) noexcept { return {v_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {v_.data() + r * cols_, cols_};
    }

    bool operator==(const RealMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

} // namespace jcas
