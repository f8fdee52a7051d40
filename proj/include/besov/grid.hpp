#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "besov/errors.hpp"

namespace besov {

// A function on the uniform dyadic grid of [0,1]^d, d in {1,2}, stored as
// cell-center values (2^J cells per axis, x index fastest in 2D).  The
// discrete L^2 norm uses the cell measure h^d, so it matches the L^2 norm
// of the piecewise-constant interpolant.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(int dimension, int level)
        : d_(dimension), level_(level),
          n_(static_cast<std::size_t>(1) << level),
          values_(total_cells(dimension, level), 0.0) {
        if (dimension != 1 && dimension != 2)
            throw InvalidInput("GridFunction: dimension must be 1 or 2");
        if (level < 1)
            throw InvalidInput("GridFunction: level must be >= 1");
    }

    static std::size_t total_cells(int dimension, int level) {
        return static_cast<std::size_t>(1) << (dimension * level);
    }

    int dim() const { return d_; }
    int level() const { return level_; }
    std::size_t cells_per_axis() const { return n_; }
    std::size_t size() const { return values_.size(); }
    double spacing() const { return 1.0 / static_cast<double>(n_); }
    double cell_measure() const { return std::pow(spacing(), d_); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(std::size_t ix, std::size_t iy) { return values_[iy * n_ + ix]; }
    double at(std::size_t ix, std::size_t iy) const { return values_[iy * n_ + ix]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    // Center coordinate of cell i along one axis.
    double center(std::size_t i) const {
        return (static_cast<double>(i) + 0.5) * spacing();
    }

    double l2_norm() const {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s * cell_measure());
    }

    double inner(const GridFunction& other) const {
        require_same_shape(other);
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
        return s * cell_measure();
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::fabs(v));
        return m;
    }

    void require_same_shape(const GridFunction& other) const {
        if (d_ != other.d_ || level_ != other.level_)
            throw InvalidInput("GridFunction: shape mismatch");
    }

    GridFunction& operator+=(const GridFunction& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
        return *this;
    }

    GridFunction& operator-=(const GridFunction& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
        return *this;
    }

    GridFunction& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }

private:
    int d_ = 1;
    int level_ = 1;
    std::size_t n_ = 2;
    std::vector<double> values_;
};

inline GridFunction operator-(GridFunction a, const GridFunction& b) {
    a -= b;
    return a;
}

inline GridFunction operator+(GridFunction a, const GridFunction& b) {
    a += b;
    return a;
}

} // namespace besov
