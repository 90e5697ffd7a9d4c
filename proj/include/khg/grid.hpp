#pragma once

// Sampled scalar fields on tensor-product grids, with per-axis finite-difference weights.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "khg/errors.hpp"

namespace khg {

enum class AxisKind { Uniform, Logarithmic, Custom };

/// Three-point weights on (i-1, i, i+1).
struct Stencil3 {
    double m = 0.0, c = 0.0, p = 0.0;
};

struct Axis {
    std::string name;
    std::vector<double> x;
    AxisKind kind = AxisKind::Custom;
    /// Uniform only: x_i = a + i*period/n, the node past the end wraps to x_0.
    bool periodic = false;
    double period = 0.0;

    static Axis uniform(std::string name, double a, double b, std::size_t n);
    static Axis periodic_uniform(std::string name, double a, double period, std::size_t n);
    /// Geometric spacing x_i = a (b/a)^{i/(n-1)}, 0 < a < b.
    static Axis logarithmic(std::string name, double a, double b, std::size_t n);
    static Axis custom(std::string name, std::vector<double> x);

    std::size_t size() const noexcept { return x.size(); }
    /// Weights for d/dx and d2/dx2 at node i; exact second-order mapped stencils for
    /// uniform and logarithmic axes. Requires an interior node unless periodic.
    Stencil3 d1(std::size_t i) const;
    Stencil3 d2(std::size_t i) const;
    /// Mean neighbour spacing at node i.
    double spacing(std::size_t i) const;
};

/// Row-major field, last axis fastest.
class GridField {
public:
    GridField() = default;
    explicit GridField(std::vector<Axis> axes, double fill = 0.0);

    const std::vector<Axis>& axes() const noexcept { return axes_; }
    const Axis& axis(std::size_t a) const { return axes_[a]; }
    std::size_t dims() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double& operator[](std::size_t flat) { return values_[flat]; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double& at(const std::vector<std::size_t>& idx) { return values_[flat_index(idx)]; }
    double at(const std::vector<std::size_t>& idx) const { return values_[flat_index(idx)]; }

    std::size_t flat_index(const std::vector<std::size_t>& idx) const;
    void unravel(std::size_t flat, std::vector<std::size_t>& idx) const;
    std::vector<double> coords(std::size_t flat) const;
    /// True if the node sits at an end of a non-periodic axis.
    bool is_boundary(std::size_t flat) const;
    bool same_grid(const GridField& other) const;

    void fill(const std::function<double(const std::vector<double>&)>& f);
    double max_abs() const;
    /// Sup-norm over nodes away from every non-periodic boundary.
    double interior_max_abs() const;

    void write_csv(std::ostream& os) const;
    void write_binary(std::ostream& os) const;
    static GridField read_binary(std::istream& is);
    void save_csv(const std::string& path) const;
    void save_binary(const std::string& path) const;
    static GridField load_binary(const std::string& path);

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> shape_, strides_;
    std::vector<double> values_;
};

GridField operator-(const GridField& a, const GridField& b);
GridField operator+(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);

} // namespace khg
