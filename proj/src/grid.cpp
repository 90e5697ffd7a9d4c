#include "khg/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace khg {

Axis Axis::uniform(std::string name, double a, double b, std::size_t n) {
    require(n >= 2 && b > a, ErrorCode::DomainError, "uniform axis needs n >= 2 and b > a");
    Axis ax;
    ax.name = std::move(name);
    ax.kind = AxisKind::Uniform;
    ax.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) ax.x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    ax.x.back() = b;
    return ax;
}

Axis Axis::periodic_uniform(std::string name, double a, double period, std::size_t n) {
    require(n >= 3 && period > 0.0, ErrorCode::DomainError, "periodic axis needs n >= 3 and a positive period");
    Axis ax;
    ax.name = std::move(name);
    ax.kind = AxisKind::Uniform;
    ax.periodic = true;
    ax.period = period;
    ax.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) ax.x[i] = a + period * static_cast<double>(i) / static_cast<double>(n);
    return ax;
}

Axis Axis::logarithmic(std::string name, double a, double b, std::size_t n) {
    require(n >= 2 && a > 0.0 && b > a, ErrorCode::DomainError, "logarithmic axis needs 0 < a < b and n >= 2");
    Axis ax;
    ax.name = std::move(name);
    ax.kind = AxisKind::Logarithmic;
    ax.x.resize(n);
    const double l = std::log(b / a);
    for (std::size_t i = 0; i < n; ++i) ax.x[i] = a * std::exp(l * static_cast<double>(i) / static_cast<double>(n - 1));
    ax.x.front() = a;
    ax.x.back() = b;
    return ax;
}

Axis Axis::custom(std::string name, std::vector<double> x) {
    require(x.size() >= 2, ErrorCode::DomainError, "axis needs at least two nodes");
    for (std::size_t i = 1; i < x.size(); ++i)
        require(x[i] > x[i - 1], ErrorCode::DomainError, "axis coordinates must increase strictly");
    Axis ax;
    ax.name = std::move(name);
    ax.kind = AxisKind::Custom;
    ax.x = std::move(x);
    return ax;
}

namespace {

double uniform_step(const Axis& ax) {
    return ax.periodic ? ax.period / static_cast<double>(ax.size())
                       : (ax.x.back() - ax.x.front()) / static_cast<double>(ax.size() - 1);
}

} // namespace

Stencil3 Axis::d1(std::size_t i) const {
    const std::size_t n = size();
    require(periodic || (i >= 1 && i + 1 < n), ErrorCode::DomainError, "derivative stencil needs an interior node");
    switch (kind) {
    case AxisKind::Uniform: {
        const double h = uniform_step(*this);
        return {-0.5 / h, 0.0, 0.5 / h};
    }
    case AxisKind::Logarithmic: {
        const double l = std::log(x.back() / x.front());
        const double de = 1.0 / static_cast<double>(n - 1);
        const double s = 1.0 / (l * x[i]);
        return {-0.5 / de * s, 0.0, 0.5 / de * s};
    }
    case AxisKind::Custom:
    default: {
        const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
        return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
    }
    }
}

Stencil3 Axis::d2(std::size_t i) const {
    const std::size_t n = size();
    require(periodic || (i >= 1 && i + 1 < n), ErrorCode::DomainError, "derivative stencil needs an interior node");
    switch (kind) {
    case AxisKind::Uniform: {
        const double h = uniform_step(*this);
        const double w = 1.0 / (h * h);
        return {w, -2.0 * w, w};
    }
    case AxisKind::Logarithmic: {
        // x = a exp(L eta): psi_xx = (psi_eta,eta - L psi_eta) / (L x)^2.
        const double l = std::log(x.back() / x.front());
        const double de = 1.0 / static_cast<double>(n - 1);
        const double s = 1.0 / (l * l * x[i] * x[i]);
        return {(1.0 / (de * de) + 0.5 * l / de) * s, -2.0 / (de * de) * s, (1.0 / (de * de) - 0.5 * l / de) * s};
    }
    case AxisKind::Custom:
    default: {
        const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
        return {2.0 / (h1 * (h1 + h2)), -2.0 / (h1 * h2), 2.0 / (h2 * (h1 + h2))};
    }
    }
}

double Axis::spacing(std::size_t i) const {
    if (kind == AxisKind::Uniform) return uniform_step(*this);
    if (i == 0) return x[1] - x[0];
    if (i + 1 == size()) return x[i] - x[i - 1];
    return 0.5 * (x[i + 1] - x[i - 1]);
}

GridField::GridField(std::vector<Axis> axes, double fill) : axes_(std::move(axes)) {
    require(!axes_.empty(), ErrorCode::DimensionMismatch, "grid needs at least one axis");
    shape_.resize(axes_.size());
    strides_.resize(axes_.size());
    std::size_t total = 1;
    for (std::size_t a = axes_.size(); a-- > 0;) {
        require(axes_[a].size() >= 2, ErrorCode::DimensionMismatch, "every axis needs two nodes");
        for (std::size_t i = 1; i < axes_[a].size(); ++i)
            require(axes_[a].x[i] > axes_[a].x[i - 1], ErrorCode::DomainError, "axis coordinates must increase strictly");
        shape_[a] = axes_[a].size();
        strides_[a] = total;
        total *= shape_[a];
    }
    values_.assign(total, fill);
}

std::size_t GridField::flat_index(const std::vector<std::size_t>& idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) f += idx[a] * strides_[a];
    return f;
}

void GridField::unravel(std::size_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(shape_.size());
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        idx[a] = flat / strides_[a];
        flat %= strides_[a];
    }
}

std::vector<double> GridField::coords(std::size_t flat) const {
    std::vector<double> c(shape_.size());
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        c[a] = axes_[a].x[flat / strides_[a]];
        flat %= strides_[a];
    }
    return c;
}

bool GridField::is_boundary(std::size_t flat) const {
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        const std::size_t i = flat / strides_[a];
        flat %= strides_[a];
        if (!axes_[a].periodic && (i == 0 || i + 1 == shape_[a])) return true;
    }
    return false;
}

bool GridField::same_grid(const GridField& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a)
        if (axes_[a].x != other.axes_[a].x || axes_[a].periodic != other.axes_[a].periodic) return false;
    return true;
}

void GridField::fill(const std::function<double(const std::vector<double>&)>& f) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = f(coords(k));
}

double GridField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridField::interior_max_abs() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!is_boundary(k)) m = std::max(m, std::abs(values_[k]));
    return m;
}

void GridField::write_csv(std::ostream& os) const {
    for (const auto& ax : axes_) os << ax.name << ',';
    os << "value\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (std::size_t k = 0; k < values_.size(); ++k) {
        line.str("");
        for (double c : coords(k)) line << c << ',';
        line << values_[k] << '\n';
        os << line.str();
    }
}

namespace {

constexpr char kMagic[4] = {'K', 'H', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    require(static_cast<bool>(is), ErrorCode::IoError, "truncated grid file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

} // namespace

// Layout, all little-endian: "KHGF", u32 version, u32 dims; per axis: u32 name length,
// name bytes, u8 kind, u8 periodic, f64 period, u64 n, n x f64 coordinates; then
// u64 count and count x f64 values in row-major order.
void GridField::write_binary(std::ostream& os) const {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(axes_.size()));
    for (const auto& ax : axes_) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(ax.name.size()));
        os.write(ax.name.data(), static_cast<std::streamsize>(ax.name.size()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(ax.kind));
        put<std::uint8_t>(os, ax.periodic ? 1 : 0);
        put<double>(os, ax.period);
        put<std::uint64_t>(os, ax.x.size());
        for (double c : ax.x) put<double>(os, c);
    }
    put<std::uint64_t>(os, values_.size());
    for (double v : values_) put<double>(os, v);
}

GridField GridField::read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    require(static_cast<bool>(is) && std::equal(magic, magic + 4, kMagic), ErrorCode::IoError, "not a grid file");
    require(get<std::uint32_t>(is) == kVersion, ErrorCode::IoError, "unsupported grid file version");
    const auto dims = get<std::uint32_t>(is);
    std::vector<Axis> axes;
    for (std::uint32_t a = 0; a < dims; ++a) {
        Axis ax;
        ax.name.resize(get<std::uint32_t>(is));
        is.read(ax.name.data(), static_cast<std::streamsize>(ax.name.size()));
        ax.kind = static_cast<AxisKind>(get<std::uint8_t>(is));
        ax.periodic = get<std::uint8_t>(is) != 0;
        ax.period = get<double>(is);
        ax.x.resize(get<std::uint64_t>(is));
        for (auto& c : ax.x) c = get<double>(is);
        axes.push_back(std::move(ax));
    }
    GridField g(std::move(axes));
    require(get<std::uint64_t>(is) == g.size(), ErrorCode::IoError, "value count does not match axes");
    for (auto& v : g.values_) v = get<double>(is);
    return g;
}

void GridField::save_csv(const std::string& path) const {
    std::ofstream os(path);
    require(static_cast<bool>(os), ErrorCode::IoError, "cannot open " + path);
    write_csv(os);
}

void GridField::save_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::IoError, "cannot open " + path);
    write_binary(os);
}

GridField GridField::load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorCode::IoError, "cannot open " + path);
    return read_binary(is);
}

namespace {

GridField combine(const GridField& a, const GridField& b, double sb) {
    require(a.same_grid(b), ErrorCode::DimensionMismatch, "fields live on different grids");
    GridField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sb * b[k];
    return out;
}

} // namespace

GridField operator-(const GridField& a, const GridField& b) { return combine(a, b, -1.0); }
GridField operator+(const GridField& a, const GridField& b) { return combine(a, b, 1.0); }

GridField operator*(double s, const GridField& a) {
    GridField out = a;
    for (auto& v : out.values()) v *= s;
    return out;
}

} // namespace khg
