#include "fcslab/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fcslab/summation.hpp"

namespace fcslab {

GridSpec::GridSpec(int dimension, double order, double box_length, int points_per_axis)
    : dimension_(dimension),
      order_(order),
      box_length_(box_length),
      points_per_axis_(points_per_axis) {
    if (dimension < 1) {
        throw DomainError("GridSpec: dimension must be >= 1");
    }
    if (!(order > 0.0) || !(order < 1.0)) {
        throw DomainError("GridSpec: fractional order s must lie in (0,1)");
    }
    if (!(box_length > 0.0) || !std::isfinite(box_length)) {
        throw DomainError("GridSpec: box length must be positive");
    }
    if (points_per_axis < 4 || points_per_axis % 2 != 0) {
        throw DomainError("GridSpec: points per axis must be an even integer >= 4");
    }
    if (!(static_cast<double>(dimension) > 2.0 * order)) {
        throw DomainError("GridSpec: need N > 2s for a finite critical exponent");
    }
    // M^N with overflow guard.
    std::size_t count = 1;
    const std::size_t m = static_cast<std::size_t>(points_per_axis);
    for (int d = 0; d < dimension; ++d) {
        if (count > std::numeric_limits<std::size_t>::max() / m) {
            throw DomainError("GridSpec: M^N exceeds addressable memory");
        }
        count *= m;
    }
    // Keep dense complex buffers (~16 bytes/point) comfortably allocatable.
    if (count > (std::size_t{1} << 28)) {
        throw DomainError("GridSpec: M^N = " + std::to_string(count) +
                          " points is beyond desk scale");
    }
    point_count_ = count;
}

double GridSpec::cell_volume() const {
    return std::pow(spacing(), dimension_);
}

double GridSpec::critical_exponent() const {
    return 2.0 * dimension_ / (dimension_ - 2.0 * order_);
}

std::size_t GridSpec::ravel(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < dimension_; ++d) {
        flat = flat * static_cast<std::size_t>(points_per_axis_) +
               static_cast<std::size_t>(idx[d]);
    }
    return flat;
}

void GridSpec::unravel(std::size_t flat, std::span<int> idx) const {
    for (int d = dimension_ - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % static_cast<std::size_t>(points_per_axis_));
        flat /= static_cast<std::size_t>(points_per_axis_);
    }
}

namespace {

void check_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError("Field: values must be finite");
        }
    }
}

}  // namespace

Field::Field(const GridSpec& grid)
    : grid_(grid), values_(grid.point_count(), 0.0) {}

Field::Field(const GridSpec& grid, std::vector<double>&& values, bool checked)
    : grid_(grid), values_(std::move(values)) {
    if (!checked) {
        check_finite(values_);
    }
}

Field Field::from_values(const GridSpec& grid, std::vector<double> values) {
    if (values.size() != grid.point_count()) {
        throw DomainError("Field: value array size does not match grid");
    }
    check_finite(values);
    return Field(grid, std::move(values), true);
}

Field Field::sample(const GridSpec& grid,
                    const std::function<double(std::span<const double>)>& f) {
    const int n = grid.dimension();
    std::vector<int> idx(n, 0);
    std::vector<double> coords(n);
    std::vector<double> values(grid.point_count());
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        for (int d = 0; d < n; ++d) {
            coords[d] = grid.coordinate(idx[d]);
        }
        values[flat] = f(coords);
        // Row-major increment, last axis fastest.
        for (int d = n - 1; d >= 0; --d) {
            if (++idx[d] < grid.points_per_axis()) break;
            idx[d] = 0;
        }
    }
    check_finite(values);
    return Field(grid, std::move(values), true);
}

SpectralField::SpectralField(const GridSpec& grid,
                             std::vector<std::complex<double>> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.point_count()) {
        throw DomainError("SpectralField: coefficient array size does not match grid");
    }
}

std::complex<double> SpectralField::coefficient(std::span<const int> k) const {
    const int m = grid_.points_per_axis();
    std::vector<int> idx(grid_.dimension());
    for (int d = 0; d < grid_.dimension(); ++d) {
        if (k[d] < -m / 2 || k[d] >= m / 2) {
            throw DomainError("SpectralField: frequency outside {-M/2,...,M/2-1}");
        }
        idx[d] = k[d] >= 0 ? k[d] : k[d] + m;
    }
    return coeffs_[grid_.ravel(idx)];
}

double SpectralField::hermitian_defect() const {
    const int n = grid_.dimension();
    const int m = grid_.points_per_axis();
    std::vector<int> idx(n), neg(n);
    double worst = 0.0;
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return 0.0;
    for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
        grid_.unravel(flat, idx);
        for (int d = 0; d < n; ++d) {
            neg[d] = idx[d] == 0 ? 0 : m - idx[d];
        }
        const std::complex<double> mirrored = coeffs_[grid_.ravel(neg)];
        worst = std::max(worst, std::abs(coeffs_[flat] - std::conj(mirrored)));
    }
    return worst / scale;
}

Field scaled(const Field& u, double c) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * u[i];
    return Field::from_values(u.grid(), std::move(out));
}

Field axpy(double a, const Field& x, const Field& y) {
    if (!(x.grid() == y.grid())) {
        throw DomainError("axpy: grids differ");
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + y[i];
    return Field::from_values(x.grid(), std::move(out));
}

double l2_norm(const Field& u) {
    CompensatedSum acc;
    for (double v : u.values()) acc.add(v * v);
    return std::sqrt(u.grid().cell_volume() * acc.value());
}

double linf_norm(const Field& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

double min_value(const Field& u) {
    double m = u.size() ? u[0] : 0.0;
    for (double v : u.values()) m = std::min(m, v);
    return m;
}

double max_value(const Field& u) {
    double m = u.size() ? u[0] : 0.0;
    for (double v : u.values()) m = std::max(m, v);
    return m;
}

double inner(const Field& u, const Field& v) {
    if (!(u.grid() == v.grid())) {
        throw DomainError("inner: grids differ");
    }
    CompensatedSum acc;
    for (std::size_t i = 0; i < u.size(); ++i) acc.add(u[i] * v[i]);
    return u.grid().cell_volume() * acc.value();
}

}  // namespace fcslab
