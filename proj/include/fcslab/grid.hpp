#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fcslab/errors.hpp"

namespace fcslab {

/// Uniform periodic lattice discretizing the box [-L/2, L/2)^N with M points
/// per axis, spacing h = L/M. Lattice points are x_i = -L/2 + h*i per axis;
/// flat storage is row-major with the last axis fastest.
class GridSpec {
public:
    GridSpec(int dimension, double order, double box_length, int points_per_axis);

    int dimension() const { return dimension_; }
    double order() const { return order_; }
    double box_length() const { return box_length_; }
    int points_per_axis() const { return points_per_axis_; }

    double spacing() const { return box_length_ / points_per_axis_; }
    double cell_volume() const;
    std::size_t point_count() const { return point_count_; }

    /// Critical Sobolev exponent 2N/(N-2s); finite and > 2 by construction.
    double critical_exponent() const;

    /// Physical coordinate of lattice index i on any axis: -L/2 + h*i.
    double coordinate(int index) const {
        return spacing() * (index - points_per_axis_ / 2);
    }

    /// Signed integer frequency for a wrapped index in [0, M):
    /// 0..M/2-1 map to themselves, M/2..M-1 map to idx - M.
    int signed_frequency(int index) const {
        return index < points_per_axis_ / 2 ? index : index - points_per_axis_;
    }

    std::size_t ravel(std::span<const int> idx) const;
    void unravel(std::size_t flat, std::span<int> idx) const;

    bool operator==(const GridSpec& other) const = default;

private:
    int dimension_;
    double order_;
    double box_length_;
    int points_per_axis_;
    std::size_t point_count_;
};

/// Real scalar function sampled at the lattice points of a GridSpec.
/// Values are immutable after construction (all operations return new
/// fields); every constructor path checks finiteness.
class Field {
public:
    /// Zero field.
    explicit Field(const GridSpec& grid);

    /// Takes ownership of `values`; throws DomainError on size mismatch or
    /// non-finite entries.
    static Field from_values(const GridSpec& grid, std::vector<double> values);

    /// Samples `f` at every lattice point; `f` receives the N coordinates.
    static Field sample(const GridSpec& grid,
                        const std::function<double(std::span<const double>)>& f);

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    Field(const GridSpec& grid, std::vector<double>&& values, bool checked);

    GridSpec grid_;
    std::vector<double> values_;
};

/// Fourier coefficients of a Field.
///
/// Convention: u_hat(k) = h^N sum_x u(x) exp(-i 2 pi k.x / L) for integer
/// frequency vectors k in {-M/2, ..., M/2-1}^N, so that discrete Plancherel
/// reads h^N sum_x |u|^2 = L^-N sum_k |u_hat|^2. Storage uses wrapped
/// (index mod M) order, row-major, last axis fastest.
class SpectralField {
public:
    SpectralField(const GridSpec& grid, std::vector<std::complex<double>> coeffs);

    const GridSpec& grid() const { return grid_; }
    std::span<const std::complex<double>> coefficients() const { return coeffs_; }

    /// Access by signed frequency vector, each component in [-M/2, M/2).
    std::complex<double> coefficient(std::span<const int> k) const;

    /// Max relative deviation from u_hat(-k) = conj(u_hat(k)).
    double hermitian_defect() const;

private:
    GridSpec grid_;
    std::vector<std::complex<double>> coeffs_;
};

// ---- small field algebra (value semantics) --------------------------------

Field scaled(const Field& u, double c);
/// a*x + y
Field axpy(double a, const Field& x, const Field& y);

/// Discrete L2 norm sqrt(h^N sum u^2).
double l2_norm(const Field& u);
double linf_norm(const Field& u);
double min_value(const Field& u);
double max_value(const Field& u);
/// Discrete L2 pairing h^N sum u*v.
double inner(const Field& u, const Field& v);

}  // namespace fcslab
