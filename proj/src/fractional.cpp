#include "fcslab/fractional.hpp"

#include <cmath>
#include <complex>

#include "fcslab/summation.hpp"
#include "fcslab/transforms.hpp"

namespace fcslab {
namespace {

constexpr double kPi = 3.14159265358979323846;

// |2 pi k / L|^(2s) at wrapped flat index.
double symbol(const GridSpec& grid, std::size_t flat) {
    const std::size_t m = static_cast<std::size_t>(grid.points_per_axis());
    double k2 = 0.0;
    for (int d = 0; d < grid.dimension(); ++d) {
        const int k = grid.signed_frequency(static_cast<int>(flat % m));
        k2 += static_cast<double>(k) * static_cast<double>(k);
        flat /= m;
    }
    if (k2 == 0.0) return 0.0;
    const double xi2 = k2 * (2.0 * kPi / grid.box_length()) * (2.0 * kPi / grid.box_length());
    return std::pow(xi2, grid.order());
}

}  // namespace

Field fractional_laplacian(const Field& u) {
    const GridSpec& grid = u.grid();
    const std::size_t n = grid.point_count();
    std::vector<std::complex<double>> buf(n), hat(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = u[i];
    detail::fft_forward_raw(grid, buf, hat);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) hat[i] *= symbol(grid, i) * inv_n;
    detail::fft_backward_raw(grid, hat, buf);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
    return Field::from_values(grid, std::move(out));
}

double quadratic_form(const Field& u) {
    const GridSpec& grid = u.grid();
    const std::size_t n = grid.point_count();
    std::vector<std::complex<double>> buf(n), hat(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = u[i];
    detail::fft_forward_raw(grid, buf, hat);
    // |u_hat|^2 = h^(2N) |DFT|^2; overall weight h^(2N)/L^N.
    const double weight = grid.cell_volume() * grid.cell_volume() /
                          std::pow(grid.box_length(), grid.dimension());
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        acc.add(symbol(grid, i) * std::norm(hat[i]));
    }
    return weight * acc.value();
}

Field bubble(const GridSpec& grid, const BubbleParams& params) {
    if (params.mu == 0.0 || !std::isfinite(params.mu)) {
        throw DomainError("bubble: mu must be nonzero");
    }
    if (!(params.lambda > 0.0) || !std::isfinite(params.lambda)) {
        throw DomainError("bubble: lambda must be positive");
    }
    std::vector<double> center = params.center;
    if (center.empty()) center.assign(grid.dimension(), 0.0);
    if (static_cast<int>(center.size()) != grid.dimension()) {
        throw DomainError("bubble: center dimension mismatch");
    }
    const double half = 0.5 * grid.box_length();
    for (double c : center) {
        if (c < -half || c >= half) {
            throw DomainError("bubble: center outside the box");
        }
    }
    const double exponent = 0.5 * (grid.dimension() - 2.0 * grid.order());
    const double amplitude = params.mu / std::pow(params.lambda, exponent);
    const double inv_l2 = 1.0 / (params.lambda * params.lambda);
    return Field::sample(grid, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double dx = x[d] - center[d];
            r2 += dx * dx;
        }
        return amplitude * std::pow(1.0 + r2 * inv_l2, -exponent);
    });
}

BubbleResidualReport bubble_pde_residual(const GridSpec& grid, const BubbleParams& params) {
    BubbleParams unit = params;
    unit.mu = 1.0;
    const Field omega = bubble(grid, unit);

    BubbleResidualReport report;

    // Boundary decay: scan the lattice faces at index 0 (the -L/2 seam, the
    // farthest points from a centered profile under the periodic metric).
    const double peak = linf_norm(omega);
    double boundary = 0.0;
    const int n = grid.dimension();
    std::vector<int> idx(n);
    for (std::size_t flat = 0; flat < grid.point_count(); ++flat) {
        grid.unravel(flat, idx);
        for (int d = 0; d < n; ++d) {
            if (idx[d] == 0) {
                boundary = std::max(boundary, std::abs(omega[flat]));
                break;
            }
        }
    }
    report.decay_warning = boundary > 1e-3 * peak;

    const double p = grid.critical_exponent();
    const Field lin = fractional_laplacian(omega);
    std::vector<double> nl(grid.point_count());
    for (std::size_t i = 0; i < grid.point_count(); ++i) {
        nl[i] = std::pow(std::abs(omega[i]), p - 2.0) * omega[i];
    }
    const Field nonlin = Field::from_values(grid, std::move(nl));

    const double a = inner(lin, lin);
    const double b = inner(lin, nonlin);
    const double g = inner(nonlin, nonlin);
    if (!(a > 0.0)) {
        throw DomainError("bubble_pde_residual: degenerate linear term");
    }
    if (!(b > 0.0)) {
        throw DomainError("bubble_pde_residual: profile does not align with the nonlinearity");
    }
    // Normalized residual ||A - c^(p-2) B|| / ||A|| minimized at c^(p-2) = b/g.
    const double t = b / g;
    report.best_mu = std::pow(t, 1.0 / (p - 2.0));
    const double rel2 = 1.0 - (b * b) / (a * g);
    report.residual = std::sqrt(std::max(0.0, rel2));
    return report;
}

}  // namespace fcslab
