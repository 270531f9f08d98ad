#include "fcslab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>

#include "fcslab/summation.hpp"
#include "fcslab/transforms.hpp"

namespace fcslab {
namespace {

// Squared minimal-image lattice distance (in units of h^2) for a wrapped
// offset index along one axis.
long long axis_offset_sq(int o, int m) {
    const long long d = std::min(o, m - o);
    return d * d;
}

// |u|^(2*_s) cell masses (h^N per sample folded in).
std::vector<double> critical_mass(const Field& u) {
    const double pstar = u.grid().critical_exponent();
    const double hn = u.grid().cell_volume();
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        w[i] = hn * std::pow(std::abs(u[i]), pstar);
    }
    return w;
}

// Circular correlation of the mass field with the lattice ball indicator of
// radius r: out[z] = sum_d mass[z + d] * [dist(d) <= r].
std::vector<double> ball_correlation(const GridSpec& grid,
                                     std::span<const std::complex<double>> mass_hat,
                                     double r) {
    const int n = grid.dimension();
    const int m = grid.points_per_axis();
    const std::size_t count = grid.point_count();
    const double h2 = grid.spacing() * grid.spacing();
    // Indicator by exact cell-center membership, no antialiasing.
    const double r2_cells = (r * r) / h2 * (1.0 + 1e-14);
    std::vector<std::complex<double>> ind(count);
    std::vector<int> idx(n);
    for (std::size_t flat = 0; flat < count; ++flat) {
        grid.unravel(flat, idx);
        long long d2 = 0;
        for (int d = 0; d < n; ++d) d2 += axis_offset_sq(idx[d], m);
        ind[flat] = static_cast<double>(d2) <= r2_cells ? 1.0 : 0.0;
    }
    std::vector<std::complex<double>> ind_hat(count), prod(count), corr(count);
    detail::fft_forward_raw(grid, ind, ind_hat);
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
        prod[i] = mass_hat[i] * std::conj(ind_hat[i]) * inv;
    }
    detail::fft_backward_raw(grid, prod, corr);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = corr[i].real();
    return out;
}

std::vector<std::complex<double>> mass_transform(const GridSpec& grid,
                                                 std::span<const double> mass) {
    std::vector<std::complex<double>> buf(mass.size()), hat(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) buf[i] = mass[i];
    detail::fft_forward_raw(grid, buf, hat);
    return hat;
}

// Lowest-index argmax with a relative tie band.
std::size_t argmax_low_index(std::span<const double> values) {
    double best = values[0];
    for (double v : values) best = std::max(best, v);
    if (best <= 0.0) return 0;
    const double band = best * (1.0 - 1e-12);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= band) return i;
    }
    return 0;
}

std::vector<double> coords_of(const GridSpec& grid, std::size_t flat) {
    const int n = grid.dimension();
    std::vector<int> idx(n);
    grid.unravel(flat, idx);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = grid.coordinate(idx[d]);
    return x;
}

void check_radius(const GridSpec& grid, double r) {
    if (!(r > 0.0)) throw DomainError("ball radius must be positive");
    if (r > 0.5 * grid.box_length() * (1.0 + 1e-12)) {
        throw RadiusTooLarge("ball radius exceeds half the box length");
    }
}

}  // namespace

ConcentrationValue levy_concentration(const Field& u, double r) {
    check_radius(u.grid(), r);
    const auto mass = critical_mass(u);
    const auto hat = mass_transform(u.grid(), mass);
    const auto corr = ball_correlation(u.grid(), hat, r);
    ConcentrationValue out;
    out.center_index = argmax_low_index(corr);
    out.value = std::max(0.0, corr[out.center_index]);
    out.center = coords_of(u.grid(), out.center_index);
    return out;
}

Field rescale(const Field& u, double lambda, std::span<const double> xi) {
    const GridSpec& grid = u.grid();
    const int n = grid.dimension();
    if (!(lambda > 0.0)) throw DomainError("rescale: lambda must be positive");
    if (static_cast<int>(xi.size()) != n && !xi.empty()) {
        throw DomainError("rescale: shift dimension mismatch");
    }
    const GridSpec target(n, grid.order(), grid.box_length() / lambda,
                          grid.points_per_axis());
    const double amplitude = std::pow(lambda, 0.5 * (n - 2.0 * grid.order()));
    const double h = grid.spacing();
    const int m = grid.points_per_axis();

    // With L -> L/lambda and M fixed, lambda x'_i + xi = x_i + xi: the map is
    // an exact relabeling whenever xi is a lattice vector.
    bool lattice_shift = true;
    std::vector<long long> shift(static_cast<std::size_t>(n), 0);
    for (int d = 0; d < n && !xi.empty(); ++d) {
        const double steps = xi[static_cast<std::size_t>(d)] / h;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-9) {
            lattice_shift = false;
            break;
        }
        shift[static_cast<std::size_t>(d)] = static_cast<long long>(rounded);
    }

    std::vector<double> out(u.size());
    std::vector<int> idx(n), src(n);
    if (lattice_shift) {
        for (std::size_t flat = 0; flat < u.size(); ++flat) {
            grid.unravel(flat, idx);
            for (int d = 0; d < n; ++d) {
                long long s = idx[d] + shift[static_cast<std::size_t>(d)];
                s %= m;
                if (s < 0) s += m;
                src[d] = static_cast<int>(s);
            }
            out[flat] = amplitude * u[grid.ravel(src)];
        }
        return Field::from_values(target, std::move(out));
    }

    // Interpolated path: sample u at x_i + xi with periodic multilinear weights.
    std::vector<double> point(static_cast<std::size_t>(n));
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        grid.unravel(flat, idx);
        double value = 0.0;
        // Separable interpolation: per-axis base/frac.
        std::vector<int> base(static_cast<std::size_t>(n));
        std::vector<double> frac(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) {
            double t = (grid.coordinate(idx[d]) + xi[static_cast<std::size_t>(d)] +
                        0.5 * grid.box_length()) /
                       h;
            t -= std::floor(t / m) * m;
            base[static_cast<std::size_t>(d)] = static_cast<int>(std::floor(t));
            frac[static_cast<std::size_t>(d)] = t - base[static_cast<std::size_t>(d)];
        }
        const std::size_t corners = std::size_t{1} << n;
        for (std::size_t cmask = 0; cmask < corners; ++cmask) {
            double w = 1.0;
            for (int d = 0; d < n; ++d) {
                const std::size_t dd = static_cast<std::size_t>(d);
                if (cmask & (std::size_t{1} << d)) {
                    w *= frac[dd];
                    src[d] = (base[dd] + 1) % m;
                } else {
                    w *= 1.0 - frac[dd];
                    src[d] = base[dd] % m;
                }
                if (src[d] < 0) src[d] += m;
            }
            if (w != 0.0) value += w * u[grid.ravel(src)];
        }
        out[flat] = amplitude * value;
    }
    return Field::from_values(target, std::move(out));
}

CoveringBound covering_bound_check(const Field& u, double r, double R) {
    if (!(r > 0.0) || !(R > r)) {
        throw DomainError("covering_bound_check: need 0 < r < R");
    }
    check_radius(u.grid(), R);
    const int n = u.grid().dimension();
    CoveringBound out;
    out.lhs = levy_concentration(u, R).value;
    const double count = std::floor((n + 1) * R / r);
    out.rhs = count * levy_concentration(u, r).value;
    out.holds = out.lhs <= out.rhs + 1e-12;
    return out;
}

ConcentrationScale concentration_scale(const Field& u, double delta) {
    const GridSpec& grid = u.grid();
    const double total = integrate_power(u, grid.critical_exponent());
    if (!(delta > 0.0) || !(delta < total)) {
        throw DeltaOutOfRange("concentration_scale: need 0 < delta < total mass");
    }
    const int n = grid.dimension();
    const int m = grid.points_per_axis();

    // Distinct minimal-image lattice radii up to L/2 (squared, integer).
    std::set<long long> keys;
    std::vector<int> idx(n);
    for (std::size_t flat = 0; flat < grid.point_count(); ++flat) {
        grid.unravel(flat, idx);
        long long d2 = 0;
        for (int d = 0; d < n; ++d) d2 += axis_offset_sq(idx[d], m);
        keys.insert(d2);
    }
    const double h = grid.spacing();
    std::vector<double> radii;
    radii.reserve(keys.size());
    const double rmax = 0.5 * grid.box_length();
    for (long long k : keys) {
        if (k == 0) continue;
        const double r = h * std::sqrt(static_cast<double>(k));
        if (r <= rmax * (1.0 + 1e-12)) radii.push_back(std::min(r, rmax));
    }
    if (radii.empty()) throw DomainError("concentration_scale: degenerate grid");

    const auto mass = critical_mass(u);
    const auto hat = mass_transform(grid, mass);
    auto q_at = [&](double r) { return ball_correlation(grid, hat, r); };

    // Monotone bisection over the sorted distinct radii for the smallest ball
    // reaching delta.
    std::size_t lo = 0, hi = radii.size() - 1;
    {
        const auto corr = q_at(radii[hi]);
        const std::size_t ci = argmax_low_index(corr);
        if (corr[ci] < delta) {
            // Total mass in the largest admissible ball falls short of delta
            // (mass sits near the corners); report the largest radius.
            lo = hi;
        }
    }
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        const auto corr = q_at(radii[mid]);
        const std::size_t ci = argmax_low_index(corr);
        if (corr[ci] >= delta) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    ConcentrationScale out;
    out.radius = radii[lo];
    const auto corr = q_at(out.radius);
    out.center_index = argmax_low_index(corr);
    out.achieved = corr[out.center_index];
    out.center = coords_of(grid, out.center_index);
    out.matched_delta = std::abs(out.achieved - delta) <= 1e-8 * delta;

    // Side condition dist(center, supp u) <= radius, with the support read at
    // a 1e-14 relative floor.
    const double floor_mag = 1e-14 * linf_norm(u);
    std::vector<int> cidx(n);
    grid.unravel(out.center_index, cidx);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        if (std::abs(u[flat]) <= floor_mag) continue;
        grid.unravel(flat, idx);
        long long d2 = 0;
        for (int d = 0; d < n; ++d) {
            const int o = std::abs(idx[d] - cidx[d]);
            d2 += axis_offset_sq(o, m);
        }
        best = std::min(best, h * std::sqrt(static_cast<double>(d2)));
        if (best == 0.0) break;
    }
    out.side_condition = best <= out.radius;
    return out;
}

ConcentrationProfile concentration_profile(const Field& u, std::span<const double> radii) {
    ConcentrationProfile profile;
    const auto mass = critical_mass(u);
    const auto hat = mass_transform(u.grid(), mass);
    for (double r : radii) {
        check_radius(u.grid(), r);
        const auto corr = ball_correlation(u.grid(), hat, r);
        const std::size_t ci = argmax_low_index(corr);
        profile.radii.push_back(r);
        profile.values.push_back(std::max(0.0, corr[ci]));
        profile.centers.push_back(coords_of(u.grid(), ci));
    }
    return profile;
}

}  // namespace fcslab
