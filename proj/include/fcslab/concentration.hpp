#pragma once

#include <vector>

#include "fcslab/grid.hpp"

namespace fcslab {

struct ConcentrationValue {
    double value = 0.0;
    std::vector<double> center;      // achieving lattice point (coordinates)
    std::size_t center_index = 0;    // flat lattice index of the center
};

/// Levy concentration function Q_u(r) = max over lattice centers z of
/// h^N sum_{|x-z| <= r, periodic} |u(x)|^(2*_s), evaluated through one
/// spectral (circular) convolution with the ball indicator. Ties between
/// centers are broken by the lowest row-major index (values within a 1e-12
/// relative band count as tied). Throws RadiusTooLarge for r > L/2.
ConcentrationValue levy_concentration(const Field& u, double r);

/// u_{lambda,xi}(x) = lambda^((N-2s)/2) u(lambda x + xi) on the rescaled box
/// of length L/lambda (M unchanged). When xi is a lattice vector the map is an
/// exact sample relabeling and preserves the quadratic form exactly and the
/// critical-power mass exactly; otherwise periodic multilinear interpolation
/// is used.
Field rescale(const Field& u, double lambda, std::span<const double> xi);

struct CoveringBound {
    double lhs = 0.0;   // Q_u(R)
    double rhs = 0.0;   // floor((N+1) R / r) * Q_u(r)
    bool holds = false;
};

/// Covering-argument comparison Q_u(R) <= floor((N+1) R/r) Q_u(r); a failed
/// check signals a bug, not data.
CoveringBound covering_bound_check(const Field& u, double r, double R);

struct ConcentrationScale {
    double radius = 0.0;
    std::vector<double> center;
    std::size_t center_index = 0;
    double achieved = 0.0;         // Q_u(radius)
    bool matched_delta = false;    // |achieved - delta| <= 1e-8 delta
    bool side_condition = false;   // dist(center, supp u) <= radius
};

/// Smallest lattice ball radius with Q_u(r) >= delta, located by bisection
/// over the sorted distinct lattice radii (the discrete Q is a step function
/// in r, so delta is matched exactly only when it hits a step value; the
/// achieved mass is reported). Throws DeltaOutOfRange unless
/// 0 < delta < h^N sum |u|^(2*_s).
ConcentrationScale concentration_scale(const Field& u, double delta);

struct ConcentrationProfile {
    std::vector<double> radii;
    std::vector<double> values;
    std::vector<std::vector<double>> centers;
};

/// Q_u sampled at the given ascending radii.
ConcentrationProfile concentration_profile(const Field& u, std::span<const double> radii);

}  // namespace fcslab
