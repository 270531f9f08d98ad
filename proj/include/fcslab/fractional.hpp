#pragma once

#include <vector>

#include "fcslab/grid.hpp"

namespace fcslab {

/// Spectral fractional Laplacian: multiplier |2 pi k / L|^(2s) on the
/// coefficients. Linear, annihilates constants, commutes with lattice
/// translations exactly.
Field fractional_laplacian(const Field& u);

/// L^-N sum_k |2 pi k / L|^(2s) |u_hat(k)|^2. This is the solver-side squared
/// norm; the Gagliardo double integral equals 2 C(N,s) times this value.
double quadratic_form(const Field& u);

/// Parameters of the extremizer profile
///   omega(x) = mu / lambda^((N-2s)/2) * (1 + |x-x0|^2/lambda^2)^(-(N-2s)/2).
struct BubbleParams {
    double mu = 1.0;
    double lambda = 1.0;
    std::vector<double> center;  // empty means the origin
};

/// Samples the profile on the grid (plain Euclidean distance, no
/// periodization; wrap-around is small when L >> lambda).
Field bubble(const GridSpec& grid, const BubbleParams& params);

struct BubbleResidualReport {
    double best_mu = 0.0;    // amplitude minimizing the normalized PDE residual
    double residual = 0.0;   // relative L2 residual at best_mu
    bool decay_warning = false;  // boundary magnitude > 1e-3 of the peak
};

/// With the unit-amplitude profile omega, minimizes over c > 0 the residual of
///   (-Delta)^s (c omega) = |c omega|^(2*_s - 2) (c omega)
/// normalized by the linear term. Both sides are homogeneous of degrees 1 and
/// 2*_s - 1 in c, so the 1-D minimization has the closed-form solution
/// c^(2*_s-2) = <A,B>/<B,B> with A = (-Delta)^s omega, B = |omega|^(2*_s-2) omega.
BubbleResidualReport bubble_pde_residual(const GridSpec& grid, const BubbleParams& params);

}  // namespace fcslab
