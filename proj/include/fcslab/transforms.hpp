#pragma once

#include <complex>
#include <span>

#include "fcslab/grid.hpp"

namespace fcslab {

/// Forward spectral transform under the SpectralField convention.
SpectralField forward_transform(const Field& u);

/// Exact inverse of forward_transform (to roundoff). Throws NonHermitianInput
/// if the imaginary part of the reconstruction exceeds 1e-10 of the field norm.
Field inverse_transform(const SpectralField& v);

/// h^N sum_x |u(x)|^p for p >= 1.
double integrate_power(const Field& u, double p);

namespace detail {

// Raw index-space DFTs (no h^N scaling, no -L/2 phase, no 1/M^N), used by the
// operator kernels where phases cancel. forward: sum_x u_x e^{-2 pi i k.x/M};
// backward: unnormalized adjoint.
void fft_forward_raw(const GridSpec& grid, std::span<const std::complex<double>> in,
                     std::span<std::complex<double>> out);
void fft_backward_raw(const GridSpec& grid, std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out);

}  // namespace detail

}  // namespace fcslab
