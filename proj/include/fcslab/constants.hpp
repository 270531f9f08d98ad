#pragma once

namespace fcslab {

/// Critical Sobolev exponent 2N/(N-2s). Throws DomainError unless N > 2s.
double critical_exponent(int dimension, double order);

/// Normalizing constant C(N,s) = int_{R^N} (1 - cos eta_1) / |eta|^(N+2s) deta
/// of the singular-integral fractional Laplacian. Quadrature-based, relative
/// accuracy better than 1e-8 on (0,1).
double dirichlet_constant(int dimension, double order);

/// Sharp Sobolev embedding constant
///   S(N,s) = 2^(-2s) pi^(-s) Gamma((N-2s)/2)/Gamma((N+2s)/2)
///            * (Gamma(N)/Gamma(N/2))^(2s/N),
/// evaluated through log-Gamma. Throws DomainError unless N > 2s.
double sobolev_constant(int dimension, double order);

}  // namespace fcslab
