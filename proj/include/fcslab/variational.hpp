#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "fcslab/equivariance.hpp"
#include "fcslab/grid.hpp"

namespace fcslab {

/// E(u) = 1/2 Q(u) - (1/2*_s) int |u|^(2*_s), with Q the spectral quadratic
/// form. On the Nehari manifold E(u) = (s/N) Q(u).
double energy(const Field& u);

/// N(u) = Q(u) - int |u|^(2*_s); vanishes exactly on the Nehari manifold and
/// equals the pairing <grad E(u), u>.
double nehari_value(const Field& u);

/// t* = (Q(u) / int |u|^(2*_s))^(1/(2*_s - 2)), the unique positive ray scale
/// with N(t* u) = 0. Throws ZeroField when u vanishes.
double nehari_scale(const Field& u);

/// t* u. Idempotent; positive-degree-zero homogeneous in u.
Field nehari_project(const Field& u);

/// grad E(u) = (-Delta)^s u - |u|^(2*_s - 2) u in the discrete L2 pairing
/// h^N sum g phi.
Field energy_gradient(const Field& u);

/// For u on the Nehari manifold, E(t u) = Q(u) (t^2/2 - t^(2*_s)/2*_s); the
/// ray maximum sits at t = 1. Throws NotOnManifold when |N(u)| exceeds
/// 1e-6 Q(u).
double energy_along_ray(const Field& u, double t);

enum class InitKind { random_bump, bubble_seeded, user_field };

struct SolverConfig {
    int max_iterations = 5000;
    double gradient_tolerance = 1e-6;  // relative residual target
    double step_size = 1.0;            // initial trial step
    double backtracking_factor = 0.5;
    double armijo_slope = 1e-4;
    std::uint64_t seed = 1;
    std::optional<EquivariantGroup> group;
    InitKind init = InitKind::random_bump;
    std::optional<Field> initial_field;  // required for InitKind::user_field
};

struct SolverReport {
    double energy = 0.0;
    double nehari_value = 0.0;
    // ||grad E|| / ||u|| in discrete L2, with the gradient's lattice mean
    // deflated (the homogeneous-space gradient the solver drives to zero).
    double gradient_residual = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    int iterations = 0;
    bool converged = false;
    // min < -delta and max > +delta with delta = 1e-6 max|u|.
    bool sign_changing = false;
    // Lattice-exact equivariance defect of the final iterate (0 without group).
    double equivariance_defect = 0.0;
};

struct IterationRecord {
    int iteration;
    double energy;
    double nehari;
    double gradient_residual;
    double min_value;
    double max_value;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Nehari-constrained projected gradient descent
///   u_{k+1} = nehari_project(symmetrize(u_k - alpha_k grad E(u_k)))
/// with Armijo backtracking on E, run in the mean-zero subspace (the lattice
/// model of the homogeneous space: constants have zero seminorm, and with
/// them admitted the constrained energy infimum is 0 and unattained). Seeds
/// and gradients are mean-deflated; sigma-equivariant fields are mean-free
/// automatically. The symmetrization is the lattice-exact sigma-equivariant
/// average when a group is configured, identity otherwise. Deterministic for
/// a fixed seed. Throws Diverged / DegenerateIterate.
std::pair<Field, SolverReport> descent_solve(const GridSpec& grid,
                                             const SolverConfig& config,
                                             const IterationCallback& callback = {});

}  // namespace fcslab
