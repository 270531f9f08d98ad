#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcslab/grid.hpp"

namespace fcslab {

/// Handling of the orthogonal factor acting on the trailing N-4j coordinates.
///  - trivial:            no action (the factor is the trivial group).
///  - radial_constraint:  lattice-exact signed-permutation averaging plus a
///                        radial-profile projection in the trailing block.
///  - full_average:       adds averaging over seeded random rotations
///                        (interpolated; approximation documented).
enum class LambdaMode { full_average, radial_constraint, trivial };

/// Which finite subgroup discrete Haar averages and defect checks run over.
///  - lattice_exact: circle angles restricted to multiples of pi/2; every
///                   element is an exact lattice permutation. Used for all
///                   hard (1e-10-level) assertions and by the solver.
///  - sampled:       all K circle angles (interpolated when not multiples of
///                   pi/2) and, in full_average mode, the random rotations.
enum class HaarSampling { sampled, lattice_exact };

/// Orthogonal map on the trailing coordinates of a group element.
struct LambdaRotation {
    enum class Kind { identity, signed_permutation, dense };
    Kind kind = Kind::identity;
    // signed_permutation: out[d] = sign[d] * in[perm[d]].
    std::vector<int> perm;
    std::vector<int> sign;
    // dense: row-major d_y x d_y orthogonal matrix.
    std::vector<double> matrix;
};

/// One element of G_j: per-block circle angles, per-block quaternionic flips,
/// and the trailing-factor rotation. The block map is R(theta) composed after
/// the flip, acting on R^4 = C^2 via
///   e^{i theta}(z1, z2) = (e^{i theta} z1, e^{i theta} z2),
///   rho(z1, z2) = (-conj z2, conj z1).
struct GroupElement {
    std::vector<double> thetas;
    std::vector<std::uint8_t> rho_flags;
    LambdaRotation lambda_rotation;
};

/// Descriptor of the group G_j acting on R^N = (R^4)^j x R^(N-4j) together
/// with the character sigma_j(g) = (-1)^(number of flipped blocks).
class EquivariantGroup {
public:
    EquivariantGroup(int j, int ambient_dimension, int theta_samples = 8,
                     LambdaMode lambda_mode = LambdaMode::radial_constraint);

    int j() const { return j_; }
    int ambient_dimension() const { return ambient_dimension_; }
    int theta_samples() const { return theta_samples_; }
    int trailing_dimension() const { return ambient_dimension_ - 4 * j_; }
    LambdaMode lambda_mode() const { return lambda_mode_; }
    /// The flip generator is always present; without it sigma could not be
    /// surjective and no sign change would be forced.
    bool include_rho() const { return true; }

    GroupElement identity() const;
    GroupElement block_rotation(int block, double theta) const;
    GroupElement block_flip(int block) const;
    GroupElement trailing_axis_flip(int axis) const;
    GroupElement trailing_transposition(int axis_a, int axis_b) const;

    /// Deterministic finite element list used for defect checks and the
    /// assumption checks; closed under the checks' needs, not the full group.
    std::vector<GroupElement> sampled_elements(HaarSampling sampling) const;

private:
    int j_;
    int ambient_dimension_;
    int theta_samples_;
    LambdaMode lambda_mode_;
};

// ---- pointwise actions -----------------------------------------------------

/// rho on one R^4 block: (v1,v2,v3,v4) -> (-v3, v4, v1, -v2). rho^2 = -Id.
std::array<double, 4> rho_real_action(const std::array<double, 4>& v);

/// Simultaneous rotation by theta in the (1,2) and (3,4) planes of a block.
std::array<double, 4> theta_real_action(double theta, const std::array<double, 4>& v);

/// Character sigma(g) = (-1)^(number of rho flags set); multiplicative.
int sigma(const GroupElement& g);

/// Image g x of a point under the induced orthogonal map on R^N.
void map_point(const GroupElement& g, std::span<const double> x, std::span<double> out);

/// Induced N x N matrix (columns are images of basis vectors).
std::vector<double> element_matrix(const GroupElement& g, int ambient_dimension);

// ---- actions on fields -----------------------------------------------------

/// The sigma-twisted pullback (g.u)(x) = sigma(g) u(g x). Fixed points of this
/// action are exactly the sigma-equivariant fields. Lattice-exact elements act
/// by index permutation; otherwise periodic multilinear interpolation is used.
Field apply(const GroupElement& g, const Field& u);

/// Discrete Haar average over the finite sampled subgroup; sigma-equivariant
/// under that subgroup, linear, idempotent (exactly so for lattice_exact).
Field symmetrize(const Field& u, const EquivariantGroup& group,
                 HaarSampling sampling = HaarSampling::sampled);

/// Average over full lattice shells |x| = const; used as the non-radiality
/// witness (a nontrivial sigma-equivariant field has zero radial part).
Field radialize(const Field& u);

/// Precomputed index tables for the lattice-exact average of one group on one
/// grid; what descent_solve applies every iteration.
class LatticeSymmetrizer {
public:
    LatticeSymmetrizer(const EquivariantGroup& group, const GridSpec& grid);
    Field project(const Field& u) const;
    const EquivariantGroup& group() const { return group_; }

private:
    EquivariantGroup group_;
    GridSpec grid_;
    // One gather table per block for R(pi/2) and for rho, plus trailing-axis
    // flip tables; trailing radial projection uses shell buckets.
    std::vector<std::vector<std::uint32_t>> block_quarter_maps_;
    std::vector<std::vector<std::uint32_t>> block_rho_maps_;
    std::vector<std::vector<std::uint32_t>> flip_maps_;
    std::vector<std::uint32_t> shell_of_tail_;  // per trailing sub-index
    std::size_t shell_count_ = 0;

    friend Field symmetrize(const Field&, const EquivariantGroup&, HaarSampling);
};

struct EquivarianceCheck {
    bool equivariant = false;
    double defect = 0.0;
};

/// defect = max over the sampled elements of ||g.u - u|| / ||u|| in the
/// discrete L2 norm (equivalently ||u o g - sigma(g) u|| / ||u||).
EquivarianceCheck is_equivariant(const Field& u, const EquivariantGroup& group,
                                 double tol,
                                 HaarSampling sampling = HaarSampling::lattice_exact);

// ---- structural checks ------------------------------------------------------

/// Element with an explicit character label, for consistency checking.
struct LabeledElement {
    GroupElement element;
    int sigma_label;
};

/// Verifies the labels form a single-valued multiplicative character on the
/// given elements (matrix-matching composition check). Throws
/// AssumptionViolated on any inconsistency.
void check_character_table(int ambient_dimension, std::span<const LabeledElement> table);

struct AssumptionReport {
    bool passed = false;
    std::vector<double> witness;  // point with sigma-trivial stabilizer
    std::size_t points_checked = 0;
    std::string note;
};

/// Checks, on a deterministic sample of lattice points, that every point has
/// either a positive-dimensional orbit or is fixed by all sampled elements,
/// that sigma is a consistent character, and that a point with sigma-trivial
/// stabilizer exists. Throws AssumptionViolated with the offending point.
AssumptionReport assumption_check(const EquivariantGroup& group, const GridSpec& grid);

/// True iff ||u - v|| > 1e-8 * max(||u||, ||v||); u must carry the smaller
/// block count. Distinct characters force distinct nontrivial fields, so a
/// false return signals a failure. Throws ZeroField / DomainError on the
/// precondition violations.
bool distinctness_check(const Field& u, const EquivariantGroup& group_u,
                        const Field& v, const EquivariantGroup& group_v);

}  // namespace fcslab
