#include "fcslab/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fcslab/summation.hpp"

namespace fcslab {
namespace {

constexpr double kPi = 3.14159265358979323846;

// ---- small integer/index helpers -------------------------------------------

int wrap_index(int i, int m) {
    i %= m;
    return i < 0 ? i + m : i;
}

// Centered integer coordinate of a wrapped index: x = h * (i - M/2).
int centered(int i, int m) { return i - m / 2; }
int uncenter(int c, int m) { return wrap_index(c + m / 2, m); }

bool near_multiple_of_quarter_turn(double theta, int* quarters) {
    const double q = theta / (0.5 * kPi);
    const double rounded = std::round(q);
    if (std::abs(q - rounded) > 1e-12) return false;
    int r = static_cast<int>(rounded) % 4;
    if (r < 0) r += 4;
    *quarters = r;
    return true;
}

// 90-degree rotation applied q times to an integer pair (a, b).
void quarter_rotate(int q, int& a, int& b) {
    for (int t = 0; t < q; ++t) {
        const int na = -b, nb = a;
        a = na;
        b = nb;
    }
}

// rho on centered integer block coordinates.
void rho_int(int v[4]) {
    const int w0 = -v[2], w1 = v[3], w2 = v[0], w3 = -v[1];
    v[0] = w0;
    v[1] = w1;
    v[2] = w2;
    v[3] = w3;
}

// Gather over a contiguous dim range [d0, d0+w): out(pre, t, suf) =
// in(pre, table[t], suf). Table indexes the M^w sub-block.
void gather_dims(const GridSpec& grid, std::span<const double> in,
                 std::span<double> out, int d0, int w,
                 std::span<const std::uint32_t> table) {
    const int n = grid.dimension();
    const int m = grid.points_per_axis();
    std::size_t pre = 1, blk = 1, suf = 1;
    for (int d = 0; d < d0; ++d) pre *= static_cast<std::size_t>(m);
    for (int d = d0; d < d0 + w; ++d) blk *= static_cast<std::size_t>(m);
    for (int d = d0 + w; d < n; ++d) suf *= static_cast<std::size_t>(m);
    for (std::size_t p = 0; p < pre; ++p) {
        for (std::size_t t = 0; t < blk; ++t) {
            const double* src = in.data() + (p * blk + table[t]) * suf;
            double* dst = out.data() + (p * blk + t) * suf;
            std::copy(src, src + suf, dst);
        }
    }
}

// Sub-index table for "target block coords -> source block coords" given by
// q quarter turns composed after an optional rho, on one R^4 block.
std::vector<std::uint32_t> block_map_table(const GridSpec& grid, int q, bool rho) {
    const int m = grid.points_per_axis();
    const std::size_t blk = static_cast<std::size_t>(m) * m * m * m;
    std::vector<std::uint32_t> table(blk);
    for (std::size_t t = 0; t < blk; ++t) {
        int idx[4];
        std::size_t rest = t;
        for (int d = 3; d >= 0; --d) {
            idx[d] = static_cast<int>(rest % static_cast<std::size_t>(m));
            rest /= static_cast<std::size_t>(m);
        }
        int v[4];
        for (int d = 0; d < 4; ++d) v[d] = centered(idx[d], m);
        if (rho) rho_int(v);
        quarter_rotate(q, v[0], v[1]);
        quarter_rotate(q, v[2], v[3]);
        std::size_t flat = 0;
        for (int d = 0; d < 4; ++d) {
            flat = flat * static_cast<std::size_t>(m) +
                   static_cast<std::size_t>(uncenter(v[d], m));
        }
        table[t] = static_cast<std::uint32_t>(flat);
    }
    return table;
}

std::vector<std::uint32_t> axis_flip_table(const GridSpec& grid) {
    const int m = grid.points_per_axis();
    std::vector<std::uint32_t> table(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        table[static_cast<std::size_t>(i)] =
            static_cast<std::uint32_t>(wrap_index(m - i, m));
    }
    return table;
}

// Periodic multilinear interpolation: per-dimension stencil.
struct DimStencil {
    int base;
    double frac;
};

DimStencil dim_stencil(const GridSpec& grid, double coord) {
    const int m = grid.points_per_axis();
    const double l = grid.box_length();
    const double h = grid.spacing();
    double t = (coord + 0.5 * l) / h;  // lattice units from the box corner
    t -= std::floor(t / m) * m;        // wrap into [0, M)
    int base = static_cast<int>(std::floor(t));
    double frac = t - base;
    if (frac < 1e-12) frac = 0.0;
    if (frac > 1.0 - 1e-12) {
        base += 1;
        frac = 0.0;
    }
    return {wrap_index(base, m), frac};
}

double interpolate(const GridSpec& grid, std::span<const double> values,
                   std::span<const double> point) {
    const int n = grid.dimension();
    const int m = grid.points_per_axis();
    std::vector<DimStencil> st(static_cast<std::size_t>(n));
    std::vector<int> active;
    for (int d = 0; d < n; ++d) {
        st[static_cast<std::size_t>(d)] = dim_stencil(grid, point[d]);
        if (st[static_cast<std::size_t>(d)].frac != 0.0) active.push_back(d);
    }
    std::vector<int> idx(n);
    for (int d = 0; d < n; ++d) idx[d] = st[static_cast<std::size_t>(d)].base;
    const std::size_t corners = std::size_t{1} << active.size();
    double acc = 0.0;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const int d = active[a];
            const DimStencil& sd = st[static_cast<std::size_t>(d)];
            if (c & (std::size_t{1} << a)) {
                idx[d] = wrap_index(sd.base + 1, m);
                w *= sd.frac;
            } else {
                idx[d] = sd.base;
                w *= 1.0 - sd.frac;
            }
        }
        acc += w * values[grid.ravel(idx)];
    }
    return acc;
}

bool lattice_exact_element(const GroupElement& g) {
    int q;
    for (double theta : g.thetas) {
        if (!near_multiple_of_quarter_turn(theta, &q)) return false;
    }
    return g.lambda_rotation.kind != LambdaRotation::Kind::dense;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

// ---- group descriptor -------------------------------------------------------

EquivariantGroup::EquivariantGroup(int j, int ambient_dimension, int theta_samples,
                                   LambdaMode lambda_mode)
    : j_(j),
      ambient_dimension_(ambient_dimension),
      theta_samples_(theta_samples),
      lambda_mode_(lambda_mode) {
    if (j < 1) throw DomainError("EquivariantGroup: j must be >= 1");
    if (ambient_dimension < 4 * j) {
        throw DomainError("EquivariantGroup: need ambient dimension >= 4j");
    }
    if (theta_samples < 4 || theta_samples % 4 != 0) {
        throw DomainError("EquivariantGroup: theta_samples must be a multiple of 4, >= 4");
    }
    if (trailing_dimension() == 0) {
        lambda_mode_ = LambdaMode::trivial;
    }
}

GroupElement EquivariantGroup::identity() const {
    GroupElement g;
    g.thetas.assign(static_cast<std::size_t>(j_), 0.0);
    g.rho_flags.assign(static_cast<std::size_t>(j_), 0);
    return g;
}

GroupElement EquivariantGroup::block_rotation(int block, double theta) const {
    GroupElement g = identity();
    g.thetas.at(static_cast<std::size_t>(block)) = theta;
    return g;
}

GroupElement EquivariantGroup::block_flip(int block) const {
    GroupElement g = identity();
    g.rho_flags.at(static_cast<std::size_t>(block)) = 1;
    return g;
}

GroupElement EquivariantGroup::trailing_axis_flip(int axis) const {
    const int dy = trailing_dimension();
    if (axis < 0 || axis >= dy) throw DomainError("trailing_axis_flip: axis out of range");
    GroupElement g = identity();
    g.lambda_rotation.kind = LambdaRotation::Kind::signed_permutation;
    g.lambda_rotation.perm.resize(static_cast<std::size_t>(dy));
    g.lambda_rotation.sign.assign(static_cast<std::size_t>(dy), 1);
    for (int d = 0; d < dy; ++d) g.lambda_rotation.perm[static_cast<std::size_t>(d)] = d;
    g.lambda_rotation.sign[static_cast<std::size_t>(axis)] = -1;
    return g;
}

GroupElement EquivariantGroup::trailing_transposition(int axis_a, int axis_b) const {
    const int dy = trailing_dimension();
    if (axis_a < 0 || axis_b < 0 || axis_a >= dy || axis_b >= dy || axis_a == axis_b) {
        throw DomainError("trailing_transposition: bad axes");
    }
    GroupElement g = identity();
    g.lambda_rotation.kind = LambdaRotation::Kind::signed_permutation;
    g.lambda_rotation.perm.resize(static_cast<std::size_t>(dy));
    g.lambda_rotation.sign.assign(static_cast<std::size_t>(dy), 1);
    for (int d = 0; d < dy; ++d) g.lambda_rotation.perm[static_cast<std::size_t>(d)] = d;
    std::swap(g.lambda_rotation.perm[static_cast<std::size_t>(axis_a)],
              g.lambda_rotation.perm[static_cast<std::size_t>(axis_b)]);
    return g;
}

std::vector<GroupElement> EquivariantGroup::sampled_elements(HaarSampling sampling) const {
    std::vector<GroupElement> out;
    for (int b = 0; b < j_; ++b) {
        for (int q = 1; q <= 3; ++q) out.push_back(block_rotation(b, q * 0.5 * kPi));
        out.push_back(block_flip(b));
        GroupElement rf = block_flip(b);
        rf.thetas[static_cast<std::size_t>(b)] = 0.5 * kPi;
        out.push_back(rf);
    }
    if (j_ >= 2) {
        GroupElement g = identity();
        g.thetas[0] = 0.5 * kPi;
        g.rho_flags[1] = 1;
        out.push_back(g);
        GroupElement h = identity();
        h.rho_flags[0] = 1;
        h.rho_flags[1] = 1;
        out.push_back(h);
    }
    const int dy = trailing_dimension();
    if (dy >= 1 && lambda_mode_ != LambdaMode::trivial) {
        for (int a = 0; a < dy; ++a) out.push_back(trailing_axis_flip(a));
        for (int a = 0; a + 1 < dy; ++a) out.push_back(trailing_transposition(a, a + 1));
        if (dy >= 2) {
            GroupElement mixed = trailing_transposition(0, dy - 1);
            mixed.rho_flags[0] = 1;
            out.push_back(mixed);
        }
    }
    if (sampling == HaarSampling::sampled) {
        for (int b = 0; b < j_; ++b) {
            for (int k = 1; k < theta_samples_; ++k) {
                if ((4 * k) % theta_samples_ == 0) continue;  // lattice-exact already
                out.push_back(block_rotation(b, 2.0 * kPi * k / theta_samples_));
            }
        }
    }
    return out;
}

// ---- pointwise actions -------------------------------------------------------

std::array<double, 4> rho_real_action(const std::array<double, 4>& v) {
    return {-v[2], v[3], v[0], -v[1]};
}

std::array<double, 4> theta_real_action(double theta, const std::array<double, 4>& v) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v[0] - s * v[1], s * v[0] + c * v[1],
            c * v[2] - s * v[3], s * v[2] + c * v[3]};
}

int sigma(const GroupElement& g) {
    int flips = 0;
    for (auto f : g.rho_flags) flips += f ? 1 : 0;
    return (flips % 2 == 0) ? 1 : -1;
}

void map_point(const GroupElement& g, std::span<const double> x, std::span<double> out) {
    const int j = static_cast<int>(g.thetas.size());
    for (int b = 0; b < j; ++b) {
        std::array<double, 4> v = {x[4 * b + 0], x[4 * b + 1], x[4 * b + 2],
                                   x[4 * b + 3]};
        if (g.rho_flags[static_cast<std::size_t>(b)]) v = rho_real_action(v);
        v = theta_real_action(g.thetas[static_cast<std::size_t>(b)], v);
        for (int d = 0; d < 4; ++d) out[4 * b + d] = v[d];
    }
    const int dy = static_cast<int>(x.size()) - 4 * j;
    const double* y = x.data() + 4 * j;
    double* z = out.data() + 4 * j;
    const LambdaRotation& lam = g.lambda_rotation;
    switch (lam.kind) {
        case LambdaRotation::Kind::identity:
            for (int d = 0; d < dy; ++d) z[d] = y[d];
            break;
        case LambdaRotation::Kind::signed_permutation:
            for (int d = 0; d < dy; ++d) {
                z[d] = lam.sign[static_cast<std::size_t>(d)] *
                       y[lam.perm[static_cast<std::size_t>(d)]];
            }
            break;
        case LambdaRotation::Kind::dense:
            for (int r = 0; r < dy; ++r) {
                double acc = 0.0;
                for (int c = 0; c < dy; ++c) {
                    acc += lam.matrix[static_cast<std::size_t>(r * dy + c)] * y[c];
                }
                z[r] = acc;
            }
            break;
    }
}

std::vector<double> element_matrix(const GroupElement& g, int ambient_dimension) {
    const int n = ambient_dimension;
    std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    std::vector<double> img(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), 0.0);
        e[static_cast<std::size_t>(c)] = 1.0;
        map_point(g, e, img);
        for (int r = 0; r < n; ++r) mat[static_cast<std::size_t>(r * n + c)] = img[r];
    }
    return mat;
}

// ---- actions on fields --------------------------------------------------------

Field apply(const GroupElement& g, const Field& u) {
    const GridSpec& grid = u.grid();
    const int n = grid.dimension();
    if (static_cast<int>(g.thetas.size()) * 4 > n ||
        g.thetas.size() != g.rho_flags.size()) {
        throw DomainError("apply: element does not fit the grid dimension");
    }
    const double sg = sigma(g);
    std::vector<double> out(grid.point_count());

    if (lattice_exact_element(g)) {
        const int m = grid.points_per_axis();
        const int j = static_cast<int>(g.thetas.size());
        std::vector<int> idx(n), src(n), ci(n), cs(n);
        for (std::size_t flat = 0; flat < out.size(); ++flat) {
            grid.unravel(flat, idx);
            for (int d = 0; d < n; ++d) ci[d] = centered(idx[d], m);
            for (int b = 0; b < j; ++b) {
                int v[4] = {ci[4 * b], ci[4 * b + 1], ci[4 * b + 2], ci[4 * b + 3]};
                if (g.rho_flags[static_cast<std::size_t>(b)]) rho_int(v);
                int q = 0;
                near_multiple_of_quarter_turn(g.thetas[static_cast<std::size_t>(b)], &q);
                quarter_rotate(q, v[0], v[1]);
                quarter_rotate(q, v[2], v[3]);
                for (int d = 0; d < 4; ++d) cs[4 * b + d] = v[d];
            }
            const int dy = n - 4 * j;
            const LambdaRotation& lam = g.lambda_rotation;
            for (int d = 0; d < dy; ++d) {
                if (lam.kind == LambdaRotation::Kind::identity) {
                    cs[4 * j + d] = ci[4 * j + d];
                } else {
                    cs[4 * j + d] = lam.sign[static_cast<std::size_t>(d)] *
                                    ci[4 * j + lam.perm[static_cast<std::size_t>(d)]];
                }
            }
            for (int d = 0; d < n; ++d) src[d] = uncenter(cs[d], m);
            out[flat] = sg * u[grid.ravel(src)];
        }
        return Field::from_values(grid, std::move(out));
    }

    std::vector<int> idx(n);
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        grid.unravel(flat, idx);
        for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = grid.coordinate(idx[d]);
        map_point(g, x, y);
        out[flat] = sg * interpolate(grid, u.values(), y);
    }
    return Field::from_values(grid, std::move(out));
}

// ---- lattice-exact Haar projection ----------------------------------------------

LatticeSymmetrizer::LatticeSymmetrizer(const EquivariantGroup& group,
                                       const GridSpec& grid)
    : group_(group), grid_(grid) {
    if (group.ambient_dimension() != grid.dimension()) {
        throw DomainError("LatticeSymmetrizer: group/grid dimension mismatch");
    }
    const int m = grid.points_per_axis();
    // All blocks share the same sub-index tables.
    std::vector<std::uint32_t> quarter = block_map_table(grid, 1, false);
    std::vector<std::uint32_t> rho = block_map_table(grid, 0, true);
    for (int b = 0; b < group.j(); ++b) {
        block_quarter_maps_.push_back(quarter);
        block_rho_maps_.push_back(rho);
    }
    const int dy = group.trailing_dimension();
    if (dy >= 1 && group.lambda_mode() != LambdaMode::trivial) {
        flip_maps_.push_back(axis_flip_table(grid));
        if (group.lambda_mode() == LambdaMode::radial_constraint) {
            // Shell ids on the trailing sub-lattice; key = sum of squared
            // centered integer coordinates (exact arithmetic).
            std::size_t tail = 1;
            for (int d = 0; d < dy; ++d) tail *= static_cast<std::size_t>(m);
            shell_of_tail_.resize(tail);
            std::map<long long, std::uint32_t> ids;
            for (std::size_t t = 0; t < tail; ++t) {
                std::size_t rest = t;
                long long key = 0;
                for (int d = 0; d < dy; ++d) {
                    const int i = static_cast<int>(rest % static_cast<std::size_t>(m));
                    rest /= static_cast<std::size_t>(m);
                    const long long cc = centered(i, m);
                    key += cc * cc;
                }
                auto it = ids.emplace(key, static_cast<std::uint32_t>(ids.size())).first;
                shell_of_tail_[t] = it->second;
            }
            shell_count_ = ids.size();
        }
    }
}

namespace {

void shell_project_tail(std::span<double> vals, std::span<const std::uint32_t> shell_of_tail,
                        std::size_t shell_count, std::size_t tail) {
    const std::size_t lead = vals.size() / tail;
    std::vector<double> sums(shell_count);
    std::vector<double> sizes(shell_count, 0.0);
    for (std::size_t t = 0; t < tail; ++t) sizes[shell_of_tail[t]] += 1.0;
    for (std::size_t z = 0; z < lead; ++z) {
        std::fill(sums.begin(), sums.end(), 0.0);
        double* chunk = vals.data() + z * tail;
        for (std::size_t t = 0; t < tail; ++t) sums[shell_of_tail[t]] += chunk[t];
        for (std::size_t t = 0; t < tail; ++t) {
            chunk[t] = sums[shell_of_tail[t]] / sizes[shell_of_tail[t]];
        }
    }
}

}  // namespace

Field LatticeSymmetrizer::project(const Field& u) const {
    if (!(u.grid() == grid_)) throw DomainError("LatticeSymmetrizer: grid mismatch");
    const int m = grid_.points_per_axis();
    const std::size_t count = grid_.point_count();
    std::vector<double> vals(u.values().begin(), u.values().end());
    std::vector<double> tmp(count), acc(count), spare(count);

    // Per-block twisted average: quarter-turn average then the rho twist,
    // which together realize (1/8) sum over the block core with sigma signs.
    for (int b = 0; b < group_.j(); ++b) {
        const int d0 = 4 * b;
        std::copy(vals.begin(), vals.end(), acc.begin());
        std::copy(vals.begin(), vals.end(), tmp.begin());
        for (int a = 1; a <= 3; ++a) {
            gather_dims(grid_, tmp, spare, d0, 4,
                        block_quarter_maps_[static_cast<std::size_t>(b)]);
            std::swap(tmp, spare);
            for (std::size_t i = 0; i < count; ++i) acc[i] += tmp[i];
        }
        for (std::size_t i = 0; i < count; ++i) acc[i] *= 0.25;
        gather_dims(grid_, acc, tmp, d0, 4, block_rho_maps_[static_cast<std::size_t>(b)]);
        for (std::size_t i = 0; i < count; ++i) vals[i] = 0.5 * (acc[i] - tmp[i]);
    }

    const int dy = group_.trailing_dimension();
    if (dy >= 1 && group_.lambda_mode() != LambdaMode::trivial) {
        for (int a = 0; a < dy; ++a) {
            gather_dims(grid_, vals, tmp, 4 * group_.j() + a, 1, flip_maps_[0]);
            for (std::size_t i = 0; i < count; ++i) vals[i] = 0.5 * (vals[i] + tmp[i]);
        }
        if (group_.lambda_mode() == LambdaMode::radial_constraint) {
            std::size_t tail = 1;
            for (int d = 0; d < dy; ++d) tail *= static_cast<std::size_t>(m);
            shell_project_tail(vals, shell_of_tail_, shell_count_, tail);
        }
    }
    return Field::from_values(grid_, std::move(vals));
}

// ---- sampled symmetrization --------------------------------------------------------

namespace {

// Interpolated single-block rotation pass: out = in o R_b(theta).
void block_rotation_gather(const GridSpec& grid, int block, double theta,
                           std::span<const double> in, std::span<double> out) {
    const int m = grid.points_per_axis();
    const int n = grid.dimension();
    const int d0 = 4 * block;
    std::size_t pre = 1, suf = 1;
    const std::size_t blk = static_cast<std::size_t>(m) * m * m * m;
    for (int d = 0; d < d0; ++d) pre *= static_cast<std::size_t>(m);
    for (int d = d0 + 4; d < n; ++d) suf *= static_cast<std::size_t>(m);

    const double c = std::cos(theta), s = std::sin(theta);
    DimStencil st[4];
    int corner_idx[4];
    for (std::size_t t = 0; t < blk; ++t) {
        std::size_t rest = t;
        int bi[4];
        for (int d = 3; d >= 0; --d) {
            bi[d] = static_cast<int>(rest % static_cast<std::size_t>(m));
            rest /= static_cast<std::size_t>(m);
        }
        double x[4];
        for (int d = 0; d < 4; ++d) x[d] = grid.coordinate(bi[d]);
        const double y[4] = {c * x[0] - s * x[1], s * x[0] + c * x[1],
                             c * x[2] - s * x[3], s * x[2] + c * x[3]};
        for (int d = 0; d < 4; ++d) st[d] = dim_stencil(grid, y[d]);
        for (std::size_t p = 0; p < pre; ++p) {
            double* dst = out.data() + (p * blk + t) * suf;
            for (std::size_t q = 0; q < suf; ++q) dst[q] = 0.0;
            for (int cmask = 0; cmask < 16; ++cmask) {
                double w = 1.0;
                for (int d = 0; d < 4; ++d) {
                    if (cmask & (1 << d)) {
                        w *= st[d].frac;
                        corner_idx[d] = wrap_index(st[d].base + 1, m);
                    } else {
                        w *= 1.0 - st[d].frac;
                        corner_idx[d] = st[d].base;
                    }
                }
                if (w == 0.0) continue;
                std::size_t cflat = 0;
                for (int d = 0; d < 4; ++d) {
                    cflat = cflat * static_cast<std::size_t>(m) +
                            static_cast<std::size_t>(corner_idx[d]);
                }
                const double* src = in.data() + (p * blk + cflat) * suf;
                for (std::size_t q = 0; q < suf; ++q) dst[q] += w * src[q];
            }
        }
    }
}

// Dense rotation on the trailing coordinates (interpolated gather).
void trailing_dense_gather(const GridSpec& grid, int j_blocks,
                           const std::vector<double>& matrix,
                           std::span<const double> in, std::span<double> out) {
    const int n = grid.dimension();
    const int m = grid.points_per_axis();
    const int d0 = 4 * j_blocks;
    const int dy = n - d0;
    std::size_t pre = 1, tail = 1;
    for (int d = 0; d < d0; ++d) pre *= static_cast<std::size_t>(m);
    for (int d = d0; d < n; ++d) tail *= static_cast<std::size_t>(m);

    std::vector<double> y(static_cast<std::size_t>(dy)), z(static_cast<std::size_t>(dy));
    std::vector<DimStencil> st(static_cast<std::size_t>(dy));
    std::vector<int> corner(static_cast<std::size_t>(dy));
    for (std::size_t t = 0; t < tail; ++t) {
        std::size_t rest = t;
        for (int d = dy - 1; d >= 0; --d) {
            y[static_cast<std::size_t>(d)] =
                grid.coordinate(static_cast<int>(rest % static_cast<std::size_t>(m)));
            rest /= static_cast<std::size_t>(m);
        }
        for (int r = 0; r < dy; ++r) {
            double accv = 0.0;
            for (int cc = 0; cc < dy; ++cc) {
                accv += matrix[static_cast<std::size_t>(r * dy + cc)] *
                        y[static_cast<std::size_t>(cc)];
            }
            z[static_cast<std::size_t>(r)] = accv;
        }
        for (int d = 0; d < dy; ++d) {
            st[static_cast<std::size_t>(d)] = dim_stencil(grid, z[static_cast<std::size_t>(d)]);
        }
        for (std::size_t p = 0; p < pre; ++p) {
            double accp = 0.0;
            const double* src_base = in.data() + p * tail;
            const std::size_t corners = std::size_t{1} << dy;
            for (std::size_t cmask = 0; cmask < corners; ++cmask) {
                double w = 1.0;
                for (int d = 0; d < dy; ++d) {
                    const DimStencil& sd = st[static_cast<std::size_t>(d)];
                    if (cmask & (std::size_t{1} << d)) {
                        w *= sd.frac;
                        corner[static_cast<std::size_t>(d)] = wrap_index(sd.base + 1, m);
                    } else {
                        w *= 1.0 - sd.frac;
                        corner[static_cast<std::size_t>(d)] = sd.base;
                    }
                }
                if (w == 0.0) continue;
                std::size_t cflat = 0;
                for (int d = 0; d < dy; ++d) {
                    cflat = cflat * static_cast<std::size_t>(m) +
                            static_cast<std::size_t>(corner[static_cast<std::size_t>(d)]);
                }
                accp += w * src_base[cflat];
            }
            out[p * tail + t] = accp;
        }
    }
}

// Seeded rotations via Gram-Schmidt on Gaussian matrices.
std::vector<std::vector<double>> seeded_rotations(int dy, int count) {
    std::vector<std::vector<double>> rotations;
    std::mt19937_64 rng(0x5eedf00dull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < count; ++r) {
        std::vector<double> a(static_cast<std::size_t>(dy) * dy);
        for (auto& v : a) v = gauss(rng);
        for (int i = 0; i < dy; ++i) {
            for (int k = 0; k < i; ++k) {
                double dot = 0.0;
                for (int c = 0; c < dy; ++c) {
                    dot += a[static_cast<std::size_t>(i * dy + c)] *
                           a[static_cast<std::size_t>(k * dy + c)];
                }
                for (int c = 0; c < dy; ++c) {
                    a[static_cast<std::size_t>(i * dy + c)] -=
                        dot * a[static_cast<std::size_t>(k * dy + c)];
                }
            }
            double nrm = 0.0;
            for (int c = 0; c < dy; ++c) {
                nrm += a[static_cast<std::size_t>(i * dy + c)] *
                       a[static_cast<std::size_t>(i * dy + c)];
            }
            nrm = std::sqrt(nrm);
            for (int c = 0; c < dy; ++c) a[static_cast<std::size_t>(i * dy + c)] /= nrm;
        }
        rotations.push_back(std::move(a));
    }
    return rotations;
}

}  // namespace

Field symmetrize(const Field& u, const EquivariantGroup& group, HaarSampling sampling) {
    LatticeSymmetrizer sym(group, u.grid());
    const bool needs_dense = group.lambda_mode() == LambdaMode::full_average &&
                             group.trailing_dimension() >= 2;
    if (sampling == HaarSampling::lattice_exact ||
        (group.theta_samples() == 4 && !needs_dense)) {
        return sym.project(u);
    }

    const GridSpec& grid = u.grid();
    const std::size_t count = grid.point_count();
    const int k_samples = group.theta_samples();
    std::vector<double> vals(u.values().begin(), u.values().end());
    std::vector<double> tmp(count), acc(count), spare(count);

    for (int b = 0; b < group.j(); ++b) {
        const int d0 = 4 * b;
        std::copy(vals.begin(), vals.end(), acc.begin());
        for (int k = 1; k < k_samples; ++k) {
            const double theta = 2.0 * kPi * k / k_samples;
            int q;
            if (near_multiple_of_quarter_turn(theta, &q)) {
                std::copy(vals.begin(), vals.end(), tmp.begin());
                for (int t = 0; t < q; ++t) {
                    gather_dims(grid, tmp, spare, d0, 4,
                                sym.block_quarter_maps_[static_cast<std::size_t>(b)]);
                    std::swap(tmp, spare);
                }
            } else {
                block_rotation_gather(grid, b, theta, vals, tmp);
            }
            for (std::size_t i = 0; i < count; ++i) acc[i] += tmp[i];
        }
        const double inv = 1.0 / k_samples;
        for (std::size_t i = 0; i < count; ++i) acc[i] *= inv;
        gather_dims(grid, acc, tmp, d0, 4, sym.block_rho_maps_[static_cast<std::size_t>(b)]);
        for (std::size_t i = 0; i < count; ++i) vals[i] = 0.5 * (acc[i] - tmp[i]);
    }

    const int dy = group.trailing_dimension();
    const int m = grid.points_per_axis();
    if (dy >= 1 && group.lambda_mode() != LambdaMode::trivial) {
        for (int a = 0; a < dy; ++a) {
            gather_dims(grid, vals, tmp, 4 * group.j() + a, 1, sym.flip_maps_[0]);
            for (std::size_t i = 0; i < count; ++i) vals[i] = 0.5 * (vals[i] + tmp[i]);
        }
        if (group.lambda_mode() == LambdaMode::radial_constraint) {
            std::size_t tail = 1;
            for (int d = 0; d < dy; ++d) tail *= static_cast<std::size_t>(m);
            shell_project_tail(vals, sym.shell_of_tail_, sym.shell_count_, tail);
        } else if (group.lambda_mode() == LambdaMode::full_average) {
            const auto rotations = seeded_rotations(dy, 8);
            std::copy(vals.begin(), vals.end(), acc.begin());
            for (const auto& rot : rotations) {
                trailing_dense_gather(grid, group.j(), rot, vals, tmp);
                for (std::size_t i = 0; i < count; ++i) acc[i] += tmp[i];
            }
            const double inv = 1.0 / (1.0 + static_cast<double>(rotations.size()));
            for (std::size_t i = 0; i < count; ++i) vals[i] = acc[i] * inv;
        }
    }
    return Field::from_values(grid, std::move(vals));
}

Field radialize(const Field& u) {
    const GridSpec& grid = u.grid();
    const int n = grid.dimension();
    const int m = grid.points_per_axis();
    std::map<long long, std::pair<double, double>> shells;  // key -> (sum, count)
    std::vector<int> idx(n);
    std::vector<long long> keys(u.size());
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        grid.unravel(flat, idx);
        long long key = 0;
        for (int d = 0; d < n; ++d) {
            const long long c = centered(idx[d], m);
            key += c * c;
        }
        keys[flat] = key;
        auto& slot = shells[key];
        slot.first += u[flat];
        slot.second += 1.0;
    }
    std::vector<double> out(u.size());
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        const auto& slot = shells[keys[flat]];
        out[flat] = slot.first / slot.second;
    }
    return Field::from_values(grid, std::move(out));
}

EquivarianceCheck is_equivariant(const Field& u, const EquivariantGroup& group,
                                 double tol, HaarSampling sampling) {
    const double norm = l2_norm(u);
    if (norm < 1e-12) {
        throw ZeroField("is_equivariant: field is numerically zero");
    }
    double defect = 0.0;
    for (const GroupElement& g : group.sampled_elements(sampling)) {
        const Field gu = apply(g, u);
        CompensatedSum acc;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = gu[i] - u[i];
            acc.add(d * d);
        }
        const double dev = std::sqrt(u.grid().cell_volume() * acc.value()) / norm;
        defect = std::max(defect, dev);
    }
    return EquivarianceCheck{defect <= tol, defect};
}

// ---- structural checks -----------------------------------------------------------

namespace {

bool matrices_equal(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst <= 1e-9;
}

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                           int n) {
    std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double aik = a[static_cast<std::size_t>(i * n + k)];
            if (aik == 0.0) continue;
            for (int jj = 0; jj < n; ++jj) {
                c[static_cast<std::size_t>(i * n + jj)] +=
                    aik * b[static_cast<std::size_t>(k * n + jj)];
            }
        }
    }
    return c;
}

}  // namespace

void check_character_table(int ambient_dimension, std::span<const LabeledElement> table) {
    const int n = ambient_dimension;
    std::vector<std::vector<double>> mats;
    mats.reserve(table.size());
    for (const auto& le : table) mats.push_back(element_matrix(le.element, n));

    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t k = i + 1; k < table.size(); ++k) {
            if (matrices_equal(mats[i], mats[k]) &&
                table[i].sigma_label != table[k].sigma_label) {
                throw AssumptionViolated(
                    "character table: equal elements carry different signs, sigma is "
                    "not a function on the sampled set");
            }
        }
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t k = 0; k < table.size(); ++k) {
            const auto prod = matmul(mats[i], mats[k], n);
            for (std::size_t t = 0; t < table.size(); ++t) {
                if (!matrices_equal(prod, mats[t])) continue;
                if (table[t].sigma_label != table[i].sigma_label * table[k].sigma_label) {
                    throw AssumptionViolated(
                        "character table: sigma(gh) != sigma(g) sigma(h) on the "
                        "sampled set");
                }
                break;
            }
        }
    }
}

AssumptionReport assumption_check(const EquivariantGroup& group, const GridSpec& grid) {
    if (grid.dimension() != group.ambient_dimension()) {
        throw DomainError("assumption_check: group/grid dimension mismatch");
    }
    const int n = grid.dimension();
    AssumptionReport report;

    // Character consistency on the per-block closed cores.
    std::vector<LabeledElement> table;
    for (int b = 0; b < group.j(); ++b) {
        for (int q = 0; q < 4; ++q) {
            for (int f = 0; f < 2; ++f) {
                if (q == 0 && f == 0) continue;
                GroupElement g = group.identity();
                g.thetas[static_cast<std::size_t>(b)] = q * 0.5 * kPi;
                g.rho_flags[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(f);
                table.push_back({g, sigma(g)});
            }
        }
    }
    table.push_back({group.identity(), 1});
    check_character_table(n, table);

    bool has_negative = false;
    for (const auto& le : table) has_negative = has_negative || le.sigma_label < 0;
    if (!has_negative) {
        throw AssumptionViolated("assumption_check: sigma is not surjective on the sample");
    }

    // Orbit dichotomy on a deterministic sample of lattice points.
    const auto elements = group.sampled_elements(HaarSampling::lattice_exact);
    const std::size_t samples = std::min<std::size_t>(1000, grid.point_count());
    std::vector<int> idx(n);
    std::vector<double> x(static_cast<std::size_t>(n)), gx(static_cast<std::size_t>(n));
    const int dy = group.trailing_dimension();
    for (std::size_t t = 0; t < samples; ++t) {
        const std::size_t flat = splitmix64(0x0bedc0deull + t) % grid.point_count();
        grid.unravel(flat, idx);
        for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = grid.coordinate(idx[d]);
        double x2 = 0.0;
        for (double v : x) x2 += v * v;

        // Tangent of the circle actions; a live trailing factor contributes a
        // sphere tangent wherever y != 0 (needs dimension >= 2).
        double tangent2 = 0.0;
        for (int b = 0; b < group.j(); ++b) {
            for (int d = 0; d < 4; ++d) {
                tangent2 += x[static_cast<std::size_t>(4 * b + d)] *
                            x[static_cast<std::size_t>(4 * b + d)];
            }
        }
        if (group.lambda_mode() != LambdaMode::trivial && dy >= 2) {
            for (int d = 4 * group.j(); d < n; ++d) {
                tangent2 += x[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
            }
        }
        const bool continuous_orbit = tangent2 > 1e-18 * (1.0 + x2);

        if (!continuous_orbit) {
            for (const GroupElement& g : elements) {
                map_point(g, x, gx);
                double dev = 0.0;
                for (int d = 0; d < n; ++d) {
                    dev = std::max(dev, std::abs(gx[static_cast<std::size_t>(d)] -
                                                 x[static_cast<std::size_t>(d)]));
                }
                if (dev > 1e-9 * (1.0 + std::sqrt(x2))) {
                    std::string msg =
                        "assumption_check: orbit is discrete but not a singleton at (";
                    for (int d = 0; d < n; ++d) {
                        msg += std::to_string(x[static_cast<std::size_t>(d)]);
                        msg += d + 1 < n ? "," : ")";
                    }
                    throw AssumptionViolated(msg);
                }
            }
        }
    }
    report.points_checked = samples;

    // Trivial-character stabilizer witness: all blocks at (c,0,0,0), y = 0.
    const double c = grid.coordinate(grid.points_per_axis() / 2 +
                                     grid.points_per_axis() / 4);
    std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
    for (int b = 0; b < group.j(); ++b) xi[static_cast<std::size_t>(4 * b)] = c;
    for (const GroupElement& g : elements) {
        map_point(g, xi, gx);
        double dev = 0.0;
        for (int d = 0; d < n; ++d) {
            dev = std::max(dev, std::abs(gx[static_cast<std::size_t>(d)] -
                                         xi[static_cast<std::size_t>(d)]));
        }
        if (dev <= 1e-9 && sigma(g) != 1) {
            throw AssumptionViolated(
                "assumption_check: stabilizer of the witness candidate is not "
                "sigma-trivial");
        }
    }
    report.witness = xi;
    report.passed = true;
    report.note = "orbit dichotomy, character consistency and witness verified";
    return report;
}

bool distinctness_check(const Field& u, const EquivariantGroup& group_u,
                        const Field& v, const EquivariantGroup& group_v) {
    if (group_u.j() >= group_v.j()) {
        throw DomainError("distinctness_check: requires i < j between the characters");
    }
    if (!(u.grid() == v.grid())) {
        throw DomainError("distinctness_check: fields live on different grids");
    }
    if (group_u.ambient_dimension() != u.grid().dimension() ||
        group_v.ambient_dimension() != v.grid().dimension()) {
        throw DomainError("distinctness_check: group/grid dimension mismatch");
    }
    const double nu = l2_norm(u), nv = l2_norm(v);
    if (nu <= 1e-10 || nv <= 1e-10) {
        throw ZeroField("distinctness_check: fields must be nontrivial");
    }
    CompensatedSum acc;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc.add(d * d);
    }
    const double dist = std::sqrt(u.grid().cell_volume() * acc.value());
    return dist > 1e-8 * std::max(nu, nv);
}

}  // namespace fcslab
