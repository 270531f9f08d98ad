#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fcslab/equivariance.hpp"
#include "fcslab/fractional.hpp"
#include "fcslab/transforms.hpp"
#include "fcslab/variational.hpp"
#include "oracles.hpp"

using namespace fcslab;

namespace {

double field_rel_diff(const Field& a, const Field& b) {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(a[i]));
    }
    return scale > 0.0 ? worst / scale : worst;
}

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                           int n) {
    std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    return c;
}

}  // namespace

TEST_CASE("rho: explicit image, rho^2 = -Id, rho^4 = Id, isometry") {
    const std::array<double, 4> e1 = {1.0, 0.0, 0.0, 0.0};
    const auto img = rho_real_action(e1);
    CHECK(img[0] == 0.0);
    CHECK(img[1] == 0.0);
    CHECK(img[2] == 1.0);
    CHECK(img[3] == 0.0);

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::array<double, 4> v = {uni(rng), uni(rng), uni(rng), uni(rng)};
        const auto twice = rho_real_action(rho_real_action(v));
        const auto fourth = rho_real_action(rho_real_action(twice));
        double n0 = 0.0, n1 = 0.0;
        for (int d = 0; d < 4; ++d) {
            CHECK(twice[d] == doctest::Approx(-v[d]).epsilon(1e-14));
            CHECK(fourth[d] == doctest::Approx(v[d]).epsilon(1e-14));
            n0 += v[d] * v[d];
            n1 += rho_real_action(v)[d] * rho_real_action(v)[d];
        }
        CHECK(std::abs(std::sqrt(n1) - std::sqrt(n0)) <= 1e-14 * std::sqrt(n0));
    }
}

TEST_CASE("theta action: quarter turn, identity, group law") {
    const std::array<double, 4> v = {0.3, -1.2, 0.7, 2.1};
    const auto quarter = theta_real_action(0.5 * oracles::kPi, v);
    CHECK(quarter[0] == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(quarter[1] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(quarter[2] == doctest::Approx(-2.1).epsilon(1e-14));
    CHECK(quarter[3] == doctest::Approx(0.7).epsilon(1e-14));

    const auto same = theta_real_action(0.0, v);
    for (int d = 0; d < 4; ++d) CHECK(same[d] == v[d]);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-oracles::kPi, oracles::kPi);
    for (int trial = 0; trial < 50; ++trial) {
        const double t1 = uni(rng), t2 = uni(rng);
        const auto composed = theta_real_action(t1, theta_real_action(t2, v));
        const auto direct = theta_real_action(t1 + t2, v);
        for (int d = 0; d < 4; ++d) {
            CHECK(composed[d] == doctest::Approx(direct[d]).epsilon(1e-13));
        }
    }
}

TEST_CASE("sigma: values and exhaustive multiplicativity on the block core") {
    const EquivariantGroup group(2, 8, 8, LambdaMode::trivial);
    CHECK(sigma(group.identity()) == 1);
    CHECK(sigma(group.block_flip(0)) == -1);
    GroupElement both = group.block_flip(0);
    both.rho_flags[1] = 1;
    CHECK(sigma(both) == 1);

    // Exhaustive check over the order-64 lattice-exact core of G_2: compose
    // every pair and match sigma against the product of labels.
    std::vector<LabeledElement> table;
    for (int q0 = 0; q0 < 4; ++q0) {
        for (int f0 = 0; f0 < 2; ++f0) {
            for (int q1 = 0; q1 < 4; ++q1) {
                for (int f1 = 0; f1 < 2; ++f1) {
                    GroupElement g = group.identity();
                    g.thetas[0] = q0 * 0.5 * oracles::kPi;
                    g.thetas[1] = q1 * 0.5 * oracles::kPi;
                    g.rho_flags[0] = static_cast<std::uint8_t>(f0);
                    g.rho_flags[1] = static_cast<std::uint8_t>(f1);
                    table.push_back({g, sigma(g)});
                }
            }
        }
    }
    CHECK_NOTHROW(check_character_table(8, table));

    // Every implemented element is a Euclidean isometry.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (const auto& le : table) {
        std::vector<double> x(8), y(8), gx(8), gy(8);
        for (int d = 0; d < 8; ++d) {
            x[d] = uni(rng);
            y[d] = uni(rng);
        }
        map_point(le.element, x, gx);
        map_point(le.element, y, gy);
        double d0 = 0.0, d1 = 0.0;
        for (int d = 0; d < 8; ++d) {
            d0 += (x[d] - y[d]) * (x[d] - y[d]);
            d1 += (gx[d] - gy[d]) * (gx[d] - gy[d]);
        }
        CHECK(std::abs(std::sqrt(d1) - std::sqrt(d0)) <= 1e-14 * (1.0 + std::sqrt(d0)));
    }
}

TEST_CASE("corrupted character table is rejected") {
    // rho removed (element replaced by a plain rotation) while the label still
    // claims sigma = -1: sigma stops being a function of the element.
    const EquivariantGroup group(1, 4, 4, LambdaMode::trivial);
    std::vector<LabeledElement> table;
    table.push_back({group.identity(), 1});
    for (int q = 1; q < 4; ++q) {
        table.push_back({group.block_rotation(0, q * 0.5 * oracles::kPi), 1});
    }
    table.push_back({group.block_rotation(0, 0.5 * oracles::kPi), -1});  // fake flip
    CHECK_THROWS_AS(check_character_table(4, table), AssumptionViolated);
}

TEST_CASE("apply: identity, exact lattice isometries preserve norms") {
    const GridSpec g(4, 0.5, 8.0, 8);
    const Field u = oracles::random_smooth_field(g, 11);
    const EquivariantGroup group(1, 4);

    const Field same = apply(group.identity(), u);
    CHECK(field_rel_diff(same, u) == 0.0);

    const double q0 = quadratic_form(u);
    const double p0 = integrate_power(u, 3.0);
    for (const auto& e : group.sampled_elements(HaarSampling::lattice_exact)) {
        const Field gu = apply(e, u);
        CHECK(std::abs(quadratic_form(gu) - q0) <= 1e-12 * q0);
        CHECK(std::abs(integrate_power(gu, 3.0) - p0) <= 1e-12 * p0);
    }
}

TEST_CASE("apply with interpolation: second-order norm drift under refinement") {
    // Multilinear interpolation gives an O(h^2) norm drift once the profile
    // is concentrated enough that rotated corners wrap only negligible values:
    // measured ~9.5e-3 at M=32 falling to ~2.2e-3 at M=64. Wider profiles
    // trade this for an M-independent wrap bias.
    auto drift_at = [](int m) {
        const GridSpec g(4, 0.5, 8.0, m);
        const Field u = Field::sample(g, [&](std::span<const double> x) {
            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            return std::exp(-r2 / 2.0);
        });
        const EquivariantGroup group(1, 4, 8, LambdaMode::trivial);
        const Field rotated =
            apply(group.block_rotation(0, 2.0 * oracles::kPi / 8.0), u);
        return std::abs(l2_norm(rotated) - l2_norm(u)) / l2_norm(u);
    };
    const double d32 = drift_at(32);
    const double d64 = drift_at(64);
    CHECK(d32 <= 1.2e-2);
    CHECK(d64 <= 0.35 * d32);
}

TEST_CASE("symmetrize: fixed point, radial annihilation, idempotence") {
    const GridSpec g(4, 0.5, 8.0, 8);
    const EquivariantGroup group(1, 4);
    const Field u = oracles::random_smooth_field(g, 13);

    const Field su = symmetrize(u, group, HaarSampling::lattice_exact);
    const Field ssu = symmetrize(su, group, HaarSampling::lattice_exact);
    CHECK(field_rel_diff(ssu, su) <= 1e-10);
    CHECK(l2_norm(su) <= l2_norm(u) * (1.0 + 1e-12));  // contraction

    // Already-equivariant input returns unchanged.
    const Field again = symmetrize(su, group, HaarSampling::lattice_exact);
    CHECK(field_rel_diff(again, su) <= 1e-10);

    // Radial fields die: sigma is surjective so its group mean vanishes.
    const Field radial = Field::sample(g, [](std::span<const double> x) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        return std::exp(-r2);
    });
    CHECK(l2_norm(symmetrize(radial, group, HaarSampling::lattice_exact)) <=
          1e-12 * l2_norm(radial));
}

TEST_CASE("symmetrize with interpolated angles: idempotence drift shrinks with M") {
    // The sampled average is idempotent only up to interpolation noise; on the
    // exactly equivariant profile Re(z1 conj z2) exp(-r^2) the measured drift
    // is ~3.3e-2 at M=32 and ~9e-3 at M=64.
    auto drift_at = [](int m) {
        const GridSpec g(4, 0.5, 8.0, m);
        const Field u = Field::sample(g, [&](std::span<const double> x) {
            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            return (x[0] * x[2] + x[1] * x[3]) * std::exp(-r2);
        });
        const EquivariantGroup group(1, 4, 8, LambdaMode::trivial);
        const Field su = symmetrize(u, group, HaarSampling::sampled);
        const Field ssu = symmetrize(su, group, HaarSampling::sampled);
        double num = 0.0;
        for (std::size_t i = 0; i < su.size(); ++i) {
            num = std::max(num, std::abs(ssu[i] - su[i]));
        }
        return num / linf_norm(su);
    };
    const double d32 = drift_at(32);
    const double d64 = drift_at(64);
    CHECK(d32 <= 5e-2);
    CHECK(d64 <= 0.45 * d32);
}

TEST_CASE("is_equivariant: symmetrized pass, radial obstruction, off-center bubble") {
    const GridSpec g(4, 0.5, 8.0, 8);
    const EquivariantGroup group(1, 4);

    const Field su = symmetrize(oracles::random_smooth_field(g, 17), group,
                                HaarSampling::lattice_exact);
    const auto good = is_equivariant(su, group, 1e-8);
    CHECK(good.equivariant);
    CHECK(good.defect <= 1e-8);

    // Radial nonzero field: defect ~ 2 at the flip (sigma = -1 forces u = -u).
    const Field radial = Field::sample(g, [](std::span<const double> x) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        return std::exp(-r2);
    });
    const auto bad = is_equivariant(radial, group, 1e-8);
    CHECK_FALSE(bad.equivariant);
    CHECK(bad.defect > 1.5);

    // A bubble centered away from the fixed point breaks the symmetry.
    const Field off = bubble(g, BubbleParams{1.0, 1.0, {1.0, 0.0, 1.0, 0.0}});
    const auto broken = is_equivariant(off, group, 1e-8);
    CHECK_FALSE(broken.equivariant);

    CHECK_THROWS_AS(is_equivariant(Field(g), group, 1e-8), ZeroField);
}

TEST_CASE("gradient of an equivariant field is equivariant") {
    const GridSpec g(4, 0.5, 8.0, 8);
    const EquivariantGroup group(1, 4);
    const Field su = nehari_project(
        symmetrize(oracles::random_smooth_field(g, 23), group,
                   HaarSampling::lattice_exact));
    const Field grad = energy_gradient(su);
    const auto check = is_equivariant(grad, group, 1e-10);
    CHECK(check.equivariant);
    CHECK(check.defect <= 1e-10);
}

TEST_CASE("assumption_check: G_1 on N=4 passes with a witness; zero is fixed") {
    const GridSpec g(4, 0.5, 8.0, 8);
    const EquivariantGroup group(1, 4);
    const auto report = assumption_check(group, g);
    CHECK(report.passed);
    REQUIRE(report.witness.size() == 4);
    CHECK(report.witness[0] != 0.0);
    CHECK(report.points_checked >= 1000);

    // The origin is fixed by every element (linear actions fix 0).
    std::vector<double> zero(4, 0.0), image(4, 0.0);
    for (const auto& e : group.sampled_elements(HaarSampling::lattice_exact)) {
        map_point(e, zero, image);
        for (double v : image) CHECK(v == 0.0);
    }
}

TEST_CASE("assumption_check: G_1 and G_2 on N=8 pass at M=6") {
    const GridSpec g(8, 0.5, 8.0, 6);
    const auto r1 = assumption_check(EquivariantGroup(1, 8), g);
    CHECK(r1.passed);
    const auto r2 = assumption_check(EquivariantGroup(2, 8), g);
    CHECK(r2.passed);
}

TEST_CASE("assumption_check flags a 1-dimensional live trailing factor") {
    // With d_y = 1 the trailing orthogonal factor gives two-point orbits:
    // neither continuous nor singletons, violating the orbit dichotomy.
    const GridSpec g(5, 0.5, 8.0, 6);
    const EquivariantGroup group(1, 5, 8, LambdaMode::radial_constraint);
    CHECK_THROWS_AS(assumption_check(group, g), AssumptionViolated);
}

TEST_CASE("group element composition matches matrix composition") {
    const EquivariantGroup group(1, 4);
    const GroupElement a = group.block_rotation(0, 0.5 * oracles::kPi);
    const GroupElement b = group.block_flip(0);
    GroupElement ab = group.block_flip(0);
    ab.thetas[0] = 0.5 * oracles::kPi;  // rotation after flip

    const auto ma = element_matrix(a, 4);
    const auto mb = element_matrix(b, 4);
    const auto mab = element_matrix(ab, 4);
    const auto prod = matmul(ma, mb, 4);
    for (std::size_t i = 0; i < prod.size(); ++i) {
        CHECK(prod[i] == doctest::Approx(mab[i]).epsilon(1e-14));
    }
}

TEST_CASE("distinctness: synthetic sigma_1 / sigma_2 fields on N=8, M=6") {
    const GridSpec g(8, 0.5, 8.0, 6);
    const EquivariantGroup g1(1, 8);  // Lambda = O(4), radial constraint
    const EquivariantGroup g2(2, 8);  // Lambda trivial
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Field u = symmetrize(oracles::random_smooth_field(g, seed), g1,
                                   HaarSampling::lattice_exact);
        const Field v = symmetrize(oracles::random_smooth_field(g, 100 + seed), g2,
                                   HaarSampling::lattice_exact);
        REQUIRE(l2_norm(u) > 1e-10);
        REQUIRE(l2_norm(v) > 1e-10);
        CHECK(distinctness_check(u, g1, v, g2));
    }

    // Precondition guards.
    const Field u = symmetrize(oracles::random_smooth_field(g, 7), g1,
                               HaarSampling::lattice_exact);
    CHECK_THROWS_AS(distinctness_check(u, g1, Field(g), g2), ZeroField);
    CHECK_THROWS_AS(distinctness_check(u, g1, u, g1), DomainError);
}
