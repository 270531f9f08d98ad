#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fcslab/grid.hpp"
#include "fcslab/transforms.hpp"
#include "oracles.hpp"

using namespace fcslab;

namespace {

double max_abs_diff(const Field& a, const Field& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("grid spec validation") {
    CHECK_THROWS_AS(GridSpec(2, 0.0, 40.0, 16), DomainError);
    CHECK_THROWS_AS(GridSpec(2, 1.0, 40.0, 16), DomainError);
    CHECK_THROWS_AS(GridSpec(2, 0.5, -1.0, 16), DomainError);
    CHECK_THROWS_AS(GridSpec(2, 0.5, 40.0, 15), DomainError);
    CHECK_THROWS_AS(GridSpec(2, 0.5, 40.0, 2), DomainError);
    CHECK_THROWS_AS(GridSpec(0, 0.5, 40.0, 16), DomainError);
    // N > 2s: N=1, s=0.5 has an infinite critical exponent.
    CHECK_THROWS_AS(GridSpec(1, 0.5, 40.0, 16), DomainError);
    const GridSpec g(1, 0.25, 40.0, 16);
    CHECK(g.critical_exponent() == doctest::Approx(4.0).epsilon(1e-14));
    const GridSpec g2(2, 0.5, 40.0, 128);
    CHECK(g2.critical_exponent() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(g2.spacing() == doctest::Approx(0.3125));
    CHECK(g2.coordinate(0) == doctest::Approx(-20.0));
}

TEST_CASE("field validation") {
    const GridSpec g(2, 0.5, 10.0, 8);
    CHECK_THROWS_AS(Field::from_values(g, std::vector<double>(10, 0.0)), DomainError);
    std::vector<double> bad(g.point_count(), 0.0);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(Field::from_values(g, std::move(bad)), DomainError);
}

TEST_CASE("forward transform of a constant concentrates at zero frequency") {
    const GridSpec g(2, 0.5, 10.0, 16);
    const double c = 1.7;
    const Field u = Field::sample(g, [&](std::span<const double>) { return c; });
    const auto hat = forward_transform(u);
    const double ln = std::pow(g.box_length(), g.dimension());
    const int zero[2] = {0, 0};
    CHECK(std::abs(hat.coefficient(std::span<const int>(zero, 2)) - c * ln) <=
          1e-12 * c * ln);
    double off = 0.0;
    for (std::size_t i = 1; i < hat.coefficients().size(); ++i) {
        off = std::max(off, std::abs(hat.coefficients()[i]));
    }
    CHECK(off <= 1e-12 * c * ln);
}

TEST_CASE("cosine mode lands on the +-e1 frequencies") {
    const GridSpec g(2, 0.5, 10.0, 16);
    const Field u = Field::sample(g, [&](std::span<const double> x) {
        return std::cos(2.0 * oracles::kPi * x[0] / g.box_length());
    });
    const auto hat = forward_transform(u);
    const double ln = std::pow(g.box_length(), g.dimension());
    const int plus[2] = {1, 0}, minus[2] = {-1, 0};
    CHECK(std::abs(hat.coefficient(std::span<const int>(plus, 2)) - 0.5 * ln) <=
          1e-12 * ln);
    CHECK(std::abs(hat.coefficient(std::span<const int>(minus, 2)) - 0.5 * ln) <=
          1e-12 * ln);
    // All remaining coefficients vanish.
    double rest = 0.0;
    std::vector<int> k(2);
    for (int k0 = -8; k0 < 8; ++k0) {
        for (int k1 = -8; k1 < 8; ++k1) {
            if (k1 == 0 && (k0 == 1 || k0 == -1)) continue;
            k[0] = k0;
            k[1] = k1;
            rest = std::max(rest, std::abs(hat.coefficient(k)));
        }
    }
    CHECK(rest <= 1e-12 * ln);
}

TEST_CASE("round trips: inverse(forward) and forward(inverse)") {
    const GridSpec g(2, 0.5, 7.0, 8);
    const Field u = oracles::random_field(g, 42);
    const Field back = inverse_transform(forward_transform(u));
    CHECK(max_abs_diff(u, back) <= 1e-12);

    // Hermitian coefficients produced by a real field round trip spectrally.
    const auto v = forward_transform(oracles::random_field(g, 7));
    const auto again = forward_transform(inverse_transform(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < v.coefficients().size(); ++i) {
        worst = std::max(worst, std::abs(v.coefficients()[i] - again.coefficients()[i]));
    }
    CHECK(worst <= 1e-10);
    CHECK(v.hermitian_defect() <= 1e-13);
}

TEST_CASE("inverse transform rejects non-Hermitian coefficients") {
    const GridSpec g(1, 0.25, 5.0, 8);
    std::vector<std::complex<double>> coeffs(g.point_count(), 0.0);
    coeffs[1] = {1.0, 0.5};  // no conjugate partner
    const SpectralField bad(g, std::move(coeffs));
    CHECK_THROWS_AS(inverse_transform(bad), NonHermitianInput);

    // A pure zero-mode inverse gives the constant field.
    std::vector<std::complex<double>> dc(g.point_count(), 0.0);
    const double ln = std::pow(g.box_length(), g.dimension());
    dc[0] = ln;
    const Field one = inverse_transform(SpectralField(g, std::move(dc)));
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Plancherel identity on random fields, N = 1..4") {
    const int sizes[4] = {32, 12, 8, 6};
    for (int n = 1; n <= 4; ++n) {
        const GridSpec g(n, n == 1 ? 0.25 : 0.5, 5.0, sizes[n - 1]);
        for (int trial = 0; trial < 100; ++trial) {
            const Field u = oracles::random_field(
                g, static_cast<std::uint64_t>(n * 1000 + trial));
            double phys = 0.0;
            for (double v : u.values()) phys += v * v;
            phys *= g.cell_volume();
            const SpectralField hat = forward_transform(u);
            double spec = 0.0;
            for (const auto& c : hat.coefficients()) {
                spec += std::norm(c);
            }
            spec /= std::pow(g.box_length(), n);
            REQUIRE(std::abs(phys - spec) <= 1e-12 * std::max(phys, 1.0));
        }
    }
}

TEST_CASE("transforms are linear") {
    const GridSpec g(2, 0.5, 9.0, 12);
    const Field u = oracles::random_field(g, 1);
    const Field v = oracles::random_field(g, 2);
    const double a = 1.25, b = -0.75;
    const auto lhs = forward_transform(axpy(a, u, scaled(v, b)));
    const auto hu = forward_transform(u);
    const auto hv = forward_transform(v);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lhs.coefficients().size(); ++i) {
        const auto expect = a * hu.coefficients()[i] + b * hv.coefficients()[i];
        worst = std::max(worst, std::abs(lhs.coefficients()[i] - expect));
        scale = std::max(scale, std::abs(expect));
    }
    CHECK(worst <= 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("integrate_power basics and homogeneity") {
    const GridSpec g(2, 0.5, 10.0, 16);
    const Field one = Field::sample(g, [](std::span<const double>) { return 1.0; });
    const double ln = std::pow(g.box_length(), g.dimension());
    CHECK(integrate_power(one, 2.0) == doctest::Approx(ln).epsilon(1e-13));
    const Field zero(g);
    CHECK(integrate_power(zero, 3.0) == 0.0);
    CHECK_THROWS_AS(integrate_power(one, 0.5), DomainError);

    const Field u = oracles::random_field(g, 11);
    for (double p : {2.0, 2.5, 4.0}) {
        const double base = integrate_power(u, p);
        for (double c : {0.5, -2.0, 3.25}) {
            const double scaled_value = integrate_power(scaled(u, c), p);
            CHECK(std::abs(scaled_value - std::pow(std::abs(c), p) * base) <=
                  1e-12 * std::max(1.0, scaled_value));
        }
    }
}

TEST_CASE("bubble critical mass matches radial quadrature within 1%") {
    const GridSpec g(2, 0.5, 40.0, 128);
    const double p = g.critical_exponent();  // 4
    const Field u = Field::sample(g, [&](std::span<const double> x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return std::pow(1.0 + r2, -0.5);
    });
    const double box_mass = integrate_power(u, p);
    const double full_mass = oracles::bubble_mass_total(2, 0.5, 1.0, 1.0, p);
    // Reference: int over R^2 of (1+r^2)^-2 equals pi.
    CHECK(full_mass == doctest::Approx(oracles::kPi).epsilon(1e-6));
    CHECK(std::abs(box_mass - full_mass) <= 0.01 * full_mass);
}
