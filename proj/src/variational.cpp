#include "fcslab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fcslab/fractional.hpp"
#include "fcslab/transforms.hpp"

namespace fcslab {
namespace {

struct Moments {
    double q;  // quadratic form
    double p;  // critical power mass
};

Moments moments(const Field& u) {
    return {quadratic_form(u), integrate_power(u, u.grid().critical_exponent())};
}

double energy_from(const Moments& m, double pstar) {
    return 0.5 * m.q - m.p / pstar;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double energy(const Field& u) {
    return energy_from(moments(u), u.grid().critical_exponent());
}

double nehari_value(const Field& u) {
    const Moments m = moments(u);
    return m.q - m.p;
}

double nehari_scale(const Field& u) {
    const double pstar = u.grid().critical_exponent();
    const Moments m = moments(u);
    if (!(m.p > 0.0)) {
        throw ZeroField("nehari_scale: field vanishes");
    }
    if (!(m.q > 0.0)) {
        // Constants have zero seminorm and are the zero element of the
        // homogeneous space; no positive ray scale exists.
        throw ZeroField("nehari_scale: field has zero seminorm");
    }
    return std::pow(m.q / m.p, 1.0 / (pstar - 2.0));
}

Field nehari_project(const Field& u) {
    return scaled(u, nehari_scale(u));
}

Field energy_gradient(const Field& u) {
    const double pstar = u.grid().critical_exponent();
    Field lap = fractional_laplacian(u);
    std::vector<double> g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        g[i] = lap[i] - std::pow(std::abs(v), pstar - 2.0) * v;
    }
    return Field::from_values(u.grid(), std::move(g));
}

double energy_along_ray(const Field& u, double t) {
    const double pstar = u.grid().critical_exponent();
    const Moments m = moments(u);
    if (std::abs(m.q - m.p) > 1e-6 * m.q) {
        throw NotOnManifold("energy_along_ray: base point is off the Nehari manifold");
    }
    return m.q * (0.5 * t * t - std::pow(t, pstar) / pstar);
}

namespace {

Field draw_random_bump(const GridSpec& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = grid.dimension();
    const double l = grid.box_length();
    const double width = l / 8.0;
    const int bumps = 3;
    std::vector<double> centers(static_cast<std::size_t>(bumps * n));
    std::vector<double> signs(static_cast<std::size_t>(bumps));
    for (int b = 0; b < bumps; ++b) {
        for (int d = 0; d < n; ++d) {
            centers[static_cast<std::size_t>(b * n + d)] = (uniform01(rng) - 0.5) * l;
        }
        signs[static_cast<std::size_t>(b)] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    }
    const double inv2w2 = 1.0 / (2.0 * width * width);
    const double half = 0.5 * l;
    return Field::sample(grid, [&](std::span<const double> x) {
        double value = 0.0;
        for (int b = 0; b < bumps; ++b) {
            double r2 = 0.0;
            for (int d = 0; d < n; ++d) {
                // Periodic displacement keeps bumps smooth across the seam.
                double dx = x[d] - centers[static_cast<std::size_t>(b * n + d)];
                if (dx > half) dx -= l;
                if (dx < -half) dx += l;
                r2 += dx * dx;
            }
            value += signs[static_cast<std::size_t>(b)] * std::exp(-r2 * inv2w2);
        }
        return value;
    });
}

Field draw_initial(const GridSpec& grid, const SolverConfig& config,
                   std::uint64_t seed) {
    switch (config.init) {
        case InitKind::random_bump:
            return draw_random_bump(grid, seed);
        case InitKind::bubble_seeded: {
            BubbleParams params;
            params.mu = 1.0;
            params.lambda = grid.box_length() / 10.0;
            params.center.assign(static_cast<std::size_t>(grid.dimension()), 0.0);
            return bubble(grid, params);
        }
        case InitKind::user_field: {
            if (!config.initial_field) {
                throw DomainError("descent_solve: user_field init without a field");
            }
            if (!(config.initial_field->grid() == grid)) {
                throw DomainError("descent_solve: user field grid mismatch");
            }
            return *config.initial_field;
        }
    }
    throw DomainError("descent_solve: unknown init kind");
}

}  // namespace

std::pair<Field, SolverReport> descent_solve(const GridSpec& grid,
                                             const SolverConfig& config,
                                             const IterationCallback& callback) {
    if (config.max_iterations < 0) {
        throw DomainError("descent_solve: max_iterations must be >= 0");
    }
    if (!(config.gradient_tolerance > 0.0) || !(config.step_size > 0.0) ||
        !(config.backtracking_factor > 0.0) || !(config.backtracking_factor < 1.0)) {
        throw DomainError("descent_solve: invalid solver parameters");
    }
    const double pstar = grid.critical_exponent();

    std::optional<LatticeSymmetrizer> sym;
    if (config.group) {
        if (config.group->ambient_dimension() != grid.dimension()) {
            throw DomainError("descent_solve: group/grid dimension mismatch");
        }
        sym.emplace(*config.group, grid);
    }
    auto symmetrized = [&](const Field& f) { return sym ? sym->project(f) : f; };

    // The solver works in the mean-zero subspace: the k = 0 mode has zero
    // seminorm but positive critical mass, so with constants admitted the
    // Nehari energy infimum is 0 (approached along spreading profiles) and
    // never attained. Mean-zero is the lattice model of the homogeneous
    // space; sigma-equivariant fields are mean-free automatically.
    auto deflated = [](const Field& f) {
        double mean = 0.0;
        for (double v : f.values()) mean += v;
        mean /= static_cast<double>(f.size());
        std::vector<double> out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - mean;
        return Field::from_values(f.grid(), std::move(out));
    };

    // Initial guess; a seed whose symmetrization collapses (radial seeds under
    // a surjective character, say) is re-drawn with the next seed.
    Field u(grid);
    bool have_initial = false;
    for (int attempt = 0; attempt < 16 && !have_initial; ++attempt) {
        Field raw = draw_initial(grid, config, config.seed + static_cast<std::uint64_t>(attempt));
        Field cand = deflated(symmetrized(raw));
        if (l2_norm(cand) > 1e-12 * std::max(1.0, l2_norm(raw))) {
            u = nehari_project(cand);
            have_initial = true;
        }
    }
    if (!have_initial) {
        throw DegenerateIterate(
            "descent_solve: symmetrization annihilated every initial guess");
    }

    Moments mom = moments(u);
    double e_u = energy_from(mom, pstar);
    const double initial_energy = std::max(e_u, 1e-300);

    SolverReport report;
    double alpha = config.step_size;
    bool converged = false;
    int iter = 0;

    while (true) {
        const Field g = deflated(energy_gradient(u));
        const double gnorm = l2_norm(g);
        const double unorm = l2_norm(u);
        const double residual = gnorm / unorm;
        if (callback) {
            callback(IterationRecord{iter, e_u, mom.q - mom.p, residual, min_value(u),
                                     max_value(u)});
        }
        if (residual <= config.gradient_tolerance) {
            converged = true;
            break;
        }
        if (iter >= config.max_iterations) break;

        const double g2 = gnorm * gnorm;
        bool accepted = false;
        double try_alpha = alpha;
        Field next = u;
        Moments next_mom = mom;
        double e_next = e_u;
        for (int bt = 0; bt < 60; ++bt) {
            Field cand = symmetrized(axpy(-try_alpha, g, u));
            const Moments cm = moments(cand);
            if (cm.p > 0.0 && cm.q > 0.0) {
                const double t = std::pow(cm.q / cm.p, 1.0 / (pstar - 2.0));
                const Moments pm{t * t * cm.q, std::pow(t, pstar) * cm.p};
                const double e_cand = energy_from(pm, pstar);
                if (e_cand <= e_u - config.armijo_slope * try_alpha * g2) {
                    next = scaled(cand, t);
                    next_mom = pm;
                    e_next = e_cand;
                    accepted = true;
                    break;
                }
            }
            try_alpha *= config.backtracking_factor;
        }
        if (!accepted) break;  // numerical decrease floor reached

        u = std::move(next);
        mom = next_mom;
        e_u = e_next;
        ++iter;
        alpha = std::min(try_alpha * 1.5, 1e3 * config.step_size);

        if (e_u > 1e6 * initial_energy) {
            throw Diverged("descent_solve: energy exceeded 1e6 x initial energy");
        }
        if (l2_norm(u) < 1e-12) {
            throw DegenerateIterate("descent_solve: iterate collapsed to zero");
        }
    }

    const Field g_final = deflated(energy_gradient(u));
    report.energy = e_u;
    report.nehari_value = mom.q - mom.p;
    report.gradient_residual = l2_norm(g_final) / l2_norm(u);
    report.min_value = min_value(u);
    report.max_value = max_value(u);
    report.iterations = iter;
    report.converged = converged;
    const double margin = 1e-6 * linf_norm(u);
    report.sign_changing = report.min_value < -margin && report.max_value > margin;
    if (sym) {
        report.equivariance_defect =
            is_equivariant(u, *config.group, config.gradient_tolerance,
                           HaarSampling::lattice_exact)
                .defect;
    }
    return {std::move(u), report};
}

}  // namespace fcslab
