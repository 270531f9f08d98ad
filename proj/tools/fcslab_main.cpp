// fcslab command line: batch front-end for the spectral variational toolkit.
//
// Subcommands:
//   constants     print C(N,s), S(N,s) and the critical exponent
//   bubble-check  sample the extremizer profile, report Sobolev quotient,
//                 PDE residual and Nehari scale, write the field
//   solve         Nehari-constrained descent, write field + CSV + JSON report
//   diagnose      Levy concentration profile and scale extraction for a field
//
// Exit statuses: 0 success, 1 usage/parse or file-format error, 2 domain
// error, 3 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fcslab/concentration.hpp"
#include "fcslab/constants.hpp"
#include "fcslab/equivariance.hpp"
#include "fcslab/fractional.hpp"
#include "fcslab/io.hpp"
#include "fcslab/transforms.hpp"
#include "fcslab/variational.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitSolver = 3;

struct ConfigCli {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key = value config file");
        auto track = [this](const std::string& key) {
            return [this, key](const std::string& value) {
                overrides.emplace_back(key, value);
            };
        };
        cmd->add_option_function<std::string>("--dim", track("dim"), "space dimension N");
        cmd->add_option_function<std::string>("--s", track("s"), "fractional order in (0,1)");
        cmd->add_option_function<std::string>("--box", track("box"), "box length L");
        cmd->add_option_function<std::string>("--grid", track("grid"), "points per axis M");
        cmd->add_option_function<std::string>("--group-j", track("group_j"),
                                              "number of C^2 blocks (0 = no group)");
        cmd->add_option_function<std::string>("--theta-samples", track("theta_samples"),
                                              "circle samples K (multiple of 4)");
        cmd->add_option_function<std::string>("--lambda-mode", track("lambda_mode"),
                                              "trailing factor handling: full_average | "
                                              "radial_constraint | trivial");
        cmd->add_option_function<std::string>("--init", track("init"),
                                              "random_bump | bubble_seeded | user_field");
        cmd->add_option_function<std::string>("--seed", track("seed"), "RNG seed");
        cmd->add_option_function<std::string>("--max-iter", track("max_iter"),
                                              "iteration budget");
        cmd->add_option_function<std::string>("--tol", track("tol"),
                                              "relative gradient residual target");
        cmd->add_option_function<std::string>("--out", track("out_dir"),
                                              "output directory");
    }

    fcslab::RunConfig resolve() const {
        fcslab::RunConfig config;
        if (!config_path.empty()) config = fcslab::parse_config_file(config_path);
        for (const auto& [key, value] : overrides) {
            fcslab::apply_override(config, key, value);
        }
        return config;
    }
};

std::filesystem::path prepare_out_dir(const fcslab::RunConfig& config) {
    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int run_constants(int dim, double s) {
    const double c = fcslab::dirichlet_constant(dim, s);
    std::printf("C(%d, %g)    = %.12g\n", dim, s, c);
    if (dim > 2.0 * s) {
        std::printf("S(%d, %g)    = %.12g\n", dim, s, fcslab::sobolev_constant(dim, s));
        std::printf("2*_s(%d, %g) = %.12g\n", dim, s, fcslab::critical_exponent(dim, s));
    } else {
        std::printf("S(%d, %g)    = undefined (N <= 2s)\n", dim, s);
        std::printf("2*_s(%d, %g) = undefined (N <= 2s)\n", dim, s);
    }
    return kExitOk;
}

int run_bubble_check(const fcslab::RunConfig& config, double lambda) {
    const fcslab::GridSpec grid = config.make_grid();
    const auto dir = prepare_out_dir(config);

    fcslab::BubbleParams params;
    params.lambda = lambda;
    params.center.assign(static_cast<std::size_t>(grid.dimension()), 0.0);
    const auto residual = fcslab::bubble_pde_residual(grid, params);

    params.mu = residual.best_mu;
    const fcslab::Field field = fcslab::bubble(grid, params);
    fcslab::write_field((dir / "bubble.fblf").string(), field);

    const double pstar = grid.critical_exponent();
    const double q = fcslab::quadratic_form(field);
    const double p = fcslab::integrate_power(field, pstar);
    const double s_ns = fcslab::sobolev_constant(grid.dimension(), grid.order());
    const double quotient = std::pow(p, 2.0 / pstar) / q;
    const double scale = fcslab::nehari_scale(field);

    fcslab::JsonObject report;
    report.put("lambda", lambda)
        .put("best_mu", residual.best_mu)
        .put("pde_residual", residual.residual)
        .put("decay_warning", residual.decay_warning)
        .put("sobolev_quotient", quotient)
        .put("sharp_constant", s_ns)
        .put("quotient_over_sharp", quotient / s_ns)
        .put("nehari_scale_at_best_mu", scale)
        .put("field_file", (dir / "bubble.fblf").string());
    fcslab::JsonObject doc;
    doc.put_object("config", fcslab::config_to_json(config));
    doc.put_object("bubble_check", report);
    const std::string text = doc.dump();
    std::ofstream json_out(dir / "bubble_report.json");
    json_out << text << '\n';
    std::cout << text << std::endl;
    return kExitOk;
}

int run_solve(const fcslab::RunConfig& config, const std::string& in_field) {
    fcslab::RunConfig resolved = config;
    std::optional<fcslab::Field> initial;
    if (resolved.init == "user_field") {
        if (in_field.empty()) {
            throw fcslab::ParseError("solve: init=user_field requires --in-field");
        }
        initial = fcslab::read_field(in_field);
        const auto& g = initial->grid();
        resolved.dim = g.dimension();
        resolved.s = g.order();
        resolved.box = g.box_length();
        resolved.grid = g.points_per_axis();
    }
    const fcslab::GridSpec grid = resolved.make_grid();
    fcslab::SolverConfig solver = resolved.make_solver_config();
    solver.initial_field = std::move(initial);

    const auto dir = prepare_out_dir(resolved);
    std::ofstream csv_stream(dir / "convergence.csv", std::ios::trunc);
    if (!csv_stream) throw fcslab::FileFormatError("cannot open convergence.csv");
    fcslab::ConvergenceCsvWriter csv(csv_stream);

    auto [field, report] = fcslab::descent_solve(
        grid, solver, [&csv](const fcslab::IterationRecord& r) { csv.write(r); });
    csv_stream.close();

    fcslab::write_field((dir / "solution.fblf").string(), field);

    fcslab::JsonObject doc;
    doc.put_object("config", fcslab::config_to_json(resolved));
    doc.put_object("report", fcslab::report_to_json(report));
    const std::string text = doc.dump();
    std::ofstream json_out(dir / "report.json");
    json_out << text << '\n';
    std::cout << text << std::endl;
    return kExitOk;
}

int run_diagnose(const std::string& field_path, const fcslab::RunConfig& config,
                 std::vector<double> deltas, const std::vector<double>& delta_fracs,
                 int radius_count) {
    const fcslab::Field field = fcslab::read_field(field_path);
    const auto dir = prepare_out_dir(config);
    const double total =
        fcslab::integrate_power(field, field.grid().critical_exponent());
    for (double f : delta_fracs) deltas.push_back(f * total);

    std::vector<double> radii;
    const double rmax = 0.5 * field.grid().box_length();
    for (int k = 1; k <= radius_count; ++k) {
        radii.push_back(rmax * static_cast<double>(k) / radius_count);
    }
    const auto profile = fcslab::concentration_profile(field, radii);

    std::ofstream csv(dir / "profile.csv", std::ios::trunc);
    csv << "r,Q";
    for (int d = 0; d < field.grid().dimension(); ++d) csv << ",center_" << d;
    csv << '\n';
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        csv << fcslab::format_double(profile.radii[i]) << ','
            << fcslab::format_double(profile.values[i]);
        for (double c : profile.centers[i]) csv << ',' << fcslab::format_double(c);
        csv << '\n';
    }

    std::ofstream scales(dir / "scales.csv", std::ios::trunc);
    scales << "delta,r,achieved,side_condition";
    for (int d = 0; d < field.grid().dimension(); ++d) scales << ",center_" << d;
    scales << '\n';
    std::printf("total critical mass = %.12g\n", total);
    for (double delta : deltas) {
        const auto scale = fcslab::concentration_scale(field, delta);
        scales << fcslab::format_double(delta) << ','
               << fcslab::format_double(scale.radius) << ','
               << fcslab::format_double(scale.achieved) << ','
               << (scale.side_condition ? 1 : 0);
        for (double c : scale.center) scales << ',' << fcslab::format_double(c);
        scales << '\n';
        std::printf("delta = %.6g -> r = %.6g (achieved %.6g, side condition %s)\n",
                    delta, scale.radius, scale.achieved,
                    scale.side_condition ? "ok" : "violated");
    }
    std::printf("wrote %s and %s\n", (dir / "profile.csv").c_str(),
                (dir / "scales.csv").c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral variational toolkit for the fractional critical "
                 "Schrodinger equation on periodic boxes"};
    app.require_subcommand(1);

    auto* constants = app.add_subcommand("constants", "print C(N,s), S(N,s), 2*_s");
    int c_dim = 2;
    double c_s = 0.5;
    constants->add_option("--dim", c_dim, "space dimension N")->required();
    constants->add_option("--s", c_s, "fractional order")->required();

    auto* bubble = app.add_subcommand("bubble-check",
                                      "extremizer sampling and PDE residual report");
    ConfigCli bubble_cfg;
    bubble_cfg.attach(bubble);
    double bubble_lambda = 1.0;
    bubble->add_option("--lambda", bubble_lambda, "profile scale");

    auto* solve = app.add_subcommand("solve", "Nehari-constrained descent");
    ConfigCli solve_cfg;
    solve_cfg.attach(solve);
    std::string in_field;
    solve->add_option("--in-field", in_field, "initial field file (init=user_field)");

    auto* diagnose = app.add_subcommand("diagnose", "concentration diagnostics");
    ConfigCli diagnose_cfg;
    diagnose_cfg.attach(diagnose);
    std::string diag_field;
    diagnose->add_option("field", diag_field, "field file to analyze")->required();
    std::vector<double> deltas, delta_fracs;
    diagnose->add_option("--delta", deltas, "absolute mass targets");
    diagnose->add_option("--delta-frac", delta_fracs,
                         "mass targets as fractions of the total");
    int radius_count = 32;
    diagnose->add_option("--radii", radius_count, "profile sample count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (constants->parsed()) return run_constants(c_dim, c_s);
        if (bubble->parsed()) return run_bubble_check(bubble_cfg.resolve(), bubble_lambda);
        if (solve->parsed()) return run_solve(solve_cfg.resolve(), in_field);
        if (diagnose->parsed()) {
            return run_diagnose(diag_field, diagnose_cfg.resolve(), deltas, delta_fracs,
                                radius_count);
        }
    } catch (const fcslab::ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitUsage;
    } catch (const fcslab::FileFormatError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitUsage;
    } catch (const fcslab::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << std::endl;
        return kExitSolver;
    } catch (const fcslab::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitDomain;
    }
    return kExitUsage;
}
