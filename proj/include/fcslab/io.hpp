#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fcslab/grid.hpp"
#include "fcslab/variational.hpp"

namespace fcslab {

// ---- field files -------------------------------------------------------------
//
// Binary layout (little-endian, bit-exact round trip):
//   magic "FBLF" | u32 version = 1 | u8 N | f64 s | f64 L | u32 M |
//   M^N f64 values, row-major, last axis fastest.

void write_field(const std::string& path, const Field& field);
Field read_field(const std::string& path);

// ---- run configuration ---------------------------------------------------------

/// Flat key=value configuration; unknown keys are rejected.
struct RunConfig {
    int dim = 2;
    double s = 0.5;
    double box = 40.0;
    int grid = 128;
    int group_j = 0;  // 0 = no group
    int theta_samples = 8;
    std::string lambda_mode = "radial_constraint";
    std::string init = "random_bump";
    std::uint64_t seed = 1;
    int max_iter = 5000;
    double tol = 1e-6;
    std::string out_dir = ".";

    GridSpec make_grid() const;
    SolverConfig make_solver_config() const;
    std::optional<EquivariantGroup> make_group() const;

    /// The resolved key/value view, in canonical key order (for reports).
    std::vector<std::pair<std::string, std::string>> items() const;
};

/// Parses `key = value` lines ('#' comments, blank lines allowed). Throws
/// ParseError on unknown keys or malformed values.
RunConfig parse_config_file(const std::string& path, RunConfig base = {});

/// Applies one `key=value` override (CLI flags funnel through this).
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

// ---- convergence CSV ------------------------------------------------------------

/// Writes "iter,energy,nehari,grad_residual,min_u,max_u" rows; numbers are
/// printed with 17 significant digits so identical runs produce identical
/// bytes.
class ConvergenceCsvWriter {
public:
    explicit ConvergenceCsvWriter(std::ostream& out);
    void write(const IterationRecord& record);

private:
    std::ostream& out_;
};

// ---- JSON reports ----------------------------------------------------------------

/// Minimal ordered JSON writer (objects keep insertion order, numbers are
/// emitted with 17 significant digits).
class JsonObject {
public:
    JsonObject& put(const std::string& key, double value);
    JsonObject& put(const std::string& key, std::int64_t value);
    JsonObject& put(const std::string& key, bool value);
    JsonObject& put(const std::string& key, const std::string& value);
    JsonObject& put_object(const std::string& key, const JsonObject& value);
    std::string dump(int indent = 2) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

JsonObject report_to_json(const SolverReport& report);
JsonObject config_to_json(const RunConfig& config);

std::string format_double(double value);  // %.17g

}  // namespace fcslab
