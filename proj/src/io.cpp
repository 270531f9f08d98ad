#include "fcslab/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fcslab {
namespace {

// All numeric I/O is little-endian; this codebase targets little-endian hosts
// and the writers below store native byte order.
template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw FileFormatError("field file: truncated");
    return value;
}

}  // namespace

void write_field(const std::string& path, const Field& field) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError("cannot open for writing: " + path);
    const GridSpec& grid = field.grid();
    out.write("FBLF", 4);
    write_raw<std::uint32_t>(out, 1u);
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(grid.dimension()));
    write_raw<double>(out, grid.order());
    write_raw<double>(out, grid.box_length());
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(grid.points_per_axis()));
    out.write(reinterpret_cast<const char*>(field.values().data()),
              static_cast<std::streamsize>(field.size() * sizeof(double)));
    if (!out) throw FileFormatError("write failed: " + path);
}

Field read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FBLF", 4) != 0) {
        throw FileFormatError("field file: bad magic");
    }
    const auto version = read_raw<std::uint32_t>(in);
    if (version != 1u) throw FileFormatError("field file: unsupported version");
    const auto n = read_raw<std::uint8_t>(in);
    const auto s = read_raw<double>(in);
    const auto l = read_raw<double>(in);
    const auto m = read_raw<std::uint32_t>(in);
    GridSpec grid(static_cast<int>(n), s, l, static_cast<int>(m));
    std::vector<double> values(grid.point_count());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw FileFormatError("field file: truncated values");
    char extra;
    if (in.read(&extra, 1)) throw FileFormatError("field file: trailing bytes");
    return Field::from_values(grid, std::move(values));
}

// ---- run configuration -----------------------------------------------------------

GridSpec RunConfig::make_grid() const { return GridSpec(dim, s, box, grid); }

std::optional<EquivariantGroup> RunConfig::make_group() const {
    if (group_j == 0) return std::nullopt;
    LambdaMode mode;
    if (lambda_mode == "full_average") {
        mode = LambdaMode::full_average;
    } else if (lambda_mode == "radial_constraint") {
        mode = LambdaMode::radial_constraint;
    } else if (lambda_mode == "trivial") {
        mode = LambdaMode::trivial;
    } else {
        throw ParseError("unknown lambda_mode: " + lambda_mode);
    }
    return EquivariantGroup(group_j, dim, theta_samples, mode);
}

SolverConfig RunConfig::make_solver_config() const {
    SolverConfig sc;
    sc.max_iterations = max_iter;
    sc.gradient_tolerance = tol;
    sc.seed = seed;
    sc.group = make_group();
    if (init == "random_bump") {
        sc.init = InitKind::random_bump;
    } else if (init == "bubble_seeded") {
        sc.init = InitKind::bubble_seeded;
    } else if (init == "user_field") {
        sc.init = InitKind::user_field;
    } else {
        throw ParseError("unknown init: " + init);
    }
    return sc;
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
    return {
        {"dim", std::to_string(dim)},
        {"s", format_double(s)},
        {"box", format_double(box)},
        {"grid", std::to_string(grid)},
        {"group_j", std::to_string(group_j)},
        {"theta_samples", std::to_string(theta_samples)},
        {"lambda_mode", lambda_mode},
        {"init", init},
        {"seed", std::to_string(seed)},
        {"max_iter", std::to_string(max_iter)},
        {"tol", format_double(tol)},
        {"out_dir", out_dir},
    };
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: bad integer for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ParseError("config: bad integer for " + key + ": '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: bad real for " + key + ": '" + value + "'");
    }
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

}  // namespace

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "dim") {
        config.dim = parse_int(key, value);
    } else if (key == "s") {
        config.s = parse_real(key, value);
    } else if (key == "box") {
        config.box = parse_real(key, value);
    } else if (key == "grid") {
        config.grid = parse_int(key, value);
    } else if (key == "group_j") {
        config.group_j = parse_int(key, value);
    } else if (key == "theta_samples") {
        config.theta_samples = parse_int(key, value);
    } else if (key == "lambda_mode") {
        config.lambda_mode = value;
    } else if (key == "init") {
        config.init = value;
    } else if (key == "seed") {
        config.seed = parse_u64(key, value);
    } else if (key == "max_iter") {
        config.max_iter = parse_int(key, value);
    } else if (key == "tol") {
        config.tol = parse_real(key, value);
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else {
        throw ParseError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config: line " + std::to_string(line_no) +
                             " is not key = value");
        }
        apply_override(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

// ---- convergence CSV ---------------------------------------------------------------

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

ConvergenceCsvWriter::ConvergenceCsvWriter(std::ostream& out) : out_(out) {
    out_ << "iter,energy,nehari,grad_residual,min_u,max_u\n";
}

void ConvergenceCsvWriter::write(const IterationRecord& record) {
    out_ << record.iteration << ',' << format_double(record.energy) << ','
         << format_double(record.nehari) << ','
         << format_double(record.gradient_residual) << ','
         << format_double(record.min_value) << ','
         << format_double(record.max_value) << '\n';
}

// ---- JSON ---------------------------------------------------------------------------

namespace {

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

JsonObject& JsonObject::put(const std::string& key, double value) {
    entries_.emplace_back(key, format_double(value));
    return *this;
}

JsonObject& JsonObject::put(const std::string& key, std::int64_t value) {
    entries_.emplace_back(key, std::to_string(value));
    return *this;
}

JsonObject& JsonObject::put(const std::string& key, bool value) {
    entries_.emplace_back(key, value ? "true" : "false");
    return *this;
}

JsonObject& JsonObject::put(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, '"' + escape(value) + '"');
    return *this;
}

JsonObject& JsonObject::put_object(const std::string& key, const JsonObject& value) {
    entries_.emplace_back(key, value.dump());
    return *this;
}

std::string JsonObject::dump(int indent) const {
    std::ostringstream out;
    out << "{\n";
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        out << pad << '"' << escape(entries_[i].first) << "\": ";
        // Nested objects arrive pre-rendered; re-indent their lines.
        std::string value = entries_[i].second;
        std::string shifted;
        for (std::size_t c = 0; c < value.size(); ++c) {
            shifted += value[c];
            if (value[c] == '\n' && c + 1 < value.size()) shifted += pad;
        }
        out << shifted;
        out << (i + 1 < entries_.size() ? ",\n" : "\n");
    }
    out << "}";
    return out.str();
}

JsonObject report_to_json(const SolverReport& report) {
    JsonObject obj;
    obj.put("energy", report.energy)
        .put("nehari_value", report.nehari_value)
        .put("gradient_residual", report.gradient_residual)
        .put("min_value", report.min_value)
        .put("max_value", report.max_value)
        .put("iterations", static_cast<std::int64_t>(report.iterations))
        .put("converged", report.converged)
        .put("sign_changing", report.sign_changing)
        .put("equivariance_defect", report.equivariance_defect);
    return obj;
}

JsonObject config_to_json(const RunConfig& config) {
    JsonObject obj;
    for (const auto& [key, value] : config.items()) {
        if (key == "dim" || key == "grid" || key == "group_j" ||
            key == "theta_samples" || key == "seed" || key == "max_iter") {
            obj.put(key, static_cast<std::int64_t>(std::stoll(value)));
        } else if (key == "s" || key == "box" || key == "tol") {
            obj.put(key, std::stod(value));
        } else {
            obj.put(key, value);
        }
    }
    return obj;
}

}  // namespace fcslab
