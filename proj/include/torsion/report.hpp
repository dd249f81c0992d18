#pragma once

// Batch commands behind the command-line tool. Each command validates its
// RunConfig, computes a result payload and wraps it in a Report whose header
// carries the only non-deterministic field (the timestamp).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "torsion/analytic.hpp"

namespace torsion::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

enum class Format { Json, Csv };
Format parse_format(std::string_view text);

struct RunConfig {
    int dim = 2;
    double radius = 0.5;
    double sigma_in = 2.0;
    double sigma_out = 1.0;
    Constraint constraint = Constraint::Volume;
    int kmin = 1;
    std::optional<int> kmax;  // command-specific default when unset

    // FEM verification
    double mesh_h = 0.01;
    int mesh_levels = 2;
    std::optional<double> t_max;  // default t list when unset
    int n_t = 4;
    std::string suite = "all";    // radial | fem | all
    int radial_cells = 4096;

    // sweep grid: rho log-spaced, radius linear
    double rho_min = 0.1;
    double rho_max = 10.0;
    int rho_count = 10;
    double radius_min = 0.1;
    double radius_max = 0.9;
    int radius_count = 10;

    std::string out;  // empty = stdout
    Format format = Format::Json;

    /// Throws DomainError on any invalid field.
    void validate() const;
    BallGeometry geometry() const { return BallGeometry(dim, radius); }
    Medium medium() const { return Medium(sigma_in, sigma_out); }
    nlohmann::json to_json() const;
};

struct Report {
    std::string command;
    nlohmann::json header;  // tool, version, timestamp
    nlohmann::json config;
    nlohmann::json result;
    /// Plot-ready rows for CSV output; empty when the command has no CSV form.
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    bool passed = true;  // verify only

    /// config + result, the part that must be reproducible byte for byte.
    nlohmann::json payload() const;
    std::string render(Format format) const;
};

/// %.17g, the CSV float serialization.
std::string format_double(double value);

Report cmd_classify(const RunConfig& config);
Report cmd_qcurve(const RunConfig& config);
Report cmd_sweep(const RunConfig& config);
Report cmd_verify(const RunConfig& config);

/// Mode used as tail evidence in classify reports.
inline constexpr int kTailMode = 1000;

}  // namespace torsion::cli
