#pragma once

/**
 * @file config.hpp
 * @brief Run configuration files.
 *
 * Configuration files are YAML documents with a required `version: 1` key
 * and the sections `system`, `initial`, `integrator`, and optionally
 * `input`, `report` and `output`. See configs/pendulum.cfg and the README
 * for the full schema. Point indices are zero-based.
 */

#include <optional>
#include <stdexcept>
#include <string>

#include "phsim/diagnostics.hpp"
#include "phsim/integrator.hpp"
#include "phsim/model.hpp"

namespace phsim::cli {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
public:
    enum class Kind { syntax, semantic, io };

    ConfigError(Kind kind, std::string field, std::optional<int> line, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    /// Dotted path of the offending field, empty for syntax errors.
    const std::string& field() const noexcept { return field_; }
    /// One-based line number, when known.
    const std::optional<int>& line() const noexcept { return line_; }

private:
    Kind kind_;
    std::string field_;
    std::optional<int> line_;
};

enum class InputKind { none, viscous };

struct InputSelection {
    InputKind kind = InputKind::none;
    double damping = 0.0;

    InputSignal signal() const;
};

struct OutputPaths {
    std::string trajectory;
    std::string report;
};

struct RunConfig {
    int version = kConfigVersion;
    MechanicalSystem system;
    State initial;
    /// Whether initial strains came from the file rather than Ctilde(q0).
    bool strain_given = false;
    IntegratorParams integrator;
    InputSelection input;
    ReportTolerances tolerances;
    OutputPaths output;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Command-line overrides of config scalars.
struct Overrides {
    std::optional<double> h;
    std::optional<double> t_end;
    std::optional<Scheme> scheme;
    std::optional<double> newton_tol;
    std::optional<std::string> trajectory_path;
    std::optional<std::string> report_path;
};

/// Applies the overrides and re-validates; throws ConfigError.
void apply_overrides(RunConfig& config, const Overrides& overrides);

Scheme parse_scheme(const std::string& name);

} // namespace phsim::cli
