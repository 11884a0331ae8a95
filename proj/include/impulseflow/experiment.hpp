#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impulseflow/entropy.hpp"
#include "impulseflow/hypotheses.hpp"
#include "impulseflow/systems.hpp"

namespace impulseflow {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Validation failure; `field` is the dotted config path at fault.
class ConfigError : public PreconditionError {
public:
    ConfigError(std::string field, const std::string& what)
        : PreconditionError(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class ExperimentKind { Simulate, CheckHypotheses, Measure, Entropy, Quotient };

std::string_view experiment_name(ExperimentKind k);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_from_name(std::string_view name);

struct SimulateParams {
    std::optional<StateVector> initial_state;  // fixture default when absent
    double horizon = 100.0;
    double dt_sample = 0.01;
};

struct MeasureParams {
    std::optional<StateVector> initial_state;
    double horizon = 1000.0;
    double dt_sample = 0.01;
    std::optional<double> burn_in;  // 10% of the horizon when absent
    std::string grid;               // "lo:hi:bins,..."; fixture default when empty
    double t_shift = 1.0;
};

struct EntropyParams {
    std::vector<double> T_list;
    std::vector<double> eps_list;
    std::vector<double> delta_list;
    std::size_t candidate_count = 4096;
    double dt_check = 0.0;
    std::size_t saturation_divisor = 8;
};

struct QuotientParams {
    std::filesystem::path points_csv;  // sampled points when empty
    std::size_t sample_count = 200;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    ExperimentKind experiment = ExperimentKind::Simulate;
    std::string system = "annulus";
    Overrides overrides;
    IntegratorConfig integrator;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::filesystem::path output_dir = "out";

    SimulateParams simulate;
    MeasureParams measure;
    HypothesesConfig hypotheses;
    EntropyParams entropy;
    QuotientParams quotient;
};

/// Defaults of one experiment kind on one fixture, before any config file.
ExperimentConfig default_config(ExperimentKind kind, std::string_view system);

/// Parses a JSON config. Sections for other experiments are ignored; unknown
/// keys inside the used sections are rejected. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text, ExperimentKind kind,
                              const std::filesystem::path& base_dir = {},
                              std::optional<std::string> system_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind,
                             std::optional<std::string> system_override = std::nullopt);

/// Checks every module precondition that can be checked without computing.
void validate_config(const ExperimentConfig& cfg);

/// Resolved config as written to the manifest (no worker count or paths).
std::string resolved_config_json(const ExperimentConfig& cfg);

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::string summary_json;
};

/// Runs the experiment and writes its outputs plus manifest.json into
/// cfg.output_dir. On failure every file written by this run is removed
/// before the exception propagates.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace impulseflow
