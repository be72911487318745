#pragma once

#include "degflow/convexity.hpp"
#include "degflow/fdsolver.hpp"
#include "degflow/jko.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace degflow {

struct MobilityConfig {
    std::string kind = "power";  // "power" or "unit" (test coefficient a = 1)
    double p = 2.0;
};

struct PotentialConfig {
    std::string kind = "zero";  // "zero" or "quadratic"
    double c = 0.0;
};

struct EnergyConfig {
    std::string kind = "entropy";  // "entropy" or "power"
    double m = 2.0;
};

struct InitialConfig {
    std::string kind = "gaussian";  // gaussian | uniform | bump | csv
    std::string space = "y";        // "y" (transformed line) or "x" (original interval)
    double mean = 0.0, sigma = 1.0;
    double lo = 0.0, hi = 1.0;
    double center = 0.0, width = 0.5;
    std::string path;
};

struct ExperimentConfig {
    std::string name = "experiment";
    MobilityConfig mobility;
    PotentialConfig potential;
    EnergyConfig energy;
    InitialConfig initial;
    std::string solver = "jko";  // jko | fd | both
    JkoConfig jko;
    int save_every = 0;          // JKO profiles written every k steps (0: first and last only)
    FdConfig fd;
    std::vector<double> compare_times;
    int analysis_grid = 1001;
    ConvexityGrid convexity_grid;
    double convexity_lambda = 0.0;
    int transform_points = 201;
    int estimate_pairs = 100;
    std::uint64_t seed = 0;
    std::string out_dir = "degflow_out";

    std::optional<std::string> sweep_parameter;  // dotted path into the config JSON
    std::vector<nlohmann::json> sweep_values;

    nlohmann::json raw;  // the parsed document, used for echoing and sweeps
};

/// Strict parse: unknown keys raise ConfigError naming the full key path,
/// wrong types and out-of-range values name the field. Relative CSV paths
/// are resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
/// Reads and parses a JSON file; syntax errors report the byte position.
ExperimentConfig load_config(const std::string& path);

/// Model objects built from a config.
struct Model {
    MobilityFunction mobility = MobilityFunction::power(2.0);
    bool unit = false;
    PotentialSpec potential;
    InternalEnergy energy = InternalEnergy::entropy(InternalEnergy::LinearCase{});
    std::optional<CoordinateMap> map;
    std::optional<CoefficientField> coeff;  // empty for slow-decay mobilities
};
Model build_model(const ExperimentConfig& cfg);

/// Initial datum on the transformed line (converted from x when needed).
DensityProfile initial_density_y(const ExperimentConfig& cfg, const Model& model);
/// Initial datum on (-1,1) (converted from y when needed).
DensityProfileX initial_density_x(const ExperimentConfig& cfg, const Model& model);

enum class Stage { Analyze, Transform, Convexity, SolveJko, SolveFd, Compare, Full };

/// Runs one stage (or the whole pipeline for Stage::Full, which follows
/// cfg.solver), writes its artifacts and report.json into cfg.out_dir and
/// returns the report. Deterministic for a given config.
nlohmann::json run_experiment(const ExperimentConfig& cfg, Stage stage = Stage::Full, bool quiet = true);

/// Runs every sweep value in its own subdirectory sweep_<k>, at most
/// `threads` at a time (0: DEGFLOW_THREADS or the hardware concurrency).
nlohmann::json run_sweep(const ExperimentConfig& cfg, unsigned threads = 0, bool quiet = true);

/// {"error": {"kind": ..., "message": ...}}
nlohmann::json error_json(const std::string& kind, const std::string& message);

}  // namespace degflow
