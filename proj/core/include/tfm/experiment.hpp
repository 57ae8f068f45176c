#pragma once

#include "tfm/metrics.hpp"
#include "tfm/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace tfm {

/// Replicated comparison of estimators on simulated or file data.
///
/// Config files are JSON:
///
///     {
///       "methods": ["mopca", "pmopca", "ipmopca", "itipup"],
///       "replications": 20,
///       "threads": 1,
///       "output": "results/",
///       "emit_loadings": false,
///       "varimax": false,
///       "simulation": {"scenario": 1, "size": 1, "seed": 7},
///       "estimator": {"ranks": [2, 3, 4], "kmax": 8, "tol": 1e-6, "max_iter": 50,
///                     "center": true, "update_within_sweep": true,
///                     "stopping_norm": "spectral", "lags": 1},
///       "overrides": {"ipmopca": {"max_iter": 10}}
///     }
///
/// "simulation" may instead (or additionally) spell out T, dims, ranks, phi,
/// psi. "input" names a tensor-series file in place of "simulation"; truth
/// metrics are then reported as nan. With a simulation and no "ranks" the
/// true ranks are used; "ranks": "auto" selects them by eigenvalue ratio.
struct ExperimentConfig {
    std::vector<Method> methods;
    std::optional<SimConfig> simulation;
    std::optional<std::filesystem::path> input;
    EstimatorConfig estimator;
    bool ranks_from_truth = true;
    std::map<Method, EstimatorConfig> overrides;
    /// Methods whose override sets "ranks" explicitly.
    std::map<Method, bool> override_sets_ranks;
    std::size_t replications = 1;
    std::size_t threads = 1;
    std::optional<std::filesystem::path> output_dir;
    bool emit_loadings = false;
    bool varimax = false;

    EstimatorConfig config_for(Method m) const;
    /// True when `m` should be fitted with the simulation's true ranks.
    bool uses_true_ranks(Method m) const;
    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct MethodRun {
    std::size_t replication = 0;
    Method method = Method::MoPCA;
    EvalReport report;
    std::size_t iterations = 0;
    bool converged = true;
    std::optional<std::string> error;
};

struct ExperimentResult {
    /// Ordered by replication, then by the configured method order.
    std::vector<MethodRun> runs;
};

/// Runs every replication. A failing estimator produces a run with `error`
/// set; the rest of the experiment continues. Progress and errors go to `log`.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct MethodSummary {
    std::size_t runs = 0;
    std::vector<double> mean_distance;
    std::vector<double> sd_distance;
    double mean_rmse = 0.0;
    double mean_accuracy = 0.0;
    double mean_reconstruction = 0.0;
    double mean_seconds = 0.0;
};

/// Mean and sample standard deviation over the successful runs of `method`.
MethodSummary summarize(const ExperimentResult& result, Method method);

/// CSV with header rep,method,mode,distance_d,rmse,acc,re,seconds: one row per
/// (replication, method, mode), then "mean" and "sd" rows per (method, mode).
/// Failed runs appear as a single row with mode "error" and nan values.
/// `medians` adds a "median" row after each "sd" row.
void write_results_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result,
                       bool medians = false);

}  // namespace tfm
