// tfm: command-line front end for simulation, estimation and benchmarking of
// tensor factor models.

#include "tfm/baseline.hpp"
#include "tfm/errors.hpp"
#include "tfm/experiment.hpp"
#include "tfm/io.hpp"
#include "tfm/spectral.hpp"
#include "tfm/varimax.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace tfm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

Dims parse_dims(const std::string& text, const std::string& flag) {
    Dims out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || item.front() == '-')
            throw DimensionError(flag + ": '" + text + "' is not a comma-separated list of positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw DimensionError(flag + ": empty list");
    return out;
}

std::string join(const Dims& d) {
    std::string s;
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) { return fs::path(prefix.string() + suffix); }

struct EstimatorFlags {
    std::string method = "ipmopca";
    std::string ranks = "auto";
    std::size_t kmax = 0;
    double tol = 1e-6;
    std::size_t max_iter = 50;
    bool no_center = false;
    bool no_update = false;
    std::size_t lags = 1;
    std::string norm = "spectral";
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& f) {
    cmd->add_option("--method", f.method, "mopca | pmopca | ipmopca | itipup")->capture_default_str();
    cmd->add_option("--ranks", f.ranks, "k1,k2,... or auto (eigenvalue-ratio selection)")->capture_default_str();
    cmd->add_option("--kmax", f.kmax, "Largest rank considered by auto selection (default min(8, min p_d - 1))");
    cmd->add_option("--tol", f.tol, "Stopping tolerance on the projector change")->capture_default_str();
    cmd->add_option("--max-iter", f.max_iter, "Maximum number of sweeps")->capture_default_str();
    cmd->add_flag("--no-center", f.no_center, "Do not remove the temporal mean");
    cmd->add_flag("--no-update-within-sweep", f.no_update, "Project every mode with the previous sweep's loadings");
    cmd->add_option("--lags", f.lags, "Lag count for itipup")->capture_default_str();
    cmd->add_option("--stopping-norm", f.norm, "spectral | frobenius")->capture_default_str();
}

Method method_flag(const std::string& name) {
    auto m = parse_method(name);
    if (!m) throw DimensionError("--method: unknown method '" + name + "'");
    return *m;
}

// Applies only the flags present on the command line.
void apply_estimator_flags(const CLI::App* cmd, const EstimatorFlags& f, EstimatorConfig& cfg, bool all,
                           bool with_method = true) {
    auto given = [&](const char* name) { return all || cmd->count(name) > 0; };
    if (with_method && given("--method")) cfg.method = method_flag(f.method);
    if (given("--ranks")) {
        if (f.ranks == "auto")
            cfg.ranks.reset();
        else
            cfg.ranks = parse_dims(f.ranks, "--ranks");
    }
    if (given("--kmax")) cfg.k_max = f.kmax;
    if (given("--tol")) cfg.iteration.tol = f.tol;
    if (given("--max-iter")) cfg.iteration.max_iter = f.max_iter;
    if (given("--no-center")) cfg.center = !f.no_center;
    if (given("--no-update-within-sweep")) cfg.iteration.update_within_sweep = !f.no_update;
    if (given("--lags")) cfg.lags = f.lags;
    if (given("--stopping-norm")) {
        if (f.norm == "spectral")
            cfg.iteration.norm = StoppingNorm::Spectral;
        else if (f.norm == "frobenius")
            cfg.iteration.norm = StoppingNorm::Frobenius;
        else
            throw DimensionError("--stopping-norm: expected spectral or frobenius, got '" + f.norm + "'");
    }
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    int scenario = 0;
    int size = 0;
    std::size_t T = 0;
    std::string dims, ranks;
    double phi = 0.0, psi = 0.0;
    std::uint64_t seed = 1;
    std::size_t reps = 1;
    fs::path out;
};

int run_simulate(const CLI::App* cmd, const SimulateArgs& a) {
    SimConfig cfg;
    if (a.scenario || a.size) cfg = standard_config(a.scenario ? a.scenario : 1, a.size ? a.size : 1);
    if (cmd->count("--T")) cfg.T = a.T;
    if (cmd->count("--dims")) cfg.dims = parse_dims(a.dims, "--dims");
    if (cmd->count("--ranks")) cfg.ranks = parse_dims(a.ranks, "--ranks");
    if (cmd->count("--phi")) cfg.phi = a.phi;
    if (cmd->count("--psi")) cfg.psi = a.psi;
    cfg.seed = a.seed;
    cfg.replications = a.reps;
    cfg.validate();

    for (std::size_t r = 0; r < a.reps; ++r) {
        const fs::path prefix = a.reps > 1 ? with_suffix(a.out, ".r" + std::to_string(r)) : a.out;
        if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
        const SimDataset ds = simulate_dataset(cfg, r);
        write_tensor_series(with_suffix(prefix, ".tns"), ds.series);
        write_tensor_series(with_suffix(prefix, ".signal.tns"), ds.truth.signals);
        write_tensor_series(with_suffix(prefix, ".cores.tns"), ds.truth.cores);
        write_loadings(with_suffix(prefix, ".truth"), ds.truth.loadings);
        std::cout << "wrote " << with_suffix(prefix, ".tns").string() << "  T=" << cfg.T << " dims=" << join(cfg.dims)
                  << " ranks=" << join(cfg.ranks) << " phi=" << cfg.phi << " psi=" << cfg.psi << '\n';
    }
    return 0;
}

// ---- estimate ----------------------------------------------------------------

struct EstimateArgs {
    fs::path input;
    fs::path out;
    bool varimax = false;
};

int run_estimate(const CLI::App* cmd, const EstimateArgs& a, const EstimatorFlags& f) {
    const TensorSeries series = read_tensor_series(a.input);
    EstimatorConfig cfg;
    apply_estimator_flags(cmd, f, cfg, true);
    FactorFit result = fit(series, cfg);

    if (a.varimax) {
        for (auto& m : result.loadings.mats) m = varimax(m).rotated;
        result.factors = extract_factors(series, result.loadings, cfg.center);
    }
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    write_loadings(a.out, result.loadings);
    write_tensor_series(with_suffix(a.out, ".factors.tns"), result.factors);
    if (result.mean) {
        TensorSeries mean(result.mean->dims());
        mean.push_back(*result.mean);
        write_tensor_series(with_suffix(a.out, ".mean.tns"), mean);
    }
    const double re = reconstruction_error(series, fitted_observations(result));

    nlohmann::json meta;
    meta["method"] = method_name(result.method);
    meta["input"] = a.input.string();
    meta["dims"] = series.shape();
    meta["T"] = series.length();
    meta["ranks"] = result.loadings.ranks();
    meta["centered"] = result.mean.has_value();
    meta["varimax"] = a.varimax;
    meta["iterations"] = result.iterations;
    meta["converged"] = result.converged;
    meta["per_sweep_distance"] = result.per_sweep_distance;
    meta["reconstruction_error"] = re;
    for (const auto& ev : result.eigvals) meta["eigenvalues"].push_back(std::vector<double>(ev.begin(), ev.end()));
    std::ofstream(with_suffix(a.out, ".json")) << meta.dump(2) << '\n';

    std::cout << "method " << method_name(result.method) << '\n'
              << "ranks " << join(result.loadings.ranks()) << '\n'
              << "iterations " << result.iterations << (result.converged ? " (converged)" : " (not converged)") << '\n'
              << "re " << re << '\n';
    return 0;
}

// ---- rank --------------------------------------------------------------------

struct RankArgs {
    fs::path input;
    std::size_t kmax = 0;
    bool no_center = false;
    std::string method = "mopca";
    std::size_t lags = 1;
};

int run_rank(const RankArgs& a) {
    const TensorSeries series = read_tensor_series(a.input);
    const std::size_t k_max = a.kmax ? a.kmax : default_k_max(series.shape());
    const Method method = method_flag(a.method);
    const TensorSeries work = a.no_center ? series : subtract_mean(series, temporal_mean(series));

    std::vector<Vector> spectra;
    if (method == Method::MoPCA) {
        for (std::size_t d = 0; d < series.order(); ++d)
            spectra.push_back(symmetric_eigensystem(mode_covariance(work, d)).values);
    } else if (method == Method::ITipup) {
        for (std::size_t d = 0; d < series.order(); ++d)
            spectra.push_back(symmetric_eigensystem(tipup_mode_matrix(work, d, a.lags)).values);
    } else {
        // Projected covariances of a fit whose ranks come from the moPCA rule.
        EstimatorConfig cfg;
        cfg.method = method;
        cfg.k_max = k_max;
        cfg.center = !a.no_center;
        cfg.compute_signals = false;
        spectra = fit(series, cfg).eigvals;
    }

    Dims k_hat;
    for (const auto& ev : spectra) k_hat.push_back(ratio_rank(ev, k_max));
    std::cout << join(k_hat) << '\n' << "mode j eigenvalue ratio\n";
    for (std::size_t d = 0; d < spectra.size(); ++d) {
        const Vector& ev = spectra[d];
        const double floor = kRatioFloor * ev(0);
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            std::printf("%zu %lld %.10g", d + 1, static_cast<long long>(j + 1), ev(j));
            if (j + 1 < ev.size()) std::printf(" %.6g", ev(j) / std::max(ev(j + 1), floor));
            std::printf("\n");
        }
    }
    return 0;
}

// ---- reconstruct -------------------------------------------------------------

struct ReconstructArgs {
    fs::path input;
    fs::path loadings;
    fs::path out;
    bool no_center = false;
};

int run_reconstruct(const ReconstructArgs& a) {
    const TensorSeries series = read_tensor_series(a.input);
    const LoadingSet loadings = read_loadings(a.loadings);
    const fs::path mean_path = with_suffix(a.loadings, ".mean.tns");
    std::optional<DenseTensor> mean;
    if (!a.no_center && fs::exists(mean_path)) {
        const TensorSeries m = read_tensor_series(mean_path);
        if (m.shape() != series.shape()) throw DimensionError(mean_path.string() + ": mean has the wrong shape");
        mean = m[0];
    }
    TensorSeries signals = project_signals(mean ? subtract_mean(series, *mean) : series, loadings);
    TensorSeries fitted(series.shape());
    for (const auto& s : signals) fitted.push_back(mean ? s + *mean : s);
    if (!a.out.empty()) write_tensor_series(a.out, fitted);
    std::cout << "re " << reconstruction_error(series, fitted) << '\n';
    return 0;
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
    fs::path config;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    fs::path out;
    bool varimax = false;
    bool emit_loadings = false;
    bool medians = false;
};

int run_bench(const CLI::App* cmd, const BenchArgs& a, const EstimatorFlags& f) {
    ExperimentConfig cfg = load_experiment_config(a.config);
    if (cmd->count("--method")) {
        cfg.methods.clear();
        for (const auto& name : CLI::detail::split(f.method, ',')) cfg.methods.push_back(method_flag(name));
    }
    if (cmd->count("--reps")) cfg.replications = a.reps;
    if (cmd->count("--seed")) {
        if (!cfg.simulation) throw DimensionError("--seed: the config has no simulation");
        cfg.simulation->seed = a.seed;
    }
    if (cmd->count("--threads")) cfg.threads = a.threads;
    if (cmd->count("--out")) cfg.output_dir = a.out;
    if (a.varimax) cfg.varimax = true;
    if (a.emit_loadings) cfg.emit_loadings = true;
    if (cmd->count("--ranks")) {
        cfg.ranks_from_truth = false;
        for (auto& [m, set] : cfg.override_sets_ranks) set = true;
    }
    // Estimator flags beat both the shared section and per-method overrides.
    apply_estimator_flags(cmd, f, cfg.estimator, false, false);
    for (auto& [m, over] : cfg.overrides) apply_estimator_flags(cmd, f, over, false, false);

    const ExperimentResult result = run_experiment(cfg, &std::cerr);
    if (cfg.output_dir) {
        const fs::path csv = *cfg.output_dir / "results.csv";
        std::ofstream os(csv);
        if (!os) throw IoError("cannot open " + csv.string() + " for writing");
        write_results_csv(os, cfg, result, a.medians);
        std::cout << "wrote " << csv.string() << '\n';
        std::printf("%-8s %5s %12s %12s %8s %10s %10s\n", "method", "runs", "mean_dist_1", "mean_rmse", "acc",
                    "re", "seconds");
        for (Method m : cfg.methods) {
            const MethodSummary s = summarize(result, m);
            std::printf("%-8s %5zu %12.6g %12.6g %8.2f %10.6g %10.4g\n", std::string(method_name(m)).c_str(), s.runs,
                        s.mean_distance.empty() ? std::nan("") : s.mean_distance[0], s.mean_rmse, s.mean_accuracy,
                        s.mean_reconstruction, s.mean_seconds);
        }
    } else {
        write_results_csv(std::cout, cfg, result, a.medians);
    }
    for (const auto& run : result.runs)
        if (run.error) return kExitNumeric;
    return 0;
}

// ---- convert -----------------------------------------------------------------

struct ConvertArgs {
    fs::path input;
    std::string shape;
    std::string layout = "row";
    fs::path out;
};

int run_convert(const ConvertArgs& a) {
    if (a.layout != "row" && a.layout != "column")
        throw DimensionError("--layout: expected row or column, got '" + a.layout + "'");
    const TensorSeries series = read_raw_series(a.input, parse_dims(a.shape, "--shape"),
                                                a.layout == "row" ? RawLayout::RowMajor : RawLayout::ColumnMajor);
    write_tensor_series(a.out, series);
    std::cout << "wrote " << a.out.string() << "  T=" << series.length() << " dims=" << join(series.shape()) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor factor model estimation: moPCA, PmoPCA, IPmoPCA and an auto-covariance baseline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tfm 0.1.0");
    app.failure_message(CLI::FailureMessage::help);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a Tucker factor-model dataset and its truth files");
    simulate->add_option("--scenario", sim.scenario, "1..4: (phi, psi) = (0,0), (0.6,0), (0,0.8), (0.6,0.8)")
        ->check(CLI::Range(1, 4));
    simulate->add_option("--size", sim.size, "1..5: (T, p) = (20,20) (50,20) (50,50) (100,50) (100,100)")
        ->check(CLI::Range(1, 5));
    simulate->add_option("--T", sim.T, "Number of observations");
    simulate->add_option("--dims", sim.dims, "p1,p2,...");
    simulate->add_option("--ranks", sim.ranks, "k1,k2,...");
    simulate->add_option("--phi", sim.phi, "AR coefficient of the cores");
    simulate->add_option("--psi", sim.psi, "AR coefficient of the noise");
    simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
    simulate->add_option("--reps", sim.reps, "Replications; files get a .r<k> suffix when > 1")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "Output prefix: <out>.tns, .signal.tns, .cores.tns, .truth.A<d>")
        ->required();

    EstimateArgs est;
    EstimatorFlags est_flags;
    auto* estimate = app.add_subcommand("estimate", "Fit a factor model to a tensor-series file");
    estimate->add_option("input", est.input, "Tensor-series file")->required();
    add_estimator_flags(estimate, est_flags);
    estimate->add_flag("--varimax", est.varimax, "Varimax-rotate the saved loadings");
    estimate->add_option("--out", est.out, "Output prefix: <out>.A<d>, .factors.tns, .mean.tns, .json")->required();

    RankArgs rk;
    auto* rank = app.add_subcommand("rank", "Eigenvalue-ratio rank selection; prints k1,k2,... then the spectra");
    rank->add_option("input", rk.input, "Tensor-series file")->required();
    rank->add_option("--kmax", rk.kmax, "Largest rank considered (default min(8, min p_d - 1))");
    rank->add_flag("--no-center", rk.no_center, "Do not remove the temporal mean");
    rank->add_option("--method", rk.method, "Matrix whose spectrum is used: mopca | pmopca | ipmopca | itipup")
        ->capture_default_str();
    rank->add_option("--lags", rk.lags, "Lag count for itipup")->capture_default_str();

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "Project a file on saved loadings and report RE");
    reconstruct->add_option("input", rec.input, "Tensor-series file")->required();
    reconstruct->add_option("--loadings", rec.loadings, "Prefix given to estimate --out")->required();
    reconstruct->add_option("--out", rec.out, "Write the reconstruction to this file");
    reconstruct->add_flag("--no-center", rec.no_center, "Ignore a saved temporal mean");

    BenchArgs bn;
    EstimatorFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "Run a replicated experiment from a JSON config");
    bench->add_option("--config", bn.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_estimator_flags(bench, bench_flags);
    bench->get_option("--method")->description("Comma-separated methods, replacing the config's list");
    bench->add_option("--reps", bn.reps, "Replications")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bn.seed, "Simulation seed");
    bench->add_option("--threads", bn.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench->add_option("--out", bn.out, "Output directory for results.csv and loadings");
    bench->add_flag("--varimax", bn.varimax, "Varimax-rotate emitted loadings");
    bench->add_flag("--emit-loadings", bn.emit_loadings, "Write per-replication loadings as CSV");
    bench->add_flag("--medians", bn.medians, "Add median rows to the aggregates");

    ConvertArgs cv;
    auto* convert = app.add_subcommand("convert", "Convert a raw f64 dump with axes (T, p1, ..., pD) to TNSF");
    convert->add_option("input", cv.input, "Raw little-endian f64 file")->required();
    convert->add_option("--shape", cv.shape, "T,p1,...,pD")->required();
    convert->add_option("--layout", cv.layout, "row (last axis fastest) | column (first axis fastest)")
        ->capture_default_str();
    convert->add_option("--out", cv.out, "Output tensor-series file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }
    try {
        if (*simulate) return run_simulate(simulate, sim);
        if (*estimate) return run_estimate(estimate, est, est_flags);
        if (*rank) return run_rank(rk);
        if (*reconstruct) return run_reconstruct(rec);
        if (*bench) return run_bench(bench, bn, bench_flags);
        if (*convert) return run_convert(cv);
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}
