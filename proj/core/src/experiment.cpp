#include "tfm/experiment.hpp"

#include "tfm/baseline.hpp"
#include "tfm/errors.hpp"
#include "tfm/io.hpp"
#include "tfm/varimax.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace tfm {

namespace {

using json = nlohmann::json;

struct Stat {
    double mean, sd, median;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Method method_from(const std::string& name) {
    auto m = parse_method(name);
    if (!m) throw DimensionError("unknown method '" + name + "'");
    return *m;
}

// Applies the keys present in `j` on top of `cfg`.
void merge_estimator(EstimatorConfig& cfg, bool* ranks_from_truth, const json& j) {
    if (!j.is_object()) throw DimensionError("estimator settings must be a JSON object");
    if (j.contains("ranks")) {
        const json& r = j.at("ranks");
        if (r.is_string()) {
            if (r.get<std::string>() != "auto") throw DimensionError("ranks must be a list or \"auto\"");
            cfg.ranks.reset();
        } else {
            cfg.ranks = r.get<Dims>();
        }
        if (ranks_from_truth) *ranks_from_truth = false;
    }
    if (j.contains("kmax")) cfg.k_max = j.at("kmax").get<std::size_t>();
    if (j.contains("tol")) cfg.iteration.tol = j.at("tol").get<double>();
    if (j.contains("max_iter")) cfg.iteration.max_iter = j.at("max_iter").get<std::size_t>();
    if (j.contains("update_within_sweep")) cfg.iteration.update_within_sweep = j.at("update_within_sweep").get<bool>();
    if (j.contains("center")) cfg.center = j.at("center").get<bool>();
    if (j.contains("lags")) cfg.lags = j.at("lags").get<std::size_t>();
    if (j.contains("stopping_norm")) {
        const auto norm = j.at("stopping_norm").get<std::string>();
        if (norm == "spectral")
            cfg.iteration.norm = StoppingNorm::Spectral;
        else if (norm == "frobenius")
            cfg.iteration.norm = StoppingNorm::Frobenius;
        else
            throw DimensionError("stopping_norm must be \"spectral\" or \"frobenius\"");
    }
}

SimConfig parse_simulation(const json& j) {
    SimConfig sim;
    if (j.contains("scenario") || j.contains("size"))
        sim = standard_config(j.value("scenario", 1), j.value("size", 1));
    if (j.contains("T")) sim.T = j.at("T").get<std::size_t>();
    if (j.contains("dims")) sim.dims = j.at("dims").get<Dims>();
    if (j.contains("ranks")) sim.ranks = j.at("ranks").get<Dims>();
    if (j.contains("phi")) sim.phi = j.at("phi").get<double>();
    if (j.contains("psi")) sim.psi = j.at("psi").get<double>();
    if (j.contains("seed")) sim.seed = j.at("seed").get<std::uint64_t>();
    return sim;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

void write_loadings_csv(const std::filesystem::path& path, const Matrix& a) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << std::setprecision(12);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) os << (j ? "," : "") << a(i, j);
        os << '\n';
    }
}

Dims method_ranks(Method method, const TensorSeries& series, const FactorFit& fit, const EstimatorConfig& cfg) {
    const std::size_t k_max = cfg.k_max ? cfg.k_max : default_k_max(series.shape());
    if (method == Method::ITipup) return estimate_ranks_tipup(series, k_max, cfg.lags, cfg.center);
    Dims out;
    for (const auto& ev : fit.eigvals) out.push_back(ratio_rank(ev, k_max));
    return out;
}

MethodRun evaluate(const ExperimentConfig& config, Method method, std::size_t rep, const TensorSeries& series,
                   const SimTruth* truth) {
    MethodRun run;
    run.replication = rep;
    run.method = method;
    EstimatorConfig cfg = config.config_for(method);
    if (truth && config.uses_true_ranks(method)) cfg.ranks = truth->loadings.ranks();

    Timer timer;
    FactorFit fit = tfm::fit(series, cfg);
    run.report.seconds = timer.seconds();
    run.iterations = fit.iterations;
    run.converged = fit.converged;

    EvalReport& r = run.report;
    r.reconstruction = reconstruction_error(series, fitted_observations(fit));
    r.k_hat = method_ranks(method, series, fit, cfg);
    if (truth) {
        for (std::size_t d = 0; d < fit.loadings.order(); ++d)
            r.distances.push_back(column_space_distance(fit.loadings[d], truth->loadings[d]));
        // Signal estimate in the original coordinates: the raw observation
        // projected on the fitted loadings.
        const TensorSeries s_hat = fit.mean ? project_signals(series, fit.loadings) : *fit.signals;
        r.rmse = signal_rmse(s_hat, truth->signals);
        r.k_true = truth->loadings.ranks();
        r.accuracy = rank_accuracy(r.k_hat, r.k_true);
    } else {
        r.distances.assign(series.order(), kNaN);
        r.rmse = kNaN;
        r.accuracy = kNaN;
    }

    if (config.emit_loadings && config.output_dir) {
        for (std::size_t d = 0; d < fit.loadings.order(); ++d) {
            const Matrix a = config.varimax ? varimax(fit.loadings[d]).rotated : fit.loadings[d];
            auto name = "loadings_rep" + std::to_string(rep) + "_" + std::string(method_name(method)) + "_mode" +
                        std::to_string(d + 1) + ".csv";
            write_loadings_csv(*config.output_dir / name, a);
        }
    }
    return run;
}

}  // namespace

EstimatorConfig ExperimentConfig::config_for(Method m) const {
    auto it = overrides.find(m);
    EstimatorConfig cfg = it == overrides.end() ? estimator : it->second;
    cfg.method = m;
    return cfg;
}

bool ExperimentConfig::uses_true_ranks(Method m) const {
    auto it = override_sets_ranks.find(m);
    if (it != override_sets_ranks.end() && it->second) return false;
    return ranks_from_truth;
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw DimensionError("experiment needs at least one method");
    if (replications < 1) throw DimensionError("replications must be at least 1");
    if (!simulation && !input) throw DimensionError("experiment needs a simulation or an input file");
    if (simulation) simulation->validate();
    if (threads < 1) throw DimensionError("threads must be at least 1");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DimensionError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("methods"))
            for (const auto& m : j.at("methods")) cfg.methods.push_back(method_from(m.get<std::string>()));
        cfg.replications = j.value("replications", cfg.replications);
        cfg.threads = j.value("threads", cfg.threads);
        cfg.emit_loadings = j.value("emit_loadings", false);
        cfg.varimax = j.value("varimax", false);
        if (j.contains("output")) cfg.output_dir = j.at("output").get<std::string>();
        if (j.contains("simulation")) cfg.simulation = parse_simulation(j.at("simulation"));
        if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
        if (j.contains("estimator")) merge_estimator(cfg.estimator, &cfg.ranks_from_truth, j.at("estimator"));
        if (j.contains("overrides"))
            for (const auto& [name, body] : j.at("overrides").items()) {
                EstimatorConfig over = cfg.estimator;
                bool keeps_truth = true;
                merge_estimator(over, &keeps_truth, body);
                const Method m = method_from(name);
                cfg.overrides[m] = over;
                cfg.override_sets_ranks[m] = !keeps_truth;
            }
    } catch (const json::exception& e) {
        throw DimensionError(std::string("bad experiment config: ") + e.what());
    }
    if (cfg.input && cfg.simulation) throw DimensionError("experiment config sets both input and simulation");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_experiment_config(buf.str());
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    config.validate();
    if (config.output_dir) std::filesystem::create_directories(*config.output_dir);

    std::optional<TensorSeries> shared_input;
    if (config.input) shared_input = read_tensor_series(*config.input);

    std::vector<std::vector<MethodRun>> per_rep(config.replications);
    std::mutex log_mutex;
    auto note = [&](const std::string& msg) {
        if (!log) return;
        std::lock_guard lock(log_mutex);
        *log << msg << '\n';
    };

    auto run_rep = [&](std::size_t rep) {
        std::optional<SimDataset> sim;
        if (config.simulation) sim = simulate_dataset(*config.simulation, rep);
        const TensorSeries& series = sim ? sim->series : *shared_input;
        const SimTruth* truth = sim ? &sim->truth : nullptr;
        for (Method m : config.methods) {
            try {
                per_rep[rep].push_back(evaluate(config, m, rep, series, truth));
            } catch (const Error& e) {
                MethodRun failed;
                failed.replication = rep;
                failed.method = m;
                failed.error = e.what();
                per_rep[rep].push_back(std::move(failed));
                note("rep " + std::to_string(rep) + " " + std::string(method_name(m)) + " failed: " + e.what());
            }
        }
    };

    const std::size_t workers = std::min(config.threads, config.replications);
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < config.replications; ++rep) run_rep(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t rep = next++; rep < config.replications; rep = next++) run_rep(rep);
            });
    }

    ExperimentResult result;
    for (auto& runs : per_rep)
        for (auto& run : runs) result.runs.push_back(std::move(run));
    return result;
}

MethodSummary summarize(const ExperimentResult& result, Method method) {
    MethodSummary s;
    std::vector<const MethodRun*> ok;
    for (const auto& run : result.runs)
        if (run.method == method && !run.error) ok.push_back(&run);
    s.runs = ok.size();
    if (ok.empty()) return s;
    const std::size_t modes = ok.front()->report.distances.size();
    s.mean_distance.assign(modes, 0.0);
    s.sd_distance.assign(modes, 0.0);
    const double n = static_cast<double>(ok.size());
    for (const MethodRun* run : ok) {
        for (std::size_t d = 0; d < modes; ++d) s.mean_distance[d] += run->report.distances[d] / n;
        s.mean_rmse += run->report.rmse / n;
        s.mean_accuracy += run->report.accuracy / n;
        s.mean_reconstruction += run->report.reconstruction / n;
        s.mean_seconds += run->report.seconds / n;
    }
    if (ok.size() > 1)
        for (std::size_t d = 0; d < modes; ++d) {
            double ss = 0.0;
            for (const MethodRun* run : ok) ss += std::pow(run->report.distances[d] - s.mean_distance[d], 2);
            s.sd_distance[d] = std::sqrt(ss / (n - 1.0));
        }
    return s;
}

void write_results_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result,
                       bool medians) {
    os << "rep,method,mode,distance_d,rmse,acc,re,seconds\n";
    for (const auto& run : result.runs) {
        const std::string name(method_name(run.method));
        if (run.error) {
            os << run.replication << ',' << name << ",error,nan,nan,nan,nan,nan\n";
            continue;
        }
        const EvalReport& r = run.report;
        for (std::size_t d = 0; d < r.distances.size(); ++d)
            os << run.replication << ',' << name << ',' << d + 1 << ',' << fmt(r.distances[d]) << ',' << fmt(r.rmse)
               << ',' << fmt(r.accuracy) << ',' << fmt(r.reconstruction) << ',' << fmt(r.seconds) << '\n';
    }

    // Aggregates over successful runs, per (method, mode).
    for (Method m : config.methods) {
        std::vector<const EvalReport*> reps;
        for (const auto& run : result.runs)
            if (run.method == m && !run.error) reps.push_back(&run.report);
        if (reps.empty()) continue;
        const double n = static_cast<double>(reps.size());
        auto stats = [&](auto field) {
            double mean = 0.0;
            for (const EvalReport* r : reps) mean += field(*r) / n;
            double ss = 0.0;
            for (const EvalReport* r : reps) ss += std::pow(field(*r) - mean, 2);
            const double sd = reps.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            std::vector<double> v;
            for (const EvalReport* r : reps) v.push_back(field(*r));
            std::sort(v.begin(), v.end());
            const std::size_t h = v.size() / 2;
            const double median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
            return Stat{mean, sd, median};
        };
        const auto rmse = stats([](const EvalReport& r) { return r.rmse; });
        const auto acc = stats([](const EvalReport& r) { return r.accuracy; });
        const auto re = stats([](const EvalReport& r) { return r.reconstruction; });
        const auto secs = stats([](const EvalReport& r) { return r.seconds; });
        const std::string name(method_name(m));
        for (std::size_t d = 0; d < reps.front()->distances.size(); ++d) {
            const auto dist = stats([d](const EvalReport& r) { return r.distances[d]; });
            auto row = [&](const char* label, double Stat::*part) {
                os << label << ',' << name << ',' << d + 1 << ',' << fmt(dist.*part) << ',' << fmt(rmse.*part) << ','
                   << fmt(acc.*part) << ',' << fmt(re.*part) << ',' << fmt(secs.*part) << '\n';
            };
            row("mean", &Stat::mean);
            row("sd", &Stat::sd);
            if (medians) row("median", &Stat::median);
        }
    }
}

}  // namespace tfm
