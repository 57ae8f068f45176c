// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "tfm/errors.hpp"
#include "tfm/experiment.hpp"
#include "tfm/io.hpp"
#include "tfm/spectral.hpp"

#include "fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace tfm;
using testing::naive_kron;
using testing::naive_unfold;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string num(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig standard_experiment(std::vector<Method> methods, int scenario_id, int size_id) {
    ExperimentConfig cfg;
    cfg.methods = std::move(methods);
    cfg.simulation = standard_config(scenario_id, size_id, 20240501);
    cfg.replications = 20;
    return cfg;
}

double max_loading_distance(const LoadingSet& a, const LoadingSet& b) {
    double worst = 0.0;
    for (std::size_t d = 0; d < a.order(); ++d) worst = std::max(worst, column_space_distance(a[d], b[d]));
    return worst;
}

// Scenario I-IV experiments at size 1 are shared by AC1, AC2 and AC4.
std::map<int, ExperimentResult> size1_runs;
double size1_seconds = 0.0;

const ExperimentResult& size1(int scenario_id) {
    auto it = size1_runs.find(scenario_id);
    if (it != size1_runs.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    auto res = run_experiment(
        standard_experiment({Method::MoPCA, Method::PmoPCA, Method::IPmoPCA, Method::ITipup}, scenario_id, 1));
    size1_seconds += seconds_since(t0);
    return size1_runs.emplace(scenario_id, std::move(res)).first->second;
}

Outcome ac1_rank_selection() {
    Outcome o;
    for (int s = 1; s <= 4; ++s) {
        const double acc = summarize(size1(s), Method::MoPCA).mean_accuracy;
        o.require(acc >= 95.0, "scenario " + std::to_string(s) + " moPCA acc " + num(acc) + "% >= 95");
    }
    o.require(size1_seconds < 120.0, "runtime " + num(size1_seconds, 3) + " s < 120 s");
    return o;
}

Outcome ac2_baseline_failure() {
    Outcome o;
    for (int s : {1, 3}) {
        const double mo = summarize(size1(s), Method::MoPCA).mean_accuracy;
        const double tip = summarize(size1(s), Method::ITipup).mean_accuracy;
        o.require(tip < mo, "scenario " + std::to_string(s) + " iTIPUP acc " + num(tip) + "% < moPCA " + num(mo) + "%");
    }
    return o;
}

Outcome ac3_consistency() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Method> methods{Method::MoPCA, Method::PmoPCA, Method::IPmoPCA};
    const ExperimentResult small = run_experiment(standard_experiment(methods, 1, 1));
    const ExperimentResult large = run_experiment(standard_experiment(methods, 1, 3));
    for (Method m : methods) {
        const double a = summarize(small, m).mean_distance.at(0);
        const double b = summarize(large, m).mean_distance.at(0);
        o.require(b < a, std::string(method_name(m)) + " mode-1 distance " + num(b) + " (size 3) < " + num(a) +
                             " (size 1)");
    }
    const double secs = seconds_since(t0);
    o.require(secs < 600.0, "runtime " + num(secs, 3) + " s < 600 s");
    return o;
}

Outcome ac4_non_inferiority() {
    Outcome o;
    const MethodSummary mo = summarize(size1(1), Method::MoPCA);
    const MethodSummary ip = summarize(size1(1), Method::IPmoPCA);
    o.require(mo.runs == 20 && ip.runs == 20, "20 paired replications");
    for (std::size_t d = 0; d < mo.mean_distance.size(); ++d)
        o.require(ip.mean_distance[d] <= 1.05 * mo.mean_distance[d],
                  "mode " + std::to_string(d + 1) + " IPmoPCA " + num(ip.mean_distance[d]) + " <= 1.05 x moPCA " +
                      num(mo.mean_distance[d]));
    return o;
}

Outcome ac5_noiseless() {
    Outcome o;
    const auto data = testing::noiseless_data({10, 10, 10}, {2, 3, 4}, 10, 77);
    const Dims ranks{2, 3, 4};
    const FactorFit fits[] = {mopca_fit(data.series, ranks, false), pmopca_fit(data.series, ranks, false),
                              ipmopca_fit(data.series, ranks, {}, false)};
    for (const FactorFit& f : fits) {
        const double dist = max_loading_distance(f.loadings, data.loadings);
        const double rmse = signal_rmse(*f.signals, data.series);
        o.require(dist <= 1e-8 && rmse <= 1e-8,
                  std::string(method_name(f.method)) + " distance " + num(dist, 2) + ", rmse " + num(rmse, 2));
    }
    return o;
}

Outcome ac6_estimator_identity() {
    Outcome o;
    const SimDataset ds = simulate_dataset(standard_config(4, 1, 5));
    const Dims ranks{2, 3, 4};
    const LoadingSet init = mopca_fit(ds.series, ranks).loadings;
    const FactorFit p = pmopca_fit(ds.series, ranks, true, init);
    IterationOptions once;
    once.max_iter = 1;
    once.update_within_sweep = false;
    const FactorFit q = ipmopca_fit(ds.series, ranks, once, true, init);
    double worst = 0.0;
    for (std::size_t d = 0; d < 3; ++d) worst = std::max(worst, (p.loadings[d] - q.loadings[d]).cwiseAbs().maxCoeff());
    o.require(worst <= 1e-12, "max loading entry difference " + num(worst, 2) + " <= 1e-12");
    return o;
}

Outcome ac7_reductions() {
    Outcome o;
    {
        Rng rng(71);
        const std::size_t p = 12, T = 40;
        const TensorSeries s = testing::random_series({p}, T, rng);
        Matrix x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(T));
        for (std::size_t t = 0; t < T; ++t) x.col(static_cast<Eigen::Index>(t)) = s[t].as_vector();
        Eigen::SelfAdjointEigenSolver<Matrix> es(x * x.transpose() / static_cast<double>(T * p));
        const Matrix top = es.eigenvectors().rightCols(3);
        const FactorFit f = mopca_fit(s, {3}, false);
        const double gap = (loading_projection(f.loadings[0]) - top * top.transpose()).cwiseAbs().maxCoeff();
        o.require(gap <= 1e-10, "D=1 projector vs direct PCA " + num(gap, 2) + " <= 1e-10");
    }
    {
        Rng rng(72);
        const Dims dims{4, 5, 3};
        const DenseTensor x = testing::random_tensor(dims, rng);
        std::vector<Matrix> proj;
        for (std::size_t d = 0; d < 3; ++d) {
            Eigen::JacobiSVD<Matrix> svd(naive_unfold(x, d), Eigen::ComputeThinU);
            const Vector u = svd.matrixU().col(0);
            proj.push_back(u * u.transpose());
        }
        const Vector hosvd = naive_kron(proj[2], naive_kron(proj[1], proj[0])) * vectorize(x);
        const FactorFit f = mopca_fit(TensorSeries(std::vector<DenseTensor>{x}), {1, 1, 1}, false);
        const double gap = (vectorize((*f.signals)[0]) - hosvd).cwiseAbs().maxCoeff();
        o.require(gap <= 1e-8, "T=1 rank-1 signal vs truncated HOSVD " + num(gap, 2) + " <= 1e-8");
    }
    return o;
}

Outcome ac8_core_identities() {
    Outcome o;
    Rng rng(81);
    bool exact = true;
    for (int trial = 0; trial < 25; ++trial) {
        Dims dims;
        for (std::size_t d = 0; d < 1 + trial % 4; ++d) dims.push_back(1 + rng.next() % 5);
        const DenseTensor x = testing::random_tensor(dims, rng);
        for (std::size_t d = 0; d < dims.size(); ++d) exact = exact && fold(unfold(x, d), d, dims) == x;
    }
    o.require(exact, "fold(unfold(X)) bit-exact on 25 random shapes");

    double kron_gap = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Dims core{2, 3, 2}, out{4, 3, 5};
        std::vector<Matrix> mats;
        std::vector<ModeOperand> ops;
        for (std::size_t d = 0; d < 3; ++d)
            mats.push_back(testing::random_matrix(static_cast<Eigen::Index>(out[d]),
                                                  static_cast<Eigen::Index>(core[d]), rng));
        for (std::size_t d = 0; d < 3; ++d) ops.push_back({d, mats[d]});
        const DenseTensor f = testing::random_tensor(core, rng);
        const Vector rhs = naive_kron(mats[2], naive_kron(mats[1], mats[0])) * vectorize(f);
        kron_gap = std::max(kron_gap, (vectorize(multi_mode_product(f, ops)) - rhs).cwiseAbs().maxCoeff());
    }
    o.require(kron_gap <= 1e-10, "Kronecker-vec identity " + num(kron_gap, 2) + " <= 1e-10");

    const TensorSeries s = testing::random_series({3, 4, 5}, 6, rng);
    LoadingSet l;
    l.mats = {testing::random_matrix(3, 2, rng), testing::random_matrix(4, 3, rng), testing::random_matrix(5, 2, rng)};
    const Matrix kron[3] = {naive_kron(l[2], l[1]) / 20.0, naive_kron(l[2], l[0]) / 15.0,
                            naive_kron(l[1], l[0]) / 12.0};
    double proj_gap = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
        const auto ys = projected_series(s, l, d);
        for (std::size_t t = 0; t < s.length(); ++t)
            proj_gap = std::max(proj_gap, (ys[t] - naive_unfold(s[t], d) * kron[d]).cwiseAbs().maxCoeff());
    }
    o.require(proj_gap <= 1e-10, "projected_series vs explicit Kronecker " + num(proj_gap, 2) + " <= 1e-10");
    return o;
}

Outcome ac9_simulator() {
    Outcome o;
    for (double phi : {0.0, 0.6}) {
        Rng rng(91, static_cast<std::uint64_t>(phi * 10));
        const TensorSeries f = simulate_core_path(2000, {2, 2}, phi, rng);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.tensor_size(); ++i) {
            double mean = 0.0;
            for (const auto& x : f) mean += x[i] / 2000.0;
            double num_ = 0.0, den = 0.0;
            for (std::size_t t = 0; t < 2000; ++t) {
                const double c = f[t][i] - mean;
                den += c * c;
                if (t + 1 < 2000) num_ += c * (f[t + 1][i] - mean);
            }
            worst = std::max(worst, std::abs(num_ / den - phi));
        }
        o.require(worst <= 0.05, "phi=" + num(phi, 2) + " max entrywise |r1 - phi| " + num(worst, 3) + " <= 0.05");
    }
    Rng rng(92);
    const std::size_t draws = 50000;
    const TensorSeries e = simulate_noise_path(draws, {2, 2}, 0.0, rng);
    Matrix cov = Matrix::Zero(4, 4);
    for (const auto& x : e) cov += x.as_vector() * x.as_vector().transpose();
    cov /= static_cast<double>(draws);
    const Matrix expect = naive_kron(noise_mode_covariance(2), noise_mode_covariance(2));
    const double gap = (cov - expect).cwiseAbs().maxCoeff();
    o.require(gap <= 0.02, "noise covariance vs Delta_2 (x) Delta_1 " + num(gap, 3) + " <= 0.02");
    return o;
}

Outcome ac10_reconstruction() {
    Outcome o;
    const SimDataset ds = simulate_dataset(standard_config(1, 1, 101));
    auto re_at = [&](const Dims& ranks) {
        EstimatorConfig cfg;
        cfg.ranks = ranks;
        return reconstruction_error(ds.series, fitted_observations(fit(ds.series, cfg)));
    };
    const double low = re_at({1, 1, 1}), mid = re_at({2, 3, 4}), full = re_at({20, 20, 20});
    o.require(mid < low, "RE(2,3,4) " + num(mid) + " < RE(1,1,1) " + num(low));
    o.require(full <= 1e-10, "RE(full) " + num(full, 2) + " <= 1e-10");
    return o;
}

Outcome ac11_file_io() {
    Outcome o;
    testing::TempDir dir("acceptance_io");
    Rng rng(111);
    const TensorSeries s = testing::random_series({3, 4, 5}, 7, rng);
    write_tensor_series(dir / "x.tns", s);
    const TensorSeries back = read_tensor_series(dir / "x.tns");
    bool same = back.shape() == s.shape() && back.length() == s.length();
    for (std::size_t t = 0; same && t < s.length(); ++t)
        same = std::memcmp(back[t].data().data(), s[t].data().data(), s.tensor_size() * sizeof(double)) == 0;
    o.require(same, "round trip bit-exact");

    std::ifstream is(dir / "x.tns", std::ios::binary);
    const std::string good{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    auto corrupt = [&](const std::string& name, const std::string& bytes) {
        std::ofstream(dir / name, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return dir / name;
    };
    auto classify = [](const std::filesystem::path& p) -> std::string {
        try {
            read_tensor_series(p);
        } catch (const BadMagicError&) {
            return "BadMagicError";
        } catch (const VersionError&) {
            return "VersionError";
        } catch (const LayoutError&) {
            return "LayoutError";
        } catch (const std::exception&) {
            return "other";
        }
        return "none";
    };
    std::string magic = good, version = good;
    magic[1] = 'Z';
    version[4] = 9;
    const std::string a = classify(corrupt("magic.tns", magic));
    const std::string b = classify(corrupt("version.tns", version));
    const std::string c = classify(corrupt("short.tns", good.substr(0, good.size() - 3)));
    o.require(a == "BadMagicError", "bad magic -> " + a);
    o.require(b == "VersionError", "bad version -> " + b);
    o.require(c == "LayoutError", "truncated payload -> " + c);
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"AC1  rank selection, moPCA accuracy", ac1_rank_selection},
        {"AC2  auto-covariance baseline below moPCA", ac2_baseline_failure},
        {"AC3  consistency as size grows", ac3_consistency},
        {"AC4  IPmoPCA non-inferiority", ac4_non_inferiority},
        {"AC5  noiseless exact recovery", ac5_noiseless},
        {"AC6  PmoPCA = one frozen IPmoPCA sweep", ac6_estimator_identity},
        {"AC7  D=1 and T=1 reductions", ac7_reductions},
        {"AC8  tensor core identities", ac8_core_identities},
        {"AC9  simulator statistics", ac9_simulator},
        {"AC10 reconstruction error behaviour", ac10_reconstruction},
        {"AC11 file I/O", ac11_file_io},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu acceptance criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
                std::size(criteria));
    return failures == 0 ? 0 : 1;
}
