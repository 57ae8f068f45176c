#pragma once

// Test-only helpers. The oracles here deliberately avoid the library's
// unfold / mode_product / kronecker code paths.

#include "tfm/estimators.hpp"
#include "tfm/rng.hpp"
#include "tfm/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tfm::testing {

inline DenseTensor random_tensor(const Dims& dims, Rng& rng) {
    DenseTensor x(dims);
    for (auto& v : x.data()) v = rng.normal();
    return x;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    return qr.householderQ();
}

inline TensorSeries random_series(const Dims& dims, std::size_t T, Rng& rng) {
    TensorSeries s(dims);
    for (std::size_t t = 0; t < T; ++t) s.push_back(random_tensor(dims, rng));
    return s;
}

/// Multi-indices of a tensor in storage order (i_1 fastest), 0-based.
inline std::vector<Dims> all_indices(const Dims& dims) {
    std::vector<Dims> out;
    Dims idx(dims.size(), 0);
    const std::size_t total = dims_product(dims);
    for (std::size_t n = 0; n < total; ++n) {
        out.push_back(idx);
        for (std::size_t d = 0; d < dims.size(); ++d) {
            if (++idx[d] < dims[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

/// Column of the mode-d unfolding from the textbook formula
/// j_d = 1 + sum_{d' != d} (i_{d'} - 1) prod_{m != d, m < d'} p_m, shifted to 0-based.
inline std::size_t unfold_column(const Dims& index, const Dims& dims, std::size_t mode) {
    std::size_t j = 0;
    for (std::size_t dp = 0; dp < dims.size(); ++dp) {
        if (dp == mode) continue;
        std::size_t stride = 1;
        for (std::size_t m = 0; m < dp; ++m)
            if (m != mode) stride *= dims[m];
        j += index[dp] * stride;
    }
    return j;
}

/// Element-wise definition of the Kronecker product.
inline Matrix naive_kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

/// Unfolding by enumeration, using the formula above.
inline Matrix naive_unfold(const DenseTensor& x, std::size_t mode) {
    const Dims& dims = x.dims();
    Matrix m(static_cast<Eigen::Index>(dims[mode]), static_cast<Eigen::Index>(x.size() / dims[mode]));
    std::size_t linear = 0;
    for (const auto& idx : all_indices(dims))
        m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(unfold_column(idx, dims, mode))) =
            x[linear++];
    return m;
}

/// Projector onto col(a) via QR, independent of the SVD route in spectral.
inline Matrix qr_projector(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
    return q * q.transpose();
}

struct NoiselessData {
    TensorSeries series;
    LoadingSet loadings;
    TensorSeries cores;
};

/// X_t = F_t x_1 A_1 ... x_D A_D with A_d^T A_d = p_d I and Gaussian cores.
inline NoiselessData noiseless_data(const Dims& dims, const Dims& ranks, std::size_t T, std::uint64_t seed) {
    Rng rng(seed);
    NoiselessData out;
    for (std::size_t d = 0; d < dims.size(); ++d) out.loadings.mats.push_back(generate_loadings(dims[d], ranks[d], rng));
    out.cores = simulate_core_path(T, ranks, 0.0, rng);
    out.series = reconstruct_signals(out.cores, out.loadings);
    return out;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("tfm_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace tfm::testing
