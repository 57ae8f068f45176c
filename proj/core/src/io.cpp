#include "tfm/io.hpp"

#include "tfm/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace tfm {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFixedHeader = 16;

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b.data(), 8);
}

std::uint64_t get_u64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void write_payload(std::ostream& os, std::span<const double> values) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 8));
    } else {
        for (double v : values) put_u64(os, std::bit_cast<std::uint64_t>(v));
    }
}

void read_payload(std::istream& is, std::span<double> values) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * 8));
    } else {
        std::array<unsigned char, 8> b{};
        for (double& v : values) {
            is.read(reinterpret_cast<char*>(b.data()), 8);
            v = std::bit_cast<double>(get_u64(b.data()));
        }
    }
}

// Multiplication that reports overflow instead of wrapping.
bool mul_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return true;
    out = a * b;
    return false;
}

}  // namespace

void write_tensor_series(const fs::path& path, const TensorSeries& series) {
    if (series.empty()) throw DimensionError("cannot write an empty tensor series");
    if (series.order() > 255) throw DimensionError("file format supports at most 255 modes");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    os.put(static_cast<char>(kFormatVersion));
    os.put(static_cast<char>(series.order()));
    os.put('\0');
    os.put('\0');
    put_u64(os, series.length());
    for (auto p : series.shape()) put_u64(os, p);
    for (const auto& x : series) write_payload(os, x.data());
    os.flush();
    if (!os) throw IoError("write to " + path.string() + " failed");
}

TensorSeries read_tensor_series(const fs::path& path) {
    std::error_code ec;
    const std::uint64_t file_size = fs::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");

    std::array<unsigned char, kFixedHeader> head{};
    const std::uint64_t head_len = std::min<std::uint64_t>(file_size, kFixedHeader);
    is.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head_len));
    if (!is) throw IoError("read from " + path.string() + " failed");

    if (head_len < 4 || std::memcmp(head.data(), kMagic, 4) != 0)
        throw BadMagicError(path.string() + ": not a tensor-series file (magic bytes are not TNSF)", 0);
    if (head_len < kFixedHeader)
        throw LayoutError(path.string() + ": header truncated, expected " + std::to_string(kFixedHeader) +
                              " bytes, file has " + std::to_string(file_size),
                          file_size);
    if (head[4] != kFormatVersion)
        throw VersionError(path.string() + ": unsupported format version " + std::to_string(head[4]) +
                               " (expected " + std::to_string(kFormatVersion) + ")",
                           4);
    if (head[6] != 0 || head[7] != 0)
        throw VersionError(path.string() + ": reserved header bytes are not zero", 6);
    const std::size_t order = head[5];
    if (order == 0) throw LayoutError(path.string() + ": header declares zero modes", 5);
    const std::uint64_t T = get_u64(head.data() + 8);
    if (T == 0) throw LayoutError(path.string() + ": header declares zero observations", 8);

    const std::uint64_t header_len = kFixedHeader + 8 * order;
    if (file_size < header_len)
        throw LayoutError(path.string() + ": dimension block truncated, expected " + std::to_string(header_len) +
                              " header bytes, file has " + std::to_string(file_size),
                          file_size);
    std::vector<unsigned char> dim_bytes(8 * order);
    is.read(reinterpret_cast<char*>(dim_bytes.data()), static_cast<std::streamsize>(dim_bytes.size()));
    if (!is) throw IoError("read from " + path.string() + " failed");

    Dims dims(order);
    std::uint64_t per_tensor = 1;
    for (std::size_t d = 0; d < order; ++d) {
        const std::uint64_t p = get_u64(dim_bytes.data() + 8 * d);
        const std::uint64_t at = kFixedHeader + 8 * d;
        if (p == 0) throw LayoutError(path.string() + ": mode " + std::to_string(d + 1) + " has size zero", at);
        if (mul_overflows(per_tensor, p, per_tensor))
            throw LayoutError(path.string() + ": declared dimensions overflow", at);
        dims[d] = static_cast<std::size_t>(p);
    }
    std::uint64_t values = 0;
    std::uint64_t payload = 0;
    if (mul_overflows(per_tensor, T, values) || mul_overflows(values, 8, payload))
        throw LayoutError(path.string() + ": declared payload size overflows", 8);
    const std::uint64_t actual = file_size - header_len;
    if (actual != payload)
        throw LayoutError(path.string() + ": payload length mismatch, header declares " + std::to_string(payload) +
                              " bytes, file holds " + std::to_string(actual),
                          header_len);

    TensorSeries series(dims);
    for (std::uint64_t t = 0; t < T; ++t) {
        DenseTensor x(dims);
        read_payload(is, x.data());
        if (!is)
            throw LayoutError(path.string() + ": payload ended early",
                              header_len + t * per_tensor * 8);
        series.push_back(std::move(x));
    }
    return series;
}

void write_matrix(const fs::path& path, const Matrix& m) {
    TensorSeries s({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    s.push_back(DenseTensor::from_matrix(m));
    write_tensor_series(path, s);
}

Matrix read_matrix(const fs::path& path) {
    const TensorSeries s = read_tensor_series(path);
    if (s.order() != 2 || s.length() != 1)
        throw LayoutError(path.string() + ": expected a single 2-way tensor", 5);
    const auto rows = static_cast<Eigen::Index>(s.shape()[0]);
    const auto cols = static_cast<Eigen::Index>(s.shape()[1]);
    return Eigen::Map<const Matrix>(s[0].data().data(), rows, cols);
}

fs::path loading_path(const fs::path& prefix, std::size_t mode) {
    fs::path p = prefix;
    p += ".A" + std::to_string(mode + 1);
    return p;
}

void write_loadings(const fs::path& prefix, const LoadingSet& loadings) {
    for (std::size_t d = 0; d < loadings.order(); ++d) write_matrix(loading_path(prefix, d), loadings[d]);
}

LoadingSet read_loadings(const fs::path& prefix) {
    LoadingSet out;
    for (std::size_t d = 0; fs::exists(loading_path(prefix, d)); ++d) out.mats.push_back(read_matrix(loading_path(prefix, d)));
    if (out.mats.empty()) throw IoError("no loading files found at " + loading_path(prefix, 0).string());
    return out;
}

TensorSeries read_raw_series(const fs::path& path, const Dims& shape, RawLayout layout) {
    if (shape.size() < 2) throw DimensionError("raw series shape needs T and at least one mode size");
    std::uint64_t count = 1;
    for (auto n : shape) {
        if (n == 0) throw DimensionError("raw series shape has a zero-sized axis");
        if (mul_overflows(count, n, count)) throw DimensionError("raw series shape overflows");
    }
    std::uint64_t expected = 0;
    if (mul_overflows(count, 8, expected)) throw DimensionError("raw series shape overflows");
    std::error_code ec;
    const std::uint64_t size = fs::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
    if (size != expected)
        throw LayoutError(path.string() + ": raw dump length mismatch, shape needs " + std::to_string(expected) +
                              " bytes, file holds " + std::to_string(size),
                          0);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");
    std::vector<double> raw(static_cast<std::size_t>(count));
    read_payload(is, raw);
    if (!is) throw IoError("read from " + path.string() + " failed");

    std::vector<std::size_t> stride(shape.size());
    std::size_t step = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        const std::size_t i = layout == RawLayout::RowMajor ? shape.size() - 1 - k : k;
        stride[i] = step;
        step *= shape[i];
    }
    const Dims dims(shape.begin() + 1, shape.end());
    TensorSeries series(dims);
    Dims idx(dims.size());
    for (std::size_t t = 0; t < shape[0]; ++t) {
        DenseTensor x(dims);
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t n = 0; n < x.size(); ++n) {
            std::size_t src = t * stride[0];
            for (std::size_t d = 0; d < dims.size(); ++d) src += idx[d] * stride[d + 1];
            x[n] = raw[src];
            for (std::size_t d = 0; d < dims.size(); ++d) {
                if (++idx[d] < dims[d]) break;
                idx[d] = 0;
            }
        }
        series.push_back(std::move(x));
    }
    return series;
}

}  // namespace tfm
