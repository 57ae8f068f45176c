#pragma once

// Tensor-series file format, version 1. All integers little-endian.
//
//   offset  size    field
//   0       4       magic "TNSF"
//   4       1       version (1)
//   5       1       D, number of modes (>= 1)
//   6       2       reserved, zero
//   8       8       T, number of observations (>= 1)
//   16      8*D     p_1 ... p_D (each >= 1)
//   16+8D   8*T*p   f64 payload, observation t contiguous, i_1 fastest within it
//
// Loadings are stored one file per mode (`<prefix>.A1`, `<prefix>.A2`, ...),
// each a T = 1 series holding the p_d x k_d matrix as a 2-way tensor.

#include "tfm/estimators.hpp"

#include <filesystem>

namespace tfm {

inline constexpr char kMagic[4] = {'T', 'N', 'S', 'F'};
inline constexpr std::uint8_t kFormatVersion = 1;

void write_tensor_series(const std::filesystem::path& path, const TensorSeries& series);

/// Throws IoError if the file cannot be read, BadMagicError / VersionError /
/// LayoutError (all FormatError, with byte offset) for malformed content.
TensorSeries read_tensor_series(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

std::filesystem::path loading_path(const std::filesystem::path& prefix, std::size_t mode);
void write_loadings(const std::filesystem::path& prefix, const LoadingSet& loadings);
/// Reads `<prefix>.A1`, `<prefix>.A2`, ... until the next file is missing.
LoadingSet read_loadings(const std::filesystem::path& prefix);

/// Axis order of a headerless dump: RowMajor means the last axis varies
/// fastest (C / numpy default), ColumnMajor the first (Fortran).
enum class RawLayout { RowMajor, ColumnMajor };

/// Reads a headerless little-endian f64 dump whose axes are (T, p_1, ..., p_D).
/// Throws LayoutError if the file size does not match `shape`.
TensorSeries read_raw_series(const std::filesystem::path& path, const Dims& shape, RawLayout layout);

}  // namespace tfm
