// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "parflow/tensor.hpp"

namespace parflow::pft1 {

/// Serialized tensor container:
///   "PFT1" | u8 scalar code (0 = float64) | u8 ndim | u64 dims[ndim] LE |
///   payload, little-endian, row-major.
struct Blob {
  std::vector<std::uint64_t> dims;
  std::vector<Scalar> values;
};

inline constexpr std::uint8_t kFloat64 = 0;

std::vector<std::uint8_t> encode(std::span<const std::uint64_t> dims, std::span<const Scalar> values);
/// Throws FormatError on bad magic, unknown scalar code, truncation, trailing
/// bytes or non-finite payload.
Blob decode(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode(const Matrix& m);
std::vector<std::uint8_t> encode(const Tensor3& t);

Matrix to_matrix(const Blob& blob);
Tensor3 to_tensor3(const Blob& blob);

/// Whole-file helpers. read_file names the path in every error.
Blob read_file(const std::filesystem::path& path);
/// Writes through a sibling temporary and renames, so a failed write leaves
/// no partial file behind.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace parflow::pft1
