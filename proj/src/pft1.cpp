// SPDX-License-Identifier: Apache-2.0
#include "parflow/pft1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace parflow::pft1 {
namespace {

constexpr char kMagic[4] = {'P', 'F', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "PFT1 I/O assumes a little-endian host");

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (bytes.size() - pos < sizeof(T)) throw FormatError("PFT1: truncated input");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode(std::span<const std::uint64_t> dims, std::span<const Scalar> values) {
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != values.size()) throw DimensionError("PFT1: dims do not match payload length");
  if (dims.size() > 255) throw DimensionError("PFT1: too many dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(6 + 8 * dims.size() + 8 * values.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kFloat64);
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) put(out, d);
  for (auto v : values) put(out, v);
  return out;
}

Blob decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("PFT1: bad magic");
  }
  std::size_t pos = 4;
  const auto code = take<std::uint8_t>(bytes, pos);
  if (code != kFloat64) throw FormatError("PFT1: unsupported scalar code " + std::to_string(code));
  const auto ndim = take<std::uint8_t>(bytes, pos);
  Blob blob;
  std::uint64_t count = 1;
  for (std::uint8_t i = 0; i < ndim; ++i) {
    const auto d = take<std::uint64_t>(bytes, pos);
    if (d != 0 && count > (bytes.size() / sizeof(Scalar)) / d + 1) {
      throw FormatError("PFT1: dims exceed payload");
    }
    count *= d;
    blob.dims.push_back(d);
  }
  const std::size_t remaining = bytes.size() - pos;
  if (remaining != count * sizeof(Scalar)) {
    throw FormatError("PFT1: payload holds " + std::to_string(remaining) + " bytes, dims require " +
                      std::to_string(count * sizeof(Scalar)));
  }
  blob.values.resize(count);
  if (count > 0) std::memcpy(blob.values.data(), bytes.data() + pos, remaining);
  if (!all_finite(blob.values)) throw FormatError("PFT1: non-finite payload entry");
  return blob;
}

std::vector<std::uint8_t> encode(const Matrix& m) {
  const std::uint64_t dims[] = {m.rows(), m.cols()};
  return encode(dims, m.values());
}

std::vector<std::uint8_t> encode(const Tensor3& t) {
  const std::uint64_t dims[] = {t.steps(), t.rank(), t.dim()};
  return encode(dims, t.values());
}

Matrix to_matrix(const Blob& blob) {
  if (blob.dims.size() != 2) throw FormatError("PFT1: expected a 2-d tensor");
  return Matrix(blob.dims[0], blob.dims[1], blob.values);
}

Tensor3 to_tensor3(const Blob& blob) {
  if (blob.dims.size() != 3) throw FormatError("PFT1: expected a 3-d tensor");
  if (blob.dims[1] == 0 || blob.dims[2] == 0) throw FormatError("PFT1: rank and dim must be >= 1");
  return Tensor3(blob.dims[0], blob.dims[1], blob.dims[2], blob.values);
}

Blob read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace parflow::pft1
