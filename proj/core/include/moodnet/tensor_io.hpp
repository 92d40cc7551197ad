#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "moodnet/errors.hpp"
#include "moodnet/tensor.hpp"

// Tensor file format: magic "MNT1", u32 rank, rank x u32 extents, then the
// payload as little-endian IEEE-754 float32 in row-major order. Values are
// stored at float32 precision regardless of the in-memory scalar type.

namespace moodnet {

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

/// Writes bytes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace detail

inline constexpr char kTensorMagic[4] = {'M', 'N', 'T', '1'};

template <typename T>
std::string serialize_tensor(const Tensor<T>& t) {
  std::string buf;
  buf.reserve(8 + 4 * t.shape().size() + 4 * static_cast<std::size_t>(t.size()));
  buf.append(kTensorMagic, 4);
  detail::put_u32(buf, static_cast<std::uint32_t>(t.rank()));
  for (Index e : t.shape()) {
    if (e > static_cast<Index>(std::numeric_limits<std::uint32_t>::max())) {
      throw IoError("tensor extent " + std::to_string(e) + " does not fit the file format");
    }
    detail::put_u32(buf, static_cast<std::uint32_t>(e));
  }
  for (Index i = 0; i < t.size(); ++i) {
    const float f = static_cast<float>(t[i]);
    detail::put_u32(buf, std::bit_cast<std::uint32_t>(f));
  }
  return buf;
}

template <typename T>
void write_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
  detail::write_file_atomic(path, serialize_tensor(t));
}

template <typename T>
Tensor<T> parse_tensor(const std::string& bytes, const std::string& origin) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw IoError("not a tensor file: " + origin);
  }
  const std::uint32_t rank = detail::get_u32(p + 4);
  if (rank == 0 || rank > 255) {
    throw IoError("tensor file " + origin + " has invalid rank " + std::to_string(rank));
  }
  if (bytes.size() < 8 + 4ull * rank) throw IoError("truncated tensor header: " + origin);
  Shape shape(rank);
  std::uint64_t count = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    const std::uint32_t e = detail::get_u32(p + 8 + 4 * d);
    if (e == 0) throw IoError("tensor file " + origin + " has a zero extent");
    shape[d] = static_cast<Index>(e);
    count *= e;
  }
  const std::size_t expected = 8 + 4ull * rank + 4ull * count;
  if (bytes.size() != expected) {
    throw IoError("tensor file " + origin + " has " + std::to_string(bytes.size()) +
                  " bytes, expected " + std::to_string(expected));
  }
  Tensor<T> t(shape);
  const unsigned char* payload = p + 8 + 4ull * rank;
  for (std::uint64_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(detail::get_u32(payload + 4 * i));
    t[static_cast<Index>(i)] = static_cast<T>(f);
  }
  return t;
}

template <typename T>
Tensor<T> read_tensor(const std::filesystem::path& path) {
  return parse_tensor<T>(detail::read_file_bytes(path), path.string());
}

/// Reads only the header. Cheap even for large files.
inline Shape read_tensor_shape(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char head[8];
  if (!in.read(reinterpret_cast<char*>(head), 8) || std::memcmp(head, kTensorMagic, 4) != 0) {
    throw IoError("not a tensor file: " + path.string());
  }
  const std::uint32_t rank = detail::get_u32(head + 4);
  if (rank == 0 || rank > 255) {
    throw IoError("tensor file " + path.string() + " has invalid rank " + std::to_string(rank));
  }
  Shape shape(rank);
  for (std::uint32_t d = 0; d < rank; ++d) {
    unsigned char ext[4];
    if (!in.read(reinterpret_cast<char*>(ext), 4)) {
      throw IoError("truncated tensor header: " + path.string());
    }
    const std::uint32_t e = detail::get_u32(ext);
    if (e == 0) throw IoError("tensor file " + path.string() + " has a zero extent");
    shape[d] = static_cast<Index>(e);
  }
  return shape;
}

}  // namespace moodnet
