#pragma once

#include "hsr/model.hpp"
#include "hsr/tensor.hpp"

#include <filesystem>
#include <string>

namespace hsr {

// Tensor file layout (all little-endian):
//   "HSRT" | version u8 = 1 | I u64 | J u64 | K u64 | I*J*K f64 (i fastest, then j, then k)
inline constexpr char kTensorMagic[4] = {'H', 'S', 'R', 'T'};
inline constexpr unsigned char kTensorVersion = 1;

std::string encode_tensor(const Tensor3& t);
Tensor3 decode_tensor(const std::string& bytes, const std::string& origin = "buffer");

Tensor3 read_tensor(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_tensor(const Tensor3& t, const std::filesystem::path& path);

/// Factors as JSON: {"L": [...], "A": {"rows","cols","data"}, "B": ..., "C": ...}
/// with column-major data.
std::string factors_to_json(const BtdFactors& f);
BtdFactors factors_from_json(const std::string& text);
BtdFactors read_factors(const std::filesystem::path& path);
void write_factors(const BtdFactors& f, const std::filesystem::path& path);

/// Replaces `path` atomically with `contents`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hsr
