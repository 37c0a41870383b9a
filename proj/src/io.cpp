#include "hsr/io.hpp"

#include "hsr/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <unistd.h>

namespace hsr {

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

template <typename T>
void put_le(std::string& out, T value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(char((bits >> (8 * b)) & 0xff));
}

template <typename T>
T get_le(const char* p) {
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= std::uint64_t(static_cast<unsigned char>(p[b])) << (8 * b);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

constexpr std::size_t kHeaderSize = 4 + 1 + 3 * 8;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

nlohmann::ordered_json mat_to_json(const Mat& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

Mat mat_from_json(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw UsageError(std::string("factor JSON is missing '") + name + "'");
  const auto& o = j.at(name);
  const auto rows = o.at("rows").get<Eigen::Index>();
  const auto cols = o.at("cols").get<Eigen::Index>();
  const auto data = o.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || data.size() != std::size_t(rows * cols)) {
    throw UsageError(std::string("factor JSON: '") + name + "' data length does not match its shape");
  }
  return Eigen::Map<const Mat>(data.data(), rows, cols);
}

}  // namespace

std::string encode_tensor(const Tensor3& t) {
  std::string out;
  out.reserve(kHeaderSize + 8 * t.numel());
  out.append(kTensorMagic, 4);
  out.push_back(char(kTensorVersion));
  put_le<std::uint64_t>(out, t.dims().I);
  put_le<std::uint64_t>(out, t.dims().J);
  put_le<std::uint64_t>(out, t.dims().K);
  for (double v : t.data()) put_le<double>(out, v);
  return out;
}

Tensor3 decode_tensor(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kHeaderSize) throw IoError(origin + ": truncated tensor header");
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) throw IoError(origin + ": not a tensor file (bad magic)");
  if (static_cast<unsigned char>(bytes[4]) != kTensorVersion) {
    throw IoError(origin + ": unsupported tensor file version " +
                  std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  const auto I = get_le<std::uint64_t>(bytes.data() + 5);
  const auto J = get_le<std::uint64_t>(bytes.data() + 13);
  const auto K = get_le<std::uint64_t>(bytes.data() + 21);
  if (I == 0 || J == 0 || K == 0) throw IoError(origin + ": tensor dimensions must be positive");
  const std::uint64_t payload = bytes.size() - kHeaderSize;
  if (I > payload || J > payload / I || K > payload / (I * J) || payload != 8 * I * J * K) {
    throw IoError(origin + ": payload length does not match dims");
  }
  const std::uint64_t n = I * J * K;
  std::vector<double> data(n);
  const char* p = bytes.data() + kHeaderSize;
  for (std::uint64_t e = 0; e < n; ++e) data[e] = get_le<double>(p + 8 * e);
  return Tensor3({I, J, K}, std::move(data));
}

Tensor3 read_tensor(const std::filesystem::path& path) { return decode_tensor(slurp(path), path.string()); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(contents.data(), std::streamsize(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

void write_tensor(const Tensor3& t, const std::filesystem::path& path) { write_file_atomic(path, encode_tensor(t)); }

std::string factors_to_json(const BtdFactors& f) {
  f.validate();
  nlohmann::ordered_json j;
  j["L"] = f.rank.partition().widths();
  j["A"] = mat_to_json(f.A);
  j["B"] = mat_to_json(f.B);
  j["C"] = mat_to_json(f.C);
  return j.dump();
}

BtdFactors factors_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("factor JSON does not parse: ") + e.what());
  }
  try {
    BtdFactors f{mat_from_json(j, "A"), mat_from_json(j, "B"), mat_from_json(j, "C"),
                 RankSpec(j.at("L").get<std::vector<std::size_t>>())};
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed factor JSON: ") + e.what());
  }
}

BtdFactors read_factors(const std::filesystem::path& path) { return factors_from_json(slurp(path)); }

void write_factors(const BtdFactors& f, const std::filesystem::path& path) {
  write_file_atomic(path, factors_to_json(f));
}

}  // namespace hsr
