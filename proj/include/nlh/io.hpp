#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlh/grid.hpp"

namespace nlh {

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t len,
                           std::uint64_t h = 1469598103934665603ull) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

// (re, im) float64 pairs, last-axis-fastest, forced little-endian
inline std::vector<unsigned char> field_payload(const Field& f) {
  std::vector<unsigned char> bytes;
  bytes.reserve(16 * f.size());
  auto put = [&](double v) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, 8);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>(u >> (8 * b)));
  };
  for (const Complex& z : f.values) {
    put(z.real());
    put(z.imag());
  }
  return bytes;
}

inline double read_f64(const unsigned char* p) {
  std::uint64_t u = 0;
  for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void atomic_write(const std::filesystem::path& path, const void* data, std::size_t len) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

}  // namespace detail

// JSON sidecar + raw payload next to it; both writes are atomic (write-then-rename)
inline void save_field(const Field& f, const std::filesystem::path& json_path) {
  std::filesystem::path payload = json_path;
  payload.replace_extension(".raw");
  std::vector<unsigned char> bytes = detail::field_payload(f);
  detail::atomic_write(payload, bytes.data(), bytes.size());
  nlohmann::json side{{"dim", f.grid.dim},
                      {"half_width", f.grid.half_width},
                      {"points_per_axis", f.grid.points_per_axis},
                      {"realness_tag", f.realness_tag},
                      {"payload_file", payload.filename().string()}};
  std::string text = side.dump(2);
  detail::atomic_write(json_path, text.data(), text.size());
}

inline Field load_field(const std::filesystem::path& json_path) {
  nlohmann::json side;
  {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path.string());
    in >> side;
  }
  GridSpec g{side.at("dim").get<int>(), side.at("half_width").get<double>(),
             side.at("points_per_axis").get<int>()};
  g.validate();
  Field f = Field::zeros(g);
  f.realness_tag = side.at("realness_tag").get<bool>();
  std::filesystem::path payload =
      json_path.parent_path() / side.at("payload_file").get<std::string>();
  std::vector<unsigned char> bytes = detail::read_all(payload);
  if (bytes.size() != 16 * f.size())
    throw IoError("payload size mismatch in " + payload.string());
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = Complex(detail::read_f64(&bytes[16 * i]), detail::read_f64(&bytes[16 * i + 8]));
  return f;
}

struct Checkpoint {
  int iteration = 0;
  double J_value = 0.0;
  double crit_residual = 0.0;
  unsigned seed = 0;
  std::uint64_t config_hash = 0;
  Field v;
};

// JSON header (with a payload checksum) + field dump, all atomic
inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& json_path) {
  std::filesystem::path payload = json_path;
  payload.replace_extension(".raw");
  std::vector<unsigned char> bytes = detail::field_payload(c.v);
  detail::atomic_write(payload, bytes.data(), bytes.size());
  nlohmann::json head{{"iteration", c.iteration},
                      {"J_value", c.J_value},
                      {"crit_residual", c.crit_residual},
                      {"seed", c.seed},
                      {"config_hash", c.config_hash},
                      {"checksum", detail::fnv1a(bytes.data(), bytes.size())},
                      {"dim", c.v.grid.dim},
                      {"half_width", c.v.grid.half_width},
                      {"points_per_axis", c.v.grid.points_per_axis},
                      {"realness_tag", c.v.realness_tag},
                      {"payload_file", payload.filename().string()}};
  std::string text = head.dump(2);
  detail::atomic_write(json_path, text.data(), text.size());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& json_path) {
  nlohmann::json head;
  {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path.string());
    in >> head;
  }
  Checkpoint c;
  c.iteration = head.at("iteration").get<int>();
  c.J_value = head.at("J_value").get<double>();
  c.crit_residual = head.at("crit_residual").get<double>();
  c.seed = head.at("seed").get<unsigned>();
  c.config_hash = head.at("config_hash").get<std::uint64_t>();
  GridSpec g{head.at("dim").get<int>(), head.at("half_width").get<double>(),
             head.at("points_per_axis").get<int>()};
  g.validate();
  std::filesystem::path payload =
      json_path.parent_path() / head.at("payload_file").get<std::string>();
  std::vector<unsigned char> bytes = detail::read_all(payload);
  if (bytes.size() != 16 * g.size() ||
      detail::fnv1a(bytes.data(), bytes.size()) != head.at("checksum").get<std::uint64_t>())
    throw ChecksumMismatch("checkpoint payload corrupt: " + payload.string());
  c.v = Field::zeros(g);
  c.v.realness_tag = head.at("realness_tag").get<bool>();
  for (std::size_t i = 0; i < c.v.size(); ++i)
    c.v.values[i] =
        Complex(detail::read_f64(&bytes[16 * i]), detail::read_f64(&bytes[16 * i + 8]));
  return c;
}

inline void save_csv(const std::filesystem::path& path, const std::string& header,
                     const std::vector<std::vector<double>>& rows) {
  std::string text = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      text += buf;
      text += (i + 1 < row.size()) ? ',' : '\n';
    }
  }
  detail::atomic_write(path, text.data(), text.size());
}

}  // namespace nlh
