#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "favd/error.hpp"

namespace favd::avl {

// Binary array container:
//   line 1: UTF-8 JSON header {"arrays": [{"name", "dtype": "f32", "shape": [...]}, ...], ...}
//   "\n"
//   little-endian float32 payloads, concatenated in header order.
// Extra header keys (checkpoint config, vocabulary) ride along in `meta`.
struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

struct Container {
  std::vector<NamedArray> arrays;
  nlohmann::json meta = nlohmann::json::object();

  const NamedArray* find(const std::string& name) const {
    for (const auto& a : arrays) {
      if (a.name == name) return &a;
    }
    return nullptr;
  }

  const NamedArray& at(const std::string& name) const {
    if (const auto* a = find(name)) return *a;
    throw ParseError("container: missing array '" + name + "'");
  }
};

namespace detail {

inline std::uint32_t to_le(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return ((x & 0xFFu) << 24) | ((x & 0xFF00u) << 8) | ((x >> 8) & 0xFF00u) | (x >> 24);
  }
}

}  // namespace detail

inline std::string serialize_container(const Container& c) {
  nlohmann::json header = c.meta.is_object() ? c.meta : nlohmann::json::object();
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& a : c.arrays) {
    if (a.data.size() != a.element_count()) {
      throw ShapeError("container: array '" + a.name + "' data does not match its shape", a.name);
    }
    arrays.push_back({{"name", a.name}, {"dtype", "f32"}, {"shape", a.shape}});
  }
  header["arrays"] = arrays;
  std::string out = header.dump();
  out += '\n';
  for (const auto& a : c.arrays) {
    for (float f : a.data) {
      const auto bits = detail::to_le(std::bit_cast<std::uint32_t>(f));
      char buf[4];
      std::memcpy(buf, &bits, 4);
      out.append(buf, 4);
    }
  }
  return out;
}

inline Container parse_container(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw ParseError("container: missing header line");
  Container c;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("container: bad header: ") + e.what(), 1, e.byte);
  }
  if (!header.is_object() || !header.contains("arrays") || !header["arrays"].is_array()) {
    throw ParseError("container: header lacks an 'arrays' list");
  }
  std::size_t pos = nl + 1;
  for (const auto& spec : header["arrays"]) {
    NamedArray a;
    try {
      a.name = spec.at("name").get<std::string>();
      if (spec.at("dtype").get<std::string>() != "f32") {
        throw ParseError("container: array '" + a.name + "' has unsupported dtype");
      }
      a.shape = spec.at("shape").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("container: bad array spec: ") + e.what());
    }
    const std::size_t n = a.element_count();
    if (pos + 4 * n > bytes.size()) {
      throw ParseError("container: payload of '" + a.name + "' is truncated");
    }
    a.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + pos + 4 * i, 4);
      a.data[i] = std::bit_cast<float>(detail::to_le(bits));
    }
    pos += 4 * n;
    c.arrays.push_back(std::move(a));
  }
  if (pos != bytes.size()) throw ParseError("container: trailing bytes after payloads");
  header.erase("arrays");
  c.meta = std::move(header);
  return c;
}

inline void write_container(const std::string& path, const Container& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const auto bytes = serialize_container(c);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

inline Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_container(ss.str());
}

}  // namespace favd::avl
