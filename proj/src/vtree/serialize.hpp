#pragma once

// Little-endian binary helpers shared by the model files of this module.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "robovis/error.hpp"

namespace robovis::vtree::io {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated model file");
  return v;
}

template <typename T, std::size_t N>
void put_array(std::ostream& out, const std::array<T, N>& a) {
  out.write(reinterpret_cast<const char*>(a.data()), sizeof(T) * N);
}

template <typename T, std::size_t N>
void get_array(std::istream& in, std::array<T, N>& a) {
  if (!in.read(reinterpret_cast<char*>(a.data()), sizeof(T) * N)) throw FormatError("truncated model file");
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  std::string s(get<std::uint32_t>(in), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw FormatError("truncated model file");
  return s;
}

inline void put_magic(std::ostream& out, const char (&magic)[4], std::uint32_t version) {
  out.write(magic, 4);
  put(out, version);
}

inline void expect_magic(std::istream& in, const char (&magic)[4], std::uint32_t version,
                         const std::string& what) {
  char m[4];
  if (!in.read(m, 4) || std::memcmp(m, magic, 4) != 0) throw FormatError("not a " + what + " file");
  if (get<std::uint32_t>(in) != version) throw FormatError("unsupported " + what + " version");
}

}  // namespace robovis::vtree::io
