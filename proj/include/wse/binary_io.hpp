#pragma once

// Little-endian primitives for the embedding and checkpoint formats. Values
// are assembled byte by byte so files are identical on any host.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "wse/error.hpp"

namespace wse::binary {

template <typename U>
void put_uint(std::ostream& out, U value) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(buf.data(), buf.size());
}

inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

// Reader that turns short reads into a DataError naming what was expected.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename U>
  U get_uint(const char* what) {
    std::array<unsigned char, sizeof(U)> buf;
    read_bytes(reinterpret_cast<char*>(buf.data()), buf.size(), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(buf[i]) << (8 * i);
    }
    return value;
  }

  float get_f32(const char* what) { return std::bit_cast<float>(get_uint<std::uint32_t>(what)); }
  double get_f64(const char* what) { return std::bit_cast<double>(get_uint<std::uint64_t>(what)); }

  std::string get_string(std::size_t n, const char* what) {
    std::string s(n, '\0');
    read_bytes(s.data(), n, what);
    return s;
  }

  void read_bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError(std::string("truncated file: expected ") + what);
    }
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

}  // namespace wse::binary
