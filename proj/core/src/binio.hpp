#pragma once

// Little-endian binary file helpers (host is assumed little-endian; the
// on-disk formats are documented as little-endian).

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "minsight/errors.hpp"

namespace minsight::detail {

class BinWriter {
 public:
  explicit BinWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open for writing: " + path);
    path_ = path;
  }

  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }

  template <typename T>
  void value(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    raw(&v, sizeof(T));
  }

  void magic(const char tag[4]) { raw(tag, 4); }

  void floats(const float* p, std::size_t n) { raw(p, n * sizeof(float)); }
  void doubles(const double* p, std::size_t n) { raw(p, n * sizeof(double)); }

  void close() {
    out_.close();
    if (!out_) throw DataError("write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataError("cannot open for reading: " + path);
  }

  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError("truncated file: " + path_);
  }

  template <typename T>
  T value() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }

  void expect_magic(const char tag[4]) {
    char buf[4];
    raw(buf, 4);
    if (std::memcmp(buf, tag, 4) != 0) {
      throw DataError("bad magic in " + path_ + " (expected " +
                      std::string(tag, 4) + ")");
    }
  }

  void floats(float* p, std::size_t n) { raw(p, n * sizeof(float)); }
  void doubles(double* p, std::size_t n) { raw(p, n * sizeof(double)); }

  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace minsight::detail
