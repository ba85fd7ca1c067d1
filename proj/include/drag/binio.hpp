#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "drag/errors.hpp"

namespace drag {

// Little-endian binary encoding, independent of host byte order.

struct ByteWriter {
  std::string bytes;

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u8(uint8_t v) { bytes.push_back(static_cast<char>(v)); }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void raw(const std::string& s) { bytes.append(s); }
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& what)
      : bytes_(bytes), what_(what) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string raw(size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t offset() const { return pos_; }

 private:
  void need(size_t n) {
    if (pos_ + n > bytes_.size())
      throw_error(ErrorKind::TruncatedFile,
                  what_ + " truncated at byte " + std::to_string(bytes_.size()) +
                      " (needed " + std::to_string(pos_ + n) + ")");
  }
  const std::string& bytes_;
  std::string what_;
  size_t pos_ = 0;
};

// Whole-file helpers; throw Error{IoFailure} on filesystem errors.
std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace drag
