#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace midlab {

// Minimal SHA-256, used to content-address input artifacts in reports.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  std::string hex_digest();  // finalizes

  static std::string of_bytes(const std::string& bytes);
  static std::string of_file(const std::string& path);  // throws on IO failure

 private:
  void process_block(const uint8_t* p);
  uint32_t h_[8];
  uint64_t bitlen_ = 0;
  uint8_t buf_[64];
  size_t buflen_ = 0;
};

}  // namespace midlab
