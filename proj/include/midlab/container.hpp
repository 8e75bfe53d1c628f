#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace midlab {

// On-disk container shared by datasets, annotations, and checkpoints:
// a JSON header followed by named little-endian float64 arrays in declared
// order. The encoding is bit-exact across platforms.
//
//   bytes 0..6   magic "MIDLAB\n"
//   bytes 7..14  uint64 LE header byte length
//   header JSON  (carries format_version, kind, metadata, array manifest)
//   blobs        concatenated float64 LE, one per manifest entry
struct NamedArray {
  std::string name;
  std::vector<size_t> shape;
  std::vector<double> data;

  size_t numel() const {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
  }
};

struct Container {
  nlohmann::json header;  // user metadata; manifest is filled at write time
  std::vector<NamedArray> arrays;

  NamedArray& add(const std::string& name, std::vector<size_t> shape);
  const NamedArray* find(const std::string& name) const;
  const NamedArray& at(const std::string& name) const;  // throws if absent
};

inline constexpr int kFormatMajor = 1;
inline constexpr int kFormatMinor = 0;

void write_container(const std::string& path, const Container& c, const std::string& kind);
Container read_container(const std::string& path);

}  // namespace midlab
