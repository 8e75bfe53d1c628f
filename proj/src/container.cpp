#include "midlab/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace midlab {

NamedArray& Container::add(const std::string& name, std::vector<size_t> shape) {
  NamedArray a;
  a.name = name;
  a.shape = std::move(shape);
  a.data.resize(a.numel(), 0.0);
  arrays.push_back(std::move(a));
  return arrays.back();
}

const NamedArray* Container::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const NamedArray& Container::at(const std::string& name) const {
  const NamedArray* a = find(name);
  if (!a) throw std::runtime_error("container: missing array '" + name + "'");
  return *a;
}

namespace {

void put_u64_le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char(uint8_t(v >> (8 * i))));
}

uint64_t get_u64_le(const char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(p[i])) << (8 * i);
  return v;
}

constexpr char kMagic[] = "MIDLAB\n";

}  // namespace

void write_container(const std::string& path, const Container& c, const std::string& kind) {
  nlohmann::json header = c.header;
  header["format_version"] = {{"major", kFormatMajor}, {"minor", kFormatMinor}};
  header["kind"] = kind;
  header["dtype"] = "f64le";
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& a : c.arrays) {
    if (a.data.size() != a.numel())
      throw std::runtime_error("container: shape/data mismatch for '" + a.name + "'");
    manifest.push_back({{"name", a.name}, {"shape", a.shape}});
  }
  header["arrays"] = manifest;

  std::string head = header.dump();
  std::string out;
  out.reserve(16 + head.size());
  out.append(kMagic, 7);
  put_u64_le(out, head.size());
  out += head;

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("container: cannot write " + path);
  f.write(out.data(), std::streamsize(out.size()));
  std::string blob;
  for (const auto& a : c.arrays) {
    blob.clear();
    blob.reserve(a.data.size() * 8);
    for (double d : a.data) put_u64_le(blob, std::bit_cast<uint64_t>(d));
    f.write(blob.data(), std::streamsize(blob.size()));
  }
  if (!f) throw std::runtime_error("container: write failed for " + path);
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("container: cannot open " + path);
  char magic[7];
  f.read(magic, 7);
  if (!f || std::memcmp(magic, kMagic, 7) != 0)
    throw std::runtime_error("container: bad magic in " + path);
  char lenbuf[8];
  f.read(lenbuf, 8);
  if (!f) throw std::runtime_error("container: truncated header in " + path);
  uint64_t hlen = get_u64_le(lenbuf);
  std::string head(hlen, '\0');
  f.read(head.data(), std::streamsize(hlen));
  if (!f) throw std::runtime_error("container: truncated header in " + path);

  Container c;
  c.header = nlohmann::json::parse(head);
  int major = c.header.at("format_version").at("major").get<int>();
  if (major > kFormatMajor)
    throw std::runtime_error("container: format major " + std::to_string(major) +
                             " newer than supported " + std::to_string(kFormatMajor));
  for (const auto& entry : c.header.at("arrays")) {
    NamedArray a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<size_t>>();
    a.data.resize(a.numel());
    std::string blob(a.data.size() * 8, '\0');
    f.read(blob.data(), std::streamsize(blob.size()));
    if (!f) throw std::runtime_error("container: truncated blob '" + a.name + "' in " + path);
    for (size_t i = 0; i < a.data.size(); ++i)
      a.data[i] = std::bit_cast<double>(get_u64_le(blob.data() + 8 * i));
    c.arrays.push_back(std::move(a));
  }
  return c;
}

}  // namespace midlab
