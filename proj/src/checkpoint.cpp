#include "kgalign/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kgalign {

namespace {
constexpr char kMagic[4] = {'W', 'O', 'G', 'C'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, sizeof(T));
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_le<std::uint64_t>(os, bits);
}

template <class T>
bool get_le(std::istream& is, T& v) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(b[i]) << (8 * i);
  return true;
}

bool get_f64(std::istream& is, double& v) {
  std::uint64_t bits;
  if (!get_le(is, bits)) return false;
  std::memcpy(&v, &bits, 8);
  return true;
}

[[noreturn]] void corrupt(const std::filesystem::path& file,
                          const std::string& what) {
  throw std::runtime_error("checkpoint " + file.string() + ": " + what);
}
}  // namespace

void save_checkpoint(const std::filesystem::path& file,
                     const ParameterSet& params,
                     const nlohmann::json& metadata) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  put_bytes(os, kMagic, 4);
  put_le<std::uint16_t>(os, kVersion);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    const Tensor& t = params.tensor(i);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    put_bytes(os, name.data(), name.size());
    put_le<std::uint32_t>(os, 2);
    put_le<std::uint64_t>(os, t.rows);
    put_le<std::uint64_t>(os, t.cols);
    for (double v : t.values) put_f64(os, v);
  }
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + file.string());

  std::ofstream js(file.string() + ".json", std::ios::trunc);
  if (!js) throw std::runtime_error("cannot open " + file.string() + ".json");
  js << metadata.dump(2) << "\n";
}

ParameterSet load_checkpoint(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    corrupt(file, "bad magic");
  std::uint16_t version = 0;
  if (!get_le(is, version) || version != kVersion)
    corrupt(file, "unsupported version " + std::to_string(version));

  ParameterSet params;
  while (true) {
    std::uint32_t name_len = 0;
    if (!get_le(is, name_len)) break;  // clean EOF
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) corrupt(file, "truncated name");
    std::uint32_t rank = 0;
    if (!get_le(is, rank) || rank != 2)
      corrupt(file, "unsupported rank for " + name);
    std::uint64_t rows = 0, cols = 0;
    if (!get_le(is, rows) || !get_le(is, cols))
      corrupt(file, "truncated dims for " + name);
    Tensor t(rows, cols);
    for (auto& v : t.values)
      if (!get_f64(is, v)) corrupt(file, "truncated payload for " + name);
    params.add(std::move(name), std::move(t));
  }
  return params;
}

nlohmann::json load_checkpoint_meta(const std::filesystem::path& file) {
  std::ifstream js(file.string() + ".json");
  if (!js)
    throw std::runtime_error("cannot open " + file.string() + ".json");
  nlohmann::json meta;
  js >> meta;
  return meta;
}

}  // namespace kgalign
