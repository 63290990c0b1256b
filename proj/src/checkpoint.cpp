#include "lrvmc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace lrvmc {

namespace {

// Explicit little-endian byte order so the block is portable.
void put_le(double v, unsigned char* out) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(bits >> (8 * i));
}

double get_le(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const nlohmann::json& manifest,
                     const Eigen::VectorXd& parameters) {
  nlohmann::json full = manifest;
  full["parameter_count"] = parameters.size();
  {
    std::ofstream out(stem.string() + ".json");
    if (!out) throw std::runtime_error("checkpoint: cannot write " + stem.string() + ".json");
    out << full.dump(2) << '\n';
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(parameters.size()) * 8);
  for (Eigen::Index i = 0; i < parameters.size(); ++i) put_le(parameters[i], &bytes[8 * i]);
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot write " + stem.string() + ".bin");
  bin.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
  Checkpoint ck;
  {
    std::ifstream in(stem.string() + ".json");
    if (!in) throw std::runtime_error("checkpoint: cannot open " + stem.string() + ".json");
    in >> ck.manifest;
  }
  const std::size_t count = ck.manifest.at("parameter_count").get<std::size_t>();
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot open " + stem.string() + ".bin");
  std::vector<unsigned char> bytes(count * 8);
  bin.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(bin.gcount()) != bytes.size()) {
    throw std::runtime_error("checkpoint: parameter block truncated in " + stem.string() +
                             ".bin");
  }
  ck.parameters.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) ck.parameters[i] = get_le(&bytes[8 * i]);
  return ck;
}

}  // namespace lrvmc
