#include "steadylab/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "steadylab/error.hpp"

namespace steadylab {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("checkpoint truncated");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const SpectralVectorField& u) {
  const Lattice& lat = u.lattice();
  std::vector<unsigned char> out;
  out.reserve(20 + 16 * u.data().size());
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(lat.n()));
  put_le<double>(out, lat.period());
  for (const Complex& c : u.data()) {
    put_le<double>(out, c.real());
    put_le<double>(out, c.imag());
  }
  return out;
}

SpectralVectorField decode_checkpoint(const std::vector<unsigned char>& bytes,
                                      double dealias_fraction) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw IoError("not an SSNS checkpoint (bad magic)");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto n = get_le<std::uint32_t>(bytes, pos);
  const double period = get_le<double>(bytes, pos);
  if (n > 4096) throw IoError("checkpoint lattice size implausible");
  SpectralVectorField u(make_lattice(static_cast<int>(n), period, dealias_fraction));
  const std::size_t expected = 20 + 16 * u.data().size();
  if (bytes.size() != expected)
    throw IoError("checkpoint size mismatch: expected " + std::to_string(expected) +
                  " bytes, found " + std::to_string(bytes.size()));
  for (Complex& c : u.data()) {
    const double re = get_le<double>(bytes, pos);
    const double im = get_le<double>(bytes, pos);
    c = Complex{re, im};
  }
  return u;
}

void save_checkpoint(const SpectralVectorField& u, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

SpectralVectorField load_checkpoint(const std::filesystem::path& path, double dealias_fraction) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes, dealias_fraction);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace steadylab
