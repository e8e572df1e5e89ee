#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "steadylab/field.hpp"

namespace steadylab {

/// Binary field checkpoint ("SSNS" format, version 1). Layout in
/// docs/checkpoint_format.md:
///
///   offset 0   4 bytes  magic "SSNS"
///   offset 4   uint32   format version (little-endian)
///   offset 8   uint32   n (little-endian)
///   offset 12  float64  period (little-endian)
///   offset 20  3 n^3 complex coefficients, each (re, im) as little-endian
///              float64, component-major, lattice order within a component.
inline constexpr char kCheckpointMagic[4] = {'S', 'S', 'N', 'S'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<unsigned char> encode_checkpoint(const SpectralVectorField& u);

/// The dealias fraction is not part of the format and is supplied by the caller.
SpectralVectorField decode_checkpoint(const std::vector<unsigned char>& bytes,
                                      double dealias_fraction = 2.0 / 3.0);

void save_checkpoint(const SpectralVectorField& u, const std::filesystem::path& path);
SpectralVectorField load_checkpoint(const std::filesystem::path& path,
                                    double dealias_fraction = 2.0 / 3.0);

}  // namespace steadylab
