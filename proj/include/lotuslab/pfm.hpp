#pragma once

#include <filesystem>
#include <string>

#include "lotuslab/grid.hpp"

namespace lotuslab {

/// Portable FloatMap I/O. Header "Pf" for one channel, "PF" for three,
/// ASCII dims, scale -1.0 (little-endian), raw float32 rows bottom-up.
void write_pfm(const std::filesystem::path& path, const Grid& g);
Grid read_pfm(const std::filesystem::path& path);

}  // namespace lotuslab
