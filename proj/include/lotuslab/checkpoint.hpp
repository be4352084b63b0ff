#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lotuslab/adam.hpp"

namespace lotuslab {

/// Binary checkpoint container. Layout:
///   magic "LOTUSCKPT", u32 version,
///   u32 json length + config JSON bytes,
///   u32 param count, then per param: u32 name length, name,
///     u32 h, w, c, float32 data,
///   u8 optimizer-present flag; when set: i64 step count, f64 beta1/beta2/eps,
///     then per param float64 first and second moments.
/// Parameter values are stored as float32; optimizer moments keep full
/// 64-bit precision so a save/load/save cycle is byte-exact.
struct Checkpoint {
    std::string config_json;  // net config + experiment metadata
    ParamMap params;
    std::optional<AdamState> opt;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lotuslab
