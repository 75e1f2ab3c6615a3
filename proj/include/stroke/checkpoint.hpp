#pragma once

#include <filesystem>

#include "stroke/network.hpp"

namespace stroke {

// Checkpoint container: magic "STCK", u16 LE version (1), u32 LE length of
// the UTF-8 spec text (key=value lines, see spec_to_text), u64 LE rng seed,
// then every parameter tensor as little-endian float32 in layer order.
// Round-trips bit-exactly.
void save_checkpoint(const Model& model, const std::filesystem::path& path);

Model load_checkpoint(const std::filesystem::path& path);

// As above but rejects a checkpoint whose spec differs from `expected`.
Model load_checkpoint(const std::filesystem::path& path, const NetworkSpec& expected);

} // namespace stroke
