#pragma once

#include <cstdint>
#include <string>

#include "tc3l/trainer.hpp"

namespace tc3l {

// FNV-1a 64-bit content hash (manifest checksum)
std::uint64_t fnv1a64(const void* data, std::size_t n);

// checkpoint layout, bit-exact:
//   magic "TC3L\x01"
//   9 little-endian int32: d_in, c_f, h_f, w_f, c_d, k_classes, hidden,
//                          attention mode, attention reduction
//   little-endian float64 arrays: model params in declaration order,
//   class centers, attention params in declaration order
std::string encode_checkpoint(const TrainState& state);

// parses an encode_checkpoint() buffer; velocities and stats come back
// zeroed (checkpoints carry parameters only)
TrainState decode_checkpoint(const std::string& bytes);

// writes bin_path plus a JSON manifest (shapes + checksum) next to it
void save_checkpoint(const TrainState& state, const std::string& bin_path,
                     const std::string& manifest_path);

TrainState load_checkpoint(const std::string& bin_path);

}  // namespace tc3l
