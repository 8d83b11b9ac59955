#pragma once

// Persisted ensemble state. Layout (all integers little-endian):
//
//   magic    8 bytes  "LTPCSTAT"
//   version  u32      kStateFormatVersion
//   length   u64      payload byte count
//   payload  length bytes
//   crc32    u32      zlib CRC-32 of the payload
//
// The payload holds the mission index, capacity, base model, and one record
// per slot (history bits, place metadata, model). Doubles are stored as
// their IEEE-754 bit patterns, so a round trip is bit-exact.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ltpc/missions.hpp"

namespace ltpc {

inline constexpr std::uint32_t kStateFormatVersion = 1;
inline constexpr std::size_t kStateHeaderBytes = 8 + 4 + 8 + 4;

std::vector<std::uint8_t> serialize_state(const EnsembleState& state);
EnsembleState deserialize_state(const std::vector<std::uint8_t>& bytes);

void save_state(const EnsembleState& state, const std::string& path);
EnsembleState load_state(const std::string& path);

}  // namespace ltpc
