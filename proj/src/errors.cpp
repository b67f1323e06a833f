#include "tma_sim/errors.hpp"

namespace tma_sim {

const char* to_string(MemorySide side) { return side == MemorySide::global ? "global" : "shared"; }

AlignmentError::AlignmentError(MemorySide side, std::uint64_t address, std::uint64_t modulus)
    : Error(std::string("AlignmentError(") + to_string(side) + ", address " + std::to_string(address) +
            ", requires 0 mod " + std::to_string(modulus) + ")"),
      side_(side),
      address_(address),
      modulus_(modulus) {}

BoundsError::BoundsError(MemorySide side, std::int64_t allocation_id, std::uint64_t row, const std::string& detail)
    : Error(std::string("BoundsError(") + to_string(side) + ", allocation " + std::to_string(allocation_id) +
            ", row " + std::to_string(row) + "): " + detail),
      side_(side),
      allocation_id_(allocation_id),
      row_(row) {}

}  // namespace tma_sim
