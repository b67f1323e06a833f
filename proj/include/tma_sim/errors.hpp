#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tma_sim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfMemory : public Error {
 public:
  using Error::Error;
};

enum class MemorySide { global, shared };

const char* to_string(MemorySide side);

/// A transfer start address violated the TMA congruence for its side
/// (16 bytes for global memory, 128 bytes for shared memory).
class AlignmentError : public Error {
 public:
  AlignmentError(MemorySide side, std::uint64_t address, std::uint64_t modulus);

  MemorySide side() const { return side_; }
  std::uint64_t address() const { return address_; }
  std::uint64_t modulus() const { return modulus_; }

 private:
  MemorySide side_;
  std::uint64_t address_;
  std::uint64_t modulus_;
};

/// A box row fell outside the allocation holding its first byte. Fatal for the run.
class BoundsError : public Error {
 public:
  BoundsError(MemorySide side, std::int64_t allocation_id, std::uint64_t row, const std::string& detail);

  MemorySide side() const { return side_; }
  std::int64_t allocation_id() const { return allocation_id_; }
  std::uint64_t row() const { return row_; }

 private:
  MemorySide side_;
  std::int64_t allocation_id_;
  std::uint64_t row_;
};

class InvalidBlockN : public Error {
 public:
  using Error::Error;
};

class InvalidBlockM : public Error {
 public:
  using Error::Error;
};

class ResOutOfRange : public Error {
 public:
  using Error::Error;
};

class NoAlignedSolution : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// Problem or run configuration rejected before any simulation starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tma_sim
