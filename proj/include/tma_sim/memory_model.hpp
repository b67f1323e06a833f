#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tma_sim/errors.hpp"

namespace tma_sim {

inline constexpr std::uint64_t kGlobalAlignment = 16;
inline constexpr std::uint64_t kSharedAlignment = 128;

constexpr std::uint64_t align_up(std::uint64_t value, std::uint64_t alignment) {
  return (value + alignment - 1) / alignment * alignment;
}

struct Allocation {
  std::int64_t id = 0;
  std::uint64_t base = 0;
  std::uint64_t length = 0;
  std::uint64_t alignment = 0;

  bool contains(std::uint64_t first, std::uint64_t count) const {
    return first >= base && first + count <= base + length;
  }
};

/// Flat byte-addressable memory with a bump allocator. Addresses start at 0.
/// Global arenas align allocations to 16 bytes, shared arenas to 128 bytes.
class SimArena {
 public:
  SimArena(MemorySide kind, std::uint64_t capacity);

  MemorySide kind() const { return kind_; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t min_alignment() const { return kind_ == MemorySide::global ? kGlobalAlignment : kSharedAlignment; }

  /// `alignment` must be a power of two and a multiple of min_alignment().
  std::uint64_t alloc(std::uint64_t length, std::uint64_t alignment);
  std::uint64_t alloc(std::uint64_t length) { return alloc(length, min_alignment()); }

  const std::vector<Allocation>& allocations() const { return allocations_; }
  /// Allocation containing `address`, or nullptr.
  const Allocation* find(std::uint64_t address) const;

  std::span<std::uint8_t> bytes(std::uint64_t address, std::uint64_t count);
  std::span<const std::uint8_t> bytes(std::uint64_t address, std::uint64_t count) const;

  void fill(std::uint64_t address, std::uint64_t count, std::uint8_t value);

 private:
  MemorySide kind_;
  std::uint64_t capacity_;
  std::uint64_t cursor_ = 0;
  std::vector<std::uint8_t> storage_;
  std::vector<Allocation> allocations_;
};

using DescriptorId = std::uint32_t;

/// Statically configured 2-D bulk-copy template. Only DescriptorTable creates these,
/// so every descriptor exists before the table is sealed for launch.
class TmaDescriptor {
 public:
  DescriptorId id() const { return id_; }
  std::uint64_t element_width() const { return element_width_; }
  std::uint64_t box_rows() const { return box_rows_; }
  std::uint64_t box_cols() const { return box_cols_; }
  std::uint64_t global_row_stride() const { return global_row_stride_; }

  std::uint64_t row_bytes() const { return box_cols_ * element_width_; }
  std::uint64_t box_bytes() const { return box_rows_ * row_bytes(); }

 private:
  friend class DescriptorTable;
  TmaDescriptor(DescriptorId id, std::uint64_t element_width, std::uint64_t box_rows, std::uint64_t box_cols,
                std::uint64_t global_row_stride)
      : id_(id),
        element_width_(element_width),
        box_rows_(box_rows),
        box_cols_(box_cols),
        global_row_stride_(global_row_stride) {}

  DescriptorId id_;
  std::uint64_t element_width_;
  std::uint64_t box_rows_;
  std::uint64_t box_cols_;
  std::uint64_t global_row_stride_;
};

/// Host-initialization registry. create() is rejected once seal() has been called.
class DescriptorTable {
 public:
  TmaDescriptor create(std::uint64_t element_width, std::uint64_t box_rows, std::uint64_t box_cols,
                      std::uint64_t global_row_stride);
  const TmaDescriptor& at(DescriptorId id) const;
  std::size_t size() const { return descriptors_.size(); }

  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

 private:
  std::vector<TmaDescriptor> descriptors_;
  bool sealed_ = false;
};

enum class Direction { global_to_shared, shared_to_global };

const char* to_string(Direction d);

struct TransferOp {
  DescriptorId descriptor = 0;
  Direction direction = Direction::global_to_shared;
  std::uint64_t gmem_base = 0;
  std::uint64_t smem_offset = 0;
};

struct TransferRecord {
  std::uint64_t seq = 0;
  TransferOp op;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t bytes = 0;

  friend bool operator==(const TransferRecord& a, const TransferRecord& b) {
    return a.seq == b.seq && a.op.descriptor == b.op.descriptor && a.op.direction == b.op.direction &&
           a.op.gmem_base == b.op.gmem_base && a.op.smem_offset == b.op.smem_offset && a.rows == b.rows &&
           a.cols == b.cols && a.bytes == b.bytes;
  }
};

struct TransferSummary {
  std::uint64_t global_to_shared_bytes = 0;
  std::uint64_t shared_to_global_bytes = 0;
  std::uint64_t op_count = 0;

  std::uint64_t total_bytes() const { return global_to_shared_bytes + shared_to_global_bytes; }
  friend bool operator==(const TransferSummary&, const TransferSummary&) = default;
};

/// Synchronous TMA model over one global/shared arena pair. Every copy checks
/// gmem_base % 16 == 0 and smem_offset % 128 == 0, then that each box row stays
/// inside the allocation holding the start address, before any byte moves.
class TransferEngine {
 public:
  TransferEngine(SimArena& global, SimArena& shared) : global_(global), shared_(shared) {}

  DescriptorTable& descriptors() { return descriptors_; }
  const DescriptorTable& descriptors() const { return descriptors_; }

  /// Requires a sealed descriptor table (copies only happen after launch).
  void tma_copy(const TransferOp& op);

  const std::vector<TransferRecord>& log() const { return log_; }
  TransferSummary summary() const;

  SimArena& global() { return global_; }
  SimArena& shared() { return shared_; }

 private:
  SimArena& global_;
  SimArena& shared_;
  DescriptorTable descriptors_;
  std::vector<TransferRecord> log_;
};

TransferSummary summarize(std::span<const TransferRecord> log);

/// CSV with header: seq,direction,desc_id,gmem_base,smem_offset,rows,cols,bytes
void write_transfer_log_csv(std::ostream& out, std::span<const TransferRecord> log);

}  // namespace tma_sim
