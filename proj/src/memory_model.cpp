#include "tma_sim/memory_model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tma_sim {

SimArena::SimArena(MemorySide kind, std::uint64_t capacity) : kind_(kind), capacity_(capacity) {}

std::uint64_t SimArena::alloc(std::uint64_t length, std::uint64_t alignment) {
  if (!std::has_single_bit(alignment) || alignment % min_alignment() != 0) {
    throw std::invalid_argument(std::string("alloc: alignment ") + std::to_string(alignment) +
                                " is not a power-of-two multiple of " + std::to_string(min_alignment()) + " for " +
                                to_string(kind_) + " memory");
  }
  const std::uint64_t base = align_up(cursor_, alignment);
  if (base > capacity_ || length > capacity_ - base) {
    throw OutOfMemory(std::string(to_string(kind_)) + " arena: cannot allocate " + std::to_string(length) +
                      " bytes at " + std::to_string(base) + " (capacity " + std::to_string(capacity_) + ")");
  }
  cursor_ = base + length;
  if (storage_.size() < cursor_) storage_.resize(cursor_, 0);
  allocations_.push_back(Allocation{static_cast<std::int64_t>(allocations_.size()), base, length, alignment});
  return base;
}

const Allocation* SimArena::find(std::uint64_t address) const {
  // Allocations are created in increasing address order.
  auto it = std::upper_bound(allocations_.begin(), allocations_.end(), address,
                             [](std::uint64_t a, const Allocation& alloc) { return a < alloc.base; });
  while (it != allocations_.begin()) {
    --it;
    if (address >= it->base && address < it->base + it->length) return &*it;
    if (it->length != 0) break;
  }
  return nullptr;
}

std::span<std::uint8_t> SimArena::bytes(std::uint64_t address, std::uint64_t count) {
  if (address > storage_.size() || count > storage_.size() - address) {
    throw std::out_of_range("SimArena::bytes: range outside the allocated arena");
  }
  return {storage_.data() + address, count};
}

std::span<const std::uint8_t> SimArena::bytes(std::uint64_t address, std::uint64_t count) const {
  if (address > storage_.size() || count > storage_.size() - address) {
    throw std::out_of_range("SimArena::bytes: range outside the allocated arena");
  }
  return {storage_.data() + address, count};
}

void SimArena::fill(std::uint64_t address, std::uint64_t count, std::uint8_t value) {
  auto span = bytes(address, count);
  std::fill(span.begin(), span.end(), value);
}

TmaDescriptor DescriptorTable::create(std::uint64_t element_width, std::uint64_t box_rows, std::uint64_t box_cols,
                                      std::uint64_t global_row_stride) {
  if (sealed_) throw std::logic_error("TMA descriptors must be created before launch");
  if (element_width == 0 || box_cols == 0 || box_rows == 0) {
    throw std::invalid_argument("TMA descriptor box must be non-empty");
  }
  TmaDescriptor d(static_cast<DescriptorId>(descriptors_.size()), element_width, box_rows, box_cols,
                  global_row_stride);
  descriptors_.push_back(d);
  return d;
}

const TmaDescriptor& DescriptorTable::at(DescriptorId id) const {
  if (id >= descriptors_.size()) throw std::out_of_range("unknown TMA descriptor " + std::to_string(id));
  return descriptors_[id];
}

const char* to_string(Direction d) { return d == Direction::global_to_shared ? "g2s" : "s2g"; }

namespace {

const Allocation& owning_allocation(const SimArena& arena, std::uint64_t address) {
  const Allocation* alloc = arena.find(address);
  if (alloc == nullptr) {
    throw BoundsError(arena.kind(), -1, 0, "start address " + std::to_string(address) + " is not inside any allocation");
  }
  return *alloc;
}

}  // namespace

void TransferEngine::tma_copy(const TransferOp& op) {
  if (!descriptors_.sealed()) throw std::logic_error("tma_copy issued before the descriptor table was sealed");
  const TmaDescriptor& desc = descriptors_.at(op.descriptor);

  if (op.gmem_base % kGlobalAlignment != 0) throw AlignmentError(MemorySide::global, op.gmem_base, kGlobalAlignment);
  if (op.smem_offset % kSharedAlignment != 0) throw AlignmentError(MemorySide::shared, op.smem_offset, kSharedAlignment);

  const std::uint64_t row_bytes = desc.row_bytes();
  const std::uint64_t rows = desc.box_rows();

  const Allocation& smem_alloc = owning_allocation(shared_, op.smem_offset);
  if (!smem_alloc.contains(op.smem_offset, desc.box_bytes())) {
    const std::uint64_t fitting = (smem_alloc.base + smem_alloc.length - op.smem_offset) / row_bytes;
    throw BoundsError(MemorySide::shared, smem_alloc.id, fitting, "box of " + std::to_string(rows) + " rows overflows");
  }
  const Allocation& gmem_alloc = owning_allocation(global_, op.gmem_base);
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (!gmem_alloc.contains(op.gmem_base + r * desc.global_row_stride(), row_bytes)) {
      throw BoundsError(MemorySide::global, gmem_alloc.id, r, "box of " + std::to_string(rows) + " rows overflows");
    }
  }

  for (std::uint64_t r = 0; r < rows; ++r) {
    const std::uint64_t g = op.gmem_base + r * desc.global_row_stride();
    const std::uint64_t s = op.smem_offset + r * row_bytes;
    if (op.direction == Direction::global_to_shared) {
      std::memcpy(shared_.bytes(s, row_bytes).data(), global_.bytes(g, row_bytes).data(), row_bytes);
    } else {
      std::memcpy(global_.bytes(g, row_bytes).data(), shared_.bytes(s, row_bytes).data(), row_bytes);
    }
  }

  log_.push_back(TransferRecord{log_.size(), op, rows, desc.box_cols(), desc.box_bytes()});
}

TransferSummary summarize(std::span<const TransferRecord> log) {
  TransferSummary s;
  for (const auto& rec : log) {
    if (rec.op.direction == Direction::global_to_shared) {
      s.global_to_shared_bytes += rec.bytes;
    } else {
      s.shared_to_global_bytes += rec.bytes;
    }
    ++s.op_count;
  }
  return s;
}

TransferSummary TransferEngine::summary() const { return summarize(log_); }

void write_transfer_log_csv(std::ostream& out, std::span<const TransferRecord> log) {
  out << "seq,direction,desc_id,gmem_base,smem_offset,rows,cols,bytes\n";
  for (const auto& rec : log) {
    out << rec.seq << ',' << to_string(rec.op.direction) << ',' << rec.op.descriptor << ',' << rec.op.gmem_base << ','
        << rec.op.smem_offset << ',' << rec.rows << ',' << rec.cols << ',' << rec.bytes << '\n';
  }
}

}  // namespace tma_sim
