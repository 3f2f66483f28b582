#pragma once

#include <cstring>
#include <map>
#include <optional>
#include <vector>

#include "fsdfi/ir.hpp"
#include "fsdfi/legal_defs.hpp"

namespace fsdfi {

// Run-time faults of the simulated machine. The interpreter converts these
// into a MemoryFault outcome; unit tests assert on them directly.
enum class FaultKind { MemoryFault, AllocFailure, FreeError };

struct RuntimeFault {
    FaultKind kind;
    std::string message;
    uint64_t address = 0;
};

enum class FreeReason { HeapFree, FrameExit };

struct FreeInfo {
    FreeReason reason = FreeReason::HeapFree;
    SourcePos pos;
    std::string function;
};

// One allocation: a power-of-two chunk holding the object's bytes at layout
// offsets, plus the shadow array with one def id per field slot. Records of
// freed allocations are retained (bytes and all) until the chunk is reused,
// so dangling accesses read stale data but observe RELEASED metadata.
struct Allocation {
    uint64_t base = 0;
    uint32_t chunk_size = 0;
    AllocSiteId site = 0;
    const TypeLayout* layout = nullptr;
    bool live = false;
    std::vector<DefSiteId> shadow;  // slot -> last def id; INITIAL on allocation
    std::optional<FreeInfo> freed;
};

// A resolved byte range fragment: `slot` of the allocation at `alloc`.
struct SlotRef {
    Allocation* alloc = nullptr;
    uint32_t slot = 0;
};

struct MemoryConfig {
    uint64_t arena_size = 1ull << 20;  // power of two, >= 64 KiB
    uint32_t min_class = 16;           // power of two chunk sizes
    uint32_t max_class = 4096;
};

// Byte-accurate arena. The address space puts the arena at
// [arena_size, 2*arena_size), so 0 is never mapped. The arena is divided
// into one region per size class; chunk bases are recoverable from any
// interior address by masking with the class chunk size, giving O(1) owner
// lookup. Consecutive allocations of a class are adjacent (bump pointer, no
// guard gaps); freed chunks are reused LIFO.
class MemoryImage {
public:
    explicit MemoryImage(MemoryConfig cfg = {}) : cfg_(cfg) {
        require_pow2(cfg.arena_size, "arena size");
        require_pow2(cfg.min_class, "min class");
        require_pow2(cfg.max_class, "max class");
        if (cfg.arena_size < (1ull << 16))
            fail(ErrorKind::Config, "arena size must be at least 64 KiB");
        if (cfg.min_class < 8 || cfg.min_class > cfg.max_class)
            fail(ErrorKind::Config, "bad size class range");
        num_classes_ = 0;
        for (uint64_t c = cfg.min_class; c <= cfg.max_class; c <<= 1) ++num_classes_;
        uint32_t region_slots = 1;
        while (region_slots < num_classes_) region_slots <<= 1;
        region_size_ = cfg.arena_size / region_slots;
        if (region_size_ < cfg.max_class)
            fail(ErrorKind::Config, "arena too small for the class range");
        va_base_ = cfg.arena_size;
        bytes_.assign(cfg.arena_size, 0);
        cursor_.assign(num_classes_, 0);
        free_lists_.assign(num_classes_, {});
    }

    // --- allocation --------------------------------------------------------

    uint64_t allocate(AllocSiteId site, const TypeLayout* layout) {
        uint32_t size = layout->size == 0 ? 1 : layout->size;
        int cls = class_for(size);
        if (cls < 0)
            throw RuntimeFault{FaultKind::AllocFailure,
                               "object of " + std::to_string(size) + " bytes exceeds the largest size class"};
        uint64_t base;
        uint32_t chunk = class_size(cls);
        if (!free_lists_[cls].empty()) {
            base = free_lists_[cls].back();
            free_lists_[cls].pop_back();
            allocs_.erase(base);  // retire the dead record, the chunk is reused
        } else {
            uint64_t off = cursor_[cls];
            if (off + chunk > region_size_)
                throw RuntimeFault{FaultKind::AllocFailure,
                                   "size class " + std::to_string(chunk) + " exhausted"};
            cursor_[cls] = off + chunk;
            base = va_base_ + static_cast<uint64_t>(cls) * region_size_ + off;
        }
        std::memset(raw(base), 0, chunk);
        Allocation rec;
        rec.base = base;
        rec.chunk_size = chunk;
        rec.site = site;
        rec.layout = layout;
        rec.live = true;
        rec.shadow.assign(layout->slot_count(), kInitialDef);
        allocs_[base] = std::move(rec);
        live_slots_ += layout->slot_count();
        live_bytes_ += layout->size;
        peak_live_slots_ = std::max(peak_live_slots_, live_slots_);
        peak_live_bytes_ = std::max(peak_live_bytes_, live_bytes_);
        return base;
    }

    void deallocate(uint64_t base, FreeInfo info) {
        auto it = allocs_.find(base);
        if (it == allocs_.end() || !it->second.live) {
            std::string what = it == allocs_.end() ? "not an allocation base" : "double free";
            throw RuntimeFault{FaultKind::FreeError, what, base};
        }
        Allocation& rec = it->second;
        rec.live = false;
        rec.freed = std::move(info);
        for (auto& s : rec.shadow) s = kReleasedDef;  // bytes retained
        live_slots_ -= rec.layout->slot_count();
        live_bytes_ -= rec.layout->size;
        int cls = class_for(rec.chunk_size);
        free_lists_[cls].push_back(base);
    }

    // --- owner lookup -------------------------------------------------------

    // Masks an address to its chunk base; returns the owning record, dead or
    // alive, or null for never-allocated addresses.
    Allocation* owner(uint64_t addr) {
        if (addr < va_base_ || addr >= va_base_ + cfg_.arena_size) return nullptr;
        uint64_t region = (addr - va_base_) / region_size_;
        if (region >= num_classes_) return nullptr;
        uint64_t chunk = class_size(static_cast<int>(region));
        uint64_t base = addr & ~(chunk - 1);
        auto it = allocs_.find(base);
        return it == allocs_.end() ? nullptr : &it->second;
    }

    // Maps every byte of [addr, addr+length) to its owning field slot.
    // Bytes past the object's size but inside its chunk map to the last slot
    // (padding tail), so small overflows stay attributable. A range may span
    // slots, objects, and chunks; fragments come back in address order.
    // Faults if any byte was never allocated. Dead chunks resolve: their
    // shadow already reads RELEASED.
    std::vector<SlotRef> resolve_slots(uint64_t addr, uint32_t length) {
        if (length == 0) throw RuntimeFault{FaultKind::MemoryFault, "zero-length access", addr};
        std::vector<SlotRef> out;
        uint64_t cur = addr;
        uint64_t end = addr + length;
        while (cur < end) {
            Allocation* rec = owner(cur);
            if (!rec)
                throw RuntimeFault{FaultKind::MemoryFault,
                                   "access to unmapped address", cur};
            uint64_t chunk_end = rec->base + rec->chunk_size;
            uint64_t stop = std::min(end, chunk_end);
            const TypeLayout& ly = *rec->layout;
            for (uint64_t b = cur; b < stop; ++b) {
                uint64_t off = b - rec->base;
                uint32_t slot = off < ly.size ? ly.byte_to_slot[static_cast<size_t>(off)]
                                              : ly.slot_count() - 1;
                if (out.empty() || out.back().alloc != rec || out.back().slot != slot)
                    out.push_back({rec, slot});
            }
            cur = stop;
        }
        return out;
    }

    // --- data and shadow ----------------------------------------------------

    void write_bytes(uint64_t addr, const void* src, uint32_t len) {
        std::memcpy(raw(addr), src, len);
    }
    void read_bytes(uint64_t addr, void* dst, uint32_t len) const {
        std::memcpy(dst, raw(addr), len);
    }

    // --- accounting ---------------------------------------------------------

    uint64_t live_slots() const { return live_slots_; }
    uint64_t peak_live_slots() const { return peak_live_slots_; }
    uint64_t live_bytes() const { return live_bytes_; }
    uint64_t peak_live_bytes() const { return peak_live_bytes_; }

    // Independent recount over the allocation map; must equal live_slots().
    uint64_t audit_live_slots() const {
        uint64_t n = 0;
        for (const auto& [base, rec] : allocs_)
            if (rec.live) n += rec.layout->slot_count();
        return n;
    }

    const std::map<uint64_t, Allocation>& allocations() const { return allocs_; }

    // Linear-scan owner lookup, for checking the mask shortcut in tests.
    const Allocation* owner_by_scan(uint64_t addr) const {
        for (const auto& [base, rec] : allocs_)
            if (addr >= base && addr < base + rec.chunk_size) return &rec;
        return nullptr;
    }

private:
    static void require_pow2(uint64_t v, const char* what) {
        if (v == 0 || (v & (v - 1)) != 0)
            fail(ErrorKind::Config, std::string(what) + " must be a power of two");
    }

    uint32_t class_size(int cls) const { return cfg_.min_class << cls; }

    int class_for(uint32_t size) const {
        for (int c = 0; c < static_cast<int>(num_classes_); ++c)
            if (class_size(c) >= size) return c;
        return -1;
    }

    uint8_t* raw(uint64_t addr) { return bytes_.data() + (addr - va_base_); }
    const uint8_t* raw(uint64_t addr) const { return bytes_.data() + (addr - va_base_); }

    MemoryConfig cfg_;
    uint32_t num_classes_ = 0;
    uint64_t region_size_ = 0;
    uint64_t va_base_ = 0;
    std::vector<uint8_t> bytes_;
    std::vector<uint64_t> cursor_;
    std::vector<std::vector<uint64_t>> free_lists_;
    std::map<uint64_t, Allocation> allocs_;

    uint64_t live_slots_ = 0;
    uint64_t peak_live_slots_ = 0;
    uint64_t live_bytes_ = 0;
    uint64_t peak_live_bytes_ = 0;
};

// Marks every resolved slot as last written by `def`. A store spanning a
// slot boundary taints the neighbour's metadata, which is exactly what a
// later checked read of the neighbour will catch.
inline void record_def(const std::vector<SlotRef>& slots, DefSiteId def) {
    for (const SlotRef& s : slots) s.alloc->shadow[s.slot] = def;
}

struct CheckFailure {
    UseSiteId use = 0;
    DefSiteId observed = 0;
    uint32_t set_id = 0;
    AllocSiteId site = 0;
    uint32_t slot = 0;
    const Allocation* alloc = nullptr;
};

// Membership test of each slot's last writer in the use's legal set.
// Under strict-init the reserved INITIAL def is rejected even though the
// table carries it. Returns the first failing slot, or nothing.
inline std::optional<CheckFailure> check_use(const std::vector<SlotRef>& slots, UseSiteId use,
                                             const CompressedTable& tables,
                                             bool strict_init = false) {
    for (const SlotRef& s : slots) {
        DefSiteId observed = s.alloc->shadow[s.slot];
        bool ok = tables.contains(use, observed) && !(strict_init && observed == kInitialDef);
        if (!ok)
            return CheckFailure{use,    observed, tables.set_of(use),
                                s.alloc->site, s.slot,   s.alloc};
    }
    return std::nullopt;
}

}  // namespace fsdfi
