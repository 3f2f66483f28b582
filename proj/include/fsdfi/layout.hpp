#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fsdfi/ast.hpp"
#include "fsdfi/common.hpp"

namespace fsdfi {

// One field slot: the abstract metadata unit. Arrays of scalars collapse to
// a single slot; arrays of structs keep one slot per struct field, shared by
// all elements. `offset`/`length` are the representative extent (first array
// element); the byte map below is the authoritative byte-to-slot mapping.
struct FieldSlot {
    uint32_t index = 0;
    std::string path;
    uint32_t offset = 0;
    uint32_t length = 0;
    bool holds_pointer = false;
};

struct TypeLayout {
    uint32_t size = 0;
    uint32_t align = 1;
    std::vector<FieldSlot> slots;
    // byte_to_slot[i] = slot index owning byte i, for every i in [0, size).
    // Padding bytes belong to the preceding slot.
    std::vector<uint32_t> byte_to_slot;

    uint32_t slot_count() const { return static_cast<uint32_t>(slots.size()); }

    uint32_t slot_of_byte(uint32_t off) const { return byte_to_slot[off]; }
};

inline uint32_t align_up(uint32_t n, uint32_t a) { return (n + a - 1) / a * a; }

// Computes C-conventional layouts for every type in a program. Struct
// layouts are memoized by name; recursion by value is rejected.
class LayoutBuilder {
public:
    explicit LayoutBuilder(StructTable structs) : structs_(std::move(structs)) {}

    const TypeLayout& layout_of(const TypePtr& t) {
        std::string key = type_name(t);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        TypeLayout l = build(t);
        return cache_.emplace(std::move(key), std::move(l)).first->second;
    }

    uint32_t size_of(const TypePtr& t) { return layout_of(t).size; }
    uint32_t align_of(const TypePtr& t) { return layout_of(t).align; }

private:
    TypeLayout build(const TypePtr& t) {
        switch (t->kind) {
            case TypeKind::Int: return scalar(4, false);
            case TypeKind::Char: return scalar(1, false);
            case TypeKind::Pointer: return scalar(8, true);
            case TypeKind::Array: return build_array(t);
            case TypeKind::Struct: return build_struct(t);
            case TypeKind::Void: fail(ErrorKind::Layout, "void has no layout");
        }
        fail(ErrorKind::Layout, "unknown type");
    }

    static TypeLayout scalar(uint32_t size, bool is_ptr) {
        TypeLayout l;
        l.size = size;
        l.align = size;
        l.slots.push_back({0, "", 0, size, is_ptr});
        l.byte_to_slot.assign(size, 0);
        return l;
    }

    TypeLayout build_array(const TypePtr& t) {
        const TypeLayout& el = layout_of(t->inner);
        uint32_t n = static_cast<uint32_t>(t->array_len);
        TypeLayout l;
        l.align = el.align;
        l.size = el.size * n;
        if (t->inner->is_struct()) {
            // Element-insensitive, field-sensitive: one slot per element
            // field, shared across all elements.
            for (const auto& s : el.slots) {
                FieldSlot fs = s;
                fs.path = s.path.empty() ? "[*]" : "[*]." + s.path;
                l.slots.push_back(fs);
            }
            l.byte_to_slot.reserve(l.size);
            for (uint32_t i = 0; i < n; ++i)
                l.byte_to_slot.insert(l.byte_to_slot.end(), el.byte_to_slot.begin(),
                                      el.byte_to_slot.end());
        } else {
            // Whole scalar/pointer array is one slot.
            bool ptr = el.slots.size() == 1 && el.slots[0].holds_pointer;
            l.slots.push_back({0, "", 0, l.size, ptr});
            l.byte_to_slot.assign(l.size, 0);
        }
        return l;
    }

    TypeLayout build_struct(const TypePtr& t) {
        const std::string& name = t->struct_name;
        if (in_progress_.count(name))
            fail(ErrorKind::Layout, "struct " + name + " recursively contains itself by value");
        auto it = structs_.find(name);
        if (it == structs_.end()) fail(ErrorKind::Layout, "unknown struct " + name);
        in_progress_.insert(name);
        const StructDecl& decl = *it->second;

        TypeLayout l;
        uint32_t off = 0;
        for (const auto& f : decl.fields) {
            const TypeLayout& fl = layout_of(f.type);
            uint32_t at = align_up(off, fl.align);
            // Padding before this field belongs to the preceding slot.
            pad_to(l, at);
            uint32_t base_slot = l.slot_count();
            for (const auto& s : fl.slots) {
                FieldSlot fs = s;
                fs.index = base_slot + s.index;
                fs.offset = at + s.offset;
                fs.path = s.path.empty() ? f.name : f.name + (s.path[0] == '[' ? s.path : "." + s.path);
                l.slots.push_back(fs);
            }
            for (uint32_t b : fl.byte_to_slot) l.byte_to_slot.push_back(base_slot + b);
            off = at + fl.size;
            l.align = std::max(l.align, fl.align);
        }
        l.size = align_up(off, l.align);
        pad_to(l, l.size);
        in_progress_.erase(name);
        return l;
    }

    // Extends the byte map (and, when contiguous, the last slot's extent)
    // up to `target`.
    static void pad_to(TypeLayout& l, uint32_t target) {
        uint32_t cur = static_cast<uint32_t>(l.byte_to_slot.size());
        if (cur >= target) return;
        if (l.slots.empty()) fail(ErrorKind::Layout, "struct with no fields");
        uint32_t last = l.slot_count() - 1;
        FieldSlot& s = l.slots[last];
        if (s.offset + s.length == cur) s.length += target - cur;
        while (cur < target) {
            l.byte_to_slot.push_back(last);
            ++cur;
        }
    }

    StructTable structs_;
    std::map<std::string, TypeLayout> cache_;
    std::set<std::string> in_progress_;

public:
    // Byte offset and type of a (possibly struct-typed) field, following the
    // same alignment rules as layout_of.
    std::pair<uint32_t, TypePtr> field_offset(const std::string& struct_name,
                                              const std::string& field_name) {
        auto it = structs_.find(struct_name);
        if (it == structs_.end()) fail(ErrorKind::Layout, "unknown struct " + struct_name);
        uint32_t off = 0;
        for (const auto& f : it->second->fields) {
            off = align_up(off, align_of(f.type));
            if (f.name == field_name) return {off, f.type};
            off += size_of(f.type);
        }
        fail(ErrorKind::Layout, "struct " + struct_name + " has no field " + field_name);
    }
};

// The field-granularity unit list of a layout, in offset order.
inline const std::vector<FieldSlot>& flatten_fields(const TypeLayout& layout) {
    return layout.slots;
}

}  // namespace fsdfi
