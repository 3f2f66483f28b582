#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "fsdfi/ir.hpp"

namespace fsdfi {

// The field-sensitive abstract memory unit: one field slot of one allocation
// site. Heap sites summarize all runtime instances of that site. slot ==
// kTopSlot means "all slots of the site" and is used when an address cannot
// be resolved to a single slot.
inline constexpr uint32_t kTopSlot = std::numeric_limits<uint32_t>::max();

struct AbstractLoc {
    AllocSiteId site = 0;
    uint32_t slot = 0;

    bool is_top() const { return slot == kTopSlot; }
    auto operator<=>(const AbstractLoc&) const = default;
};

enum class ConstraintKind {
    AddressOf,   // pts(dst) ⊇ {loc}
    Copy,        // pts(dst) ⊇ pts(src)
    Field,       // pts(dst) ⊇ { loc+delta | loc ∈ pts(src) }
    LoadDeref,   // pts(dst) ⊇ pts(*src)
    StoreDeref,  // pts(*dst) ⊇ pts(src)
};

// Nodes are dense ids covering every register of every function followed by
// every concrete (site, slot) memory cell.
using NodeId = uint32_t;

struct Constraint {
    ConstraintKind kind;
    NodeId dst = 0;
    NodeId src = 0;
    long long delta = 0;  // Field
    AbstractLoc loc;      // AddressOf
};

class NodeSpace {
public:
    NodeSpace() = default;

    NodeSpace(const IRProgram& prog, const SiteCatalog& catalog) {
        reg_base_.resize(prog.funcs.size());
        uint32_t next = 0;
        for (size_t f = 0; f < prog.funcs.size(); ++f) {
            reg_base_[f] = next;
            next += prog.funcs[f].num_regs;
        }
        mem_base_.resize(catalog.allocs.size());
        slot_count_.resize(catalog.allocs.size());
        for (size_t s = 0; s < catalog.allocs.size(); ++s) {
            mem_base_[s] = next;
            slot_count_[s] = catalog.allocs[s].layout->slot_count();
            next += slot_count_[s];
        }
        total_ = next;
    }

    NodeId reg_node(uint32_t func, Reg r) const { return reg_base_[func] + r; }
    NodeId mem_node(AllocSiteId site, uint32_t slot) const { return mem_base_[site] + slot; }
    uint32_t slots_of(AllocSiteId site) const { return slot_count_[site]; }
    uint32_t total() const { return total_; }

    // Human-readable node name for table dumps.
    std::string name(NodeId n, const IRProgram& prog, const SiteCatalog& catalog) const {
        for (size_t f = 0; f < reg_base_.size(); ++f) {
            uint32_t base = reg_base_[f];
            if (n >= base && n < base + prog.funcs[f].num_regs)
                return prog.funcs[f].name + ":r" + std::to_string(n - base);
        }
        for (size_t s = 0; s < mem_base_.size(); ++s) {
            uint32_t base = mem_base_[s];
            if (n >= base && n < base + slot_count_[s]) {
                const AllocSiteInfo& a = catalog.allocs[s];
                const std::string& path = a.layout->slots[n - base].path;
                return a.label + (path.empty() ? "" : "#" + path);
            }
        }
        return "n" + std::to_string(n);
    }

private:
    std::vector<uint32_t> reg_base_;
    std::vector<uint32_t> mem_base_;
    std::vector<uint32_t> slot_count_;
    uint32_t total_ = 0;
};

struct ConstraintSet {
    std::vector<Constraint> constraints;
    NodeSpace space;
    // Address register of each def/use site, as a node id.
    std::vector<NodeId> def_addr;  // indexed by def id - 1
    std::vector<NodeId> use_addr;  // indexed by use id
};

// Field offsets move an abstract location between slots of the same site
// using the representative offset of the current slot. Offsets that leave
// the object yield the TOP slot.
inline AbstractLoc apply_field_offset(AbstractLoc loc, long long delta, const SiteCatalog& catalog) {
    if (loc.is_top()) return loc;
    const TypeLayout& layout = *catalog.allocs[loc.site].layout;
    long long target = static_cast<long long>(layout.slots[loc.slot].offset) + delta;
    if (target < 0 || target >= static_cast<long long>(layout.size)) return {loc.site, kTopSlot};
    return {loc.site, layout.byte_to_slot[static_cast<size_t>(target)]};
}

// Emits inclusion constraints for the whole program: address-of for Alloc
// and GlobalAddr, copy for IndexAddr and call/return value passing, field
// for FieldAddr, load-/store-deref for pointer-sized memory traffic.
inline ConstraintSet build_constraints(const IRProgram& prog, const SiteCatalog& catalog) {
    ConstraintSet out;
    out.space = NodeSpace(prog, catalog);
    out.def_addr.resize(prog.num_defs);
    out.use_addr.resize(prog.num_uses);

    // Map each global to the alloc site that created it in __start.
    std::vector<AllocSiteId> global_site(prog.globals.size(), 0);
    for (const auto& blk : prog.funcs[0].blocks)
        for (const auto& ins : blk.instrs)
            if (ins.op == Op::Alloc && ins.global_index >= 0)
                global_site[static_cast<size_t>(ins.global_index)] = ins.site;

    // Return-value registers per function.
    std::vector<std::vector<NodeId>> rets(prog.funcs.size());
    for (size_t f = 0; f < prog.funcs.size(); ++f)
        for (const auto& blk : prog.funcs[f].blocks)
            for (const auto& ins : blk.instrs)
                if (ins.op == Op::Ret && ins.a != kNoReg)
                    rets[f].push_back(out.space.reg_node(static_cast<uint32_t>(f), ins.a));

    for (size_t f = 0; f < prog.funcs.size(); ++f) {
        const IRFunction& fn = prog.funcs[f];
        uint32_t fi = static_cast<uint32_t>(f);
        auto reg = [&](Reg r) { return out.space.reg_node(fi, r); };
        for (const auto& blk : fn.blocks) {
            for (const auto& ins : blk.instrs) {
                switch (ins.op) {
                    case Op::Alloc:
                        out.constraints.push_back(
                            {ConstraintKind::AddressOf, reg(ins.dst), 0, 0, {ins.site, 0}});
                        break;
                    case Op::GlobalAddr:
                        out.constraints.push_back(
                            {ConstraintKind::AddressOf, reg(ins.dst), 0, 0,
                             {global_site[static_cast<size_t>(ins.global_index)], 0}});
                        break;
                    case Op::FieldAddr:
                        out.constraints.push_back(
                            {ConstraintKind::Field, reg(ins.dst), reg(ins.a), ins.imm, {}});
                        break;
                    case Op::IndexAddr:
                        // Element-insensitive: indexing never changes the slot.
                        out.constraints.push_back(
                            {ConstraintKind::Copy, reg(ins.dst), reg(ins.a), 0, {}});
                        break;
                    case Op::Load:
                        out.use_addr[ins.site] = reg(ins.a);
                        if (fn.reg_is_ptr[ins.dst])
                            out.constraints.push_back(
                                {ConstraintKind::LoadDeref, reg(ins.dst), reg(ins.a), 0, {}});
                        break;
                    case Op::Store:
                        out.def_addr[ins.site - 1] = reg(ins.a);
                        if (fn.reg_is_ptr[ins.b])
                            out.constraints.push_back(
                                {ConstraintKind::StoreDeref, reg(ins.a), reg(ins.b), 0, {}});
                        break;
                    case Op::Call: {
                        const IRFunction& callee = prog.funcs[ins.callee];
                        for (size_t i = 0; i < ins.args.size(); ++i) {
                            if (!callee.reg_is_ptr[i]) continue;
                            out.constraints.push_back(
                                {ConstraintKind::Copy,
                                 out.space.reg_node(ins.callee, static_cast<Reg>(i)),
                                 reg(ins.args[i]), 0, {}});
                        }
                        if (ins.dst != kNoReg && fn.reg_is_ptr[ins.dst])
                            for (NodeId r : rets[ins.callee])
                                out.constraints.push_back(
                                    {ConstraintKind::Copy, reg(ins.dst), r, 0, {}});
                        break;
                    }
                    default: break;
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Worklist solver
// ---------------------------------------------------------------------------

struct PointsToSolution {
    NodeSpace space;
    std::vector<std::vector<AbstractLoc>> pts;  // per node, sorted

    const std::vector<AbstractLoc>& of(NodeId n) const { return pts[n]; }

    // Expands TOP slots so the result contains concrete slots only.
    std::vector<AbstractLoc> concrete(NodeId n) const {
        std::vector<AbstractLoc> out;
        for (const AbstractLoc& l : pts[n]) {
            if (!l.is_top()) {
                out.push_back(l);
                continue;
            }
            for (uint32_t s = 0; s < space.slots_of(l.site); ++s) out.push_back({l.site, s});
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

// Inclusion-based (Andersen-style) fixpoint over the constraint set:
// flow-insensitive, context-insensitive, field-sensitive. Deterministic:
// the worklist processes nodes in FIFO order seeded by constraint order.
class PointsToSolver {
public:
    PointsToSolver(const ConstraintSet& cs, const SiteCatalog& catalog)
        : cs_(cs), catalog_(catalog) {}

    PointsToSolution run() {
        uint32_t n = cs_.space.total();
        pts_.assign(n, {});
        copy_edges_.assign(n, {});
        field_cons_.assign(n, {});
        load_cons_.assign(n, {});
        store_cons_.assign(n, {});
        in_work_.assign(n, false);

        for (const Constraint& c : cs_.constraints) {
            switch (c.kind) {
                case ConstraintKind::AddressOf:
                    if (pts_[c.dst].insert(c.loc).second) enqueue(c.dst);
                    break;
                case ConstraintKind::Copy: add_copy_edge(c.src, c.dst); break;
                case ConstraintKind::Field: field_cons_[c.src].push_back({c.dst, c.delta}); break;
                case ConstraintKind::LoadDeref: load_cons_[c.src].push_back(c.dst); break;
                case ConstraintKind::StoreDeref: store_cons_[c.dst].push_back(c.src); break;
            }
        }
        // Re-seed after attaching complex constraints so already-seeded
        // nodes trigger them.
        for (NodeId i = 0; i < n; ++i)
            if (!pts_[i].empty()) enqueue(i);

        while (!work_.empty()) {
            NodeId node = work_.front();
            work_.pop_front();
            in_work_[node] = false;
            process(node);
        }

        PointsToSolution sol;
        sol.space = cs_.space;
        sol.pts.resize(n);
        for (NodeId i = 0; i < n; ++i) sol.pts[i].assign(pts_[i].begin(), pts_[i].end());
        return sol;
    }

private:
    void enqueue(NodeId n) {
        if (in_work_[n]) return;
        in_work_[n] = true;
        work_.push_back(n);
    }

    void add_copy_edge(NodeId src, NodeId dst) {
        if (src == dst) return;
        if (!copy_edges_[src].insert(dst).second) return;
        if (!pts_[src].empty()) enqueue(src);
    }

    void process(NodeId node) {
        const auto& set = pts_[node];
        if (set.empty()) return;

        for (NodeId dst : copy_edges_[node]) merge_into(dst, set);

        for (const auto& [dst, delta] : field_cons_[node]) {
            std::set<AbstractLoc> moved;
            for (const AbstractLoc& l : set) moved.insert(apply_field_offset(l, delta, catalog_));
            merge_into(dst, moved);
        }

        // dst ⊇ *node: every cell node may point to feeds dst.
        for (NodeId dst : load_cons_[node])
            for_each_cell(set, [&](NodeId cell) { add_copy_edge(cell, dst); });

        // *node ⊇ src: src flows into every cell node may point to.
        for (NodeId src : store_cons_[node])
            for_each_cell(set, [&](NodeId cell) { add_copy_edge(src, cell); });
    }

    template <typename F>
    void for_each_cell(const std::set<AbstractLoc>& locs, F&& f) {
        for (const AbstractLoc& l : locs) {
            if (l.is_top()) {
                for (uint32_t s = 0; s < cs_.space.slots_of(l.site); ++s)
                    f(cs_.space.mem_node(l.site, s));
            } else {
                f(cs_.space.mem_node(l.site, l.slot));
            }
        }
    }

    void merge_into(NodeId dst, const std::set<AbstractLoc>& locs) {
        bool changed = false;
        for (const AbstractLoc& l : locs) changed |= pts_[dst].insert(l).second;
        if (changed) enqueue(dst);
    }

    const ConstraintSet& cs_;
    const SiteCatalog& catalog_;
    std::vector<std::set<AbstractLoc>> pts_;
    std::vector<std::set<NodeId>> copy_edges_;
    std::vector<std::vector<std::pair<NodeId, long long>>> field_cons_;
    std::vector<std::vector<NodeId>> load_cons_;
    std::vector<std::vector<NodeId>> store_cons_;
    std::deque<NodeId> work_;
    std::vector<bool> in_work_;
};

inline PointsToSolution solve_points_to(const ConstraintSet& cs, const SiteCatalog& catalog) {
    return PointsToSolver(cs, catalog).run();
}

}  // namespace fsdfi
