#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "fsdfi/lower.hpp"
#include "fsdfi/points_to.hpp"

namespace fsdfi {

// Per-use legal definition sets: the safe write-read relation. Sets are
// sorted; the reserved INITIAL def 0 is a member of every set unless the
// table was computed strict-init.
struct LegalDefTable {
    std::vector<std::vector<DefSiteId>> legal;  // indexed by use id
    bool strict_init = false;

    size_t entry_count() const {
        size_t n = 0;
        for (const auto& s : legal) n += s.size();
        return n;
    }
    // 4 bytes per entry plus an 8-byte header per use.
    size_t byte_size() const { return 4 * entry_count() + 8 * legal.size(); }
};

// Deduplicated form: identical sets share one dense set id, assigned in
// order of first appearance.
struct CompressedTable {
    std::vector<uint32_t> use_to_set;           // indexed by use id
    std::vector<std::vector<DefSiteId>> sets;   // indexed by set id

    uint32_t set_of(UseSiteId u) const { return use_to_set[u]; }
    bool contains(UseSiteId u, DefSiteId d) const {
        const auto& s = sets[use_to_set[u]];
        return std::binary_search(s.begin(), s.end(), d);
    }
    size_t byte_size() const {
        size_t n = 0;
        for (const auto& s : sets) n += s.size();
        return 4 * n + 4 * use_to_set.size();
    }
};

// Abstract locations a def site may write: the points-to set of the store's
// address register, TOP slots expanded.
inline std::vector<AbstractLoc> abstract_locs_written(DefSiteId def, const ConstraintSet& cs,
                                                      const PointsToSolution& sol) {
    return sol.concrete(cs.def_addr[def - 1]);
}

// Abstract locations a use site may read; symmetric to the write side.
inline std::vector<AbstractLoc> abstract_locs_read(UseSiteId use, const ConstraintSet& cs,
                                                   const PointsToSolution& sol) {
    return sol.concrete(cs.use_addr[use]);
}

// legal(u) = { d | locs_written(d) ∩ locs_read(u) ≠ ∅ }, plus INITIAL
// unless strict. Computed via a writers-per-location index; the brute-force
// pairwise-intersection oracle in the tests checks the same definition.
inline LegalDefTable compute_legal_defs(const IRProgram& prog, const ConstraintSet& cs,
                                        const PointsToSolution& sol, bool strict_init = false) {
    std::map<AbstractLoc, std::vector<DefSiteId>> writers;
    for (DefSiteId d = 1; d <= prog.num_defs; ++d)
        for (const AbstractLoc& l : abstract_locs_written(d, cs, sol)) writers[l].push_back(d);

    LegalDefTable table;
    table.strict_init = strict_init;
    table.legal.resize(prog.num_uses);
    for (UseSiteId u = 0; u < prog.num_uses; ++u) {
        std::vector<DefSiteId>& set = table.legal[u];
        if (!strict_init) set.push_back(kInitialDef);
        for (const AbstractLoc& l : abstract_locs_read(u, cs, sol)) {
            auto it = writers.find(l);
            if (it != writers.end()) set.insert(set.end(), it->second.begin(), it->second.end());
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return table;
}

// Whole-object granularity: every location's slot forced to TOP before the
// intersection, modelling field-insensitive (ASan-class) checking. The
// result is a pointwise superset of the field-sensitive table.
inline LegalDefTable field_insensitive_projection(const IRProgram& prog, const ConstraintSet& cs,
                                                  const PointsToSolution& sol,
                                                  bool strict_init = false) {
    auto sites_of = [&](NodeId n) {
        std::vector<AllocSiteId> sites;
        for (const AbstractLoc& l : sol.of(n)) sites.push_back(l.site);
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        return sites;
    };

    std::map<AllocSiteId, std::vector<DefSiteId>> writers;
    for (DefSiteId d = 1; d <= prog.num_defs; ++d)
        for (AllocSiteId s : sites_of(cs.def_addr[d - 1])) writers[s].push_back(d);

    LegalDefTable table;
    table.strict_init = strict_init;
    table.legal.resize(prog.num_uses);
    for (UseSiteId u = 0; u < prog.num_uses; ++u) {
        std::vector<DefSiteId>& set = table.legal[u];
        if (!strict_init) set.push_back(kInitialDef);
        for (AllocSiteId s : sites_of(cs.use_addr[u])) {
            auto it = writers.find(s);
            if (it != writers.end()) set.insert(set.end(), it->second.begin(), it->second.end());
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return table;
}

inline CompressedTable compress_sets(const LegalDefTable& table) {
    CompressedTable out;
    std::map<std::vector<DefSiteId>, uint32_t> ids;
    out.use_to_set.reserve(table.legal.size());
    for (const auto& set : table.legal) {
        auto it = ids.find(set);
        if (it == ids.end()) {
            it = ids.emplace(set, static_cast<uint32_t>(out.sets.size())).first;
            out.sets.push_back(set);
        }
        out.use_to_set.push_back(it->second);
    }
    return out;
}

inline LegalDefTable decompress(const CompressedTable& table, bool strict_init = false) {
    LegalDefTable out;
    out.strict_init = strict_init;
    out.legal.reserve(table.use_to_set.size());
    for (uint32_t id : table.use_to_set) out.legal.push_back(table.sets[id]);
    return out;
}

// ---------------------------------------------------------------------------
// Whole-analysis bundle: everything the runtime and the CLI need.
// ---------------------------------------------------------------------------

struct AnalysisResult {
    IRProgram ir;
    SiteCatalog catalog;
    ConstraintSet constraints;
    PointsToSolution solution;
    LegalDefTable table;                 // field-sensitive
    CompressedTable compressed;          // field-sensitive
    LegalDefTable table_fi;              // field-insensitive projection
    CompressedTable compressed_fi;
    uint64_t hash = 0;                   // fingerprint of the textual IR
};

inline AnalysisResult analyze(const TypedProgram& prog) {
    AnalysisResult r;
    r.ir = lower(prog);
    validate_ir(r.ir);
    r.catalog = enumerate_sites(r.ir);
    r.constraints = build_constraints(r.ir, r.catalog);
    r.solution = solve_points_to(r.constraints, r.catalog);
    r.table = compute_legal_defs(r.ir, r.constraints, r.solution);
    r.compressed = compress_sets(r.table);
    r.table_fi = field_insensitive_projection(r.ir, r.constraints, r.solution);
    r.compressed_fi = compress_sets(r.table_fi);
    r.hash = ir_hash(r.ir);
    return r;
}

}  // namespace fsdfi
