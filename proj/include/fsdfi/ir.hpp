#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fsdfi/common.hpp"
#include "fsdfi/layout.hpp"
#include "fsdfi/typecheck.hpp"

namespace fsdfi {

using DefSiteId = uint32_t;    // dense from 1; 0 is the reserved INITIAL def
using UseSiteId = uint32_t;    // dense from 0
using AllocSiteId = uint32_t;  // dense from 0
using Reg = uint32_t;
using BlockId = uint32_t;

inline constexpr DefSiteId kInitialDef = 0;
// Shadow sentinel for freed chunks; never a valid def id.
inline constexpr DefSiteId kReleasedDef = std::numeric_limits<DefSiteId>::max();
inline constexpr Reg kNoReg = std::numeric_limits<Reg>::max();

enum class AllocKind { Global, Stack, Heap };

inline const char* alloc_kind_name(AllocKind k) {
    switch (k) {
        case AllocKind::Global: return "global";
        case AllocKind::Stack: return "stack";
        case AllocKind::Heap: return "heap";
    }
    return "?";
}

enum class Op {
    Const,       // dst <- imm
    Bin,         // dst <- a binop b
    Alloc,       // dst <- base of new object (site); globals also bind global_index
    Free,        // release heap object at a
    GlobalAddr,  // dst <- base of global[global_index]
    FieldAddr,   // dst <- a + imm
    IndexAddr,   // dst <- a + b * imm
    Load,        // dst <- mem[a .. a+size), use site
    Store,       // mem[a .. a+size) <- b, def site
    Call,        // dst? <- funcs[callee](args)
    Ret,         // return a (optional)
    Jump,        // goto t1
    Branch,      // a != 0 ? goto t1 : goto t2
    Print,       // append value of a to the transcript
    Input,       // dst <- next input value (0 when exhausted)
    Halt,        // end of program (entry function only)
};

struct Instr {
    Op op;
    SourcePos pos;
    Reg dst = kNoReg;
    Reg a = kNoReg;
    Reg b = kNoReg;
    long long imm = 0;  // Const value / FieldAddr offset / IndexAddr stride
    BinOp binop = BinOp::Add;
    uint32_t size = 0;  // Load/Store byte count
    uint32_t site = 0;  // Load: use id; Store: def id; Alloc: alloc id
    int global_index = -1;
    uint32_t callee = 0;
    std::vector<Reg> args;
    BlockId t1 = 0, t2 = 0;
    TypePtr alloc_type;                     // Alloc
    AllocKind alloc_kind = AllocKind::Stack;  // Alloc
    std::string note;  // Store/Load: source-level target; Alloc: object label
};

struct IRBlock {
    std::vector<Instr> instrs;
};

struct IRFunction {
    std::string name;
    uint32_t num_params = 0;  // parameters occupy registers [0, num_params)
    uint32_t num_regs = 0;
    std::vector<uint8_t> reg_is_ptr;
    std::vector<IRBlock> blocks;  // entry is block 0
};

struct IRGlobal {
    std::string name;
    TypePtr type;
};

struct IRProgram {
    std::string path;
    std::vector<IRFunction> funcs;  // funcs[0] is the synthetic entry "__start"
    std::vector<IRGlobal> globals;
    uint32_t num_defs = 0;    // ids 1..num_defs
    uint32_t num_uses = 0;    // ids 0..num_uses-1
    uint32_t num_allocs = 0;  // ids 0..num_allocs-1
    std::shared_ptr<LayoutBuilder> layouts;
};

// ---------------------------------------------------------------------------
// Site catalog
// ---------------------------------------------------------------------------

struct DefSiteInfo {
    DefSiteId id = 0;
    std::string function;
    SourcePos pos;
    std::string target;
};

struct UseSiteInfo {
    UseSiteId id = 0;
    std::string function;
    SourcePos pos;
    std::string target;
};

struct AllocSiteInfo {
    AllocSiteId id = 0;
    AllocKind kind = AllocKind::Stack;
    std::string label;  // qualified variable name, or "heap@<line>" for malloc sites
    TypePtr type;
    const TypeLayout* layout = nullptr;
    std::string function;
    SourcePos pos;
};

struct SiteCatalog {
    std::vector<DefSiteInfo> defs;  // defs[i] has id i+1
    std::vector<UseSiteInfo> uses;  // uses[i] has id i
    std::vector<AllocSiteInfo> allocs;

    const DefSiteInfo& def(DefSiteId id) const { return defs.at(id - 1); }
    const UseSiteInfo& use(UseSiteId id) const { return uses.at(id); }
    const AllocSiteInfo& alloc(AllocSiteId id) const { return allocs.at(id); }
};

// Walks the IR in instruction order and builds the site catalog. Numbering
// comes from the lowering (source order); validate_ir checks density.
inline SiteCatalog enumerate_sites(const IRProgram& prog) {
    SiteCatalog cat;
    cat.defs.resize(prog.num_defs);
    cat.uses.resize(prog.num_uses);
    cat.allocs.resize(prog.num_allocs);
    for (const auto& f : prog.funcs) {
        for (const auto& blk : f.blocks) {
            for (const auto& ins : blk.instrs) {
                switch (ins.op) {
                    case Op::Store:
                        cat.defs.at(ins.site - 1) = {ins.site, f.name, ins.pos, ins.note};
                        break;
                    case Op::Load:
                        cat.uses.at(ins.site) = {ins.site, f.name, ins.pos, ins.note};
                        break;
                    case Op::Alloc:
                        cat.allocs.at(ins.site) = {ins.site,
                                                   ins.alloc_kind,
                                                   ins.note,
                                                   ins.alloc_type,
                                                   &prog.layouts->layout_of(ins.alloc_type),
                                                   f.name,
                                                   ins.pos};
                        break;
                    default: break;
                }
            }
        }
    }
    return cat;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_terminator(Op op) {
    return op == Op::Jump || op == Op::Branch || op == Op::Ret || op == Op::Halt;
}

}  // namespace detail

// Checks the IR invariants: dense site ids without reuse, one static
// assignment per register, pointer-typed address operands, well-formed
// control flow. Throws Error(ErrorKind::Ir) naming the violated invariant.
inline void validate_ir(const IRProgram& prog) {
    std::set<DefSiteId> defs;
    std::set<UseSiteId> uses;
    std::set<AllocSiteId> allocs;
    if (prog.funcs.empty() || prog.funcs[0].name != "__start")
        fail(ErrorKind::Ir, "function 0 must be the __start entry");

    for (size_t fi = 0; fi < prog.funcs.size(); ++fi) {
        const IRFunction& f = prog.funcs[fi];
        auto ctx = [&](size_t bi, size_t ii) {
            std::ostringstream os;
            os << " at " << f.name << " block " << bi << " instr " << ii;
            return os.str();
        };
        if (f.reg_is_ptr.size() != f.num_regs)
            fail(ErrorKind::Ir, "register kind table size mismatch in " + f.name);
        if (f.num_params > f.num_regs) fail(ErrorKind::Ir, "params exceed registers in " + f.name);

        std::vector<int> assigned(f.num_regs, 0);
        auto check_reg = [&](Reg r, size_t bi, size_t ii) {
            if (r >= f.num_regs) fail(ErrorKind::Ir, "register out of range" + ctx(bi, ii));
        };
        auto require_ptr = [&](Reg r, size_t bi, size_t ii, const char* what) {
            check_reg(r, bi, ii);
            if (!f.reg_is_ptr[r])
                fail(ErrorKind::Ir, std::string(what) + " operand is not pointer-typed" + ctx(bi, ii));
        };

        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            const IRBlock& blk = f.blocks[bi];
            if (blk.instrs.empty()) fail(ErrorKind::Ir, "empty block" + ctx(bi, 0));
            for (size_t ii = 0; ii < blk.instrs.size(); ++ii) {
                const Instr& ins = blk.instrs[ii];
                bool last = ii + 1 == blk.instrs.size();
                if (detail::is_terminator(ins.op) != last)
                    fail(ErrorKind::Ir, last ? "block does not end with a terminator" + ctx(bi, ii)
                                             : "terminator in the middle of a block" + ctx(bi, ii));
                if (ins.dst != kNoReg) {
                    check_reg(ins.dst, bi, ii);
                    if (++assigned[ins.dst] > 1)
                        fail(ErrorKind::Ir, "register assigned more than once" + ctx(bi, ii));
                }
                switch (ins.op) {
                    case Op::Store:
                        require_ptr(ins.a, bi, ii, "store address");
                        check_reg(ins.b, bi, ii);
                        if (ins.site == 0 || ins.site > prog.num_defs)
                            fail(ErrorKind::Ir, "def id out of range" + ctx(bi, ii));
                        if (!defs.insert(ins.site).second)
                            fail(ErrorKind::Ir, "duplicate def id" + ctx(bi, ii));
                        if (ins.size != 1 && ins.size != 4 && ins.size != 8)
                            fail(ErrorKind::Ir, "bad store size" + ctx(bi, ii));
                        break;
                    case Op::Load:
                        require_ptr(ins.a, bi, ii, "load address");
                        if (ins.site >= prog.num_uses)
                            fail(ErrorKind::Ir, "use id out of range" + ctx(bi, ii));
                        if (!uses.insert(ins.site).second)
                            fail(ErrorKind::Ir, "duplicate use id" + ctx(bi, ii));
                        if ((ins.size == 8) != static_cast<bool>(f.reg_is_ptr[ins.dst]))
                            fail(ErrorKind::Ir, "load size inconsistent with register kind" + ctx(bi, ii));
                        break;
                    case Op::Alloc:
                        if (ins.site >= prog.num_allocs)
                            fail(ErrorKind::Ir, "alloc id out of range" + ctx(bi, ii));
                        if (!allocs.insert(ins.site).second)
                            fail(ErrorKind::Ir, "duplicate alloc id" + ctx(bi, ii));
                        if (!ins.alloc_type) fail(ErrorKind::Ir, "alloc without type" + ctx(bi, ii));
                        require_ptr(ins.dst, bi, ii, "alloc destination");
                        break;
                    case Op::FieldAddr:
                        require_ptr(ins.a, bi, ii, "field base");
                        require_ptr(ins.dst, bi, ii, "field destination");
                        break;
                    case Op::IndexAddr:
                        require_ptr(ins.a, bi, ii, "index base");
                        require_ptr(ins.dst, bi, ii, "index destination");
                        check_reg(ins.b, bi, ii);
                        if (ins.imm <= 0) fail(ErrorKind::Ir, "index stride must be positive" + ctx(bi, ii));
                        break;
                    case Op::Free: require_ptr(ins.a, bi, ii, "free"); break;
                    case Op::GlobalAddr:
                        if (ins.global_index < 0 ||
                            static_cast<size_t>(ins.global_index) >= prog.globals.size())
                            fail(ErrorKind::Ir, "global index out of range" + ctx(bi, ii));
                        require_ptr(ins.dst, bi, ii, "global address destination");
                        break;
                    case Op::Call: {
                        if (ins.callee >= prog.funcs.size())
                            fail(ErrorKind::Ir, "callee out of range" + ctx(bi, ii));
                        const IRFunction& callee = prog.funcs[ins.callee];
                        if (ins.args.size() != callee.num_params)
                            fail(ErrorKind::Ir, "call arity mismatch" + ctx(bi, ii));
                        for (Reg r : ins.args) check_reg(r, bi, ii);
                        break;
                    }
                    case Op::Branch:
                        check_reg(ins.a, bi, ii);
                        if (ins.t1 >= f.blocks.size() || ins.t2 >= f.blocks.size())
                            fail(ErrorKind::Ir, "branch target out of range" + ctx(bi, ii));
                        break;
                    case Op::Jump:
                        if (ins.t1 >= f.blocks.size())
                            fail(ErrorKind::Ir, "jump target out of range" + ctx(bi, ii));
                        break;
                    case Op::Ret:
                        if (ins.a != kNoReg) check_reg(ins.a, bi, ii);
                        break;
                    case Op::Halt:
                        if (fi != 0) fail(ErrorKind::Ir, "halt outside __start" + ctx(bi, ii));
                        break;
                    case Op::Bin:
                        check_reg(ins.a, bi, ii);
                        check_reg(ins.b, bi, ii);
                        break;
                    case Op::Print: check_reg(ins.a, bi, ii); break;
                    case Op::Const:
                    case Op::Input: check_reg(ins.dst, bi, ii); break;
                }
            }
        }
    }
    if (defs.size() != prog.num_defs)
        fail(ErrorKind::Ir, "def ids are not dense: " + std::to_string(defs.size()) + " of " +
                                std::to_string(prog.num_defs));
    if (uses.size() != prog.num_uses)
        fail(ErrorKind::Ir, "use ids are not dense: " + std::to_string(uses.size()) + " of " +
                                std::to_string(prog.num_uses));
    if (allocs.size() != prog.num_allocs)
        fail(ErrorKind::Ir, "alloc ids are not dense: " + std::to_string(allocs.size()) + " of " +
                                std::to_string(prog.num_allocs));
}

// ---------------------------------------------------------------------------
// Textual IR (stable, line oriented; used by golden tests and for hashing)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string reg_name(Reg r) { return "r" + std::to_string(r); }

inline void print_instr(std::ostream& os, const Instr& ins) {
    switch (ins.op) {
        case Op::Const:
            os << reg_name(ins.dst) << " = const " << ins.imm;
            break;
        case Op::Bin:
            os << reg_name(ins.dst) << " = " << binop_text(ins.binop) << ' ' << reg_name(ins.a)
               << ", " << reg_name(ins.b);
            break;
        case Op::Alloc:
            os << reg_name(ins.dst) << " = alloc a" << ins.site << ' '
               << alloc_kind_name(ins.alloc_kind) << ' ' << type_name(ins.alloc_type);
            if (ins.global_index >= 0) os << " -> g" << ins.global_index;
            os << "  ; " << ins.note;
            break;
        case Op::Free:
            os << "free " << reg_name(ins.a);
            break;
        case Op::GlobalAddr:
            os << reg_name(ins.dst) << " = globaladdr g" << ins.global_index;
            break;
        case Op::FieldAddr:
            os << reg_name(ins.dst) << " = fieldaddr " << reg_name(ins.a) << " + " << ins.imm;
            break;
        case Op::IndexAddr:
            os << reg_name(ins.dst) << " = indexaddr " << reg_name(ins.a) << " + " << reg_name(ins.b)
               << " * " << ins.imm;
            break;
        case Op::Load:
            os << "u" << ins.site << ": " << reg_name(ins.dst) << " = load." << ins.size << " ["
               << reg_name(ins.a) << "]  ; " << ins.note;
            break;
        case Op::Store:
            os << "d" << ins.site << ": store." << ins.size << " [" << reg_name(ins.a) << "], "
               << reg_name(ins.b) << "  ; " << ins.note;
            break;
        case Op::Call:
            if (ins.dst != kNoReg) os << reg_name(ins.dst) << " = ";
            os << "call f" << ins.callee << '(';
            for (size_t i = 0; i < ins.args.size(); ++i) {
                if (i) os << ", ";
                os << reg_name(ins.args[i]);
            }
            os << ')';
            break;
        case Op::Ret:
            os << "ret";
            if (ins.a != kNoReg) os << ' ' << reg_name(ins.a);
            break;
        case Op::Jump:
            os << "jump b" << ins.t1;
            break;
        case Op::Branch:
            os << "branch " << reg_name(ins.a) << ", b" << ins.t1 << ", b" << ins.t2;
            break;
        case Op::Print:
            os << "print " << reg_name(ins.a);
            break;
        case Op::Input:
            os << reg_name(ins.dst) << " = input";
            break;
        case Op::Halt:
            os << "halt";
            break;
    }
}

}  // namespace detail

inline std::string print_ir(const IRProgram& prog) {
    std::ostringstream os;
    os << "globals " << prog.globals.size() << "\n";
    for (size_t i = 0; i < prog.globals.size(); ++i)
        os << "  g" << i << ": " << prog.globals[i].name << ' ' << type_name(prog.globals[i].type)
           << "\n";
    for (size_t fi = 0; fi < prog.funcs.size(); ++fi) {
        const IRFunction& f = prog.funcs[fi];
        os << "func f" << fi << ' ' << f.name << " params=" << f.num_params
           << " regs=" << f.num_regs << "\n";
        for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
            os << "  b" << bi << ":\n";
            for (const Instr& ins : f.blocks[bi].instrs) {
                os << "    ";
                detail::print_instr(os, ins);
                os << "\n";
            }
        }
    }
    return os.str();
}

inline uint64_t ir_hash(const IRProgram& prog) { return fnv1a(print_ir(prog)); }

}  // namespace fsdfi
