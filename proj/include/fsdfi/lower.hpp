#pragma once

#include <string>
#include <vector>

#include "fsdfi/ir.hpp"
#include "fsdfi/typecheck.hpp"

namespace fsdfi {

// Lowers a type-checked program to the instruction IR.
//
// Memory discipline: globals and locals live in allocated objects; every
// lvalue write is exactly one Store and every rvalue memory read exactly one
// Load. Registers hold transients and object base addresses only; they are
// statically single-assignment and are not DFI-tracked. Scalar and pointer
// parameters arrive in registers; struct parameters arrive as the address of
// the caller's object.
//
// The synthetic entry function __start (function 0) allocates the globals,
// runs their initializers in declaration order, calls main, and halts.
// Declarations without initializers perform no store: their first read
// observes the reserved INITIAL def.
class Lowerer {
public:
    explicit Lowerer(const TypedProgram& prog) : prog_(prog) {}

    IRProgram run() {
        out_.path = prog_.ast.path;
        out_.layouts = prog_.layouts;
        for (const auto& g : prog_.ast.globals) out_.globals.push_back({g.name, g.type});
        out_.funcs.resize(prog_.ast.funcs.size() + 1);
        lower_start();
        for (size_t i = 0; i < prog_.ast.funcs.size(); ++i)
            lower_function(static_cast<uint32_t>(i) + 1, prog_.ast.funcs[i]);
        return std::move(out_);
    }

private:
    // --- function scaffolding -------------------------------------------

    void begin_function(uint32_t index, std::string name, uint32_t num_params,
                        const std::vector<uint8_t>& param_is_ptr) {
        cur_ = &out_.funcs[index];
        cur_->name = std::move(name);
        cur_->num_params = num_params;
        cur_->num_regs = num_params;
        cur_->reg_is_ptr = param_is_ptr;
        cur_->blocks.emplace_back();
        block_ = 0;
    }

    Reg new_reg(bool is_ptr) {
        cur_->reg_is_ptr.push_back(is_ptr ? 1 : 0);
        return cur_->num_regs++;
    }

    Instr& emit(Instr ins) {
        cur_->blocks[block_].instrs.push_back(std::move(ins));
        return cur_->blocks[block_].instrs.back();
    }

    BlockId new_block() {
        cur_->blocks.emplace_back();
        return static_cast<BlockId>(cur_->blocks.size() - 1);
    }

    bool block_terminated() const {
        const auto& instrs = cur_->blocks[block_].instrs;
        return !instrs.empty() && detail::is_terminator(instrs.back().op);
    }

    void ensure_terminated(const TypePtr& ret, SourcePos pos) {
        if (block_terminated()) return;
        if (ret && !ret->is_void()) {
            Reg z = new_reg(false);
            emit({.op = Op::Const, .pos = pos, .dst = z, .imm = 0});
            emit({.op = Op::Ret, .pos = pos, .a = z});
        } else {
            emit({.op = Op::Ret, .pos = pos});
        }
    }

    // --- entry function ---------------------------------------------------

    void lower_start() {
        begin_function(0, "__start", 0, {});
        fn_ast_ = nullptr;
        local_base_.clear();
        global_base_.assign(prog_.ast.globals.size(), kNoReg);
        for (size_t i = 0; i < prog_.ast.globals.size(); ++i) {
            const VarDecl& g = prog_.ast.globals[i];
            Reg base = new_reg(true);
            Instr ins{.op = Op::Alloc, .pos = g.pos, .dst = base};
            ins.site = out_.num_allocs++;
            ins.global_index = static_cast<int>(i);
            ins.alloc_type = g.type;
            ins.alloc_kind = AllocKind::Global;
            ins.note = g.name;
            emit(std::move(ins));
            global_base_[i] = base;
        }
        for (size_t i = 0; i < prog_.ast.globals.size(); ++i) {
            const VarDecl& g = prog_.ast.globals[i];
            if (!g.init) continue;
            Reg value = lower_value(*g.init);
            Instr st{.op = Op::Store, .pos = g.pos, .a = global_base_[i], .b = value};
            st.size = prog_.layouts->size_of(g.type);
            st.site = ++out_.num_defs;
            st.note = g.name;
            emit(std::move(st));
        }
        uint32_t main_idx = static_cast<uint32_t>(prog_.func_index.at("main")) + 1;
        Instr call{.op = Op::Call, .pos = SourcePos{}};
        call.callee = main_idx;
        emit(std::move(call));
        emit({.op = Op::Halt});
        global_base_.clear();  // only valid inside __start
    }

    // --- source functions --------------------------------------------------

    void lower_function(uint32_t index, const FuncDecl& f) {
        std::vector<uint8_t> param_kinds;
        for (const auto& p : f.params)
            param_kinds.push_back(p.type->is_pointer() || p.type->is_struct() ? 1 : 0);
        begin_function(index, f.name, static_cast<uint32_t>(f.params.size()), param_kinds);
        fn_ast_ = &f;

        local_base_.assign(f.locals.size(), kNoReg);
        for (size_t i = 0; i < f.locals.size(); ++i) {
            const LocalInfo& l = f.locals[i];
            Reg base = new_reg(true);
            Instr ins{.op = Op::Alloc, .pos = l.pos, .dst = base};
            ins.site = out_.num_allocs++;
            ins.alloc_type = l.type;
            ins.alloc_kind = AllocKind::Stack;
            ins.note = f.name + "." + l.name;
            emit(std::move(ins));
            local_base_[i] = base;
        }
        lower_stmt(*f.body);
        ensure_terminated(f.ret, f.pos);
        // Any unreachable trailing block still needs a terminator.
        for (size_t bi = 0; bi < cur_->blocks.size(); ++bi) {
            if (cur_->blocks[bi].instrs.empty() ||
                !detail::is_terminator(cur_->blocks[bi].instrs.back().op)) {
                block_ = static_cast<BlockId>(bi);
                ensure_terminated(f.ret, f.pos);
            }
        }
    }

    void lower_stmt(const Stmt& s) {
        if (block_terminated() && s.kind != StmtKind::Block) {
            // Statements after return in the same block are unreachable;
            // give them a fresh block so the IR stays well formed.
            BlockId b = new_block();
            block_ = b;
        }
        switch (s.kind) {
            case StmtKind::Block:
                for (const auto& sub : s.body) lower_stmt(*sub);
                break;
            case StmtKind::DeclLocal: {
                if (!s.b) break;  // no initializer: no store, INITIAL stays
                Reg value = lower_value(*s.b);
                Reg addr = local_base_[static_cast<size_t>(s.local_index)];
                Instr st{.op = Op::Store, .pos = s.pos, .a = addr, .b = value};
                st.size = prog_.layouts->size_of(s.decl_type);
                st.site = ++out_.num_defs;
                st.note = s.name;
                emit(std::move(st));
                break;
            }
            case StmtKind::Assign: {
                Reg addr = lower_addr(*s.a);
                Reg value = lower_value(*s.b);
                Instr st{.op = Op::Store, .pos = s.pos, .a = addr, .b = value};
                st.size = prog_.layouts->size_of(s.a->type);
                st.site = ++out_.num_defs;
                st.note = expr_text(*s.a);
                emit(std::move(st));
                break;
            }
            case StmtKind::ExprStmt:
                lower_value(*s.a);
                break;
            case StmtKind::If: {
                Reg cond = lower_value(*s.a);
                BlockId then_b = new_block();
                BlockId else_b = s.s2 ? new_block() : 0;
                BlockId join_b = new_block();
                emit({.op = Op::Branch, .pos = s.pos, .a = cond, .t1 = then_b,
                      .t2 = s.s2 ? else_b : join_b});
                block_ = then_b;
                lower_stmt(*s.s1);
                if (!block_terminated()) emit({.op = Op::Jump, .pos = s.pos, .t1 = join_b});
                if (s.s2) {
                    block_ = else_b;
                    lower_stmt(*s.s2);
                    if (!block_terminated()) emit({.op = Op::Jump, .pos = s.pos, .t1 = join_b});
                }
                block_ = join_b;
                break;
            }
            case StmtKind::While: {
                BlockId cond_b = new_block();
                emit({.op = Op::Jump, .pos = s.pos, .t1 = cond_b});
                block_ = cond_b;
                Reg cond = lower_value(*s.a);
                BlockId body_b = new_block();
                BlockId exit_b = new_block();
                emit({.op = Op::Branch, .pos = s.pos, .a = cond, .t1 = body_b, .t2 = exit_b});
                block_ = body_b;
                lower_stmt(*s.s1);
                if (!block_terminated()) emit({.op = Op::Jump, .pos = s.pos, .t1 = cond_b});
                block_ = exit_b;
                break;
            }
            case StmtKind::Return: {
                if (s.a) {
                    Reg v = lower_value(*s.a);
                    emit({.op = Op::Ret, .pos = s.pos, .a = v});
                } else {
                    emit({.op = Op::Ret, .pos = s.pos});
                }
                break;
            }
            case StmtKind::Free: {
                Reg v = lower_value(*s.a);
                emit({.op = Op::Free, .pos = s.pos, .a = v});
                break;
            }
            case StmtKind::Print: {
                Reg v = lower_value(*s.a);
                emit({.op = Op::Print, .pos = s.pos, .a = v});
                break;
            }
        }
    }

    // Address of an lvalue.
    Reg lower_addr(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Var:
                switch (e.var_ref) {
                    case VarRef::Global: {
                        Reg dst = new_reg(true);
                        emit({.op = Op::GlobalAddr, .pos = e.pos, .dst = dst,
                              .global_index = e.var_index});
                        return dst;
                    }
                    case VarRef::Local: return local_base_[static_cast<size_t>(e.var_index)];
                    case VarRef::Param: return static_cast<Reg>(e.var_index);  // struct param
                    case VarRef::Unresolved: break;
                }
                fail(ErrorKind::Lowering, e.pos, "unresolved variable " + e.name);
            case ExprKind::Field: {
                Reg base = lower_addr(*e.a);
                Reg dst = new_reg(true);
                emit({.op = Op::FieldAddr, .pos = e.pos, .dst = dst, .a = base,
                      .imm = e.field_offset});
                return dst;
            }
            case ExprKind::Arrow: {
                Reg base = lower_value(*e.a);
                Reg dst = new_reg(true);
                emit({.op = Op::FieldAddr, .pos = e.pos, .dst = dst, .a = base,
                      .imm = e.field_offset});
                return dst;
            }
            case ExprKind::Index: {
                Reg base = e.a->type->is_array() ? lower_addr(*e.a) : lower_value(*e.a);
                Reg idx = lower_value(*e.b);
                Reg dst = new_reg(true);
                emit({.op = Op::IndexAddr, .pos = e.pos, .dst = dst, .a = base, .b = idx,
                      .imm = e.elem_size});
                return dst;
            }
            case ExprKind::Deref: return lower_value(*e.a);
            default: fail(ErrorKind::Lowering, e.pos, "expression is not an lvalue");
        }
    }

    Reg lower_value(const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLit:
            case ExprKind::CharLit: {
                Reg dst = new_reg(false);
                emit({.op = Op::Const, .pos = e.pos, .dst = dst, .imm = e.value});
                return dst;
            }
            case ExprKind::Input: {
                Reg dst = new_reg(false);
                emit({.op = Op::Input, .pos = e.pos, .dst = dst});
                return dst;
            }
            case ExprKind::Neg: {
                Reg zero = new_reg(false);
                emit({.op = Op::Const, .pos = e.pos, .dst = zero, .imm = 0});
                Reg v = lower_value(*e.a);
                Reg dst = new_reg(false);
                emit({.op = Op::Bin, .pos = e.pos, .dst = dst, .a = zero, .b = v,
                      .binop = BinOp::Sub});
                return dst;
            }
            case ExprKind::Binary: {
                Reg a = lower_value(*e.a);
                Reg b = lower_value(*e.b);
                Reg dst = new_reg(false);
                emit({.op = Op::Bin, .pos = e.pos, .dst = dst, .a = a, .b = b, .binop = e.op});
                return dst;
            }
            case ExprKind::AddrOf: return lower_addr(*e.a);
            case ExprKind::Malloc: {
                TypePtr obj = e.malloc_count > 1 ? ty_array(e.malloc_type, e.malloc_count)
                                                 : e.malloc_type;
                Reg dst = new_reg(true);
                Instr ins{.op = Op::Alloc, .pos = e.pos, .dst = dst};
                ins.site = out_.num_allocs++;
                ins.alloc_type = obj;
                ins.alloc_kind = AllocKind::Heap;
                ins.note = "heap@" + std::to_string(e.pos.line) + ":" + std::to_string(e.pos.col);
                emit(std::move(ins));
                return dst;
            }
            case ExprKind::Call: {
                const FuncDecl& callee = prog_.ast.funcs[static_cast<size_t>(e.call_index)];
                std::vector<Reg> args;
                for (size_t i = 0; i < e.args.size(); ++i) {
                    const TypePtr& pt = callee.params[i].type;
                    args.push_back(pt->is_struct() ? lower_addr(*e.args[i])
                                                   : lower_value(*e.args[i]));
                }
                Instr ins{.op = Op::Call, .pos = e.pos};
                ins.callee = static_cast<uint32_t>(e.call_index) + 1;
                ins.args = std::move(args);
                if (!callee.ret->is_void()) ins.dst = new_reg(callee.ret->is_pointer());
                Reg dst = ins.dst;
                emit(std::move(ins));
                return dst;
            }
            default: break;
        }
        // Lvalue in value position.
        if (e.kind == ExprKind::Var && e.var_ref == VarRef::Param && !e.type->is_struct())
            return static_cast<Reg>(e.var_index);  // scalar/pointer parameters are registers
        if (e.type->is_array() || e.type->is_struct())
            return lower_addr(e);  // arrays decay; struct values travel by address
        Reg addr = lower_addr(e);
        Reg dst = new_reg(e.type->is_pointer());
        Instr ld{.op = Op::Load, .pos = e.pos, .dst = dst, .a = addr};
        ld.size = prog_.layouts->size_of(e.type);
        ld.site = out_.num_uses++;
        ld.note = expr_text(e);
        emit(std::move(ld));
        return dst;
    }

    static std::string expr_text(const Expr& e) {
        std::ostringstream os;
        detail::print_expr(os, e);
        return os.str();
    }

    const TypedProgram& prog_;
    IRProgram out_;
    IRFunction* cur_ = nullptr;
    BlockId block_ = 0;
    const FuncDecl* fn_ast_ = nullptr;
    std::vector<Reg> local_base_;
    std::vector<Reg> global_base_;
};

inline IRProgram lower(const TypedProgram& prog) { return Lowerer(prog).run(); }

}  // namespace fsdfi
