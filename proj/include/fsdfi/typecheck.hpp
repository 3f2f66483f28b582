#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fsdfi/ast.hpp"
#include "fsdfi/layout.hpp"
#include "fsdfi/parser.hpp"

namespace fsdfi {

// A parsed program after name resolution and type checking. Every expression
// carries a resolved type; variable references carry their storage class and
// index; layouts for all declared types are computed and cached.
struct TypedProgram {
    Ast ast;
    StructTable structs;
    std::map<std::string, int> func_index;
    std::shared_ptr<LayoutBuilder> layouts;

    const TypeLayout& layout_of(const TypePtr& t) const { return layouts->layout_of(t); }
    uint32_t size_of(const TypePtr& t) const { return layouts->size_of(t); }
};

// MiniC semantics notes, enforced here:
//  - int and char convert implicitly in both directions; nothing else does.
//  - scalar and pointer parameters live in registers: they are read-only and
//    have no address. Struct parameters bind by address and stay writable.
//  - whole-struct assignment and struct returns are not supported.
//  - pointer arithmetic is limited to indexing and field access.
class TypeChecker {
public:
    explicit TypeChecker(Ast ast) : prog_{std::move(ast), {}, {}, nullptr} {}

    TypedProgram run() {
        register_structs();
        prog_.layouts = std::make_shared<LayoutBuilder>(prog_.structs);
        validate_struct_fields();
        register_functions();
        check_globals();
        for (auto& f : prog_.ast.funcs) check_function(f);
        check_main();
        return std::move(prog_);
    }

private:
    void register_structs() {
        for (const auto& sd : prog_.ast.structs) {
            if (!prog_.structs.emplace(sd.name, &sd).second)
                fail(ErrorKind::Type, sd.pos, "duplicate struct " + sd.name);
        }
    }

    void validate_struct_fields() {
        for (const auto& sd : prog_.ast.structs) {
            std::map<std::string, int> seen;
            for (const auto& f : sd.fields) {
                if (seen.count(f.name))
                    fail(ErrorKind::Type, f.pos, "duplicate field " + f.name + " in struct " + sd.name);
                seen[f.name] = 1;
                validate_data_type(f.type, f.pos);
            }
            // Forces layout computation; rejects by-value recursion.
            layout_checked(ty_struct(sd.name), sd.pos);
        }
    }

    const TypeLayout& layout_checked(const TypePtr& t, SourcePos pos) {
        try {
            return prog_.layouts->layout_of(t);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Layout && !e.pos().valid())
                throw Error(ErrorKind::Layout, pos, e.message());
            throw;
        }
    }

    // A type that can be stored in memory: no void anywhere, struct names
    // declared, array elements valid.
    void validate_data_type(const TypePtr& t, SourcePos pos) {
        switch (t->kind) {
            case TypeKind::Void: fail(ErrorKind::Type, pos, "void is not a data type");
            case TypeKind::Int:
            case TypeKind::Char: return;
            case TypeKind::Struct:
                if (!prog_.structs.count(t->struct_name))
                    fail(ErrorKind::Type, pos, "unknown struct " + t->struct_name);
                return;
            case TypeKind::Pointer:
                if (t->inner->is_void()) fail(ErrorKind::Type, pos, "void* is not supported");
                validate_pointee(t->inner, pos);
                return;
            case TypeKind::Array: validate_data_type(t->inner, pos); return;
        }
    }

    // Pointees may name structs not yet laid out (self-referential lists).
    void validate_pointee(const TypePtr& t, SourcePos pos) {
        if (t->is_struct()) {
            if (!prog_.structs.count(t->struct_name))
                fail(ErrorKind::Type, pos, "unknown struct " + t->struct_name);
            return;
        }
        validate_data_type(t, pos);
    }

    void register_functions() {
        for (size_t i = 0; i < prog_.ast.funcs.size(); ++i) {
            const auto& f = prog_.ast.funcs[i];
            if (!prog_.func_index.emplace(f.name, static_cast<int>(i)).second)
                fail(ErrorKind::Type, f.pos, "duplicate function " + f.name);
        }
    }

    void check_globals() {
        for (size_t i = 0; i < prog_.ast.globals.size(); ++i) {
            auto& g = prog_.ast.globals[i];
            if (globals_.count(g.name)) fail(ErrorKind::Type, g.pos, "duplicate global " + g.name);
            validate_data_type(g.type, g.pos);
            layout_checked(g.type, g.pos);
            globals_[g.name] = static_cast<int>(i);
        }
        // Initializers may read earlier globals; they run in order at startup.
        cur_fn_ = nullptr;
        for (auto& g : prog_.ast.globals) {
            if (!g.init) continue;
            check_expr(*g.init);
            require_assignable(g.type, *g.init, g.pos);
        }
    }

    void check_function(FuncDecl& f) {
        cur_fn_ = &f;
        locals_.clear();
        params_.clear();
        if (!f.ret->is_void() && !f.ret->is_arith() && !f.ret->is_pointer())
            fail(ErrorKind::Type, f.pos, "functions may return void, int, char, or pointers");
        for (size_t i = 0; i < f.params.size(); ++i) {
            const auto& p = f.params[i];
            validate_data_type(p.type, p.pos);
            if (p.type->is_array())
                fail(ErrorKind::Type, p.pos, "array parameters are not supported; pass a pointer");
            if (params_.count(p.name) )
                fail(ErrorKind::Type, p.pos, "duplicate parameter " + p.name);
            if (p.type->is_struct()) layout_checked(p.type, p.pos);
            params_[p.name] = static_cast<int>(i);
        }
        check_stmt(*f.body);
        cur_fn_ = nullptr;
    }

    void check_main() {
        auto it = prog_.func_index.find("main");
        if (it == prog_.func_index.end()) fail(ErrorKind::Type, "program has no main function");
        const FuncDecl& m = prog_.ast.funcs[static_cast<size_t>(it->second)];
        if (!m.ret->is_void() || !m.params.empty())
            fail(ErrorKind::Type, m.pos, "main must be declared as void main()");
    }

    void check_stmt(Stmt& s) {
        switch (s.kind) {
            case StmtKind::DeclLocal: {
                validate_data_type(s.decl_type, s.pos);
                layout_checked(s.decl_type, s.pos);
                if (params_.count(s.name) || locals_.count(s.name))
                    fail(ErrorKind::Type, s.pos, "redeclaration of " + s.name);
                s.local_index = static_cast<int>(cur_fn_->locals.size());
                cur_fn_->locals.push_back({s.name, s.decl_type, s.pos});
                locals_[s.name] = s.local_index;
                if (s.b) {
                    check_expr(*s.b);
                    require_assignable(s.decl_type, *s.b, s.pos);
                }
                break;
            }
            case StmtKind::Assign: {
                check_expr(*s.a);
                check_expr(*s.b);
                require_lvalue(*s.a, "assignment target");
                if (s.a->kind == ExprKind::Var && s.a->var_ref == VarRef::Param)
                    fail(ErrorKind::Type, s.a->pos, "parameters are read-only");
                require_assignable(s.a->type, *s.b, s.pos);
                break;
            }
            case StmtKind::ExprStmt:
                check_expr(*s.a);
                break;
            case StmtKind::If:
                check_expr(*s.a);
                require_arith(*s.a, "condition");
                check_stmt(*s.s1);
                if (s.s2) check_stmt(*s.s2);
                break;
            case StmtKind::While:
                check_expr(*s.a);
                require_arith(*s.a, "condition");
                check_stmt(*s.s1);
                break;
            case StmtKind::Return: {
                const TypePtr& ret = cur_fn_->ret;
                if (ret->is_void()) {
                    if (s.a) fail(ErrorKind::Type, s.pos, "void function returns a value");
                } else {
                    if (!s.a) fail(ErrorKind::Type, s.pos, "non-void function returns nothing");
                    check_expr(*s.a);
                    require_assignable(ret, *s.a, s.pos);
                }
                break;
            }
            case StmtKind::Block:
                for (auto& sub : s.body) check_stmt(*sub);
                break;
            case StmtKind::Free:
                check_expr(*s.a);
                if (!s.a->type->is_pointer())
                    fail(ErrorKind::Type, s.a->pos, "free expects a pointer, got " + type_name(s.a->type));
                break;
            case StmtKind::Print:
                check_expr(*s.a);
                require_arith(*s.a, "print argument");
                break;
        }
    }

    void check_expr(Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLit: e.type = ty_int(); break;
            case ExprKind::CharLit: e.type = ty_char(); break;
            case ExprKind::Input: e.type = ty_int(); break;
            case ExprKind::Var: resolve_var(e); break;
            case ExprKind::Field: {
                check_expr(*e.a);
                if (!e.a->type->is_struct())
                    fail(ErrorKind::Type, e.pos, "'.' applied to non-struct " + type_name(e.a->type));
                require_lvalue(*e.a, "field base");
                auto [off, ft] = field_checked(e.a->type->struct_name, e.name, e.pos);
                e.field_offset = static_cast<int>(off);
                e.type = ft;
                break;
            }
            case ExprKind::Arrow: {
                check_expr(*e.a);
                if (!e.a->type->is_pointer() || !e.a->type->inner->is_struct())
                    fail(ErrorKind::Type, e.pos, "'->' applied to " + type_name(e.a->type));
                auto [off, ft] = field_checked(e.a->type->inner->struct_name, e.name, e.pos);
                e.field_offset = static_cast<int>(off);
                e.type = ft;
                break;
            }
            case ExprKind::Index: {
                check_expr(*e.a);
                check_expr(*e.b);
                if (!e.b->type->is_arith())
                    fail(ErrorKind::Type, e.b->pos, "array index must be int or char");
                TypePtr elem;
                if (e.a->type->is_array()) {
                    require_lvalue(*e.a, "indexed array");
                    elem = e.a->type->inner;
                } else if (e.a->type->is_pointer()) {
                    elem = e.a->type->inner;
                    if (elem->is_void()) fail(ErrorKind::Type, e.pos, "cannot index void*");
                } else {
                    fail(ErrorKind::Type, e.pos, "'[]' applied to " + type_name(e.a->type));
                }
                e.elem_size = static_cast<int>(prog_.layouts->size_of(elem));
                e.type = elem;
                break;
            }
            case ExprKind::AddrOf: {
                check_expr(*e.a);
                require_lvalue(*e.a, "operand of '&'");
                if (e.a->kind == ExprKind::Var && e.a->var_ref == VarRef::Param &&
                    !e.a->type->is_struct())
                    fail(ErrorKind::Type, e.pos,
                         "cannot take the address of a scalar or pointer parameter");
                e.type = ty_ptr(e.a->type);
                break;
            }
            case ExprKind::Deref: {
                check_expr(*e.a);
                if (!e.a->type->is_pointer())
                    fail(ErrorKind::Type, e.pos, "'*' applied to non-pointer " + type_name(e.a->type));
                e.type = e.a->type->inner;
                break;
            }
            case ExprKind::Neg:
                check_expr(*e.a);
                require_arith(*e.a, "operand of unary '-'");
                e.type = ty_int();
                break;
            case ExprKind::Binary: {
                check_expr(*e.a);
                check_expr(*e.b);
                bool comparison = e.op == BinOp::Eq || e.op == BinOp::Ne;
                if (e.a->type->is_pointer() || e.b->type->is_pointer()) {
                    if (!comparison || !same_type(e.a->type, e.b->type))
                        fail(ErrorKind::Type, e.pos,
                             std::string("invalid operands to '") + binop_text(e.op) + "': " +
                                 type_name(e.a->type) + " and " + type_name(e.b->type));
                } else {
                    require_arith(*e.a, "operand");
                    require_arith(*e.b, "operand");
                }
                e.type = ty_int();
                break;
            }
            case ExprKind::Call: check_call(e); break;
            case ExprKind::Malloc: {
                validate_data_type(e.malloc_type, e.pos);
                if (e.malloc_type->is_array())
                    fail(ErrorKind::Type, e.pos, "use malloc(sizeof(T) * N) for arrays");
                layout_checked(e.malloc_type, e.pos);
                e.type = ty_ptr(e.malloc_type);
                break;
            }
        }
        if (!e.type) fail(ErrorKind::Type, e.pos, "expression has no type");
    }

    void check_call(Expr& e) {
        auto it = prog_.func_index.find(e.name);
        if (it == prog_.func_index.end())
            fail(ErrorKind::Type, e.pos, "call to undeclared function " + e.name);
        e.call_index = it->second;
        const FuncDecl& f = prog_.ast.funcs[static_cast<size_t>(it->second)];
        if (e.args.size() != f.params.size())
            fail(ErrorKind::Type, e.pos,
                 e.name + " expects " + std::to_string(f.params.size()) + " argument(s), got " +
                     std::to_string(e.args.size()));
        for (size_t i = 0; i < e.args.size(); ++i) {
            Expr& a = *e.args[i];
            check_expr(a);
            const TypePtr& pt = f.params[i].type;
            if (pt->is_struct()) {
                if (!same_type(pt, a.type))
                    fail(ErrorKind::Type, a.pos,
                         "argument " + std::to_string(i + 1) + " of " + e.name + ": expected " +
                             type_name(pt) + ", got " + type_name(a.type));
                require_lvalue(a, "struct argument");  // passed by address
            } else {
                require_assignable(pt, a, a.pos);
            }
        }
        e.type = f.ret;
    }

    std::pair<uint32_t, TypePtr> field_checked(const std::string& struct_name,
                                               const std::string& field_name, SourcePos pos) {
        try {
            return prog_.layouts->field_offset(struct_name, field_name);
        } catch (const Error& e) {
            fail(ErrorKind::Type, pos, e.message());
        }
    }

    void resolve_var(Expr& e) {
        if (auto it = locals_.find(e.name); cur_fn_ && it != locals_.end()) {
            e.var_ref = VarRef::Local;
            e.var_index = it->second;
            e.type = cur_fn_->locals[static_cast<size_t>(it->second)].type;
            return;
        }
        if (auto it = params_.find(e.name); cur_fn_ && it != params_.end()) {
            e.var_ref = VarRef::Param;
            e.var_index = it->second;
            e.type = cur_fn_->params[static_cast<size_t>(it->second)].type;
            return;
        }
        if (auto it = globals_.find(e.name); it != globals_.end()) {
            e.var_ref = VarRef::Global;
            e.var_index = it->second;
            e.type = prog_.ast.globals[static_cast<size_t>(it->second)].type;
            return;
        }
        fail(ErrorKind::Type, e.pos, "undeclared identifier " + e.name);
    }

    // Lvalues: global/local variables, struct parameters (which alias caller
    // memory), field access, indexing, dereference.
    static bool is_lvalue(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Var:
                return e.var_ref == VarRef::Global || e.var_ref == VarRef::Local ||
                       (e.var_ref == VarRef::Param && e.type->is_struct());
            case ExprKind::Field:
            case ExprKind::Arrow:
            case ExprKind::Index:
            case ExprKind::Deref: return true;
            default: return false;
        }
    }

    static void require_lvalue(const Expr& e, const char* what) {
        if (!is_lvalue(e))
            fail(ErrorKind::Type, e.pos, std::string(what) + " must be an lvalue");
    }

    static void require_arith(const Expr& e, const char* what) {
        if (!e.type->is_arith())
            fail(ErrorKind::Type, e.pos,
                 std::string(what) + " must be int or char, got " + type_name(e.type));
    }

    // target = value: int/char interconvert; pointers must match exactly;
    // structs and arrays are not assignable.
    static void require_assignable(const TypePtr& target, const Expr& value, SourcePos pos) {
        if (target->is_struct() || target->is_array())
            fail(ErrorKind::Type, pos, "cannot assign whole " + type_name(target) + " objects");
        if (target->is_arith()) {
            if (!value.type->is_arith())
                fail(ErrorKind::Type, pos,
                     "cannot assign " + type_name(value.type) + " to " + type_name(target));
            return;
        }
        // pointer target: allow exact match, or array-to-pointer decay
        TypePtr vt = value.type;
        if (vt->is_array()) vt = ty_ptr(vt->inner);
        if (!same_type(target, vt))
            fail(ErrorKind::Type, pos,
                 "cannot assign " + type_name(value.type) + " to " + type_name(target));
    }

    TypedProgram prog_;
    FuncDecl* cur_fn_ = nullptr;
    std::map<std::string, int> globals_;
    std::map<std::string, int> locals_;
    std::map<std::string, int> params_;
};

inline TypedProgram typecheck(Ast ast) { return TypeChecker(std::move(ast)).run(); }

inline TypedProgram compile_frontend(const SourceProgram& src) { return typecheck(parse(src)); }

}  // namespace fsdfi
