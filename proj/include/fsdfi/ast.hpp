#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fsdfi/common.hpp"

namespace fsdfi {

// ---------------------------------------------------------------------------
// Types. Scalar sizes are fixed: int 4, char 1, pointers 8.
// ---------------------------------------------------------------------------

enum class TypeKind { Void, Int, Char, Struct, Pointer, Array };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    TypeKind kind = TypeKind::Void;
    std::string struct_name;  // Struct
    TypePtr inner;            // Pointer: pointee; Array: element
    int array_len = 0;        // Array

    bool is_int() const { return kind == TypeKind::Int; }
    bool is_char() const { return kind == TypeKind::Char; }
    bool is_arith() const { return is_int() || is_char(); }
    bool is_pointer() const { return kind == TypeKind::Pointer; }
    bool is_struct() const { return kind == TypeKind::Struct; }
    bool is_array() const { return kind == TypeKind::Array; }
    bool is_void() const { return kind == TypeKind::Void; }
};

inline TypePtr ty_void() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Void});
    return t;
}
inline TypePtr ty_int() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Int});
    return t;
}
inline TypePtr ty_char() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Char});
    return t;
}
inline TypePtr ty_struct(std::string name) {
    Type t;
    t.kind = TypeKind::Struct;
    t.struct_name = std::move(name);
    return std::make_shared<Type>(std::move(t));
}
inline TypePtr ty_ptr(TypePtr pointee) {
    Type t;
    t.kind = TypeKind::Pointer;
    t.inner = std::move(pointee);
    return std::make_shared<Type>(std::move(t));
}
inline TypePtr ty_array(TypePtr elem, int len) {
    Type t;
    t.kind = TypeKind::Array;
    t.inner = std::move(elem);
    t.array_len = len;
    return std::make_shared<Type>(std::move(t));
}

inline bool same_type(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TypeKind::Void:
        case TypeKind::Int:
        case TypeKind::Char: return true;
        case TypeKind::Struct: return a->struct_name == b->struct_name;
        case TypeKind::Pointer: return same_type(a->inner, b->inner);
        case TypeKind::Array: return a->array_len == b->array_len && same_type(a->inner, b->inner);
    }
    return false;
}

inline std::string type_name(const TypePtr& t) {
    if (!t) return "<none>";
    switch (t->kind) {
        case TypeKind::Void: return "void";
        case TypeKind::Int: return "int";
        case TypeKind::Char: return "char";
        case TypeKind::Struct: return "struct " + t->struct_name;
        case TypeKind::Pointer: return type_name(t->inner) + "*";
        case TypeKind::Array:
            return type_name(t->inner) + "[" + std::to_string(t->array_len) + "]";
    }
    return "<bad>";
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
    IntLit,
    CharLit,
    Var,
    Field,   // base.name
    Arrow,   // base->name
    Index,   // base[index]
    AddrOf,  // &operand
    Deref,   // *operand
    Neg,     // -operand
    Binary,
    Call,
    Malloc,
    Input,
};

enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne };

inline const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
    }
    return "?";
}

enum class VarRef { Unresolved, Global, Local, Param };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    ExprKind kind;
    SourcePos pos;

    long long value = 0;       // IntLit / CharLit
    std::string name;          // Var, Field/Arrow field name, Call callee
    ExprPtr a;                 // unary operand / base / lhs
    ExprPtr b;                 // index / rhs
    std::vector<ExprPtr> args; // Call
    BinOp op = BinOp::Add;
    TypePtr malloc_type;       // Malloc: element type
    int malloc_count = 1;      // Malloc: literal element count

    // Filled by the type checker.
    TypePtr type;
    VarRef var_ref = VarRef::Unresolved;
    int var_index = -1;     // index into globals / function locals / params
    int field_offset = -1;  // Field/Arrow: byte offset within the struct
    int call_index = -1;    // Call: function index
    int elem_size = -1;     // Index: element size in bytes
};

inline ExprPtr make_expr(ExprKind k, SourcePos pos) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->pos = pos;
    return e;
}

// ---------------------------------------------------------------------------
// Statements and declarations
// ---------------------------------------------------------------------------

enum class StmtKind { DeclLocal, Assign, ExprStmt, If, While, Return, Block, Free, Print };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    StmtKind kind;
    SourcePos pos;

    std::string name;   // DeclLocal
    TypePtr decl_type;  // DeclLocal
    ExprPtr a;          // Assign target / condition / return value / operand
    ExprPtr b;          // Assign value / DeclLocal initializer
    StmtPtr s1;         // If then / While body
    StmtPtr s2;         // If else
    std::vector<StmtPtr> body;  // Block

    int local_index = -1;  // DeclLocal, filled by the type checker
};

inline StmtPtr make_stmt(StmtKind k, SourcePos pos) {
    auto s = std::make_unique<Stmt>();
    s->kind = k;
    s->pos = pos;
    return s;
}

struct FieldDecl {
    std::string name;
    TypePtr type;
    SourcePos pos;
};

struct StructDecl {
    std::string name;
    std::vector<FieldDecl> fields;
    SourcePos pos;
};

struct VarDecl {
    std::string name;
    TypePtr type;
    ExprPtr init;  // globals: optional constant initializer
    SourcePos pos;
};

struct ParamDecl {
    std::string name;
    TypePtr type;
    SourcePos pos;
};

struct LocalInfo {
    std::string name;
    TypePtr type;
    SourcePos pos;
};

struct FuncDecl {
    std::string name;
    TypePtr ret;
    std::vector<ParamDecl> params;
    StmtPtr body;  // Block
    SourcePos pos;

    std::vector<LocalInfo> locals;  // filled by the type checker, declaration order
};

enum class TopKind { Struct, Global, Func };

struct Ast {
    std::string path;
    std::vector<StructDecl> structs;
    std::vector<VarDecl> globals;
    std::vector<FuncDecl> funcs;
    // Declaration order across the three kinds, for faithful printing.
    std::vector<std::pair<TopKind, int>> order;
};

using StructTable = std::map<std::string, const StructDecl*>;

// ---------------------------------------------------------------------------
// Canonical printing (re-parseable; used by the round-trip property test)
// ---------------------------------------------------------------------------

namespace detail {

inline void print_declarator(std::ostream& os, const TypePtr& t, const std::string& name) {
    if (t && t->is_array()) {
        os << type_name(t->inner) << ' ' << name << '[' << t->array_len << ']';
    } else {
        os << type_name(t) << ' ' << name;
    }
}

inline void print_expr(std::ostream& os, const Expr& e) {
    switch (e.kind) {
        case ExprKind::IntLit: os << e.value; break;
        case ExprKind::CharLit: os << e.value; break;  // chars print as their code
        case ExprKind::Var: os << e.name; break;
        case ExprKind::Field:
            print_expr(os, *e.a);
            os << '.' << e.name;
            break;
        case ExprKind::Arrow:
            print_expr(os, *e.a);
            os << "->" << e.name;
            break;
        case ExprKind::Index:
            print_expr(os, *e.a);
            os << '[';
            print_expr(os, *e.b);
            os << ']';
            break;
        case ExprKind::AddrOf:
            os << "(&";
            print_expr(os, *e.a);
            os << ')';
            break;
        case ExprKind::Deref:
            os << "(*";
            print_expr(os, *e.a);
            os << ')';
            break;
        case ExprKind::Neg:
            os << "(-";
            print_expr(os, *e.a);
            os << ')';
            break;
        case ExprKind::Binary:
            os << '(';
            print_expr(os, *e.a);
            os << ' ' << binop_text(e.op) << ' ';
            print_expr(os, *e.b);
            os << ')';
            break;
        case ExprKind::Call: {
            os << e.name << '(';
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) os << ", ";
                print_expr(os, *e.args[i]);
            }
            os << ')';
            break;
        }
        case ExprKind::Malloc:
            os << "malloc(sizeof(" << type_name(e.malloc_type) << ')';
            if (e.malloc_count != 1) os << " * " << e.malloc_count;
            os << ')';
            break;
        case ExprKind::Input: os << "input()"; break;
    }
}

inline void print_stmt(std::ostream& os, const Stmt& s, int indent) {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    switch (s.kind) {
        case StmtKind::DeclLocal:
            os << pad;
            print_declarator(os, s.decl_type, s.name);
            if (s.b) {
                os << " = ";
                print_expr(os, *s.b);
            }
            os << ";\n";
            break;
        case StmtKind::Assign:
            os << pad;
            print_expr(os, *s.a);
            os << " = ";
            print_expr(os, *s.b);
            os << ";\n";
            break;
        case StmtKind::ExprStmt:
            os << pad;
            print_expr(os, *s.a);
            os << ";\n";
            break;
        case StmtKind::If:
            os << pad << "if (";
            print_expr(os, *s.a);
            os << ")\n";
            print_stmt(os, *s.s1, indent + (s.s1->kind == StmtKind::Block ? 0 : 1));
            if (s.s2) {
                os << pad << "else\n";
                print_stmt(os, *s.s2, indent + (s.s2->kind == StmtKind::Block ? 0 : 1));
            }
            break;
        case StmtKind::While:
            os << pad << "while (";
            print_expr(os, *s.a);
            os << ")\n";
            print_stmt(os, *s.s1, indent + (s.s1->kind == StmtKind::Block ? 0 : 1));
            break;
        case StmtKind::Return:
            os << pad << "return";
            if (s.a) {
                os << ' ';
                print_expr(os, *s.a);
            }
            os << ";\n";
            break;
        case StmtKind::Block:
            os << pad << "{\n";
            for (const auto& sub : s.body) print_stmt(os, *sub, indent + 1);
            os << pad << "}\n";
            break;
        case StmtKind::Free:
            os << pad << "free(";
            print_expr(os, *s.a);
            os << ");\n";
            break;
        case StmtKind::Print:
            os << pad << "print(";
            print_expr(os, *s.a);
            os << ");\n";
            break;
    }
}

}  // namespace detail

inline std::string print_ast(const Ast& ast) {
    std::ostringstream os;
    for (auto [kind, idx] : ast.order) {
        switch (kind) {
            case TopKind::Struct: {
                const StructDecl& sd = ast.structs[static_cast<size_t>(idx)];
                os << "struct " << sd.name << " {\n";
                for (const auto& f : sd.fields) {
                    os << "  ";
                    detail::print_declarator(os, f.type, f.name);
                    os << ";\n";
                }
                os << "};\n";
                break;
            }
            case TopKind::Global: {
                const VarDecl& g = ast.globals[static_cast<size_t>(idx)];
                detail::print_declarator(os, g.type, g.name);
                if (g.init) {
                    os << " = ";
                    detail::print_expr(os, *g.init);
                }
                os << ";\n";
                break;
            }
            case TopKind::Func: {
                const FuncDecl& f = ast.funcs[static_cast<size_t>(idx)];
                os << type_name(f.ret) << ' ' << f.name << '(';
                for (size_t i = 0; i < f.params.size(); ++i) {
                    if (i) os << ", ";
                    os << type_name(f.params[i].type) << ' ' << f.params[i].name;
                }
                os << ")\n";
                detail::print_stmt(os, *f.body, 0);
                break;
            }
        }
    }
    return os.str();
}

}  // namespace fsdfi
