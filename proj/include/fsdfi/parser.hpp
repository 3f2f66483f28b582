#pragma once

#include <string>
#include <vector>

#include "fsdfi/ast.hpp"
#include "fsdfi/lexer.hpp"

namespace fsdfi {

struct SourceProgram {
    std::string text;
    std::string path = "<input>";
};

// Recursive-descent parser for MiniC. Grammar summary:
//
//   program    := (struct-decl | var-decl | func-decl)*
//   struct-decl:= 'struct' IDENT '{' (type declarator ';')+ '}' ';'
//   var-decl   := type declarator ('=' expr)? ';'
//   func-decl  := type IDENT '(' params? ')' block
//   type       := ('int' | 'char' | 'void' | 'struct' IDENT) '*'*
//   declarator := IDENT ('[' INT ']')?
//   stmt       := var-decl | 'if' ... | 'while' ... | 'return' expr? ';'
//              | block | 'free' '(' expr ')' ';' | 'print' '(' expr ')' ';'
//              | expr ('=' expr)? ';'
//
// Expressions use C precedence for the supported operators; `malloc` takes
// `sizeof(T)` optionally scaled by an integer literal.
class Parser {
public:
    explicit Parser(const SourceProgram& src) : toks_(Lexer(src.text).run()) { path_ = src.path; }

    Ast run() {
        Ast ast;
        ast.path = path_;
        while (!at(Tok::End)) {
            if (at(Tok::KwStruct) && peek(1).kind == Tok::Ident && peek(2).kind == Tok::LBrace) {
                parse_struct(ast);
            } else {
                parse_global_or_func(ast);
            }
        }
        return ast;
    }

private:
    void parse_struct(Ast& ast) {
        SourcePos pos = cur().pos;
        expect(Tok::KwStruct);
        StructDecl sd;
        sd.pos = pos;
        sd.name = expect(Tok::Ident).text;
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            FieldDecl f;
            f.pos = cur().pos;
            TypePtr base = parse_type();
            f.name = expect(Tok::Ident).text;
            f.type = parse_array_suffix(base);
            expect(Tok::Semi);
            sd.fields.push_back(std::move(f));
        }
        expect(Tok::RBrace);
        expect(Tok::Semi);
        if (sd.fields.empty()) fail(ErrorKind::Parse, pos, "struct " + sd.name + " has no fields");
        ast.order.emplace_back(TopKind::Struct, static_cast<int>(ast.structs.size()));
        ast.structs.push_back(std::move(sd));
    }

    void parse_global_or_func(Ast& ast) {
        SourcePos pos = cur().pos;
        TypePtr type = parse_type();
        std::string name = expect(Tok::Ident).text;
        if (at(Tok::LParen)) {
            parse_func(ast, pos, std::move(type), std::move(name));
            return;
        }
        VarDecl g;
        g.pos = pos;
        g.type = parse_array_suffix(type);
        g.name = std::move(name);
        if (accept(Tok::Assign)) g.init = parse_expr();
        expect(Tok::Semi);
        ast.order.emplace_back(TopKind::Global, static_cast<int>(ast.globals.size()));
        ast.globals.push_back(std::move(g));
    }

    void parse_func(Ast& ast, SourcePos pos, TypePtr ret, std::string name) {
        FuncDecl f;
        f.pos = pos;
        f.ret = std::move(ret);
        f.name = std::move(name);
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            do {
                ParamDecl p;
                p.pos = cur().pos;
                p.type = parse_type();
                p.name = expect(Tok::Ident).text;
                if (at(Tok::LBracket))
                    fail(ErrorKind::Parse, cur().pos, "array parameters are not supported; pass a pointer");
                f.params.push_back(std::move(p));
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        f.body = parse_block();
        ast.order.emplace_back(TopKind::Func, static_cast<int>(ast.funcs.size()));
        ast.funcs.push_back(std::move(f));
    }

    TypePtr parse_type() {
        TypePtr t;
        if (accept(Tok::KwInt)) {
            t = ty_int();
        } else if (accept(Tok::KwChar)) {
            t = ty_char();
        } else if (accept(Tok::KwVoid)) {
            t = ty_void();
        } else if (accept(Tok::KwStruct)) {
            t = ty_struct(expect(Tok::Ident).text);
        } else {
            fail(ErrorKind::Parse, cur().pos, std::string("expected a type, got ") + token_name(cur().kind));
        }
        while (accept(Tok::Star)) t = ty_ptr(t);
        return t;
    }

    TypePtr parse_array_suffix(TypePtr base) {
        if (!accept(Tok::LBracket)) return base;
        Token n = expect(Tok::IntLit);
        if (n.value <= 0) fail(ErrorKind::Parse, n.pos, "array length must be positive");
        expect(Tok::RBracket);
        if (at(Tok::LBracket)) fail(ErrorKind::Parse, cur().pos, "multidimensional arrays are not supported");
        return ty_array(std::move(base), static_cast<int>(n.value));
    }

    StmtPtr parse_block() {
        SourcePos pos = cur().pos;
        expect(Tok::LBrace);
        auto s = make_stmt(StmtKind::Block, pos);
        while (!at(Tok::RBrace)) s->body.push_back(parse_stmt());
        expect(Tok::RBrace);
        return s;
    }

    bool at_type_start() const {
        Tok k = cur().kind;
        if (k == Tok::KwInt || k == Tok::KwChar || k == Tok::KwVoid) return true;
        // 'struct S name' declares; 'struct S { ... }' cannot appear in a body.
        return k == Tok::KwStruct;
    }

    StmtPtr parse_stmt() {
        SourcePos pos = cur().pos;
        if (at(Tok::LBrace)) return parse_block();
        if (at_type_start()) {
            auto s = make_stmt(StmtKind::DeclLocal, pos);
            TypePtr base = parse_type();
            s->name = expect(Tok::Ident).text;
            s->decl_type = parse_array_suffix(base);
            if (accept(Tok::Assign)) s->b = parse_expr();
            expect(Tok::Semi);
            return s;
        }
        if (accept(Tok::KwIf)) {
            auto s = make_stmt(StmtKind::If, pos);
            expect(Tok::LParen);
            s->a = parse_expr();
            expect(Tok::RParen);
            s->s1 = parse_stmt();
            if (accept(Tok::KwElse)) s->s2 = parse_stmt();
            return s;
        }
        if (accept(Tok::KwWhile)) {
            auto s = make_stmt(StmtKind::While, pos);
            expect(Tok::LParen);
            s->a = parse_expr();
            expect(Tok::RParen);
            s->s1 = parse_stmt();
            return s;
        }
        if (accept(Tok::KwReturn)) {
            auto s = make_stmt(StmtKind::Return, pos);
            if (!at(Tok::Semi)) s->a = parse_expr();
            expect(Tok::Semi);
            return s;
        }
        if (accept(Tok::KwFree)) {
            auto s = make_stmt(StmtKind::Free, pos);
            expect(Tok::LParen);
            s->a = parse_expr();
            expect(Tok::RParen);
            expect(Tok::Semi);
            return s;
        }
        if (accept(Tok::KwPrint)) {
            auto s = make_stmt(StmtKind::Print, pos);
            expect(Tok::LParen);
            s->a = parse_expr();
            expect(Tok::RParen);
            expect(Tok::Semi);
            return s;
        }
        ExprPtr e = parse_expr();
        if (accept(Tok::Assign)) {
            auto s = make_stmt(StmtKind::Assign, pos);
            s->a = std::move(e);
            s->b = parse_expr();
            expect(Tok::Semi);
            return s;
        }
        auto s = make_stmt(StmtKind::ExprStmt, pos);
        if (e->kind != ExprKind::Call)
            fail(ErrorKind::Parse, e->pos, "expression statement must be a call or an assignment");
        s->a = std::move(e);
        expect(Tok::Semi);
        return s;
    }

    // expr := equality
    ExprPtr parse_expr() { return parse_equality(); }

    ExprPtr parse_equality() {
        ExprPtr e = parse_relational();
        while (at(Tok::EqEq) || at(Tok::Ne)) {
            BinOp op = at(Tok::EqEq) ? BinOp::Eq : BinOp::Ne;
            SourcePos pos = cur().pos;
            bump();
            auto n = make_expr(ExprKind::Binary, pos);
            n->op = op;
            n->a = std::move(e);
            n->b = parse_relational();
            e = std::move(n);
        }
        return e;
    }

    ExprPtr parse_relational() {
        ExprPtr e = parse_additive();
        while (at(Tok::Lt) || at(Tok::Le) || at(Tok::Gt) || at(Tok::Ge)) {
            BinOp op = at(Tok::Lt)   ? BinOp::Lt
                       : at(Tok::Le) ? BinOp::Le
                       : at(Tok::Gt) ? BinOp::Gt
                                     : BinOp::Ge;
            SourcePos pos = cur().pos;
            bump();
            auto n = make_expr(ExprKind::Binary, pos);
            n->op = op;
            n->a = std::move(e);
            n->b = parse_additive();
            e = std::move(n);
        }
        return e;
    }

    ExprPtr parse_additive() {
        ExprPtr e = parse_multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinOp op = at(Tok::Plus) ? BinOp::Add : BinOp::Sub;
            SourcePos pos = cur().pos;
            bump();
            auto n = make_expr(ExprKind::Binary, pos);
            n->op = op;
            n->a = std::move(e);
            n->b = parse_multiplicative();
            e = std::move(n);
        }
        return e;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr e = parse_unary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            BinOp op = at(Tok::Star) ? BinOp::Mul : BinOp::Div;
            SourcePos pos = cur().pos;
            bump();
            auto n = make_expr(ExprKind::Binary, pos);
            n->op = op;
            n->a = std::move(e);
            n->b = parse_unary();
            e = std::move(n);
        }
        return e;
    }

    ExprPtr parse_unary() {
        SourcePos pos = cur().pos;
        if (accept(Tok::Amp)) {
            auto n = make_expr(ExprKind::AddrOf, pos);
            n->a = parse_unary();
            return n;
        }
        if (accept(Tok::Star)) {
            auto n = make_expr(ExprKind::Deref, pos);
            n->a = parse_unary();
            return n;
        }
        if (accept(Tok::Minus)) {
            auto n = make_expr(ExprKind::Neg, pos);
            n->a = parse_unary();
            return n;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            SourcePos pos = cur().pos;
            if (accept(Tok::Dot)) {
                auto n = make_expr(ExprKind::Field, pos);
                n->name = expect(Tok::Ident).text;
                n->a = std::move(e);
                e = std::move(n);
            } else if (accept(Tok::Arrow)) {
                auto n = make_expr(ExprKind::Arrow, pos);
                n->name = expect(Tok::Ident).text;
                n->a = std::move(e);
                e = std::move(n);
            } else if (accept(Tok::LBracket)) {
                auto n = make_expr(ExprKind::Index, pos);
                n->a = std::move(e);
                n->b = parse_expr();
                expect(Tok::RBracket);
                e = std::move(n);
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_primary() {
        SourcePos pos = cur().pos;
        if (at(Tok::IntLit)) {
            auto n = make_expr(ExprKind::IntLit, pos);
            n->value = bump().value;
            return n;
        }
        if (at(Tok::CharLit)) {
            auto n = make_expr(ExprKind::CharLit, pos);
            n->value = bump().value;
            return n;
        }
        if (accept(Tok::LParen)) {
            ExprPtr e = parse_expr();
            expect(Tok::RParen);
            return e;
        }
        if (accept(Tok::KwMalloc)) {
            auto n = make_expr(ExprKind::Malloc, pos);
            expect(Tok::LParen);
            expect(Tok::KwSizeof);
            expect(Tok::LParen);
            n->malloc_type = parse_type();
            expect(Tok::RParen);
            if (accept(Tok::Star)) {
                Token c = expect(Tok::IntLit);
                if (c.value <= 0) fail(ErrorKind::Parse, c.pos, "malloc element count must be positive");
                n->malloc_count = static_cast<int>(c.value);
            }
            expect(Tok::RParen);
            return n;
        }
        if (accept(Tok::KwInput)) {
            auto n = make_expr(ExprKind::Input, pos);
            expect(Tok::LParen);
            expect(Tok::RParen);
            return n;
        }
        if (at(Tok::Ident)) {
            if (peek(1).kind == Tok::LParen) {
                auto n = make_expr(ExprKind::Call, pos);
                n->name = bump().text;
                expect(Tok::LParen);
                if (!at(Tok::RParen)) {
                    do {
                        n->args.push_back(parse_expr());
                    } while (accept(Tok::Comma));
                }
                expect(Tok::RParen);
                return n;
            }
            auto n = make_expr(ExprKind::Var, pos);
            n->name = bump().text;
            return n;
        }
        fail(ErrorKind::Parse, pos, std::string("expected an expression, got ") + token_name(cur().kind));
    }

    const Token& cur() const { return toks_[i_]; }
    const Token& peek(size_t n) const {
        size_t j = i_ + n;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }
    bool at(Tok k) const { return cur().kind == k; }
    Token bump() { return toks_[i_++]; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        ++i_;
        return true;
    }
    Token expect(Tok k) {
        if (!at(k))
            fail(ErrorKind::Parse, cur().pos,
                 std::string("expected ") + token_name(k) + ", got " + token_name(cur().kind));
        return bump();
    }

    std::vector<Token> toks_;
    std::string path_;
    size_t i_ = 0;
};

inline Ast parse(const SourceProgram& src) { return Parser(src).run(); }

}  // namespace fsdfi
