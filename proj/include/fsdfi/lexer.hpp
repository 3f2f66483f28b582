#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "fsdfi/common.hpp"

namespace fsdfi {

enum class Tok {
    End,
    Ident,
    IntLit,
    CharLit,
    // keywords
    KwStruct,
    KwInt,
    KwChar,
    KwVoid,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwMalloc,
    KwSizeof,
    KwFree,
    KwPrint,
    KwInput,
    // punctuation / operators
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Amp,
    Dot,
    Arrow,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long long value = 0;  // IntLit / CharLit
    SourcePos pos;
};

inline const char* token_name(Tok k) {
    switch (k) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::IntLit: return "integer literal";
        case Tok::CharLit: return "character literal";
        case Tok::KwStruct: return "'struct'";
        case Tok::KwInt: return "'int'";
        case Tok::KwChar: return "'char'";
        case Tok::KwVoid: return "'void'";
        case Tok::KwIf: return "'if'";
        case Tok::KwElse: return "'else'";
        case Tok::KwWhile: return "'while'";
        case Tok::KwReturn: return "'return'";
        case Tok::KwMalloc: return "'malloc'";
        case Tok::KwSizeof: return "'sizeof'";
        case Tok::KwFree: return "'free'";
        case Tok::KwPrint: return "'print'";
        case Tok::KwInput: return "'input'";
        case Tok::Assign: return "'='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::EqEq: return "'=='";
        case Tok::Ne: return "'!='";
        case Tok::Amp: return "'&'";
        case Tok::Dot: return "'.'";
        case Tok::Arrow: return "'->'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
    }
    return "token";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            Token t = next();
            bool end = t.kind == Tok::End;
            out.push_back(std::move(t));
            if (end) break;
        }
        return out;
    }

private:
    Token next() {
        skip_ws_and_comments();
        Token t;
        t.pos = pos();
        if (at_end()) return t;

        char c = src_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
            t.text = std::string(src_.substr(start, i_ - start));
            t.kind = keyword_of(t.text);
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
            t.text = std::string(src_.substr(start, i_ - start));
            t.kind = Tok::IntLit;
            errno = 0;
            t.value = std::stoll(t.text);
            return t;
        }
        if (c == '\'') return char_literal(t);

        advance();
        switch (c) {
            case '=':
                if (match('=')) { t.kind = Tok::EqEq; return t; }
                t.kind = Tok::Assign;
                return t;
            case '+': t.kind = Tok::Plus; return t;
            case '-':
                if (match('>')) { t.kind = Tok::Arrow; return t; }
                t.kind = Tok::Minus;
                return t;
            case '*': t.kind = Tok::Star; return t;
            case '/': t.kind = Tok::Slash; return t;
            case '<':
                if (match('=')) { t.kind = Tok::Le; return t; }
                t.kind = Tok::Lt;
                return t;
            case '>':
                if (match('=')) { t.kind = Tok::Ge; return t; }
                t.kind = Tok::Gt;
                return t;
            case '!':
                if (match('=')) { t.kind = Tok::Ne; return t; }
                fail(ErrorKind::Parse, t.pos, "stray '!'");
            case '&': t.kind = Tok::Amp; return t;
            case '.': t.kind = Tok::Dot; return t;
            case '[': t.kind = Tok::LBracket; return t;
            case ']': t.kind = Tok::RBracket; return t;
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case '{': t.kind = Tok::LBrace; return t;
            case '}': t.kind = Tok::RBrace; return t;
            case ';': t.kind = Tok::Semi; return t;
            case ',': t.kind = Tok::Comma; return t;
            default: break;
        }
        fail(ErrorKind::Parse, t.pos, std::string("unexpected character '") + c + "'");
    }

    Token char_literal(Token t) {
        advance();  // opening quote
        if (at_end()) fail(ErrorKind::Parse, t.pos, "unterminated character literal");
        char c = src_[i_];
        if (c == '\\') {
            advance();
            if (at_end()) fail(ErrorKind::Parse, t.pos, "unterminated character literal");
            switch (src_[i_]) {
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case '0': c = '\0'; break;
                case '\\': c = '\\'; break;
                case '\'': c = '\''; break;
                default: fail(ErrorKind::Parse, pos(), "unknown escape in character literal");
            }
        }
        advance();
        if (at_end() || src_[i_] != '\'') fail(ErrorKind::Parse, t.pos, "unterminated character literal");
        advance();  // closing quote
        t.kind = Tok::CharLit;
        t.value = static_cast<unsigned char>(c);
        return t;
    }

    static Tok keyword_of(const std::string& s) {
        if (s == "struct") return Tok::KwStruct;
        if (s == "int") return Tok::KwInt;
        if (s == "char") return Tok::KwChar;
        if (s == "void") return Tok::KwVoid;
        if (s == "if") return Tok::KwIf;
        if (s == "else") return Tok::KwElse;
        if (s == "while") return Tok::KwWhile;
        if (s == "return") return Tok::KwReturn;
        if (s == "malloc") return Tok::KwMalloc;
        if (s == "sizeof") return Tok::KwSizeof;
        if (s == "free") return Tok::KwFree;
        if (s == "print") return Tok::KwPrint;
        if (s == "input") return Tok::KwInput;
        return Tok::Ident;
    }

    void skip_ws_and_comments() {
        while (!at_end()) {
            char c = src_[i_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '/') {
                while (!at_end() && src_[i_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    bool match(char c) {
        if (at_end() || src_[i_] != c) return false;
        advance();
        return true;
    }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    bool at_end() const { return i_ >= src_.size(); }
    SourcePos pos() const { return {line_, col_}; }

    std::string_view src_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace fsdfi
