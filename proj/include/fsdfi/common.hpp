#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fsdfi {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kTableSchemaVersion = 1;

// 1-based source coordinates; {0,0} means "no position".
struct SourcePos {
    int line = 0;
    int col = 0;

    bool valid() const { return line > 0; }
    bool operator==(const SourcePos&) const = default;
};

inline std::string to_string(SourcePos p) {
    std::ostringstream os;
    os << p.line << ':' << p.col;
    return os.str();
}

enum class ErrorKind {
    Parse,
    Type,
    Layout,
    Lowering,
    Ir,
    Config,
    Corpus,
    Metrics,
    TableMismatch,
    Io,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Type: return "type error";
        case ErrorKind::Layout: return "layout error";
        case ErrorKind::Lowering: return "lowering error";
        case ErrorKind::Ir: return "ir error";
        case ErrorKind::Config: return "config error";
        case ErrorKind::Corpus: return "corpus error";
        case ErrorKind::Metrics: return "metrics error";
        case ErrorKind::TableMismatch: return "table mismatch";
        case ErrorKind::Io: return "io error";
    }
    return "error";
}

// Every compile-time failure in the pipeline carries its kind and, when
// known, the source position it refers to.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, SourcePos pos, const std::string& message)
        : std::runtime_error(format(kind, pos, message)),
          kind_(kind),
          pos_(pos),
          message_(message) {}

    Error(ErrorKind kind, const std::string& message) : Error(kind, SourcePos{}, message) {}

    ErrorKind kind() const { return kind_; }
    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    static std::string format(ErrorKind kind, SourcePos pos, const std::string& message) {
        std::ostringstream os;
        if (pos.valid()) os << pos.line << ':' << pos.col << ": ";
        os << error_kind_name(kind) << ": " << message;
        return os.str();
    }

    ErrorKind kind_;
    SourcePos pos_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, SourcePos pos, const std::string& message) {
    throw Error(kind, pos, message);
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

// FNV-1a, used to fingerprint the textual IR so run-time tables can be
// matched against the exact program they were computed for.
inline uint64_t fnv1a(std::string_view data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (int i = 60; i >= 0; i -= 4) s.push_back(digits[(h >> i) & 0xf]);
    return s;
}

}  // namespace fsdfi
