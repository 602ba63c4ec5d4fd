#pragma once

#include <stdexcept>
#include <string>

namespace hybridfpca {

enum class ErrorKind {
    InvalidGrid,
    Shape,
    InsufficientSubjects,
    InvalidData,
    InvalidConfig,
    NumericalFailure,
    IllPosedFit,
    UndefinedCorrelation,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace hybridfpca
