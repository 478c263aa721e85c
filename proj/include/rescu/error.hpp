#pragma once

#include <stdexcept>
#include <string>

namespace rescu {

// Library error taxonomy. The CLI maps each code to a distinct exit status,
// so throwing sites pick the code that names the failed contract.
enum class ErrorCode {
    io,            // missing/unreadable file
    parse,         // malformed JSON / unsupported schema / bad raster
    validation,    // input violates a documented invariant
    degenerate,    // geometric degeneracy (coincident points, zero spans)
    insufficient,  // not enough input items for the operation
    no_consensus,  // robust estimation found no acceptable model
    unsupported,   // documented out-of-scope request
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace rescu
