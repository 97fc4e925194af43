#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lspart {

/// Broad failure category; the C API and CLI map these onto status codes.
enum class ErrorKind { input, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad user input: malformed sample, invalid options, sizes that cannot be fit.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// A point lies outside the closed support box of a partition.
class OutOfSupportError : public InputError {
public:
    explicit OutOfSupportError(const std::string& what) : InputError(what) {}
};

/// A computation broke down (non-finite intermediate, failed factorization).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Collects non-fatal conditions (collapsed knots, rank deficiency, capped weights).
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
    void merge(const Diagnostics& other) {
        warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
    }
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag != nullptr) diag->warn(std::move(message));
}

/// Per-dimension derivative orders q = (q_1, ..., q_d).
using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& q) {
    int s = 0;
    for (int v : q) s += v;
    return s;
}

} // namespace lspart
