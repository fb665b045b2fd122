#pragma once

#include <stdexcept>
#include <string>

namespace resdist {

/// Malformed input files, unknown ids, violated preconditions on user data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric arguments or a computation that cannot be carried out
/// (non-positive distances, out-of-range cluster counts, size caps).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was applied to a graph in the wrong state, e.g. weighting
/// an unpruned graph by degree.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The two poles (or a set of papers) do not share a connected component,
/// so the resistance between them is infinite.
class DisconnectedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace resdist
