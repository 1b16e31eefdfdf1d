#ifndef SKPCA_ERROR_HPP
#define SKPCA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace skpca {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand lengths disagree (dot products, matrix-vector products).
class DimensionError : public Error {
public:
    using Error::Error;
};

// A value violates an operation's precondition (non-finite, zero, out of range).
class InputError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A non-finite intermediate appeared while stepping a stream.
class NumericError : public Error {
public:
    using Error::Error;
};

// The stream carries no energy at all (λ₁ of the second moment is zero).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// A bound was checked on a trajectory that does not meet its hypothesis.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed trajectory or config file. offset() is the byte offset of the
// first offending character.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace skpca

#endif  // SKPCA_ERROR_HPP
