// Error types thrown by the ghzv library.

#pragma once

#include <stdexcept>
#include <string>

namespace ghzv {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapExceeded : Error {
    explicit CapExceeded(const std::string& msg) : Error(msg) {}
};

struct NotHermitian : Error {
    explicit NotHermitian(const std::string& msg) : Error(msg) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string& msg) : Error(msg) {}
};

struct OddYSet : Error {
    explicit OddYSet(const std::string& msg) : Error(msg) {}
};

struct NotOddPrime : Error {
    explicit NotOddPrime(const std::string& msg) : Error(msg) {}
};

struct BadResidue : Error {
    explicit BadResidue(const std::string& msg) : Error(msg) {}
};

struct NotUnbiased : Error {
    explicit NotUnbiased(const std::string& msg) : Error(msg) {}
};

struct POutOfRange : Error {
    explicit POutOfRange(const std::string& msg) : Error(msg) {}
};

struct BetaOutOfRange : Error {
    explicit BetaOutOfRange(const std::string& msg) : Error(msg) {}
};

struct MTooSmall : Error {
    explicit MTooSmall(const std::string& msg) : Error(msg) {}
};

struct NotHomogeneous : Error {
    explicit NotHomogeneous(const std::string& msg) : Error(msg) {}
};

struct ResultOutOfRange : Error {
    explicit ResultOutOfRange(const std::string& msg) : Error(msg) {}
};

}  // namespace ghzv
