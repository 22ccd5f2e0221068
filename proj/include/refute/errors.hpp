#pragma once

#include <stdexcept>
#include <string>

namespace refute {

// Exit-code mapping in the CLI: DataError/ConfigError -> 2, WeakIdentification -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class WeakIdentification : public Error {
public:
    WeakIdentification(const std::string& what, double mass)
        : Error(what), mass_(mass) {}
    double mass() const { return mass_; }

private:
    double mass_;
};

// Internal invariant broken (LP disagreement, infeasible polyhedron, ...).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace refute
