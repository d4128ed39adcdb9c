#ifndef WGSPEC_ERRORS_HPP
#define WGSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wgspec {

/// Base class for all library errors. `module_tag` names the subsystem that
/// raised the error so the CLI can report it in machine-readable form.
class Error : public std::runtime_error {
public:
    Error(std::string module_tag, const std::string& what)
        : std::runtime_error("[" + module_tag + "] " + what), module_(std::move(module_tag)) {}
    const std::string& module_tag() const { return module_; }

private:
    std::string module_;
};

/// Bad user input: config files, expressions, out-of-range arguments. Exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: factorization breakdown, non-convergence, violated
/// coercivity or compatibility. Exit code 3.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Refused to start a run that would exceed the desk-scale resource budget.
/// Exit code 4.
class ResourceError : public Error {
public:
    using Error::Error;
};

} // namespace wgspec

#endif
