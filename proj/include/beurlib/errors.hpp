#pragma once

#include <stdexcept>
#include <string>

namespace beurlib {

struct InvalidDomain : std::runtime_error {
    explicit InvalidDomain(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the domain-spec JSON loader; `where` is a line marker for syntax
// errors or a field path for schema errors.
struct DomainParseError : std::runtime_error {
    std::string where;
    DomainParseError(const std::string& where_, const std::string& what)
        : std::runtime_error(where_ + ": " + what), where(where_) {}
};

struct EmptyDomain : std::runtime_error {
    explicit EmptyDomain(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedDomain : std::runtime_error {
    explicit UnsupportedDomain(const std::string& what) : std::runtime_error(what) {}
};

struct BadExponents : std::runtime_error {
    explicit BadExponents(const std::string& what) : std::runtime_error(what) {}
};

struct UnresolvedScale : std::runtime_error {
    explicit UnresolvedScale(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateInput : std::runtime_error {
    explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateArc : std::runtime_error {
    explicit DegenerateArc(const std::string& what) : std::runtime_error(what) {}
};

struct WindowOutOfRange : std::runtime_error {
    explicit WindowOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct OnBoundary : std::runtime_error {
    explicit OnBoundary(const std::string& what) : std::runtime_error(what) {}
};

struct EpsilonTooLarge : std::runtime_error {
    explicit EpsilonTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExhausted : std::runtime_error {
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace beurlib
