#ifndef CCSIM_ERRORS_HPP
#define CCSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ccsim {

// Caller passed a value outside an operation's documented domain.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A closed-form expression was evaluated outside the popularity regime
// it is valid for (e.g. the flat-regime cutoff with alpha >= 1).
class wrong_regime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The exact solver was handed a graph above its vertex cap.
class size_limit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Projected problem size exceeds the configured memory guard.
class sizing_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An API contract was broken (improper coloring handed to encode, ...).
class contract_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A codeword class could not be resolved against a user's cache. With a
// proper coloring this must never fire.
class decode_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ccsim

#endif
