#pragma once

#include <stdexcept>
#include <string>

namespace mecsim {

/// Invalid or unparsable configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain (zero distance, over-speed, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A transmission leg with zero or negative rate.
class InfeasibleLinkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An action that breaks the per-slot offloading constraints.
class InfeasibleActionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Selection was asked to choose from an empty candidate set.
class NoFeasibleActionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state component could not be encoded (NaN or infinite).
class EncodingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal bookkeeping broke an invariant that should hold by construction.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace mecsim
