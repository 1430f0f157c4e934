// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace agristable {

/// Base for every error raised by the toolkit. `module()` names the
/// subsystem that raised it so front ends can report context.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A value that violates a type invariant at construction time.
class InvariantError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class LedgerError : public Error {
public:
    enum class Code { unknown_account, duplicate_account, insufficient_funds, invalid_amount, unsupported_pair };

    LedgerError(Code code, const std::string& what) : Error("ledger", what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class ContractError : public Error {
public:
    enum class Code {
        invalid_terms,
        unknown_party,
        wrong_state,
        insufficient_funds,
        unauthorized_oracle,
        past_deadline,
        region_mismatch,
        incomplete_coverage,
        duplicate_policy,
        already_settled,
        window_open,
        missing_series,
    };

    ContractError(Code code, const std::string& what) : Error("contracts", what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class SettlementError : public Error {
public:
    enum class Code { invalid_input, uneconomic_trade, misconfigured_rails };

    SettlementError(Code code, const std::string& what) : Error("settlement_sim", what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Malformed or invalid scenario configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace agristable
