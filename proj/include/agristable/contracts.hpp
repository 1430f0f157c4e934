// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agristable/ledger.hpp"

namespace agristable::contracts {

using ledger::LedgerState;
using ledger::Minor;

/// Simulation calendar day for escrow deadlines.
using SimDay = std::int64_t;

// ---------------------------------------------------------------------------
// Purchase-order escrow
// ---------------------------------------------------------------------------

enum class EscrowState : std::uint8_t { created, funded, delivered, released, refunded };

std::string_view to_string(EscrowState s) noexcept;

inline bool is_terminal(EscrowState s) noexcept { return s == EscrowState::released || s == EscrowState::refunded; }

struct PurchaseOrder {
    std::string id;
    std::string buyer;
    std::string seller;
    Minor price = 0;  // stablecoin minor units
    double quantity_ordered = 0.0;
    std::string quality_spec;
    SimDay deadline = 0;
    std::string oracle_id;

    /// Terms-only checks; throws ContractError(invalid_terms).
    void validate() const;
    bool operator==(const PurchaseOrder&) const = default;
};

struct OracleAttestation {
    std::string contract_id;
    double measured_quantity = 0.0;
    bool quality_pass = false;
    SimDay timestamp = 0;
    std::string oracle_id;

    bool operator==(const OracleAttestation&) const = default;
};

enum class SettleResult : std::uint8_t { released, refunded, pending };

std::string_view to_string(SettleResult r) noexcept;

/// Escrow for one purchase order. Legal edges:
///   created -> funded -> delivered -> released
///   funded | delivered -> refunded
/// The price leaves the vault at most once, to the seller or the buyer.
class EscrowContract {
public:
    const PurchaseOrder& terms() const noexcept { return terms_; }
    const std::string& vault() const noexcept { return vault_; }
    EscrowState state() const noexcept { return state_; }
    const std::optional<OracleAttestation>& attestation() const noexcept { return attestation_; }

    bool operator==(const EscrowContract&) const = default;

private:
    friend EscrowContract create_escrow(const LedgerState&, PurchaseOrder, std::string);
    friend void fund_escrow(LedgerState&, EscrowContract&);
    friend void submit_attestation(EscrowContract&, const OracleAttestation&);
    friend SettleResult settle_escrow(LedgerState&, EscrowContract&, SimDay);

    EscrowContract(PurchaseOrder terms, std::string vault) : terms_(std::move(terms)), vault_(std::move(vault)) {}

    PurchaseOrder terms_;
    std::string vault_;
    EscrowState state_ = EscrowState::created;
    std::optional<OracleAttestation> attestation_;
};

/// Registers the order; no money moves. `vault` must be an escrow_vault account.
EscrowContract create_escrow(const LedgerState& ledger, PurchaseOrder order, std::string vault = "escrow_vault");

/// Moves the price from buyer to vault.
void fund_escrow(LedgerState& ledger, EscrowContract& contract);

/// Records the registered oracle's delivery report.
void submit_attestation(EscrowContract& contract, const OracleAttestation& attestation);

/// All-or-nothing settlement: full release iff the attested quantity covers
/// the order and quality passed; otherwise refund. A funded contract without
/// an attestation refunds once `now` is past the deadline and is pending before.
SettleResult settle_escrow(LedgerState& ledger, EscrowContract& contract, SimDay now);

// ---------------------------------------------------------------------------
// Parametric rainfall insurance
// ---------------------------------------------------------------------------

using Date = std::chrono::sys_days;

std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

/// Pays `payout` when cumulative rainfall over [window_start, window_end]
/// (both ends inclusive) is strictly below threshold_mm.
struct InsurancePolicy {
    std::string id;
    std::string holder;
    std::string region;
    Date window_start;
    Date window_end;
    double threshold_mm = 0.0;
    Minor payout = 0;
    Minor premium = 0;

    /// Throws ContractError(invalid_terms) on any invariant violation.
    void validate() const;
    bool operator==(const InsurancePolicy&) const = default;
};

class RainfallSeries {
public:
    struct Observation {
        Date date;
        double mm;
        bool operator==(const Observation&) const = default;
    };

    /// Dates must be strictly increasing and readings non-negative.
    RainfallSeries(std::string region, std::vector<Observation> observations);

    const std::string& region() const noexcept { return region_; }
    const std::vector<Observation>& observations() const noexcept { return observations_; }

    bool operator==(const RainfallSeries&) const = default;

private:
    std::string region_;
    std::vector<Observation> observations_;
};

/// Parses `date,mm` CSV with ISO-8601 dates.
RainfallSeries read_rainfall_csv(std::istream& in, std::string region);

/// Loads a series from disk; the region defaults to the file stem.
RainfallSeries load_rainfall_csv(const std::filesystem::path& path, std::optional<std::string> region = std::nullopt);

struct PayoutLine {
    std::string policy_id;
    bool triggered;
    Minor paid;
};

struct PayoutReport {
    std::vector<PayoutLine> lines;
    Minor pool_balance_before = 0;
    Minor total_intended = 0;
    Minor total_paid = 0;
};

class PremiumPool {
public:
    explicit PremiumPool(std::string pool_account) : pool_account_(std::move(pool_account)) {}

    const std::string& pool_account() const noexcept { return pool_account_; }
    const std::vector<InsurancePolicy>& policies() const noexcept { return policies_; }
    bool settled() const noexcept { return settled_; }

    bool operator==(const PremiumPool&) const = default;

private:
    friend void issue_policy(LedgerState&, PremiumPool&, InsurancePolicy);
    friend PayoutReport execute_payouts(LedgerState&, PremiumPool&, const std::map<std::string, RainfallSeries>&,
                                               Date);

    std::string pool_account_;
    std::vector<InsurancePolicy> policies_;
    bool settled_ = false;
};

/// Collects the premium from the holder into the pool and registers the policy.
void issue_policy(LedgerState& ledger, PremiumPool& pool, InsurancePolicy policy);

/// Throws region_mismatch or incomplete_coverage rather than guess.
bool evaluate_trigger(const InsurancePolicy& policy, const RainfallSeries& series);

/// Settles the pool once every window has closed. When triggered payouts
/// exceed the pool balance each is scaled by balance / total and floored.
PayoutReport execute_payouts(LedgerState& ledger, PremiumPool& pool,
                             const std::map<std::string, RainfallSeries>& series_by_region, Date now);

/// `policy_id,triggered,paid_minor_units`
void write_payout_csv(std::ostream& out, const PayoutReport& report);

}  // namespace agristable::contracts
