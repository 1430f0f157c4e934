// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agristable::ledger {

/// Money in integer minor units (cents).
using Minor = std::int64_t;

enum class Currency : std::uint8_t { local_fiat = 0, stablecoin = 1 };

inline constexpr std::array<Currency, 2> kCurrencies{Currency::local_fiat, Currency::stablecoin};

enum class Role : std::uint8_t {
    farmer,
    buyer,
    processor,
    cooperative,
    insurer_pool,
    escrow_vault,
    issuer_reserve,
    fee_sink,
    fx_desk,
};

std::string_view to_string(Currency c) noexcept;
std::string_view to_string(Role r) noexcept;
std::optional<Currency> parse_currency(std::string_view s) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;

/// Rounds a model-currency amount to minor units, ties to even.
Minor to_minor_units(double model_amount, double minor_per_model_unit = 1.0);

struct Account {
    std::string id;
    Role role;
    std::array<Minor, 2> balances{};

    Minor balance(Currency c) const noexcept { return balances[static_cast<std::size_t>(c)]; }
    bool operator==(const Account&) const = default;
};

struct Totals {
    Minor local_fiat = 0;
    Minor stablecoin = 0;
    Minor circulating_stablecoin = 0;
    Minor reserve_fiat = 0;

    Minor of(Currency c) const noexcept { return c == Currency::local_fiat ? local_fiat : stablecoin; }
    bool operator==(const Totals&) const = default;
};

enum class OpKind : std::uint8_t { open_account, mint, redeem, deposit_fiat, transfer, fx_convert };

std::string_view to_string(OpKind k) noexcept;

/// One applied operation. Fields not used by `op` keep their defaults.
struct JournalEntry {
    std::uint64_t seq = 0;
    OpKind op = OpKind::open_account;
    std::string account;       // subject: opened, minted to, debited, converting
    std::string counterparty;  // transfer recipient
    Role role = Role::farmer;  // open_account only
    Currency currency = Currency::stablecoin;
    Currency to_currency = Currency::stablecoin;
    Minor amount = 0;
    Minor fee = 0;
    Minor credited = 0;  // fx_convert: net amount received
    double rate = 0.0;
    double fee_rate = 0.0;
    std::string memo;
    Totals totals;

    bool operator==(const JournalEntry&) const = default;
};

/// Two-currency in-memory ledger with a fiat reserve backing every
/// circulating stablecoin unit.
///
/// Every operation validates fully before touching any balance, so a
/// throwing operation leaves the state exactly as it was. The system
/// accounts `issuer`, `fee_sink` and `fx_desk` exist from genesis.
class LedgerState {
public:
    static constexpr std::string_view kIssuer = "issuer";
    static constexpr std::string_view kFeeSink = "fee_sink";
    static constexpr std::string_view kFxDesk = "fx_desk";

    LedgerState();

    void open_account(const std::string& id, Role role);

    /// Fiat is deposited with the issuer and the same number of tokens is
    /// credited to `to`.
    void mint(const std::string& to, Minor amount);

    /// Tokens are burned and the matching fiat leaves the reserve.
    void redeem(const std::string& from, Minor amount);

    /// Local-currency cash-in from outside the ledger.
    void deposit_fiat(const std::string& to, Minor amount);

    /// Sender pays `fee` on top of `amount`; the fee goes to fee_sink.
    void transfer(const std::string& from, const std::string& to, Minor amount, Minor fee = 0,
                  Currency currency = Currency::stablecoin, std::string memo = {});

    /// Converts through fx_desk at `rate` (price of one `from` unit in
    /// `to` units). The account receives floor(amount * rate * (1 - fee_rate));
    /// the desk keeps the spread. Returns the credited amount.
    Minor fx_convert(const std::string& account, Currency from, Currency to, Minor amount, double rate,
                     double fee_rate);

    bool has_account(std::string_view id) const;
    const Account& account(std::string_view id) const;
    Minor balance(std::string_view id, Currency c) const { return account(id).balance(c); }
    const std::map<std::string, Account, std::less<>>& accounts() const noexcept { return accounts_; }

    Minor circulating_stablecoin() const noexcept { return circulating_; }
    Minor reserve_fiat() const noexcept { return reserve_fiat_; }
    Totals totals() const;
    const std::vector<JournalEntry>& journal() const noexcept { return journal_; }

    /// Recomputes every derived quantity from balances and throws
    /// InvariantError on any mismatch.
    void check_invariants() const;

    bool operator==(const LedgerState&) const = default;

private:
    Account& mutable_account(std::string_view id);
    void append(JournalEntry entry);

    std::map<std::string, Account, std::less<>> accounts_;
    Minor circulating_ = 0;
    Minor reserve_fiat_ = 0;
    std::vector<JournalEntry> journal_;
};

// Value-style wrappers: each returns a new state and leaves the input alone.
LedgerState mint(LedgerState state, const std::string& to, Minor amount);
LedgerState transfer(LedgerState state, const std::string& from, const std::string& to, Minor amount, Minor fee = 0,
                     Currency currency = Currency::stablecoin);
LedgerState fx_convert(LedgerState state, const std::string& account, Currency from, Currency to, Minor amount,
                       double rate, double fee_rate);

/// Rebuilds a ledger by re-applying `journal` to a fresh genesis state.
/// Throws if any recorded totals disagree with the replayed ones.
LedgerState replay(const std::vector<JournalEntry>& journal);

/// Line-delimited JSON, one entry per line:
/// {"seq":..,"op":..,"params":{..},"totals":{..}}
void write_journal(std::ostream& out, const std::vector<JournalEntry>& journal);
std::vector<JournalEntry> read_journal(std::istream& in);

}  // namespace agristable::ledger
