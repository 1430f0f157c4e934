// SPDX-License-Identifier: Apache-2.0
#include "agristable/contracts.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "agristable/error.hpp"

namespace agristable::contracts {
namespace {

using Code = ContractError::Code;
__extension__ using Wide = __int128;

[[noreturn]] void fail(Code code, const std::string& what) { throw ContractError(code, what); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view to_string(EscrowState s) noexcept {
    switch (s) {
        case EscrowState::created: return "Created";
        case EscrowState::funded: return "Funded";
        case EscrowState::delivered: return "Delivered";
        case EscrowState::released: return "Released";
        case EscrowState::refunded: return "Refunded";
    }
    return "?";
}

std::string_view to_string(SettleResult r) noexcept {
    switch (r) {
        case SettleResult::released: return "released";
        case SettleResult::refunded: return "refunded";
        case SettleResult::pending: return "pending";
    }
    return "?";
}

void PurchaseOrder::validate() const {
    if (id.empty()) fail(Code::invalid_terms, "purchase order needs an id");
    if (price <= 0) fail(Code::invalid_terms, "purchase order price must be positive");
    if (!(std::isfinite(quantity_ordered) && quantity_ordered > 0.0))
        fail(Code::invalid_terms, "purchase order quantity must be positive");
    if (oracle_id.empty()) fail(Code::invalid_terms, "purchase order needs a registered oracle");
}

EscrowContract create_escrow(const LedgerState& ledger, PurchaseOrder order, std::string vault) {
    order.validate();
    for (const auto* party : {&order.buyer, &order.seller})
        if (!ledger.has_account(*party)) fail(Code::unknown_party, "unknown party '" + *party + "'");
    if (order.buyer == order.seller) fail(Code::invalid_terms, "buyer and seller must differ");
    if (!ledger.has_account(vault) || ledger.account(vault).role != ledger::Role::escrow_vault)
        fail(Code::unknown_party, "'" + vault + "' is not an escrow vault");
    return EscrowContract(std::move(order), std::move(vault));
}

void fund_escrow(LedgerState& ledger, EscrowContract& contract) {
    const auto& t = contract.terms_;
    if (contract.state_ != EscrowState::created)
        fail(Code::wrong_state, "cannot fund contract '" + t.id + "' in state " + std::string(to_string(contract.state_)));
    if (ledger.balance(t.buyer, ledger::Currency::stablecoin) < t.price)
        fail(Code::insufficient_funds, "buyer '" + t.buyer + "' cannot cover price of contract '" + t.id + "'");
    ledger.transfer(t.buyer, contract.vault_, t.price, 0, ledger::Currency::stablecoin, t.id + ":fund");
    contract.state_ = EscrowState::funded;
}

void submit_attestation(EscrowContract& contract, const OracleAttestation& attestation) {
    const auto& t = contract.terms_;
    if (contract.state_ != EscrowState::funded)
        fail(Code::wrong_state, "contract '" + t.id + "' cannot accept an attestation in state " +
                                    std::string(to_string(contract.state_)));
    if (attestation.contract_id != t.id) fail(Code::invalid_terms, "attestation is for a different contract");
    if (attestation.oracle_id != t.oracle_id)
        fail(Code::unauthorized_oracle, "oracle '" + attestation.oracle_id + "' is not registered for '" + t.id + "'");
    if (!(std::isfinite(attestation.measured_quantity) && attestation.measured_quantity >= 0.0))
        fail(Code::invalid_terms, "measured quantity must be non-negative");
    if (attestation.timestamp > t.deadline) fail(Code::past_deadline, "attestation arrived after the deadline");
    contract.attestation_ = attestation;
    contract.state_ = EscrowState::delivered;
}

SettleResult settle_escrow(LedgerState& ledger, EscrowContract& contract, SimDay now) {
    const auto& t = contract.terms_;
    auto pay = [&](const std::string& to, const char* tag, EscrowState next) {
        ledger.transfer(contract.vault_, to, t.price, 0, ledger::Currency::stablecoin, t.id + tag);
        contract.state_ = next;
    };

    switch (contract.state_) {
        case EscrowState::delivered: {
            const auto& a = *contract.attestation_;
            if (a.quality_pass && a.measured_quantity >= t.quantity_ordered) {
                pay(t.seller, ":release", EscrowState::released);
                return SettleResult::released;
            }
            pay(t.buyer, ":refund", EscrowState::refunded);
            return SettleResult::refunded;
        }
        case EscrowState::funded:
            if (now <= t.deadline) return SettleResult::pending;
            pay(t.buyer, ":refund", EscrowState::refunded);
            return SettleResult::refunded;
        default:
            fail(Code::wrong_state,
                 "cannot settle contract '" + t.id + "' in state " + std::string(to_string(contract.state_)));
    }
}

// ---------------------------------------------------------------------------

std::optional<Date> parse_iso_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len, int& out) {
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        return ec == std::errc{} && ptr == text.data() + pos + len;
    };
    int y = 0, m = 0, d = 0;
    if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

void InsurancePolicy::validate() const {
    if (id.empty()) fail(Code::invalid_terms, "policy needs an id");
    if (!(window_start < window_end)) fail(Code::invalid_terms, "policy '" + id + "' window must start before it ends");
    if (!(std::isfinite(threshold_mm) && threshold_mm > 0.0))
        fail(Code::invalid_terms, "policy '" + id + "' threshold must be positive");
    if (payout <= 0) fail(Code::invalid_terms, "policy '" + id + "' payout must be positive");
    if (premium < 0) fail(Code::invalid_terms, "policy '" + id + "' premium must be non-negative");
}

RainfallSeries::RainfallSeries(std::string region, std::vector<Observation> observations)
    : region_(std::move(region)), observations_(std::move(observations)) {
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& o = observations_[i];
        if (!(std::isfinite(o.mm) && o.mm >= 0.0))
            throw InvariantError("contracts", "rainfall on " + format_iso_date(o.date) + " must be non-negative");
        if (i > 0 && !(observations_[i - 1].date < o.date))
            throw InvariantError("contracts", "rainfall dates must be strictly increasing at " + format_iso_date(o.date));
    }
}

RainfallSeries read_rainfall_csv(std::istream& in, std::string region) {
    std::string line;
    std::size_t line_no = 0;
    auto bad = [&](const std::string& what) -> InvariantError {
        return InvariantError("contracts", "rainfall line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) throw InvariantError("contracts", "rainfall file is empty");
    ++line_no;
    if (trim(line) != "date,mm") throw bad("expected header 'date,mm'");

    std::vector<RainfallSeries::Observation> obs;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) throw bad("expected 'date,mm'");
        const auto date = parse_iso_date(row.substr(0, comma));
        if (!date) throw bad("invalid ISO-8601 date");
        const std::string_view num = trim(row.substr(comma + 1));
        double mm = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), mm);
        if (ec != std::errc{} || ptr != num.data() + num.size()) throw bad("invalid millimetre value");
        obs.push_back({*date, mm});
    }
    return RainfallSeries(std::move(region), std::move(obs));
}

RainfallSeries load_rainfall_csv(const std::filesystem::path& path, std::optional<std::string> region) {
    std::ifstream in(path);
    if (!in) throw InvariantError("contracts", "cannot open rainfall file " + path.string());
    return read_rainfall_csv(in, region ? *region : path.stem().string());
}

void issue_policy(LedgerState& ledger, PremiumPool& pool, InsurancePolicy policy) {
    if (pool.settled_) fail(Code::already_settled, "pool is already settled");
    policy.validate();
    for (const auto& p : pool.policies_)
        if (p.id == policy.id) fail(Code::duplicate_policy, "duplicate policy id '" + policy.id + "'");
    if (!ledger.has_account(policy.holder)) fail(Code::unknown_party, "unknown holder '" + policy.holder + "'");
    if (!ledger.has_account(pool.pool_account_) || ledger.account(pool.pool_account_).role != ledger::Role::insurer_pool)
        fail(Code::unknown_party, "'" + pool.pool_account_ + "' is not an insurer pool account");
    if (ledger.balance(policy.holder, ledger::Currency::stablecoin) < policy.premium)
        fail(Code::insufficient_funds, "holder '" + policy.holder + "' cannot pay the premium");
    if (policy.premium > 0)
        ledger.transfer(policy.holder, pool.pool_account_, policy.premium, 0, ledger::Currency::stablecoin,
                        policy.id + ":premium");
    pool.policies_.push_back(std::move(policy));
}

bool evaluate_trigger(const InsurancePolicy& policy, const RainfallSeries& series) {
    if (series.region() != policy.region)
        fail(Code::region_mismatch, "series region '" + series.region() + "' does not match policy region '" +
                                        policy.region + "'");
    const auto expected_days = (policy.window_end - policy.window_start).count() + 1;
    long covered = 0;
    double total = 0.0;
    for (const auto& o : series.observations()) {
        if (o.date < policy.window_start || o.date > policy.window_end) continue;
        ++covered;
        total += o.mm;
    }
    if (covered != expected_days)
        fail(Code::incomplete_coverage, "rainfall for region '" + policy.region + "' covers " +
                                            std::to_string(covered) + " of " + std::to_string(expected_days) +
                                            " days in policy '" + policy.id + "' window");
    return total < policy.threshold_mm;
}

PayoutReport execute_payouts(LedgerState& ledger, PremiumPool& pool,
                             const std::map<std::string, RainfallSeries>& series_by_region, Date now) {
    if (pool.settled_) fail(Code::already_settled, "pool is already settled");
    for (const auto& p : pool.policies_)
        if (now < p.window_end) fail(Code::window_open, "policy '" + p.id + "' window has not closed");

    // Evaluate every trigger before any money moves.
    PayoutReport report;
    report.pool_balance_before = ledger.balance(pool.pool_account_, ledger::Currency::stablecoin);
    std::vector<bool> triggered;
    triggered.reserve(pool.policies_.size());
    for (const auto& p : pool.policies_) {
        auto it = series_by_region.find(p.region);
        if (it == series_by_region.end()) fail(Code::missing_series, "no rainfall series for region '" + p.region + "'");
        const bool hit = evaluate_trigger(p, it->second);
        triggered.push_back(hit);
        if (hit) report.total_intended += p.payout;
    }

    const Minor balance = report.pool_balance_before;
    const bool shortfall = report.total_intended > balance;
    for (std::size_t i = 0; i < pool.policies_.size(); ++i) {
        const auto& p = pool.policies_[i];
        Minor paid = 0;
        if (triggered[i]) {
            paid = shortfall ? static_cast<Minor>(static_cast<Wide>(p.payout) * balance / report.total_intended)
                             : p.payout;
        }
        report.lines.push_back({p.id, triggered[i], paid});
        report.total_paid += paid;
    }
    for (std::size_t i = 0; i < report.lines.size(); ++i) {
        const auto& line = report.lines[i];
        if (line.paid > 0)
            ledger.transfer(pool.pool_account_, pool.policies_[i].holder, line.paid, 0, ledger::Currency::stablecoin,
                            line.policy_id + ":payout");
    }
    pool.settled_ = true;
    return report;
}

void write_payout_csv(std::ostream& out, const PayoutReport& report) {
    out << "policy_id,triggered,paid_minor_units\n";
    for (const auto& l : report.lines) out << l.policy_id << ',' << (l.triggered ? "true" : "false") << ',' << l.paid << '\n';
}

}  // namespace agristable::contracts
