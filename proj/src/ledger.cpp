// SPDX-License-Identifier: Apache-2.0
#include "agristable/ledger.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "agristable/error.hpp"
#include "decimal.hpp"

namespace agristable::ledger {
namespace {

using Code = LedgerError::Code;
using json = nlohmann::json;

constexpr std::size_t idx(Currency c) { return static_cast<std::size_t>(c); }

Minor checked_add(Minor a, Minor b) {
    Minor out;
    if (__builtin_add_overflow(a, b, &out)) throw LedgerError(Code::invalid_amount, "amount overflows 64-bit minor units");
    return out;
}

void require_positive(Minor amount, std::string_view what) {
    if (amount <= 0) throw LedgerError(Code::invalid_amount, std::string(what) + " must be positive");
}

}  // namespace

std::string_view to_string(Currency c) noexcept { return c == Currency::local_fiat ? "local_fiat" : "stablecoin"; }

std::string_view to_string(Role r) noexcept {
    switch (r) {
        case Role::farmer: return "farmer";
        case Role::buyer: return "buyer";
        case Role::processor: return "processor";
        case Role::cooperative: return "cooperative";
        case Role::insurer_pool: return "insurer_pool";
        case Role::escrow_vault: return "escrow_vault";
        case Role::issuer_reserve: return "issuer_reserve";
        case Role::fee_sink: return "fee_sink";
        case Role::fx_desk: return "fx_desk";
    }
    return "?";
}

std::string_view to_string(OpKind k) noexcept {
    switch (k) {
        case OpKind::open_account: return "open_account";
        case OpKind::mint: return "mint";
        case OpKind::redeem: return "redeem";
        case OpKind::deposit_fiat: return "deposit_fiat";
        case OpKind::transfer: return "transfer";
        case OpKind::fx_convert: return "fx_convert";
    }
    return "?";
}

std::optional<Currency> parse_currency(std::string_view s) noexcept {
    for (auto c : kCurrencies)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) noexcept {
    for (int i = 0; i <= static_cast<int>(Role::fx_desk); ++i)
        if (to_string(static_cast<Role>(i)) == s) return static_cast<Role>(i);
    return std::nullopt;
}

namespace {

std::optional<OpKind> parse_op(std::string_view s) noexcept {
    for (int i = 0; i <= static_cast<int>(OpKind::fx_convert); ++i)
        if (to_string(static_cast<OpKind>(i)) == s) return static_cast<OpKind>(i);
    return std::nullopt;
}

}  // namespace

Minor to_minor_units(double model_amount, double minor_per_model_unit) {
    // nearbyint honours the default round-to-nearest-even mode.
    const double scaled = std::nearbyint(model_amount * minor_per_model_unit);
    if (!std::isfinite(scaled) || std::abs(scaled) > 9.0e18)
        throw LedgerError(Code::invalid_amount, "model amount does not fit in minor units");
    return static_cast<Minor>(scaled);
}

LedgerState::LedgerState() {
    accounts_.emplace(std::string(kIssuer), Account{std::string(kIssuer), Role::issuer_reserve, {}});
    accounts_.emplace(std::string(kFeeSink), Account{std::string(kFeeSink), Role::fee_sink, {}});
    accounts_.emplace(std::string(kFxDesk), Account{std::string(kFxDesk), Role::fx_desk, {}});
}

bool LedgerState::has_account(std::string_view id) const { return accounts_.find(id) != accounts_.end(); }

const Account& LedgerState::account(std::string_view id) const {
    auto it = accounts_.find(id);
    if (it == accounts_.end()) throw LedgerError(Code::unknown_account, "unknown account '" + std::string(id) + "'");
    return it->second;
}

Account& LedgerState::mutable_account(std::string_view id) { return const_cast<Account&>(account(id)); }

Totals LedgerState::totals() const {
    Totals t;
    for (const auto& [id, a] : accounts_) {
        t.local_fiat += a.balance(Currency::local_fiat);
        t.stablecoin += a.balance(Currency::stablecoin);
    }
    t.circulating_stablecoin = circulating_;
    t.reserve_fiat = reserve_fiat_;
    return t;
}

void LedgerState::append(JournalEntry entry) {
    entry.seq = journal_.size();
    entry.totals = totals();
    journal_.push_back(std::move(entry));
}

void LedgerState::open_account(const std::string& id, Role role) {
    if (id.empty()) throw LedgerError(Code::invalid_amount, "account id must not be empty");
    if (has_account(id)) throw LedgerError(Code::duplicate_account, "account '" + id + "' already exists");
    if (role == Role::issuer_reserve || role == Role::fee_sink || role == Role::fx_desk)
        throw LedgerError(Code::duplicate_account, "system role '" + std::string(to_string(role)) + "' already exists");
    accounts_.emplace(id, Account{id, role, {}});
    append({.op = OpKind::open_account, .account = id, .role = role});
}

void LedgerState::mint(const std::string& to, Minor amount) {
    require_positive(amount, "mint amount");
    Account& a = mutable_account(to);
    if (a.role == Role::issuer_reserve) throw LedgerError(Code::invalid_amount, "cannot mint to the issuer");
    const Minor bal = checked_add(a.balances[idx(Currency::stablecoin)], amount);
    const Minor circ = checked_add(circulating_, amount);
    const Minor reserve = checked_add(reserve_fiat_, amount);
    a.balances[idx(Currency::stablecoin)] = bal;
    circulating_ = circ;
    reserve_fiat_ = reserve;
    append({.op = OpKind::mint, .account = to, .currency = Currency::stablecoin, .amount = amount});
}

void LedgerState::redeem(const std::string& from, Minor amount) {
    require_positive(amount, "redeem amount");
    Account& a = mutable_account(from);
    if (a.balances[idx(Currency::stablecoin)] < amount)
        throw LedgerError(Code::insufficient_funds, "account '" + from + "' cannot redeem " + std::to_string(amount));
    a.balances[idx(Currency::stablecoin)] -= amount;
    circulating_ -= amount;
    reserve_fiat_ -= amount;
    append({.op = OpKind::redeem, .account = from, .currency = Currency::stablecoin, .amount = amount});
}

void LedgerState::deposit_fiat(const std::string& to, Minor amount) {
    require_positive(amount, "deposit amount");
    Account& a = mutable_account(to);
    a.balances[idx(Currency::local_fiat)] = checked_add(a.balances[idx(Currency::local_fiat)], amount);
    append({.op = OpKind::deposit_fiat, .account = to, .currency = Currency::local_fiat, .amount = amount});
}

void LedgerState::transfer(const std::string& from, const std::string& to, Minor amount, Minor fee, Currency currency,
                           std::string memo) {
    require_positive(amount, "transfer amount");
    if (fee < 0) throw LedgerError(Code::invalid_amount, "fee must be non-negative");
    const Minor debit = checked_add(amount, fee);
    Account& src = mutable_account(from);
    Account& dst = mutable_account(to);
    Account& sink = mutable_account(kFeeSink);
    if (src.balances[idx(currency)] < debit)
        throw LedgerError(Code::insufficient_funds, "account '" + from + "' holds " +
                                                        std::to_string(src.balances[idx(currency)]) + ", needs " +
                                                        std::to_string(debit));
    // Totals are bounded by the sum of balances, which already fits, so
    // the credits below cannot overflow once the debit is covered.
    src.balances[idx(currency)] -= debit;
    dst.balances[idx(currency)] += amount;
    sink.balances[idx(currency)] += fee;
    append({.op = OpKind::transfer,
            .account = from,
            .counterparty = to,
            .currency = currency,
            .to_currency = currency,
            .amount = amount,
            .fee = fee,
            .memo = std::move(memo)});
}

Minor LedgerState::fx_convert(const std::string& account_id, Currency from, Currency to, Minor amount, double rate,
                              double fee_rate) {
    require_positive(amount, "conversion amount");
    if (from == to) throw LedgerError(Code::unsupported_pair, "conversion needs two distinct currencies");
    if (!(std::isfinite(rate) && rate > 0.0)) throw LedgerError(Code::invalid_amount, "rate must be positive");
    if (!(fee_rate >= 0.0 && fee_rate < 1.0)) throw LedgerError(Code::invalid_amount, "fee_rate must lie in [0, 1)");
    Account& a = mutable_account(account_id);
    Account& desk = mutable_account(kFxDesk);
    if (&a == &desk) throw LedgerError(Code::unsupported_pair, "fx_desk cannot convert against itself");
    if (a.balances[idx(from)] < amount)
        throw LedgerError(Code::insufficient_funds, "account '" + account_id + "' cannot convert " +
                                                        std::to_string(amount));

    long double net_real;
    const auto r = detail::shortest_decimal(rate);
    const auto f = detail::shortest_decimal(fee_rate);
    const auto exact = r && f ? detail::floor_product(amount, {*r, detail::complement(*f)}) : std::nullopt;
    if (exact) {
        net_real = static_cast<long double>(*exact);
    } else {
        const long double gross = static_cast<long double>(amount) * static_cast<long double>(rate);
        net_real = std::floor(gross * (1.0L - static_cast<long double>(fee_rate)));
    }
    if (net_real > static_cast<long double>(std::numeric_limits<Minor>::max()))
        throw LedgerError(Code::invalid_amount, "conversion result overflows");
    const Minor net = static_cast<Minor>(net_real);
    if (desk.balances[idx(to)] < net)
        throw LedgerError(Code::insufficient_funds, "fx_desk lacks " + std::string(to_string(to)) + " liquidity");

    a.balances[idx(from)] -= amount;
    desk.balances[idx(from)] += amount;
    desk.balances[idx(to)] -= net;
    a.balances[idx(to)] += net;
    append({.op = OpKind::fx_convert,
            .account = account_id,
            .currency = from,
            .to_currency = to,
            .amount = amount,
            .credited = net,
            .rate = rate,
            .fee_rate = fee_rate});
    return net;
}

void LedgerState::check_invariants() const {
    Minor circulating = 0;
    for (const auto& [id, a] : accounts_) {
        for (auto c : kCurrencies)
            if (a.balance(c) < 0) throw InvariantError("ledger", "negative balance in '" + id + "'");
        if (a.role != Role::issuer_reserve) circulating += a.balance(Currency::stablecoin);
    }
    if (circulating != circulating_) throw InvariantError("ledger", "circulating supply disagrees with balances");
    if (circulating_ > reserve_fiat_) throw InvariantError("ledger", "stablecoin supply exceeds fiat reserve");
}

LedgerState mint(LedgerState state, const std::string& to, Minor amount) {
    state.mint(to, amount);
    return state;
}

LedgerState transfer(LedgerState state, const std::string& from, const std::string& to, Minor amount, Minor fee,
                     Currency currency) {
    state.transfer(from, to, amount, fee, currency);
    return state;
}

LedgerState fx_convert(LedgerState state, const std::string& account, Currency from, Currency to, Minor amount,
                       double rate, double fee_rate) {
    state.fx_convert(account, from, to, amount, rate, fee_rate);
    return state;
}

LedgerState replay(const std::vector<JournalEntry>& journal) {
    LedgerState s;
    for (const auto& e : journal) {
        if (e.seq != s.journal().size()) throw InvariantError("ledger", "journal sequence gap at " + std::to_string(e.seq));
        switch (e.op) {
            case OpKind::open_account: s.open_account(e.account, e.role); break;
            case OpKind::mint: s.mint(e.account, e.amount); break;
            case OpKind::redeem: s.redeem(e.account, e.amount); break;
            case OpKind::deposit_fiat: s.deposit_fiat(e.account, e.amount); break;
            case OpKind::transfer: s.transfer(e.account, e.counterparty, e.amount, e.fee, e.currency, e.memo); break;
            case OpKind::fx_convert: s.fx_convert(e.account, e.currency, e.to_currency, e.amount, e.rate, e.fee_rate); break;
        }
        if (!(s.journal().back() == e))
            throw InvariantError("ledger", "replayed entry " + std::to_string(e.seq) + " diverges from the journal");
    }
    return s;
}

namespace {

json params_of(const JournalEntry& e) {
    json p = json::object();
    switch (e.op) {
        case OpKind::open_account:
            p["account"] = e.account;
            p["role"] = to_string(e.role);
            break;
        case OpKind::mint:
        case OpKind::redeem:
        case OpKind::deposit_fiat:
            p["account"] = e.account;
            p["amount"] = e.amount;
            break;
        case OpKind::transfer:
            p["from"] = e.account;
            p["to"] = e.counterparty;
            p["currency"] = to_string(e.currency);
            p["amount"] = e.amount;
            p["fee"] = e.fee;
            if (!e.memo.empty()) p["memo"] = e.memo;
            break;
        case OpKind::fx_convert:
            p["account"] = e.account;
            p["from_currency"] = to_string(e.currency);
            p["to_currency"] = to_string(e.to_currency);
            p["amount"] = e.amount;
            p["rate"] = e.rate;
            p["fee_rate"] = e.fee_rate;
            p["credited"] = e.credited;
            break;
    }
    return p;
}

}  // namespace

void write_journal(std::ostream& out, const std::vector<JournalEntry>& journal) {
    for (const auto& e : journal) {
        json line = {
            {"seq", e.seq},
            {"op", to_string(e.op)},
            {"params", params_of(e)},
            {"totals",
             {{"local_fiat", e.totals.local_fiat},
              {"stablecoin", e.totals.stablecoin},
              {"circulating_stablecoin", e.totals.circulating_stablecoin},
              {"reserve_fiat", e.totals.reserve_fiat}}},
        };
        out << line.dump() << '\n';
    }
}

std::vector<JournalEntry> read_journal(std::istream& in) {
    std::vector<JournalEntry> out;
    std::string line;
    auto currency = [](const json& j) {
        auto c = parse_currency(j.get<std::string>());
        if (!c) throw InvariantError("ledger", "unknown currency in journal");
        return *c;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        JournalEntry e;
        e.seq = j.at("seq").get<std::uint64_t>();
        auto op = parse_op(j.at("op").get<std::string>());
        if (!op) throw InvariantError("ledger", "unknown journal op at seq " + std::to_string(e.seq));
        e.op = *op;
        const json& p = j.at("params");
        switch (e.op) {
            case OpKind::open_account: {
                e.account = p.at("account").get<std::string>();
                auto role = parse_role(p.at("role").get<std::string>());
                if (!role) throw InvariantError("ledger", "unknown role in journal");
                e.role = *role;
                break;
            }
            case OpKind::mint:
            case OpKind::redeem:
            case OpKind::deposit_fiat:
                e.account = p.at("account").get<std::string>();
                e.amount = p.at("amount").get<Minor>();
                e.currency = e.op == OpKind::deposit_fiat ? Currency::local_fiat : Currency::stablecoin;
                break;
            case OpKind::transfer:
                e.account = p.at("from").get<std::string>();
                e.counterparty = p.at("to").get<std::string>();
                e.currency = e.to_currency = currency(p.at("currency"));
                e.amount = p.at("amount").get<Minor>();
                e.fee = p.at("fee").get<Minor>();
                e.memo = p.value("memo", std::string{});
                break;
            case OpKind::fx_convert:
                e.account = p.at("account").get<std::string>();
                e.currency = currency(p.at("from_currency"));
                e.to_currency = currency(p.at("to_currency"));
                e.amount = p.at("amount").get<Minor>();
                e.rate = p.at("rate").get<double>();
                e.fee_rate = p.at("fee_rate").get<double>();
                e.credited = p.at("credited").get<Minor>();
                break;
        }
        const json& t = j.at("totals");
        e.totals = {t.at("local_fiat").get<Minor>(), t.at("stablecoin").get<Minor>(),
                    t.at("circulating_stablecoin").get<Minor>(), t.at("reserve_fiat").get<Minor>()};
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace agristable::ledger
