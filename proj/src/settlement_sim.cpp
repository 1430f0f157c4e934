// SPDX-License-Identifier: Apache-2.0
#include "agristable/settlement_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "agristable/error.hpp"
#include "agristable/format.hpp"
#include "decimal.hpp"

namespace agristable::settlement {
namespace {

using Code = SettlementError::Code;

std::int64_t unit_minutes(TimeUnit u) { return u == TimeUnit::days ? kMinutesPerDay : 1; }

[[noreturn]] void invariant(const std::string& what) { throw InvariantError("settlement_sim", what); }

Minor flat_fees(const RailSpec& r) { return r.fixed_instrument_cost + r.hops * r.per_hop_fee + r.network_fee; }

}  // namespace

std::string_view to_string(RailKind k) noexcept { return k == RailKind::traditional ? "traditional" : "stablecoin"; }

std::string_view to_string(TimeUnit u) noexcept { return u == TimeUnit::days ? "days" : "minutes"; }

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::initiated: return "initiated";
        case EventKind::payment_sent: return "payment_sent";
        case EventKind::hop_cleared: return "hop_cleared";
        case EventKind::fx_converted: return "fx_converted";
        case EventKind::funds_available: return "funds_available";
    }
    return "?";
}

std::int64_t DelaySpec::quantile_minutes(double u) const {
    if (kind == Kind::constant) return low * unit_minutes(unit);
    const std::int64_t span = high - low + 1;
    const auto step = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(u * static_cast<double>(span))), span - 1);
    return (low + step) * unit_minutes(unit);
}

std::int64_t DelaySpec::min_minutes() const { return low * unit_minutes(unit); }

std::int64_t DelaySpec::max_minutes() const { return (kind == Kind::constant ? low : high) * unit_minutes(unit); }

void RailSpec::validate() const {
    if (delay.low < 0) invariant("settlement delay must be non-negative");
    if (delay.kind == DelaySpec::Kind::uniform_int && delay.high < delay.low)
        invariant("uniform delay needs low <= high");
    if (!(fx_fee_rate >= 0.0 && fx_fee_rate < 1.0)) invariant("fx_fee_rate must lie in [0, 1)");
    if (hops < 0) invariant("hops must be non-negative");
    if (per_hop_fee < 0 || fixed_instrument_cost < 0 || network_fee < 0) invariant("rail fees must be non-negative");
    if (kind == RailKind::stablecoin && hops != 0) invariant("a stablecoin rail has no intermediary hops");
}

bool rails_ordered(const RailSpec& cheaper, const RailSpec& dearer) {
    return flat_fees(cheaper) <= flat_fees(dearer) && cheaper.fx_fee_rate <= dearer.fx_fee_rate &&
           cheaper.delay.max_minutes() <= dearer.delay.min_minutes();
}

TradeResult simulate_trade(const RailSpec& rail, Minor invoice, RandomStream& rng, std::uint64_t trade_id) {
    rail.validate();
    if (invoice <= 0) throw SettlementError(Code::invalid_input, "invoice must be positive");

    const Minor fx_fee = static_cast<Minor>(detail::floor_scaled(invoice, rail.fx_fee_rate));
    const Minor total_fees = flat_fees(rail) + fx_fee;
    // Drawn before the economics check so the stream position does not
    // depend on whether the trade is excluded.
    const std::int64_t delay = rail.delay.quantile_minutes(rng.uniform());
    if (total_fees > invoice)
        throw SettlementError(Code::uneconomic_trade, "uneconomic trade: fees " + std::to_string(total_fees) +
                                                          " exceed invoice " + std::to_string(invoice));

    TradeResult r;
    auto emit = [&](std::int64_t t, EventKind k, Minor amount, Minor fee) {
        r.events.push_back({r.events.size(), t, k, trade_id, amount, fee});
    };
    emit(0, EventKind::initiated, invoice, rail.fixed_instrument_cost);
    emit(0, EventKind::payment_sent, 0, rail.network_fee);
    for (std::int64_t h = 1; h <= rail.hops; ++h) emit(delay * h / (rail.hops + 1), EventKind::hop_cleared, 0, rail.per_hop_fee);
    if (rail.fx_fee_rate > 0.0) emit(delay, EventKind::fx_converted, 0, fx_fee);
    emit(delay, EventKind::funds_available, invoice - total_fees, 0);

    r.outcome = replay_trade(r.events);
    return r;
}

SettlementOutcome replay_trade(std::span<const TradeEvent> events) {
    if (events.empty() || events.front().kind != EventKind::initiated || events.back().kind != EventKind::funds_available)
        invariant("trade events must run from initiated to funds_available");
    SettlementOutcome o{events.front().trade_id, events.front().amount, 0, 0, 0, 0.0};
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.trade_id != o.trade_id) invariant("trade events mix trade ids");
        if (i > 0) {
            const auto& prev = events[i - 1];
            if (e.seq <= prev.seq || e.time_minutes < prev.time_minutes || e.kind < prev.kind)
                invariant("trade events out of pipeline order");
        }
        o.total_fees += e.fee;
    }
    o.proceeds = events.back().amount;
    o.delay_minutes = events.back().time_minutes - events.front().time_minutes;
    o.working_capital_days = static_cast<double>(o.delay_minutes) / static_cast<double>(kMinutesPerDay);
    if (o.proceeds != o.invoice - o.total_fees) invariant("proceeds do not equal invoice minus fees");
    return o;
}

Minor InvoiceDistribution::quantile(double u) const {
    if (kind == Kind::fixed) return low;
    const Minor span = high - low + 1;
    return low + std::min<Minor>(static_cast<Minor>(std::floor(u * static_cast<double>(span))), span - 1);
}

void InvoiceDistribution::validate() const {
    if (low <= 0) invariant("invoices must be positive");
    if (kind == Kind::uniform_int && high < low) invariant("uniform invoice needs low <= high");
}

PairedTrade simulate_paired(const RailSpec& traditional, const RailSpec& stablecoin, const InvoiceDistribution& invoices,
                            std::uint64_t seed, std::uint64_t index) {
    RandomStream invoice_rng(seed, {index, 0});
    const Minor invoice = invoices.quantile(invoice_rng.uniform());

    auto run = [&](const RailSpec& rail) -> std::optional<TradeResult> {
        RandomStream rng(seed, {index, 1});  // same stream for both rails
        try {
            return simulate_trade(rail, invoice, rng, index);
        } catch (const SettlementError& e) {
            if (e.code() != Code::uneconomic_trade) throw;
            return std::nullopt;
        }
    };
    return {run(traditional), run(stablecoin)};
}

SimulationMetrics run_simulation(const RailSpec& traditional, const RailSpec& stablecoin, std::uint64_t n_trades,
                                 const InvoiceDistribution& invoices, std::uint64_t seed, unsigned threads) {
    if (n_trades < 1) throw SettlementError(Code::invalid_input, "n_trades must be at least 1");
    if (traditional.kind != RailKind::traditional || stablecoin.kind != RailKind::stablecoin)
        throw SettlementError(Code::misconfigured_rails, "rails must be one traditional and one stablecoin");
    traditional.validate();
    stablecoin.validate();
    invoices.validate();

    std::vector<PairedTrade> trades(n_trades);
    auto work = [&](std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t i = b; i < e; ++i) trades[i] = simulate_paired(traditional, stablecoin, invoices, seed, i);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(n_trades, 256))));
    if (threads == 1) {
        work(0, n_trades);
    } else {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (n_trades + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b = t * chunk, e = std::min(n_trades, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
    }

    SimulationMetrics m;
    m.seed = seed;
    m.n_trades = n_trades;
    auto reduce = [&](RailMetrics& rm, auto member) {
        Minor fees = 0, proceeds = 0;
        std::int64_t delay = 0;
        for (const auto& t : trades) {
            const auto& r = t.*member;
            if (!r) {
                ++rm.excluded;
                continue;
            }
            ++rm.trades;
            fees += r->outcome.total_fees;
            proceeds += r->outcome.proceeds;
            delay += r->outcome.delay_minutes;
        }
        if (rm.trades == 0) {
            rm.mean_fees = rm.mean_delay_minutes = rm.mean_proceeds = std::nan("");
            return;
        }
        const double n = static_cast<double>(rm.trades);
        rm.mean_fees = static_cast<double>(fees) / n;
        rm.mean_proceeds = static_cast<double>(proceeds) / n;
        rm.mean_delay_minutes = static_cast<double>(delay) / n;
    };
    reduce(m.traditional, &PairedTrade::traditional);
    reduce(m.stablecoin, &PairedTrade::stablecoin);
    return m;
}

void write_metrics_csv(std::ostream& out, const SimulationMetrics& metrics) {
    out << "rail,mean_fees,mean_delay_minutes,mean_proceeds,excluded_trades\n";
    for (const auto* r : {&metrics.traditional, &metrics.stablecoin})
        out << to_string(r->kind) << ',' << format_double(r->mean_fees) << ',' << format_double(r->mean_delay_minutes)
            << ',' << format_double(r->mean_proceeds) << ',' << r->excluded << '\n';
}

econ::CostRegime derive_regime_costs(const econ::CostRegime& baseline, const SimulationMetrics& metrics,
                                     const RegimeBridge& bridge) {
    if (!(bridge.input_fee_reduction_fraction >= 0.0 && bridge.input_fee_reduction_fraction <= 1.0))
        throw SettlementError(Code::misconfigured_rails, "input_fee_reduction_fraction must lie in [0, 1]");
    if (!(std::isfinite(bridge.minor_per_model_unit) && bridge.minor_per_model_unit > 0.0))
        throw SettlementError(Code::misconfigured_rails, "minor_per_model_unit must be positive");
    const double gap = metrics.traditional.mean_fees - metrics.stablecoin.mean_fees;
    if (!std::isfinite(gap)) throw SettlementError(Code::misconfigured_rails, "no economic trades to measure a fee gap");
    if (gap < 0.0)
        throw SettlementError(Code::misconfigured_rails, "stablecoin rail charges more than the traditional rail");

    const double fixed = std::max(0.0, baseline.fixed_output_cost() - gap / bridge.minor_per_model_unit);
    const double tau = baseline.tau_i() * (1.0 - bridge.input_fee_reduction_fraction);
    // The financing split no longer adds up once tau_i moves.
    auto financing = bridge.input_fee_reduction_fraction == 0.0 ? baseline.financing() : std::nullopt;
    return econ::CostRegime(econ::RegimeLabel::stablecoin, baseline.input_price(), tau, fixed, baseline.capital_cap(),
                            financing);
}

}  // namespace agristable::settlement
