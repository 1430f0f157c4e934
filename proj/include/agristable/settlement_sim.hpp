// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "agristable/econ_model.hpp"
#include "agristable/ledger.hpp"
#include "agristable/rng.hpp"

namespace agristable::settlement {

using ledger::Minor;

inline constexpr std::int64_t kMinutesPerDay = 1440;

enum class RailKind : std::uint8_t { traditional, stablecoin };
enum class TimeUnit : std::uint8_t { minutes, days };

std::string_view to_string(RailKind k) noexcept;
std::string_view to_string(TimeUnit u) noexcept;

/// Settlement delay: a constant, or uniform over the integers [low, high],
/// in `unit`. Draws go through the quantile function so paired rails that
/// share a uniform variate get comonotone delays.
struct DelaySpec {
    enum class Kind : std::uint8_t { constant, uniform_int };

    Kind kind = Kind::constant;
    std::int64_t low = 0;
    std::int64_t high = 0;
    TimeUnit unit = TimeUnit::minutes;

    std::int64_t quantile_minutes(double u) const;
    std::int64_t min_minutes() const;
    std::int64_t max_minutes() const;
    bool operator==(const DelaySpec&) const = default;
};

struct RailSpec {
    RailKind kind = RailKind::traditional;
    DelaySpec delay;
    double fx_fee_rate = 0.0;
    std::int64_t hops = 0;
    Minor per_hop_fee = 0;
    Minor fixed_instrument_cost = 0;
    Minor network_fee = 0;

    /// Throws InvariantError on negative fees/hops or a stablecoin rail
    /// with intermediaries.
    void validate() const;
    bool operator==(const RailSpec&) const = default;
};

/// True when `cheaper` can never be worse than `dearer` on any trade:
/// its flat fee total and fx rate are no higher, and its slowest delay
/// is no later than `dearer`'s fastest.
bool rails_ordered(const RailSpec& cheaper, const RailSpec& dearer);

enum class EventKind : std::uint8_t { initiated, payment_sent, hop_cleared, fx_converted, funds_available };

std::string_view to_string(EventKind k) noexcept;

/// One step of a trade's settlement pipeline. `fee` is charged at this
/// step; `amount` is the invoice on `initiated` and the proceeds on
/// `funds_available`.
struct TradeEvent {
    std::uint64_t seq;
    std::int64_t time_minutes;
    EventKind kind;
    std::uint64_t trade_id;
    Minor amount;
    Minor fee;
    bool operator==(const TradeEvent&) const = default;
};

struct SettlementOutcome {
    std::uint64_t trade_id;
    Minor invoice;
    Minor total_fees;
    Minor proceeds;
    std::int64_t delay_minutes;
    double working_capital_days;
    bool operator==(const SettlementOutcome&) const = default;
};

struct TradeResult {
    SettlementOutcome outcome;
    std::vector<TradeEvent> events;
};

/// total_fees = fixed_instrument_cost + hops * per_hop_fee
///            + floor(invoice * fx_fee_rate) + network_fee.
/// Throws SettlementError(uneconomic_trade) when fees exceed the invoice.
TradeResult simulate_trade(const RailSpec& rail, Minor invoice, RandomStream& rng, std::uint64_t trade_id = 0);

/// Rebuilds the outcome from a trade's event list alone.
SettlementOutcome replay_trade(std::span<const TradeEvent> events);

struct InvoiceDistribution {
    enum class Kind : std::uint8_t { fixed, uniform_int };

    Kind kind = Kind::fixed;
    Minor low = 0;
    Minor high = 0;

    Minor quantile(double u) const;
    void validate() const;
    bool operator==(const InvoiceDistribution&) const = default;
};

/// Trade `index` settled on both rails with common random numbers: the
/// invoice and the delay variate are shared. nullopt marks an uneconomic trade.
struct PairedTrade {
    std::optional<TradeResult> traditional;
    std::optional<TradeResult> stablecoin;
};

PairedTrade simulate_paired(const RailSpec& traditional, const RailSpec& stablecoin, const InvoiceDistribution& invoices,
                            std::uint64_t seed, std::uint64_t index);

struct RailMetrics {
    RailKind kind;
    std::uint64_t trades = 0;  // included
    std::uint64_t excluded = 0;
    double mean_fees = 0.0;
    double mean_delay_minutes = 0.0;
    double mean_proceeds = 0.0;
    bool operator==(const RailMetrics&) const = default;
};

struct SimulationMetrics {
    std::uint64_t seed = 0;
    std::uint64_t n_trades = 0;
    RailMetrics traditional{RailKind::traditional};
    RailMetrics stablecoin{RailKind::stablecoin};
    bool operator==(const SimulationMetrics&) const = default;
};

/// Aggregates over `n_trades` paired trades. Per-trade work may run on
/// `threads` workers; reduction is in trade-index order.
SimulationMetrics run_simulation(const RailSpec& traditional, const RailSpec& stablecoin, std::uint64_t n_trades,
                                 const InvoiceDistribution& invoices, std::uint64_t seed, unsigned threads = 1);

/// `rail,mean_fees,mean_delay_minutes,mean_proceeds,excluded_trades`
void write_metrics_csv(std::ostream& out, const SimulationMetrics& metrics);

struct RegimeBridge {
    /// Share of tau_i removed by stablecoin input payments, in [0, 1].
    double input_fee_reduction_fraction = 0.0;
    /// Ledger minor units per model currency unit.
    double minor_per_model_unit = 1.0;
    bool operator==(const RegimeBridge&) const = default;
};

/// Stablecoin cost regime implied by the measured fee gap:
/// C_f^S = max(0, C_f - gap), tau_i^S = tau_i (1 - fraction).
econ::CostRegime derive_regime_costs(const econ::CostRegime& baseline, const SimulationMetrics& metrics,
                                     const RegimeBridge& bridge);

}  // namespace agristable::settlement
