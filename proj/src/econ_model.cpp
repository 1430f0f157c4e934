// SPDX-License-Identifier: Apache-2.0
#include "agristable/econ_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "agristable/error.hpp"

namespace agristable::econ {
namespace {

constexpr const char* kModule = "econ_model";

[[noreturn]] void invariant(const std::string& what) { throw InvariantError(kModule, what); }

[[noreturn]] void domain(const std::string& what) { throw DomainError(kModule, what); }

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

ProductionParams::ProductionParams(double tfp, double alpha) : tfp_(tfp), alpha_(alpha) {
    if (!finite_positive(tfp)) invariant("tfp must be positive and finite");
    if (!(alpha > 0.0 && alpha < 1.0)) invariant("alpha must lie in the open interval (0, 1)");
}

ShockDistribution::ShockDistribution(Family family) : family_(std::move(family)) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Degenerate>) {
                if (!finite_positive(d.value)) invariant("degenerate shock value must be positive");
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (!std::isfinite(d.mu)) invariant("lognormal mu must be finite");
                if (!(std::isfinite(d.sigma) && d.sigma >= 0.0)) invariant("lognormal sigma must be non-negative");
                if (!std::isfinite(std::exp(d.mu + 0.5 * d.sigma * d.sigma)))
                    invariant("lognormal mean is not finite");
            } else {
                if (d.atoms.empty()) invariant("discrete shock needs at least one atom");
                double total = 0.0;
                for (const auto& a : d.atoms) {
                    if (!finite_positive(a.value)) invariant("discrete shock values must be positive");
                    if (!(a.probability >= 0.0 && a.probability <= 1.0))
                        invariant("discrete probabilities must lie in [0, 1]");
                    total += a.probability;
                }
                if (std::abs(total - 1.0) > 1e-12) invariant("discrete probabilities must sum to 1");
            }
        },
        family_);
}

std::string_view ShockDistribution::family_name() const noexcept {
    switch (family_.index()) {
        case 0: return "degenerate";
        case 1: return "lognormal";
        default: return "discrete";
    }
}

std::optional<double> ShockDistribution::analytic_mean() const {
    const double mean = std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Degenerate>) {
                return d.value;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(d.mu + 0.5 * d.sigma * d.sigma);
            } else {
                double m = 0.0;
                for (const auto& a : d.atoms) m += a.value * a.probability;
                return m;
            }
        },
        family_);
    if (!std::isfinite(mean)) return std::nullopt;
    return mean;
}

double ShockDistribution::sample(RandomStream& rng) const {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Degenerate>) {
                return d.value;
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(d.mu + d.sigma * rng.normal());
            } else {
                // Inverse CDF over atoms in declaration order.
                const double u = rng.uniform();
                double cumulative = 0.0;
                for (const auto& a : d.atoms) {
                    cumulative += a.probability;
                    if (u < cumulative) return a.value;
                }
                return d.atoms.back().value;
            }
        },
        family_);
}

std::string_view to_string(RegimeLabel label) noexcept {
    return label == RegimeLabel::baseline ? "baseline" : "stablecoin";
}

CostRegime::CostRegime(RegimeLabel label, double input_price, double tau_i, double fixed_output_cost,
                       std::optional<double> capital_cap, std::optional<Financing> financing)
    : label_(label),
      input_price_(input_price),
      tau_i_(tau_i),
      fixed_output_cost_(fixed_output_cost),
      capital_cap_(capital_cap),
      financing_(financing) {
    if (!finite_positive(input_price)) invariant("input_price must be positive");
    if (!(std::isfinite(tau_i) && tau_i >= 0.0)) invariant("tau_i must be non-negative");
    if (!(std::isfinite(fixed_output_cost) && fixed_output_cost >= 0.0))
        invariant("fixed_output_cost must be non-negative");
    if (capital_cap && !finite_positive(*capital_cap)) invariant("capital_cap must be positive when finite");
    if (financing) {
        if (!(std::isfinite(financing->fee_per_unit) && financing->fee_per_unit >= 0.0))
            invariant("financing fee_per_unit must be non-negative");
        if (!(std::isfinite(financing->interest_rate) && financing->interest_rate >= 0.0))
            invariant("financing interest_rate must be non-negative");
        const double implied = financing->fee_per_unit + financing->interest_rate * input_price;
        if (std::abs(implied - tau_i) > 1e-12) invariant("tau_i must equal fee_per_unit + interest_rate * input_price");
    }
}

CostRegime CostRegime::with_label(RegimeLabel label) const {
    CostRegime out = *this;
    out.label_ = label;
    return out;
}

// Changing tau_i or w breaks the financing identity, so the sweep variants
// drop the annotation rather than carry a stale one.
CostRegime CostRegime::with_tau_i(double tau_i) const {
    return CostRegime(label_, input_price_, tau_i, fixed_output_cost_, capital_cap_, std::nullopt);
}

CostRegime CostRegime::with_fixed_output_cost(double cost) const {
    return CostRegime(label_, input_price_, tau_i_, cost, capital_cap_, financing_);
}

CostRegime CostRegime::with_capital_cap(std::optional<double> cap) const {
    return CostRegime(label_, input_price_, tau_i_, fixed_output_cost_, cap, financing_);
}

CostRegime CostRegime::with_input_price(double price) const {
    return CostRegime(label_, price, tau_i_, fixed_output_cost_, capital_cap_, std::nullopt);
}

bool weakly_dominates(const CostRegime& improved, const CostRegime& base) noexcept {
    if (improved.tau_i() > base.tau_i()) return false;
    if (improved.fixed_output_cost() > base.fixed_output_cost()) return false;
    if (!improved.capital_cap()) return true;
    if (!base.capital_cap()) return false;
    return *improved.capital_cap() >= *base.capital_cap();
}

FarmScenario::FarmScenario(ProductionParams production, ShockDistribution price, ShockDistribution yield,
                           CostRegime baseline, CostRegime stablecoin)
    : production_(production),
      price_(std::move(price)),
      yield_(std::move(yield)),
      baseline_(std::move(baseline)),
      stablecoin_(std::move(stablecoin)) {
    if (baseline_.label() != RegimeLabel::baseline) invariant("baseline regime must carry the baseline label");
    if (stablecoin_.label() != RegimeLabel::stablecoin) invariant("stablecoin regime must carry the stablecoin label");
    if (stablecoin_.tau_i() > baseline_.tau_i()) invariant("regime ordering: stablecoin tau_i must not exceed baseline tau_i");
    if (stablecoin_.fixed_output_cost() > baseline_.fixed_output_cost())
        invariant("regime ordering: stablecoin fixed_output_cost must not exceed baseline fixed_output_cost");
    if (!weakly_dominates(stablecoin_, baseline_))
        invariant("regime ordering: stablecoin capital_cap must not be below baseline capital_cap");
}

double FarmScenario::expected_revenue_scale() const {
    const auto ep = price_.analytic_mean();
    const auto et = yield_.analytic_mean();
    if (!ep || !et) domain("closed form needs finite analytic means for price and yield");
    return *ep * *et * production_.tfp();
}

double production_output(double x, double theta, const ProductionParams& params) {
    if (!(x >= 0.0)) domain("input quantity must be non-negative");
    if (!(theta > 0.0)) domain("yield shock must be positive");
    if (x == 0.0) return 0.0;
    return theta * params.tfp() * std::pow(x, params.alpha());
}

double marginal_product(double x, double theta, const ProductionParams& params) {
    if (!(x > 0.0)) domain("marginal product is unbounded at x = 0");
    if (!(theta > 0.0)) domain("yield shock must be positive");
    return theta * params.tfp() * params.alpha() * std::pow(x, params.alpha() - 1.0);
}

double realized_profit(double x, double price, double theta, const FarmScenario& scenario, const CostRegime& regime) {
    if (!(price > 0.0)) domain("price realization must be positive");
    return price * production_output(x, theta, scenario.production()) - regime.unit_cost() * x -
           regime.fixed_output_cost();
}

namespace {

Estimate monte_carlo_profit(double x, const FarmScenario& scenario, const CostRegime& regime, const MonteCarlo& mc) {
    if (mc.n < 1) domain("monte carlo needs n >= 1");
    if (!(x >= 0.0)) domain("input quantity must be non-negative");

    std::vector<double> draws(mc.n);
    auto fill = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            RandomStream rng(mc.seed, {i});
            const double p = scenario.price().sample(rng);
            const double theta = scenario.yield().sample(rng);
            draws[i] = realized_profit(x, p, theta, scenario, regime);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(mc.threads, static_cast<unsigned>(mc.n)));
    if (threads == 1) {
        fill(0, mc.n);
    } else {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (mc.n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b = t * chunk;
            const std::uint64_t e = std::min<std::uint64_t>(mc.n, b + chunk);
            if (b < e) pool.emplace_back(fill, b, e);
        }
    }

    double sum = 0.0;
    for (double d : draws) sum += d;
    const double n = static_cast<double>(mc.n);
    const double mean = sum / n;
    if (mc.n == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double d : draws) ss += (d - mean) * (d - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

Estimate expected_profit(double x, const FarmScenario& scenario, const CostRegime& regime,
                         const ExpectationMethod& method) {
    if (const auto* mc = std::get_if<MonteCarlo>(&method)) return monte_carlo_profit(x, scenario, regime, *mc);

    // Shocks enter multiplicatively and independently, so
    // E[p theta] A x^alpha = E[p] E[theta] A x^alpha.
    const auto ep = scenario.price().analytic_mean();
    const auto et = scenario.yield().analytic_mean();
    if (!ep || !et) domain("closed form needs finite analytic means for price and yield");
    const double revenue = *ep * production_output(x, *et, scenario.production());
    return {revenue - regime.unit_cost() * x - regime.fixed_output_cost(), 0.0};
}

double foc_residual(double x, const FarmScenario& scenario, const CostRegime& regime) {
    if (!(x > 0.0)) domain("first-order condition is undefined at x = 0");
    const auto& prod = scenario.production();
    return scenario.expected_revenue_scale() * prod.alpha() * std::pow(x, prod.alpha() - 1.0) - regime.unit_cost();
}

}  // namespace agristable::econ
