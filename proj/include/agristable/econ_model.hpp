// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "agristable/rng.hpp"

namespace agristable::econ {

/// Technology f(x; theta) = theta * tfp * x^alpha. 0 < alpha < 1 gives
/// f' > 0 and f'' < 0 on x > 0.
class ProductionParams {
public:
    ProductionParams(double tfp, double alpha);

    double tfp() const noexcept { return tfp_; }
    double alpha() const noexcept { return alpha_; }

    bool operator==(const ProductionParams&) const = default;

private:
    double tfp_;
    double alpha_;
};

struct Degenerate {
    double value;
    bool operator==(const Degenerate&) const = default;
};

/// Parameters of the underlying normal: log(X) ~ N(mu, sigma^2).
struct LogNormal {
    double mu;
    double sigma;
    bool operator==(const LogNormal&) const = default;
};

struct Discrete {
    struct Atom {
        double value;
        double probability;
        bool operator==(const Atom&) const = default;
    };
    std::vector<Atom> atoms;
    bool operator==(const Discrete&) const = default;
};

/// Distribution of a strictly positive multiplicative shock (price or yield).
class ShockDistribution {
public:
    using Family = std::variant<Degenerate, LogNormal, Discrete>;

    explicit ShockDistribution(Family family);

    static ShockDistribution degenerate(double value) { return ShockDistribution(Degenerate{value}); }
    static ShockDistribution lognormal(double mu, double sigma) { return ShockDistribution(LogNormal{mu, sigma}); }
    static ShockDistribution discrete(std::vector<Discrete::Atom> atoms) {
        return ShockDistribution(Discrete{std::move(atoms)});
    }

    const Family& family() const noexcept { return family_; }
    std::string_view family_name() const noexcept;

    /// Analytic mean, or nullopt when it is not finite in double precision.
    std::optional<double> analytic_mean() const;

    double sample(RandomStream& rng) const;

    bool operator==(const ShockDistribution&) const = default;

private:
    Family family_;
};

/// Fee-plus-financing decomposition of the per-unit transaction cost:
/// tau_i = fee_per_unit + interest_rate * input_price.
struct Financing {
    double fee_per_unit;
    double interest_rate;
    bool operator==(const Financing&) const = default;
};

enum class RegimeLabel { baseline, stablecoin };

std::string_view to_string(RegimeLabel label) noexcept;

/// Cost side of the farm problem under one payment system.
/// A missing capital_cap means the farmer is not credit constrained.
class CostRegime {
public:
    CostRegime(RegimeLabel label, double input_price, double tau_i, double fixed_output_cost,
               std::optional<double> capital_cap = std::nullopt, std::optional<Financing> financing = std::nullopt);

    RegimeLabel label() const noexcept { return label_; }
    double input_price() const noexcept { return input_price_; }
    double tau_i() const noexcept { return tau_i_; }
    double fixed_output_cost() const noexcept { return fixed_output_cost_; }
    const std::optional<double>& capital_cap() const noexcept { return capital_cap_; }
    const std::optional<Financing>& financing() const noexcept { return financing_; }

    /// Effective marginal cost of one input unit, w + tau_i.
    double unit_cost() const noexcept { return input_price_ + tau_i_; }

    CostRegime with_label(RegimeLabel label) const;
    CostRegime with_tau_i(double tau_i) const;
    CostRegime with_fixed_output_cost(double cost) const;
    CostRegime with_capital_cap(std::optional<double> cap) const;
    CostRegime with_input_price(double price) const;

    bool operator==(const CostRegime&) const = default;

private:
    RegimeLabel label_;
    double input_price_;
    double tau_i_;
    double fixed_output_cost_;
    std::optional<double> capital_cap_;
    std::optional<Financing> financing_;
};

/// True when `improved` weakly dominates `base` on every cost channel.
bool weakly_dominates(const CostRegime& improved, const CostRegime& base) noexcept;

/// The unit of experiment: technology, shocks, and a baseline/stablecoin
/// pair of cost regimes.
class FarmScenario {
public:
    FarmScenario(ProductionParams production, ShockDistribution price, ShockDistribution yield, CostRegime baseline,
                 CostRegime stablecoin);

    const ProductionParams& production() const noexcept { return production_; }
    const ShockDistribution& price() const noexcept { return price_; }
    const ShockDistribution& yield() const noexcept { return yield_; }
    const CostRegime& baseline() const noexcept { return baseline_; }
    const CostRegime& stablecoin() const noexcept { return stablecoin_; }

    /// E[p] * E[theta] * tfp: the scale of expected revenue per x^alpha.
    /// Throws DomainError if either mean is not finite.
    double expected_revenue_scale() const;

    bool operator==(const FarmScenario&) const = default;

private:
    ProductionParams production_;
    ShockDistribution price_;
    ShockDistribution yield_;
    CostRegime baseline_;
    CostRegime stablecoin_;
};

double production_output(double x, double theta, const ProductionParams& params);

double marginal_product(double x, double theta, const ProductionParams& params);

double realized_profit(double x, double price, double theta, const FarmScenario& scenario, const CostRegime& regime);

struct ClosedForm {};

struct MonteCarlo {
    std::uint64_t n;
    std::uint64_t seed;
    unsigned threads = 1;
};

using ExpectationMethod = std::variant<ClosedForm, MonteCarlo>;

struct Estimate {
    double value;
    double standard_error;
};

/// E[p f(x; theta)] - (w + tau_i) x - C_f. Monte Carlo replicate i draws
/// (p, theta) from substream (seed, i), and the sum is reduced in index
/// order, so the result does not depend on `threads`.
Estimate expected_profit(double x, const FarmScenario& scenario, const CostRegime& regime,
                         const ExpectationMethod& method = ClosedForm{});

/// Expected marginal revenue product minus unit cost. Positive below the
/// interior optimum, negative above it.
double foc_residual(double x, const FarmScenario& scenario, const CostRegime& regime);

}  // namespace agristable::econ
