// SPDX-License-Identifier: Apache-2.0
#include "agristable/optimizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "agristable/error.hpp"

namespace agristable::opt {
namespace {

constexpr const char* kModule = "optimizer";

double closed_form_optimum(const econ::FarmScenario& scenario, const econ::CostRegime& regime) {
    const double alpha = scenario.production().alpha();
    const double ratio = alpha * scenario.expected_revenue_scale() / regime.unit_cost();
    return std::pow(ratio, 1.0 / (1.0 - alpha));
}

double bisection_optimum(const econ::FarmScenario& scenario, const econ::CostRegime& regime,
                         const BisectionLimits& limits) {
    auto residual = [&](double x) { return econ::foc_residual(x, scenario, regime); };

    // Upper end doubles from 1 until the residual turns negative; the last
    // positive point seen becomes the lower end. If the optimum sits below
    // the nominal floor of 1e-9 the floor halves instead.
    double lo = 1e-9;
    double hi = 1.0;
    if (residual(hi) > 0.0) {
        int doublings = 0;
        while (residual(hi) > 0.0) {
            if (++doublings > limits.max_doublings)
                throw SolverError(kModule, "first-order residual stayed positive after " +
                                               std::to_string(limits.max_doublings) + " doublings");
            lo = hi;
            hi *= 2.0;
        }
    } else {
        int halvings = 0;
        while (residual(lo) <= 0.0) {
            if (residual(lo) == 0.0) return lo;
            if (++halvings > limits.max_doublings)
                throw SolverError(kModule, "first-order residual stayed negative near zero");
            hi = lo;
            lo *= 0.5;
        }
    }

    // Bisect until the residual is within tolerance and the bracket has
    // collapsed to near machine resolution.
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < limits.max_iterations; ++i) {
        mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (r == 0.0) return mid;
        if (r > 0.0)
            lo = mid;
        else
            hi = mid;
        if (std::abs(r) < limits.residual_tolerance && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            break;
    }
    if (!(std::abs(residual(mid)) < limits.residual_tolerance))
        throw SolverError(kModule, "bisection did not reach residual tolerance");
    return mid;
}

double profit_at(double x, const econ::FarmScenario& scenario, const econ::CostRegime& regime) {
    return econ::expected_profit(x, scenario, regime, econ::ClosedForm{}).value;
}

}  // namespace

std::string_view to_string(SolveMethod method) noexcept {
    return method == SolveMethod::closed_form ? "closed_form" : "bisection";
}

std::string_view to_string(Applicability a) noexcept {
    switch (a) {
        case Applicability::holds: return "true";
        case Applicability::fails: return "false";
        default: return "not_applicable";
    }
}

std::string_view to_string(SweepParameter p) noexcept {
    switch (p) {
        case SweepParameter::tau_i: return "tau_i";
        case SweepParameter::fixed_output_cost: return "fixed_output_cost";
        case SweepParameter::capital_cap: return "capital_cap";
        default: return "input_price";
    }
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) noexcept {
    for (auto p : {SweepParameter::tau_i, SweepParameter::fixed_output_cost, SweepParameter::capital_cap,
                   SweepParameter::input_price})
        if (to_string(p) == name) return p;
    return std::nullopt;
}

Solution solve_unconstrained(const econ::FarmScenario& scenario, const econ::CostRegime& regime, SolveMethod method,
                             const BisectionLimits& limits) {
    const double x = method == SolveMethod::closed_form ? closed_form_optimum(scenario, regime)
                                                        : bisection_optimum(scenario, regime, limits);
    if (!std::isfinite(x)) throw SolverError(kModule, "optimal input is not finite");
    return {x, profit_at(x, scenario, regime), false, method};
}

Solution solve_constrained(const econ::FarmScenario& scenario, const econ::CostRegime& regime, SolveMethod method,
                           const BisectionLimits& limits) {
    Solution s = solve_unconstrained(scenario, regime, method, limits);
    if (!regime.capital_cap()) return s;
    const double affordable = *regime.capital_cap() / regime.unit_cost();
    if (affordable < s.optimal_input) {
        s.optimal_input = affordable;
        s.expected_profit_at_opt = profit_at(affordable, scenario, regime);
        s.constrained = true;
    }
    return s;
}

RegimeComparison compare_regimes(const econ::FarmScenario& scenario, SolveMethod method) {
    const auto& base = scenario.baseline();
    const auto& stable = scenario.stablecoin();

    RegimeComparison c{
        .baseline_solution = solve_constrained(scenario, base, method),
        .stablecoin_solution = solve_constrained(scenario, stable, method),
        .delta_input = 0.0,
        .delta_profit = 0.0,
        .baseline_unconstrained = solve_unconstrained(scenario, base, method),
        .stablecoin_unconstrained = solve_unconstrained(scenario, stable, method),
        .proposition1_holds = false,
        .proposition2 = Applicability::not_applicable,
    };
    c.delta_input = c.stablecoin_solution.optimal_input - c.baseline_solution.optimal_input;
    c.delta_profit = c.stablecoin_solution.expected_profit_at_opt - c.baseline_solution.expected_profit_at_opt;

    // Capital caps are held fixed here; only the cost channels move.
    const bool strictly_cheaper =
        stable.tau_i() < base.tau_i() || stable.fixed_output_cost() < base.fixed_output_cost();
    c.proposition1_holds = strictly_cheaper &&
                           c.stablecoin_unconstrained.optimal_input > c.baseline_unconstrained.optimal_input &&
                           c.stablecoin_unconstrained.expected_profit_at_opt >
                               c.baseline_unconstrained.expected_profit_at_opt;

    if (c.baseline_solution.constrained)
        c.proposition2 = c.stablecoin_solution.optimal_input > c.baseline_solution.optimal_input
                             ? Applicability::holds
                             : Applicability::fails;
    return c;
}

std::vector<StaticsRow> comparative_statics(const econ::FarmScenario& scenario, const econ::CostRegime& regime,
                                            SweepParameter parameter, const std::vector<std::optional<double>>& grid,
                                            SolveMethod method) {
    if (grid.empty()) throw InvariantError(kModule, "comparative statics grid is empty");

    std::vector<StaticsRow> rows;
    rows.reserve(grid.size());
    for (const auto& value : grid) {
        if (!value && parameter != SweepParameter::capital_cap)
            throw InvariantError(kModule, "only capital_cap accepts an unconstrained grid value");
        econ::CostRegime r = regime;
        switch (parameter) {
            case SweepParameter::tau_i: r = regime.with_tau_i(*value); break;
            case SweepParameter::fixed_output_cost: r = regime.with_fixed_output_cost(*value); break;
            case SweepParameter::capital_cap: r = regime.with_capital_cap(value); break;
            case SweepParameter::input_price: r = regime.with_input_price(*value); break;
        }
        rows.push_back({value, solve_constrained(scenario, r, method)});
    }
    return rows;
}

}  // namespace agristable::opt
