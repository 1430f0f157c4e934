// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "agristable/econ_model.hpp"

namespace agristable::opt {

enum class SolveMethod { closed_form, bisection };

std::string_view to_string(SolveMethod method) noexcept;

struct Solution {
    double optimal_input;
    double expected_profit_at_opt;
    bool constrained;
    SolveMethod method;
};

/// Proposition 2 is only meaningful when the baseline farmer is rationed.
enum class Applicability { holds, fails, not_applicable };

std::string_view to_string(Applicability a) noexcept;

struct RegimeComparison {
    Solution baseline_solution;
    Solution stablecoin_solution;
    double delta_input;
    double delta_profit;
    /// Unconstrained solutions used for the input-use/profit proposition.
    Solution baseline_unconstrained;
    Solution stablecoin_unconstrained;
    bool proposition1_holds;
    Applicability proposition2;
};

struct BisectionLimits {
    double residual_tolerance = 1e-10;
    int max_doublings = 200;
    int max_iterations = 200;
};

/// Interior optimum of expected profit: the root of the first-order
/// condition, ignoring any capital cap.
Solution solve_unconstrained(const econ::FarmScenario& scenario, const econ::CostRegime& regime,
                             SolveMethod method = SolveMethod::closed_form, const BisectionLimits& limits = {});

/// min(X*, K_max / (w + tau_i)). A cap exactly equal to the optimal spend
/// counts as non-binding.
Solution solve_constrained(const econ::FarmScenario& scenario, const econ::CostRegime& regime,
                           SolveMethod method = SolveMethod::closed_form, const BisectionLimits& limits = {});

/// Solves both regimes of the scenario. delta_* compare the constrained
/// solutions (identical to the unconstrained ones when no cap binds).
RegimeComparison compare_regimes(const econ::FarmScenario& scenario, SolveMethod method = SolveMethod::closed_form);

enum class SweepParameter { tau_i, fixed_output_cost, capital_cap, input_price };

std::string_view to_string(SweepParameter p) noexcept;
std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) noexcept;

struct StaticsRow {
    /// nullopt only for an unconstrained capital_cap grid point.
    std::optional<double> value;
    Solution solution;
};

/// One constrained solution per grid value, other parameters held fixed,
/// rows in grid order.
std::vector<StaticsRow> comparative_statics(const econ::FarmScenario& scenario, const econ::CostRegime& regime,
                                            SweepParameter parameter, const std::vector<std::optional<double>>& grid,
                                            SolveMethod method = SolveMethod::closed_form);

}  // namespace agristable::opt
