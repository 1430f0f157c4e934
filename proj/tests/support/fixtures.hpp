// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "agristable/econ_model.hpp"

namespace agristable::test_support {

using econ::CostRegime;
using econ::FarmScenario;
using econ::ProductionParams;
using econ::RegimeLabel;
using econ::ShockDistribution;

inline CostRegime baseline_regime(double w, double tau, double cf, std::optional<double> cap = std::nullopt) {
    return CostRegime(RegimeLabel::baseline, w, tau, cf, cap);
}

inline CostRegime stablecoin_regime(double w, double tau, double cf, std::optional<double> cap = std::nullopt) {
    return CostRegime(RegimeLabel::stablecoin, w, tau, cf, cap);
}

/// A = 1, alpha = 0.5, E[p] = E[theta] = 1, w = 0.4, tau_i = 0.1: X* = 1.
inline FarmScenario identity_scenario(double cf = 0.0, std::optional<double> cap = std::nullopt) {
    return FarmScenario(ProductionParams(1.0, 0.5), ShockDistribution::degenerate(1.0),
                        ShockDistribution::degenerate(1.0), baseline_regime(0.4, 0.1, cf, cap),
                        stablecoin_regime(0.4, 0.1, cf, cap));
}

inline FarmScenario scenario_with(ProductionParams prod, double ep, double et, CostRegime base, CostRegime stable) {
    return FarmScenario(prod, ShockDistribution::degenerate(ep), ShockDistribution::degenerate(et), std::move(base),
                        std::move(stable));
}

}  // namespace agristable::test_support
