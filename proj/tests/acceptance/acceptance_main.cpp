// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agristable/contracts.hpp"
#include "agristable/error.hpp"
#include "agristable/format.hpp"
#include "agristable/ledger.hpp"
#include "agristable/optimizer.hpp"
#include "agristable/scenario_config.hpp"
#include "agristable/settlement_sim.hpp"
#include "support/escrow_enum.hpp"
#include "support/ledger_ops.hpp"

namespace fs = std::filesystem;
using namespace agristable;
using econ::CostRegime;
using econ::FarmScenario;
using econ::ProductionParams;
using econ::RegimeLabel;
using econ::ShockDistribution;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
    }
    bool coin() { return integer(0, 1) == 1; }

private:
    std::mt19937_64 gen_;
};

// Shock with the requested mean, from a randomly chosen family.
ShockDistribution shock_with_mean(Rng& rng, double mean) {
    switch (rng.integer(0, 2)) {
        case 0: return ShockDistribution::degenerate(mean);
        case 1: {
            const double sigma = rng.uniform(0.05, 0.6);
            return ShockDistribution::lognormal(std::log(mean) - 0.5 * sigma * sigma, sigma);
        }
        default: {
            // Two atoms around the mean with probability q on the low one.
            const double q = rng.uniform(0.1, 0.9);
            const double lo = mean * rng.uniform(0.3, 0.95);
            const double hi = (mean - q * lo) / (1.0 - q);
            return ShockDistribution::discrete({{lo, q}, {hi, 1.0 - q}});
        }
    }
}

struct RandomModel {
    ProductionParams production;
    double ep;
    double et;
    ShockDistribution price;
    ShockDistribution yield;
};

RandomModel random_model(Rng& rng) {
    const ProductionParams prod(rng.uniform(0.5, 5.0), rng.uniform(0.1, 0.9));
    const double ep = rng.uniform(0.5, 3.0);
    const double et = rng.uniform(0.5, 3.0);
    return {prod, ep, et, shock_with_mean(rng, ep), shock_with_mean(rng, et)};
}

// Unit cost c = w + tau split at random.
std::pair<double, double> split_cost(Rng& rng, double c) {
    const double share = rng.uniform(0.2, 1.0);
    return {c * share, c * (1.0 - share)};
}

double closed_form_oracle(double a, double alpha, double ep, double et, double c) {
    return std::pow(alpha * a * ep * et / c, 1.0 / (1.0 - alpha));
}

// ---------------------------------------------------------------------------

Outcome foc_correctness() {
    Rng rng(101);
    double worst_rel = 0.0, worst_res = 0.0;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        auto m = random_model(rng);
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        const CostRegime base(RegimeLabel::baseline, w, tau, rng.uniform(0.0, 10.0));
        const FarmScenario sc(m.production, m.price, m.yield, base, base.with_label(RegimeLabel::stablecoin));
        const double x_cf = opt::solve_unconstrained(sc, base, opt::SolveMethod::closed_form).optimal_input;
        const double x_bi = opt::solve_unconstrained(sc, base, opt::SolveMethod::bisection).optimal_input;
        const double rel = std::abs(x_cf - x_bi) / x_cf;
        const double res = std::max(std::abs(econ::foc_residual(x_cf, sc, base)),
                                    std::abs(econ::foc_residual(x_bi, sc, base)));
        const double oracle = closed_form_oracle(m.production.tfp(), m.production.alpha(),
                                                 *m.price.analytic_mean(), *m.yield.analytic_mean(), w + tau);
        const double rel_oracle = std::abs(x_cf - oracle) / oracle;
        worst_rel = std::max({worst_rel, rel, rel_oracle});
        worst_res = std::max(worst_res, res);
        if (!(rel <= 1e-8 && rel_oracle <= 1e-8 && res < 1e-9)) ++bad;
    }
    return {bad == 0, "1000 regimes, max rel diff " + format_double(worst_rel) + ", max |foc| " +
                          format_double(worst_res) + ", failures " + std::to_string(bad)};
}

Outcome proposition1() {
    Rng rng(202);
    int counter = 0, flag_mismatch = 0;
    for (int i = 0; i < 1000; ++i) {
        auto m = random_model(rng);
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        const double cf = rng.uniform(0.0, 10.0);
        const CostRegime base(RegimeLabel::baseline, w, tau, cf);
        const CostRegime stable(RegimeLabel::stablecoin, w, tau * rng.uniform(0.0, 0.999), cf * rng.uniform(0.0, 1.0));
        const FarmScenario sc(m.production, m.price, m.yield, base, stable);
        const auto cmp = opt::compare_regimes(sc);
        // Independent profit oracle at the oracle optimum.
        const double scale = m.production.tfp() * m.ep * m.et;
        auto profit = [&](double x, const CostRegime& r) {
            return scale * std::pow(x, m.production.alpha()) - r.unit_cost() * x - r.fixed_output_cost();
        };
        const double xb = closed_form_oracle(m.production.tfp(), m.production.alpha(), m.ep, m.et, base.unit_cost());
        const double xs = closed_form_oracle(m.production.tfp(), m.production.alpha(), m.ep, m.et, stable.unit_cost());
        const bool oracle_holds = xs > xb && profit(xs, stable) > profit(xb, base);
        const bool model_holds = cmp.stablecoin_unconstrained.optimal_input > cmp.baseline_unconstrained.optimal_input &&
                                 cmp.stablecoin_unconstrained.expected_profit_at_opt >
                                     cmp.baseline_unconstrained.expected_profit_at_opt;
        if (!oracle_holds || !model_holds) ++counter;
        if (cmp.proposition1_holds != model_holds) ++flag_mismatch;
    }
    return {counter == 0 && flag_mismatch == 0, "1000 pairs, counterexamples " + std::to_string(counter) +
                                                     ", flag mismatches " + std::to_string(flag_mismatch)};
}

Outcome proposition2() {
    Rng rng(303);
    int counter = 0, flag_mismatch = 0, generated = 0;
    while (generated < 1000) {
        auto m = random_model(rng);
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        const double c = w + tau;
        const double x_star = closed_form_oracle(m.production.tfp(), m.production.alpha(), m.ep, m.et, c);
        // Baseline cap strictly below the spend needed for X*.
        const double cap = c * x_star * rng.uniform(0.05, 0.95);
        const double cap_s = cap * (rng.coin() ? 1.0 : rng.uniform(1.0, 3.0));
        const CostRegime base(RegimeLabel::baseline, w, tau, 1.0, cap);
        const CostRegime stable(RegimeLabel::stablecoin, w, tau * rng.uniform(0.0, 0.999), 1.0,
                                rng.integer(0, 9) == 0 ? std::optional<double>{} : std::optional<double>{cap_s});
        const FarmScenario sc(m.production, m.price, m.yield, base, stable);
        ++generated;
        const auto cmp = opt::compare_regimes(sc);
        const double x_con = cap / c;
        const double xs_star = closed_form_oracle(m.production.tfp(), m.production.alpha(), m.ep, m.et,
                                                  stable.unit_cost());
        const double xs_con = stable.capital_cap() ? std::min(xs_star, *stable.capital_cap() / stable.unit_cost())
                                                   : xs_star;
        const bool binding = cmp.baseline_solution.constrained;
        const bool holds = binding && cmp.stablecoin_solution.optimal_input > cmp.baseline_solution.optimal_input &&
                           xs_con > x_con &&
                           std::abs(cmp.baseline_solution.optimal_input - x_con) <= 1e-12 * x_con;
        if (!holds) ++counter;
        if (cmp.proposition2 != opt::Applicability::holds) ++flag_mismatch;
    }
    return {counter == 0 && flag_mismatch == 0, "1000 binding pairs, counterexamples " + std::to_string(counter) +
                                                     ", flag mismatches " + std::to_string(flag_mismatch)};
}

Outcome argmax_invariance() {
    Rng rng(404);
    int changed = 0;
    for (int i = 0; i < 200; ++i) {
        auto m = random_model(rng);
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        const std::optional<double> cap = rng.coin() ? std::optional<double>{rng.uniform(0.01, 50.0)} : std::nullopt;
        const CostRegime base(RegimeLabel::baseline, w, tau, 5.0, cap);
        const FarmScenario sc(m.production, m.price, m.yield, base, base.with_label(RegimeLabel::stablecoin));
        std::vector<std::optional<double>> grid;
        for (int k = 0; k < 10; ++k) grid.emplace_back(k * rng.uniform(0.0, 100.0));
        const auto rows =
            opt::comparative_statics(sc, base, opt::SweepParameter::fixed_output_cost, grid, opt::SolveMethod::closed_form);
        for (const auto& r : rows)
            if (r.solution.optimal_input != rows.front().solution.optimal_input) ++changed;
    }
    return {changed == 0, "200 scenarios x 10-point C_f grid, argmax changes " + std::to_string(changed)};
}

Outcome grid_oracle() {
    Rng rng(505);
    int outside = 0;
    double worst_steps = 0.0;
    for (int i = 0; i < 50; ++i) {
        const ProductionParams prod(rng.uniform(0.5, 5.0), rng.uniform(0.1, 0.9));
        auto atoms = [&] {
            const int n = static_cast<int>(rng.integer(2, 5));
            std::vector<econ::Discrete::Atom> a;
            double total = 0.0;
            for (int k = 0; k < n; ++k) {
                a.push_back({rng.uniform(0.2, 3.0), rng.uniform(0.1, 1.0)});
                total += a.back().probability;
            }
            for (auto& at : a) at.probability /= total;
            return a;
        };
        const auto pa = atoms();
        const auto ta = atoms();
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        // Oracle: joint expectation over both atom sets.
        double mean_revenue_scale = 0.0;
        for (const auto& p : pa)
            for (const auto& t : ta) mean_revenue_scale += p.value * t.value * p.probability * t.probability;
        const double c = w + tau;
        const double alpha = prod.alpha();
        const double x_star = std::pow(alpha * prod.tfp() * mean_revenue_scale / c, 1.0 / (1.0 - alpha));
        const std::optional<double> cap = rng.coin() ? std::optional<double>{c * x_star * rng.uniform(0.1, 1.5)}
                                                     : std::nullopt;
        const CostRegime base(RegimeLabel::baseline, w, tau, rng.uniform(0.0, 5.0), cap);
        const FarmScenario sc(prod, ShockDistribution::discrete(pa), ShockDistribution::discrete(ta), base,
                              base.with_label(RegimeLabel::stablecoin));

        constexpr int kPoints = 10000;
        const double step = 2.0 * x_star / (kPoints - 1);
        double best_x = 0.0, best = -INFINITY;
        for (int k = 0; k < kPoints; ++k) {
            const double x = k * step;
            if (cap && c * x > *cap) break;
            double revenue = 0.0;
            for (const auto& p : pa)
                for (const auto& t : ta)
                    revenue += p.probability * t.probability * p.value * t.value * prod.tfp() * std::pow(x, alpha);
            const double profit = revenue - c * x - base.fixed_output_cost();
            if (profit > best) {
                best = profit;
                best_x = x;
            }
        }
        const double solved = opt::solve_constrained(sc, base).optimal_input;
        const double steps = std::abs(best_x - solved) / step;
        worst_steps = std::max(worst_steps, steps);
        if (steps > 1.0) ++outside;
    }
    return {outside == 0, "50 discrete-shock scenarios, worst distance " + format_double(worst_steps) +
                              " grid steps, outside one step " + std::to_string(outside)};
}

Outcome monte_carlo(const config::ScenarioConfig& shipped) {
    std::vector<FarmScenario> fixtures;
    fixtures.push_back(shipped.model);
    Rng rng(606);
    for (int i = 0; i < 7; ++i) {
        auto m = random_model(rng);
        // Force genuine randomness in at least one factor.
        const double sigma = rng.uniform(0.1, 0.5);
        auto price = ShockDistribution::lognormal(std::log(m.ep) - 0.5 * sigma * sigma, sigma);
        const auto [w, tau] = split_cost(rng, rng.uniform(0.1, 5.0));
        const CostRegime base(RegimeLabel::baseline, w, tau, rng.uniform(0.0, 5.0));
        fixtures.emplace_back(m.production, price, m.yield, base, base.with_label(RegimeLabel::stablecoin)
                                                                      .with_tau_i(tau * 0.5));
    }
    int outside = 0, checks = 0;
    double worst_z = 0.0;
    for (std::size_t f = 0; f < fixtures.size(); ++f) {
        const auto& sc = fixtures[f];
        for (const auto* regime : {&sc.baseline(), &sc.stablecoin()}) {
            const double x_star = opt::solve_unconstrained(sc, *regime).optimal_input;
            for (double x : {0.5 * x_star, x_star}) {
                const auto cf = econ::expected_profit(x, sc, *regime);
                const auto mc = econ::expected_profit(x, sc, *regime, econ::MonteCarlo{100000, 20251015 + f, 1});
                const double z = std::abs(mc.value - cf.value) / mc.standard_error;
                worst_z = std::max(worst_z, z);
                ++checks;
                if (!(z <= 4.0)) ++outside;
            }
        }
    }
    return {outside == 0, std::to_string(checks) + " fixture points at n=1e5, worst |z| " + format_double(worst_z) +
                              ", beyond 4 SE " + std::to_string(outside)};
}

Outcome ledger_conservation() {
    int conservation = 0, reserve = 0, replay_fail = 0, untouched_fail = 0;
    std::uint64_t ops = 0, succeeded = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ledger::LedgerState s;
        test_support::RandomLedgerDriver driver(seed * 7919);
        driver.open_accounts(s, 12);
        for (int i = 0; i < 10000; ++i) {
            const auto before = s;
            const bool ok = driver.step(s);
            ++ops;
            if (ok) ++succeeded;
            if (!ok && !(s == before)) ++untouched_fail;
            const auto t = s.totals();
            if (!(t == test_support::totals_from_journal(s.journal()))) ++conservation;
            if (!(t.circulating_stablecoin <= t.reserve_fiat)) ++reserve;
            // Per-account sum recomputed from balances.
            ledger::Minor fiat = 0, coin = 0;
            for (const auto& [id, a] : s.accounts()) {
                fiat += a.balances[static_cast<int>(ledger::Currency::local_fiat)];
                coin += a.balances[static_cast<int>(ledger::Currency::stablecoin)];
            }
            if (fiat != t.local_fiat || coin != t.stablecoin) ++conservation;
        }
        try {
            std::stringstream io;
            ledger::write_journal(io, s.journal());
            const auto replayed = ledger::replay(ledger::read_journal(io));
            if (!(replayed == s)) ++replay_fail;
        } catch (const Error&) {
            ++replay_fail;
        }
    }
    const bool pass = conservation == 0 && reserve == 0 && replay_fail == 0 && untouched_fail == 0;
    return {pass, std::to_string(ops) + " ops (" + std::to_string(succeeded) + " applied), conservation breaks " +
                      std::to_string(conservation) + ", reserve breaks " + std::to_string(reserve) +
                      ", failed ops that mutated " + std::to_string(untouched_fail) + ", replay mismatches " +
                      std::to_string(replay_fail)};
}

Outcome escrow_safety() {
    const auto r = test_support::enumerate_escrow_sequences(6);
    std::string detail = std::to_string(r.sequences) + " sequences, released " + std::to_string(r.released) +
                         ", refunded " + std::to_string(r.refunded) + ", violations " + std::to_string(r.violations);
    if (!r.first_violations.empty()) detail += " (first: " + r.first_violations.front() + ")";
    return {r.violations == 0 && r.released > 0 && r.refunded > 0, detail};
}

Outcome insurance_trigger() {
    using contracts::Date;
    Rng rng(909);
    const Date origin = *contracts::parse_iso_date("2025-01-01");
    int trigger_mismatch = 0, coverage_mismatch = 0;
    for (int i = 0; i < 500; ++i) {
        const int days = static_cast<int>(rng.integer(20, 120));
        const bool with_gap = rng.integer(0, 4) == 0;
        const int gap = static_cast<int>(rng.integer(0, days - 1));
        std::vector<contracts::RainfallSeries::Observation> obs;
        for (int d = 0; d < days; ++d) {
            if (with_gap && d == gap) continue;
            obs.push_back({origin + std::chrono::days(d), static_cast<double>(rng.integer(0, 12))});
        }
        const int start = static_cast<int>(rng.integer(0, days - 2));
        const int end = static_cast<int>(rng.integer(start + 1, days - 1));
        contracts::InsurancePolicy pol{"p", "f", "r", origin + std::chrono::days(start), origin + std::chrono::days(end),
                                       0.0, 100, 0};
        // Oracle window sum over day indices, integer millimetres.
        std::int64_t sum = 0;
        bool complete = true;
        for (int d = start; d <= end; ++d) {
            bool found = false;
            for (const auto& o : obs)
                if (o.date == origin + std::chrono::days(d)) {
                    sum += static_cast<std::int64_t>(o.mm);
                    found = true;
                }
            complete = complete && found;
        }
        // Threshold at, just above, or just below the sum.
        pol.threshold_mm = std::max<double>(1.0, static_cast<double>(sum + rng.integer(-1, 1)));
        const contracts::RainfallSeries series("r", obs);
        try {
            const bool got = contracts::evaluate_trigger(pol, series);
            if (!complete) ++coverage_mismatch;
            if (got != (static_cast<double>(sum) < pol.threshold_mm)) ++trigger_mismatch;
        } catch (const ContractError& e) {
            if (complete || e.code() != ContractError::Code::incomplete_coverage) ++coverage_mismatch;
        }
    }

    // Boundary: cumulative rainfall exactly equal to Z pays nothing.
    std::vector<contracts::RainfallSeries::Observation> ten;
    for (int d = 0; d < 10; ++d) ten.push_back({origin + std::chrono::days(d), 20.0});
    const contracts::InsurancePolicy edge{"e", "f", "r", origin, origin + std::chrono::days(9), 200.0, 500, 0};
    const bool boundary_ok = !contracts::evaluate_trigger(edge, contracts::RainfallSeries("r", ten));

    // Pro-rata payouts against a brute-force floor oracle.
    int payout_mismatch = 0, overdraw = 0;
    for (int trial = 0; trial < 300; ++trial) {
        ledger::LedgerState l;
        contracts::PremiumPool pool("pool");
        l.open_account("pool", ledger::Role::insurer_pool);
        const ledger::Minor funding = rng.integer(0, 20000);
        if (funding > 0) l.mint("pool", funding);
        const int n = static_cast<int>(rng.integer(1, 8));
        std::vector<contracts::InsurancePolicy> pols;
        for (int k = 0; k < n; ++k) {
            const std::string holder = "h" + std::to_string(k);
            l.open_account(holder, ledger::Role::farmer);
            l.mint(holder, 1000);
            pols.push_back({"p" + std::to_string(k), holder, "r", origin, origin + std::chrono::days(9),
                            static_cast<double>(rng.integer(100, 300)), rng.integer(1, 9000), rng.integer(0, 300)});
            contracts::issue_policy(l, pool, pols.back());
        }
        const ledger::Minor balance = l.balance("pool", ledger::Currency::stablecoin);
        ledger::Minor intended = 0;
        std::vector<bool> triggered;
        for (const auto& p : pols) {
            triggered.push_back(200.0 < p.threshold_mm);
            if (triggered.back()) intended += p.payout;
        }
        const auto report = contracts::execute_payouts(
            l, pool, {{"r", contracts::RainfallSeries("r", ten)}}, origin + std::chrono::days(30));
        if (report.total_paid > balance || l.balance("pool", ledger::Currency::stablecoin) < 0) ++overdraw;
        for (std::size_t k = 0; k < pols.size(); ++k) {
            ledger::Minor expect = 0;
            if (triggered[k]) {
                if (intended <= balance) {
                    expect = pols[k].payout;
                } else {
                    // Largest m with m * intended <= payout * balance.
                    ledger::Minor lo = 0, hi = pols[k].payout;
                    while (lo < hi) {
                        const ledger::Minor mid = (lo + hi + 1) / 2;
                        if (mid * intended <= pols[k].payout * balance) lo = mid;
                        else hi = mid - 1;
                    }
                    expect = lo;
                }
            }
            if (report.lines[k].paid != expect || report.lines[k].triggered != triggered[k]) ++payout_mismatch;
        }
    }
    const bool pass = trigger_mismatch == 0 && coverage_mismatch == 0 && boundary_ok && payout_mismatch == 0 &&
                      overdraw == 0;
    return {pass, "500 series, trigger mismatches " + std::to_string(trigger_mismatch) + ", coverage mismatches " +
                      std::to_string(coverage_mismatch) + ", boundary " + (boundary_ok ? "no payout" : "PAID") +
                      ", 300 pools payout mismatches " + std::to_string(payout_mismatch) + ", overdraws " +
                      std::to_string(overdraw)};
}

Outcome settlement_rails(const config::ScenarioConfig& shipped) {
    const auto& trad = shipped.rails.traditional;
    const auto& stable = shipped.rails.stablecoin;
    const auto& inv = shipped.settlement.invoice;
    const bool ordered = settlement::rails_ordered(stable, trad);
    int dominance = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const auto p = settlement::simulate_paired(trad, stable, inv, shipped.seed, i);
        if (!p.traditional || !p.stablecoin) {
            ++dominance;
            continue;
        }
        if (p.stablecoin->outcome.proceeds < p.traditional->outcome.proceeds ||
            p.stablecoin->outcome.delay_minutes > p.traditional->outcome.delay_minutes)
            ++dominance;
    }
    const auto a = settlement::run_simulation(trad, stable, 10000, inv, shipped.seed, 1);
    const auto b = settlement::run_simulation(trad, stable, 10000, inv, shipped.seed, 1);
    const auto c = settlement::run_simulation(trad, stable, 10000, inv, shipped.seed, 4);
    const bool deterministic = a == b && a == c;

    Rng rng(1010);
    int invalid = 0, refused = 0;
    for (int i = 0; i < 300; ++i) {
        settlement::RailSpec t = trad, s = stable;
        t.fx_fee_rate = rng.uniform(0.0, 0.05);
        t.fixed_instrument_cost = rng.integer(0, 20000);
        s.network_fee = rng.integer(0, 120000);
        const auto m = settlement::run_simulation(t, s, 200, inv, i, 1);
        const CostRegime base(RegimeLabel::baseline, rng.uniform(0.1, 3.0), rng.uniform(0.0, 1.0),
                              rng.uniform(0.0, 3000.0),
                              rng.coin() ? std::optional<double>{rng.uniform(1.0, 1e4)} : std::nullopt);
        try {
            const auto derived =
                settlement::derive_regime_costs(base, m, {rng.uniform(0.0, 1.0), rng.uniform(1.0, 200.0)});
            try {
                FarmScenario(shipped.model.production(), shipped.model.price(), shipped.model.yield(), base, derived);
            } catch (const Error&) {
                ++invalid;
            }
        } catch (const SettlementError& e) {
            ++refused;
            if (e.code() != SettlementError::Code::misconfigured_rails ||
                !(m.traditional.mean_fees < m.stablecoin.mean_fees))
                ++invalid;
        }
    }
    const bool pass = ordered && dominance == 0 && deterministic && invalid == 0;
    return {pass, std::string("rails ordered ") + (ordered ? "yes" : "NO") + ", 10000 paired trades, dominance breaks " +
                      std::to_string(dominance) + ", repeat/thread runs " + (deterministic ? "bit-identical" : "DIFFER") +
                      ", 300 derivations, invalid " + std::to_string(invalid) + ", refused " + std::to_string(refused)};
}

Outcome end_to_end(const fs::path& work_dir) {
    const fs::path config = fs::path(AGRISTABLE_SOURCE_DIR) / "configs" / "coffee_export" / "scenario.json";
    const fs::path out = work_dir / "coffee_export_all";
    fs::remove_all(out);
    const std::string cmd = std::string(AGRISTABLE_CLI_PATH) + " --config \"" + config.string() + "\" --out \"" +
                            out.string() + "\" --command all > \"" + (work_dir / "cli.log").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::map<std::string, std::string> summary;
    std::ifstream in(out / "summary");
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) summary[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const bool prop1 = summary["comparison.proposition1_holds"] == "true";
    double stable_minutes = NAN, trad_days = NAN;
    try {
        stable_minutes = std::stod(summary.at("settlement.stablecoin.mean_delay_minutes"));
        trad_days = std::stod(summary.at("settlement.traditional.mean_delay_days"));
    } catch (const std::exception&) {
    }
    // Minutes scale: under an hour. Days scale: at least one full day.
    const bool scales = stable_minutes < 60.0 && trad_days >= 1.0;
    return {code == 0 && prop1 && scales && fs::exists(out / "settlement.csv"),
            "exit " + std::to_string(code) + ", proposition1_holds " + (prop1 ? "true" : "false") +
                ", stablecoin mean delay " + format_double(stable_minutes) + " min, traditional mean delay " +
                format_double(trad_days) + " d"};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work_dir = fs::temp_directory_path() / "agristable_acceptance";
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--work-dir" && i + 1 < argc) work_dir = argv[++i];
    fs::create_directories(work_dir);

    const auto shipped =
        config::parse_scenario(fs::path(AGRISTABLE_SOURCE_DIR) / "configs" / "coffee_export" / "scenario.json");

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"foc correctness", foc_correctness},
        {"proposition 1 (cheaper regime raises input and profit)", proposition1},
        {"proposition 2 (binding capital constraint relaxes)", proposition2},
        {"argmax invariance under fixed cost", argmax_invariance},
        {"grid oracle equivalence", grid_oracle},
        {"monte carlo consistency", [&] { return monte_carlo(shipped); }},
        {"ledger conservation, reserve and replay", ledger_conservation},
        {"escrow state-machine safety", escrow_safety},
        {"insurance trigger and pro-rata payouts", insurance_trigger},
        {"settlement dominance and determinism", [&] { return settlement_rails(shipped); }},
        {"end-to-end pipeline", [&] { return end_to_end(work_dir); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
                  << " (" << format_double(std::round(secs * 100.0) / 100.0) << " s)\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
