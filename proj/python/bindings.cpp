// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "agristable/contracts.hpp"
#include "agristable/dispatch.hpp"
#include "agristable/error.hpp"
#include "agristable/ledger.hpp"
#include "agristable/optimizer.hpp"
#include "agristable/scenario_config.hpp"
#include "agristable/settlement_sim.hpp"

namespace py = pybind11;
using namespace agristable;

namespace {

contracts::Date to_date(const std::string& iso) {
    auto d = contracts::parse_iso_date(iso);
    if (!d) throw py::value_error("expected an ISO date YYYY-MM-DD, got '" + iso + "'");
    return *d;
}

econ::Estimate expected_profit_py(double x, const econ::FarmScenario& sc, const econ::CostRegime& regime,
                                  std::optional<std::uint64_t> monte_carlo_n, std::uint64_t seed, unsigned threads) {
    if (monte_carlo_n) return econ::expected_profit(x, sc, regime, econ::MonteCarlo{*monte_carlo_n, seed, threads});
    return econ::expected_profit(x, sc, regime);
}

void bind_econ(py::module_& m) {
    py::class_<econ::ProductionParams>(m, "ProductionParams")
        .def(py::init<double, double>(), py::arg("tfp"), py::arg("alpha"))
        .def_property_readonly("tfp", &econ::ProductionParams::tfp)
        .def_property_readonly("alpha", &econ::ProductionParams::alpha);

    py::class_<econ::ShockDistribution>(m, "ShockDistribution")
        .def_static("degenerate", &econ::ShockDistribution::degenerate, py::arg("value"))
        .def_static("lognormal", &econ::ShockDistribution::lognormal, py::arg("mu"), py::arg("sigma"))
        .def_static(
            "discrete",
            [](const std::vector<std::pair<double, double>>& atoms) {
                std::vector<econ::Discrete::Atom> a;
                for (const auto& [v, p] : atoms) a.push_back({v, p});
                return econ::ShockDistribution::discrete(std::move(a));
            },
            py::arg("atoms"), "atoms: list of (value, probability)")
        .def_property_readonly("family", [](const econ::ShockDistribution& s) { return std::string(s.family_name()); })
        .def("analytic_mean", &econ::ShockDistribution::analytic_mean);

    py::enum_<econ::RegimeLabel>(m, "RegimeLabel")
        .value("baseline", econ::RegimeLabel::baseline)
        .value("stablecoin", econ::RegimeLabel::stablecoin);

    py::class_<econ::Financing>(m, "Financing")
        .def(py::init([](double fee, double rate) { return econ::Financing{fee, rate}; }), py::arg("fee_per_unit"),
             py::arg("interest_rate"))
        .def_readonly("fee_per_unit", &econ::Financing::fee_per_unit)
        .def_readonly("interest_rate", &econ::Financing::interest_rate);

    py::class_<econ::CostRegime>(m, "CostRegime")
        .def(py::init<econ::RegimeLabel, double, double, double, std::optional<double>, std::optional<econ::Financing>>(),
             py::arg("label"), py::arg("input_price"), py::arg("tau_i"), py::arg("fixed_output_cost"),
             py::arg("capital_cap") = std::nullopt, py::arg("financing") = std::nullopt)
        .def_property_readonly("label", &econ::CostRegime::label)
        .def_property_readonly("input_price", &econ::CostRegime::input_price)
        .def_property_readonly("tau_i", &econ::CostRegime::tau_i)
        .def_property_readonly("fixed_output_cost", &econ::CostRegime::fixed_output_cost)
        .def_property_readonly("capital_cap", &econ::CostRegime::capital_cap)
        .def_property_readonly("unit_cost", &econ::CostRegime::unit_cost)
        .def("__eq__", [](const econ::CostRegime& a, const econ::CostRegime& b) { return a == b; });

    py::class_<econ::FarmScenario>(m, "FarmScenario")
        .def(py::init<econ::ProductionParams, econ::ShockDistribution, econ::ShockDistribution, econ::CostRegime,
                      econ::CostRegime>(),
             py::arg("production"), py::arg("price"), py::arg("yield_"), py::arg("baseline"), py::arg("stablecoin"))
        .def_property_readonly("baseline", &econ::FarmScenario::baseline)
        .def_property_readonly("stablecoin", &econ::FarmScenario::stablecoin)
        .def_property_readonly("production", &econ::FarmScenario::production);

    py::class_<econ::Estimate>(m, "Estimate")
        .def_readonly("value", &econ::Estimate::value)
        .def_readonly("standard_error", &econ::Estimate::standard_error);

    m.def("expected_profit", &expected_profit_py, py::arg("x"), py::arg("scenario"), py::arg("regime"),
          py::arg("monte_carlo_n") = std::nullopt, py::arg("seed") = 0, py::arg("threads") = 1,
          "Closed form by default; Monte Carlo when monte_carlo_n is given.");
    m.def("foc_residual", &econ::foc_residual, py::arg("x"), py::arg("scenario"), py::arg("regime"));
}

void bind_opt(py::module_& m) {
    py::enum_<opt::SolveMethod>(m, "SolveMethod")
        .value("closed_form", opt::SolveMethod::closed_form)
        .value("bisection", opt::SolveMethod::bisection);

    py::class_<opt::Solution>(m, "Solution")
        .def_readonly("optimal_input", &opt::Solution::optimal_input)
        .def_readonly("expected_profit", &opt::Solution::expected_profit_at_opt)
        .def_readonly("constrained", &opt::Solution::constrained)
        .def_readonly("method", &opt::Solution::method);

    py::class_<opt::RegimeComparison>(m, "RegimeComparison")
        .def_readonly("baseline", &opt::RegimeComparison::baseline_solution)
        .def_readonly("stablecoin", &opt::RegimeComparison::stablecoin_solution)
        .def_readonly("baseline_unconstrained", &opt::RegimeComparison::baseline_unconstrained)
        .def_readonly("stablecoin_unconstrained", &opt::RegimeComparison::stablecoin_unconstrained)
        .def_readonly("delta_input", &opt::RegimeComparison::delta_input)
        .def_readonly("delta_profit", &opt::RegimeComparison::delta_profit)
        .def_readonly("proposition1_holds", &opt::RegimeComparison::proposition1_holds)
        .def_property_readonly("proposition2",
                               [](const opt::RegimeComparison& c) { return std::string(opt::to_string(c.proposition2)); });

    m.def(
        "solve_unconstrained",
        [](const econ::FarmScenario& sc, const econ::CostRegime& r, opt::SolveMethod method) {
            return opt::solve_unconstrained(sc, r, method);
        },
        py::arg("scenario"), py::arg("regime"), py::arg("method") = opt::SolveMethod::closed_form);
    m.def(
        "solve_constrained",
        [](const econ::FarmScenario& sc, const econ::CostRegime& r, opt::SolveMethod method) {
            return opt::solve_constrained(sc, r, method);
        },
        py::arg("scenario"), py::arg("regime"), py::arg("method") = opt::SolveMethod::closed_form);
    m.def("compare_regimes", &opt::compare_regimes, py::arg("scenario"),
          py::arg("method") = opt::SolveMethod::closed_form);
    m.def(
        "comparative_statics",
        [](const econ::FarmScenario& sc, const econ::CostRegime& r, const std::string& parameter,
           const std::vector<std::optional<double>>& grid) {
            auto p = opt::parse_sweep_parameter(parameter);
            if (!p) throw py::value_error("unknown sweep parameter '" + parameter + "'");
            std::vector<std::pair<std::optional<double>, opt::Solution>> out;
            for (auto& row : opt::comparative_statics(sc, r, *p, grid)) out.emplace_back(row.value, row.solution);
            return out;
        },
        py::arg("scenario"), py::arg("regime"), py::arg("parameter"), py::arg("grid"));
}

void bind_ledger(py::module_& m) {
    py::enum_<ledger::Currency>(m, "Currency")
        .value("local_fiat", ledger::Currency::local_fiat)
        .value("stablecoin", ledger::Currency::stablecoin);

    auto role = py::enum_<ledger::Role>(m, "Role");
    for (int i = 0; i <= static_cast<int>(ledger::Role::fx_desk); ++i) {
        const auto r = static_cast<ledger::Role>(i);
        role.value(std::string(ledger::to_string(r)).c_str(), r);
    }

    py::class_<ledger::Totals>(m, "Totals")
        .def_readonly("local_fiat", &ledger::Totals::local_fiat)
        .def_readonly("stablecoin", &ledger::Totals::stablecoin)
        .def_readonly("circulating_stablecoin", &ledger::Totals::circulating_stablecoin)
        .def_readonly("reserve_fiat", &ledger::Totals::reserve_fiat)
        .def("__eq__", [](const ledger::Totals& a, const ledger::Totals& b) { return a == b; });

    py::class_<ledger::LedgerState>(m, "Ledger")
        .def(py::init<>())
        .def("open_account", &ledger::LedgerState::open_account, py::arg("id"), py::arg("role"))
        .def("mint", &ledger::LedgerState::mint, py::arg("to"), py::arg("amount"))
        .def("redeem", &ledger::LedgerState::redeem, py::arg("account"), py::arg("amount"))
        .def("deposit_fiat", &ledger::LedgerState::deposit_fiat, py::arg("to"), py::arg("amount"))
        .def("transfer", &ledger::LedgerState::transfer, py::arg("sender"), py::arg("recipient"), py::arg("amount"),
             py::arg("fee") = 0, py::arg("currency") = ledger::Currency::stablecoin, py::arg("memo") = "")
        .def("fx_convert", &ledger::LedgerState::fx_convert, py::arg("account"), py::arg("source"), py::arg("target"),
             py::arg("amount"), py::arg("rate"), py::arg("fee_rate") = 0.0)
        .def("balance", &ledger::LedgerState::balance, py::arg("account"),
             py::arg("currency") = ledger::Currency::stablecoin)
        .def("has_account", &ledger::LedgerState::has_account)
        .def("totals", &ledger::LedgerState::totals)
        .def("check_invariants", &ledger::LedgerState::check_invariants)
        .def_property_readonly("circulating_stablecoin", &ledger::LedgerState::circulating_stablecoin)
        .def_property_readonly("reserve_fiat", &ledger::LedgerState::reserve_fiat)
        .def("journal_jsonl",
             [](const ledger::LedgerState& s) {
                 std::ostringstream out;
                 ledger::write_journal(out, s.journal());
                 return out.str();
             })
        .def_static("replay_jsonl",
                    [](const std::string& text) {
                        std::istringstream in(text);
                        return ledger::replay(ledger::read_journal(in));
                    })
        .def("__eq__", [](const ledger::LedgerState& a, const ledger::LedgerState& b) { return a == b; })
        .def("__len__", [](const ledger::LedgerState& s) { return s.journal().size(); });
}

void bind_contracts(py::module_& m) {
    py::enum_<contracts::EscrowState>(m, "EscrowState")
        .value("Created", contracts::EscrowState::created)
        .value("Funded", contracts::EscrowState::funded)
        .value("Delivered", contracts::EscrowState::delivered)
        .value("Released", contracts::EscrowState::released)
        .value("Refunded", contracts::EscrowState::refunded);

    py::class_<contracts::PurchaseOrder>(m, "PurchaseOrder")
        .def(py::init([](std::string id, std::string buyer, std::string seller, ledger::Minor price, double quantity,
                         std::string quality_spec, contracts::SimDay deadline, std::string oracle_id) {
                 return contracts::PurchaseOrder{std::move(id),           std::move(buyer), std::move(seller), price,
                                                 quantity,                std::move(quality_spec), deadline,
                                                 std::move(oracle_id)};
             }),
             py::arg("id"), py::arg("buyer"), py::arg("seller"), py::arg("price"), py::arg("quantity"),
             py::arg("quality_spec"), py::arg("deadline"), py::arg("oracle_id"));

    py::class_<contracts::OracleAttestation>(m, "OracleAttestation")
        .def(py::init([](std::string contract_id, double measured, bool quality_pass, contracts::SimDay timestamp,
                         std::string oracle_id) {
                 return contracts::OracleAttestation{std::move(contract_id), measured, quality_pass, timestamp,
                                                     std::move(oracle_id)};
             }),
             py::arg("contract_id"), py::arg("measured_quantity"), py::arg("quality_pass"), py::arg("timestamp"),
             py::arg("oracle_id"));

    py::class_<contracts::EscrowContract>(m, "EscrowContract")
        .def_property_readonly("state", &contracts::EscrowContract::state)
        .def_property_readonly("vault", &contracts::EscrowContract::vault);

    m.def("create_escrow", &contracts::create_escrow, py::arg("ledger"), py::arg("order"),
          py::arg("vault") = "escrow_vault");
    m.def("fund_escrow", &contracts::fund_escrow, py::arg("ledger"), py::arg("contract"));
    m.def("submit_attestation", &contracts::submit_attestation, py::arg("contract"), py::arg("attestation"));
    m.def(
        "settle_escrow",
        [](ledger::LedgerState& l, contracts::EscrowContract& c, contracts::SimDay now) {
            return std::string(contracts::to_string(contracts::settle_escrow(l, c, now)));
        },
        py::arg("ledger"), py::arg("contract"), py::arg("now"));

    py::class_<contracts::InsurancePolicy>(m, "InsurancePolicy")
        .def(py::init([](std::string id, std::string holder, std::string region, const std::string& start,
                         const std::string& end, double threshold_mm, ledger::Minor payout, ledger::Minor premium) {
                 return contracts::InsurancePolicy{std::move(id), std::move(holder), std::move(region), to_date(start),
                                                   to_date(end),  threshold_mm,      payout,            premium};
             }),
             py::arg("id"), py::arg("holder"), py::arg("region"), py::arg("window_start"), py::arg("window_end"),
             py::arg("threshold_mm"), py::arg("payout"), py::arg("premium") = 0);

    py::class_<contracts::RainfallSeries>(m, "RainfallSeries")
        .def(py::init([](std::string region, const std::vector<std::pair<std::string, double>>& observations) {
                 std::vector<contracts::RainfallSeries::Observation> obs;
                 for (const auto& [date, mm] : observations) obs.push_back({to_date(date), mm});
                 return contracts::RainfallSeries(std::move(region), std::move(obs));
             }),
             py::arg("region"), py::arg("observations"), "observations: list of (ISO date, millimetres)")
        .def_static(
            "load_csv",
            [](const std::filesystem::path& p, std::optional<std::string> region) {
                return contracts::load_rainfall_csv(p, std::move(region));
            },
            py::arg("path"), py::arg("region") = std::nullopt)
        .def_property_readonly("region", &contracts::RainfallSeries::region);

    py::class_<contracts::PremiumPool>(m, "PremiumPool")
        .def(py::init<std::string>(), py::arg("pool_account"))
        .def_property_readonly("settled", &contracts::PremiumPool::settled);

    m.def("issue_policy", &contracts::issue_policy, py::arg("ledger"), py::arg("pool"), py::arg("policy"));
    m.def("evaluate_trigger", &contracts::evaluate_trigger, py::arg("policy"), py::arg("series"));
    m.def(
        "execute_payouts",
        [](ledger::LedgerState& l, contracts::PremiumPool& pool, const std::vector<contracts::RainfallSeries>& series,
           const std::string& now) {
            std::map<std::string, contracts::RainfallSeries> by_region;
            for (const auto& s : series) by_region.emplace(s.region(), s);
            const auto report = contracts::execute_payouts(l, pool, by_region, to_date(now));
            py::dict paid;
            for (const auto& line : report.lines) paid[py::str(line.policy_id)] = py::make_tuple(line.triggered, line.paid);
            return paid;
        },
        py::arg("ledger"), py::arg("pool"), py::arg("series"), py::arg("now"),
        "Returns {policy_id: (triggered, paid)}.");
}

void bind_settlement(py::module_& m) {
    py::class_<settlement::RailMetrics>(m, "RailMetrics")
        .def_readonly("trades", &settlement::RailMetrics::trades)
        .def_readonly("excluded", &settlement::RailMetrics::excluded)
        .def_readonly("mean_fees", &settlement::RailMetrics::mean_fees)
        .def_readonly("mean_delay_minutes", &settlement::RailMetrics::mean_delay_minutes)
        .def_readonly("mean_proceeds", &settlement::RailMetrics::mean_proceeds);

    py::class_<settlement::SimulationMetrics>(m, "SimulationMetrics")
        .def_readonly("seed", &settlement::SimulationMetrics::seed)
        .def_readonly("n_trades", &settlement::SimulationMetrics::n_trades)
        .def_readonly("traditional", &settlement::SimulationMetrics::traditional)
        .def_readonly("stablecoin", &settlement::SimulationMetrics::stablecoin)
        .def("__eq__", [](const settlement::SimulationMetrics& a, const settlement::SimulationMetrics& b) {
            return a == b;
        });

    m.def(
        "run_settlement",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> n_trades, std::optional<std::uint64_t> seed,
           unsigned threads) {
            const auto cfg = config::parse_scenario(config);
            return settlement::run_simulation(cfg.rails.traditional, cfg.rails.stablecoin,
                                              n_trades.value_or(cfg.settlement.n_trades), cfg.settlement.invoice,
                                              seed.value_or(cfg.seed), threads);
        },
        py::arg("config"), py::arg("n_trades") = std::nullopt, py::arg("seed") = std::nullopt, py::arg("threads") = 1,
        "Runs both rails from a scenario config.");
    m.def(
        "derive_regime_costs",
        [](const econ::CostRegime& baseline, const settlement::SimulationMetrics& metrics, double fraction,
           double minor_per_model_unit) {
            return settlement::derive_regime_costs(baseline, metrics, {fraction, minor_per_model_unit});
        },
        py::arg("baseline"), py::arg("metrics"), py::arg("input_fee_reduction_fraction") = 0.0,
        py::arg("minor_per_model_unit") = 1.0);
}

void bind_cli(py::module_& m) {
    m.def(
        "load_scenario", [](const std::filesystem::path& p) { return config::parse_scenario(p).model; },
        py::arg("path"), "The FarmScenario of a scenario config.");
    m.def(
        "run_command",
        [](const std::filesystem::path& config, const std::string& command) {
            const auto cmd = cli::parse_command(command);
            if (!cmd) throw py::value_error("unknown command '" + command + "'");
            return cli::run_command(config::parse_scenario(config), *cmd);
        },
        py::arg("config"), py::arg("command"), "Returns {report name: contents} without touching the filesystem.");
}

}  // namespace

PYBIND11_MODULE(_agristable, m) {
    m.doc() = "Farm-finance model, stablecoin ledger, contracts and settlement simulator";

    auto base = py::register_exception<Error>(m, "AgristableError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<InvariantError>(m, "InvariantError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<LedgerError>(m, "LedgerError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<SettlementError>(m, "SettlementError", base.ptr());

    bind_econ(m);
    bind_opt(m);
    bind_ledger(m);
    bind_contracts(m);
    bind_settlement(m);
    bind_cli(m);
}
