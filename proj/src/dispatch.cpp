// SPDX-License-Identifier: Apache-2.0
#include "agristable/dispatch.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "agristable/error.hpp"
#include "agristable/format.hpp"

namespace agristable::cli {
namespace {

using json = nlohmann::json;

constexpr std::string_view kCommandNames[] = {"optimize", "compare", "statics", "settle", "escrow", "insure", "all"};

// Summary is a flat, sorted list of dotted `key=value` lines.
void flatten(const json& j, const std::string& prefix, std::ostream& out) {
    auto child = [&](const std::string& k) { return prefix.empty() ? k : prefix + "." + k; };
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, child(k), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], child(std::to_string(i)), out);
    } else if (j.is_string()) {
        out << prefix << '=' << j.get<std::string>() << '\n';
    } else if (j.is_number_float()) {
        out << prefix << '=' << format_double(j.get<double>()) << '\n';
    } else {
        out << prefix << '=' << j.dump() << '\n';
    }
}

std::string cap_text(const std::optional<double>& cap) { return cap ? format_double(*cap) : "unconstrained"; }

json solution_json(const opt::Solution& s) {
    return {{"optimal_input", s.optimal_input},
            {"expected_profit", s.expected_profit_at_opt},
            {"constrained", s.constrained},
            {"method", opt::to_string(s.method)}};
}

std::string comparison_csv(const econ::FarmScenario& scenario, const opt::RegimeComparison& c) {
    std::ostringstream out;
    out << "regime,input_price,tau_i,fixed_output_cost,capital_cap,optimal_input,expected_profit,constrained,"
           "unconstrained_input,unconstrained_profit\n";
    auto row = [&](const econ::CostRegime& r, const opt::Solution& s, const opt::Solution& u) {
        out << econ::to_string(r.label()) << ',' << format_double(r.input_price()) << ',' << format_double(r.tau_i())
            << ',' << format_double(r.fixed_output_cost()) << ',' << cap_text(r.capital_cap()) << ','
            << format_double(s.optimal_input) << ',' << format_double(s.expected_profit_at_opt) << ','
            << (s.constrained ? "true" : "false") << ',' << format_double(u.optimal_input) << ','
            << format_double(u.expected_profit_at_opt) << '\n';
    };
    row(scenario.baseline(), c.baseline_solution, c.baseline_unconstrained);
    row(scenario.stablecoin(), c.stablecoin_solution, c.stablecoin_unconstrained);
    return out.str();
}

json comparison_json(const opt::RegimeComparison& c) {
    return {{"baseline", solution_json(c.baseline_solution)},
            {"stablecoin", solution_json(c.stablecoin_solution)},
            {"baseline_unconstrained", solution_json(c.baseline_unconstrained)},
            {"stablecoin_unconstrained", solution_json(c.stablecoin_unconstrained)},
            {"delta_input", c.delta_input},
            {"delta_profit", c.delta_profit},
            {"proposition1_holds", c.proposition1_holds},
            {"proposition2_holds", opt::to_string(c.proposition2)}};
}

json regime_json(const econ::CostRegime& r) {
    json j = {{"input_price", r.input_price()},
              {"tau_i", r.tau_i()},
              {"fixed_output_cost", r.fixed_output_cost()},
              {"capital_cap", cap_text(r.capital_cap())}};
    return j;
}

struct Run {
    const config::ScenarioConfig& cfg;
    ReportSet reports;
    json summary = json::object();

    void optimize() {
        const auto& sc = cfg.model;
        const auto c = opt::compare_regimes(sc, opt::SolveMethod::closed_form);
        for (const auto* pair : {&c.baseline_solution, &c.stablecoin_solution}) {
            const auto& regime = pair == &c.baseline_solution ? sc.baseline() : sc.stablecoin();
            json s = solution_json(*pair);
            const auto mc = econ::expected_profit(pair->optimal_input, sc, regime,
                                                  econ::MonteCarlo{cfg.monte_carlo_n, cfg.seed});
            s["expected_profit_monte_carlo"] = mc.value;
            s["expected_profit_monte_carlo_se"] = mc.standard_error;
            summary["optimize"][std::string(econ::to_string(regime.label()))] = s;
        }
        reports["comparison.csv"] = comparison_csv(sc, c);
    }

    void compare(const econ::FarmScenario& sc) {
        const auto c = opt::compare_regimes(sc, opt::SolveMethod::closed_form);
        summary["comparison"] = comparison_json(c);
        reports["comparison.csv"] = comparison_csv(sc, c);
    }

    void statics() {
        if (cfg.statics.empty()) throw ConfigError("/statics: the statics command needs at least one sweep");
        std::ostringstream out;
        out << "sweep,regime,parameter,value,optimal_input,expected_profit,constrained\n";
        for (std::size_t i = 0; i < cfg.statics.size(); ++i) {
            const auto& sw = cfg.statics[i];
            const auto& regime = sw.regime == econ::RegimeLabel::baseline ? cfg.model.baseline() : cfg.model.stablecoin();
            const auto rows = opt::comparative_statics(cfg.model, regime, sw.parameter, sw.grid);
            for (const auto& r : rows)
                out << i << ',' << econ::to_string(sw.regime) << ',' << opt::to_string(sw.parameter) << ','
                    << cap_text(r.value) << ',' << format_double(r.solution.optimal_input) << ','
                    << format_double(r.solution.expected_profit_at_opt) << ','
                    << (r.solution.constrained ? "true" : "false") << '\n';
            summary["statics"][std::to_string(i)] = {{"regime", econ::to_string(sw.regime)},
                                                     {"parameter", opt::to_string(sw.parameter)},
                                                     {"rows", rows.size()}};
        }
        reports["statics.csv"] = out.str();
    }

    void settle(bool derive) {
        const auto& s = cfg.settlement;
        const auto m = settlement::run_simulation(cfg.rails.traditional, cfg.rails.stablecoin, s.n_trades, s.invoice,
                                                  cfg.seed, s.threads);
        std::ostringstream csv;
        settlement::write_metrics_csv(csv, m);
        reports["settlement.csv"] = csv.str();

        json sj = {{"n_trades", m.n_trades}, {"seed", m.seed}};
        for (const auto* r : {&m.traditional, &m.stablecoin})
            sj[std::string(settlement::to_string(r->kind))] = {
                {"trades", r->trades},
                {"excluded_trades", r->excluded},
                {"mean_fees", r->mean_fees},
                {"mean_delay_minutes", r->mean_delay_minutes},
                {"mean_delay_days", r->mean_delay_minutes / static_cast<double>(settlement::kMinutesPerDay)},
                {"mean_proceeds", r->mean_proceeds}};
        sj["mean_fee_gap"] = m.traditional.mean_fees - m.stablecoin.mean_fees;
        summary["settlement"] = sj;

        if (!derive) return;
        const auto derived = settlement::derive_regime_costs(cfg.model.baseline(), m, s.bridge);
        const econ::FarmScenario sc(cfg.model.production(), cfg.model.price(), cfg.model.yield(), cfg.model.baseline(),
                                    derived);
        summary["derived_regime"] = regime_json(derived);
        compare(sc);
    }

    static void open_seeded(ledger::LedgerState& l, const std::vector<config::AccountSeed>& accounts) {
        for (const auto& a : accounts) {
            l.open_account(a.id, a.role);
            if (a.stablecoin > 0) l.mint(a.id, a.stablecoin);
        }
    }

    void escrow() {
        if (!cfg.escrow) throw ConfigError("/escrow: the escrow command needs an escrow block");
        const auto& ec = *cfg.escrow;
        ledger::LedgerState l;
        l.open_account(ec.vault, ledger::Role::escrow_vault);
        open_seeded(l, ec.accounts);

        std::ostringstream log;
        log << "contract_id,step,day,result,state,detail\n";
        json contracts_json = json::object();
        for (const auto& f : ec.orders) {
            const auto& id = f.order.id;
            auto row = [&](std::string_view step, contracts::SimDay day, std::string_view result,
                           std::string_view state, const std::string& detail) {
                std::string clean = detail;
                for (char& ch : clean)
                    if (ch == ',' || ch == '\n') ch = ';';
                log << id << ',' << step << ',' << day << ',' << result << ',' << state << ',' << clean << '\n';
            };
            std::optional<contracts::EscrowContract> c;
            try {
                c = contracts::create_escrow(l, f.order, ec.vault);
                row("create", 0, "ok", contracts::to_string(c->state()), "");
                contracts::fund_escrow(l, *c);
                row("fund", 0, "ok", contracts::to_string(c->state()), "price=" + std::to_string(f.order.price));
            } catch (const ContractError& e) {
                row(c ? "fund" : "create", 0, "rejected", c ? contracts::to_string(c->state()) : "none", e.what());
                contracts_json[id] = {{"state", c ? contracts::to_string(c->state()) : "none"}};
                continue;
            }
            if (f.attestation) {
                try {
                    contracts::submit_attestation(*c, *f.attestation);
                    row("attest", f.attestation->timestamp, "ok", contracts::to_string(c->state()),
                        "oracle=" + f.attestation->oracle_id);
                } catch (const ContractError& e) {
                    row("attest", f.attestation->timestamp, "rejected", contracts::to_string(c->state()), e.what());
                }
            }
            const auto result = contracts::settle_escrow(l, *c, f.settle_at);
            row("settle", f.settle_at, contracts::to_string(result), contracts::to_string(c->state()), "");
            contracts_json[id] = {{"state", contracts::to_string(c->state())}};
        }
        l.check_invariants();
        reports["escrow_log.csv"] = log.str();
        std::ostringstream journal;
        ledger::write_journal(journal, l.journal());
        reports["escrow_journal.jsonl"] = journal.str();
        summary["escrow"] = {{"contracts", contracts_json}, {"vault_balance", l.balance(ec.vault, ledger::Currency::stablecoin)}};
    }

    void insure() {
        if (!cfg.insurance) throw ConfigError("/insurance: the insure command needs an insurance block");
        const auto& ic = *cfg.insurance;
        ledger::LedgerState l;
        open_seeded(l, ic.accounts);
        l.open_account(ic.pool_account, ledger::Role::insurer_pool);
        if (ic.pool_funding > 0) l.mint(ic.pool_account, ic.pool_funding);

        contracts::PremiumPool pool(ic.pool_account);
        for (const auto& p : ic.policies) contracts::issue_policy(l, pool, p);

        std::map<std::string, contracts::RainfallSeries> series;
        for (std::size_t i = 0; i < ic.rainfall.size(); ++i) {
            const auto& b = ic.rainfall[i];
            const std::string where = "/insurance/rainfall/" + std::to_string(i);
            std::optional<contracts::RainfallSeries> s;
            try {
                s = contracts::load_rainfall_csv(cfg.base_dir / b.file, b.region);
            } catch (const InvariantError& e) {
                throw ConfigError(where + "/file: " + e.what());
            }
            if (!series.emplace(b.region, std::move(*s)).second)
                throw ConfigError(where + "/region: duplicate rainfall binding for region '" + b.region + "'");
        }

        const auto report = contracts::execute_payouts(l, pool, series, ic.settle_on);
        l.check_invariants();
        std::ostringstream csv;
        contracts::write_payout_csv(csv, report);
        reports["insurance_payouts.csv"] = csv.str();
        std::ostringstream journal;
        ledger::write_journal(journal, l.journal());
        reports["insurance_journal.jsonl"] = journal.str();

        json pj = json::object();
        std::size_t triggered = 0;
        for (const auto& line : report.lines) {
            pj[line.policy_id] = {{"triggered", line.triggered}, {"paid", line.paid}};
            triggered += line.triggered ? 1 : 0;
        }
        summary["insurance"] = {{"pool_balance_before", report.pool_balance_before},
                                {"total_intended", report.total_intended},
                                {"total_paid", report.total_paid},
                                {"pool_balance_after", l.balance(ic.pool_account, ledger::Currency::stablecoin)},
                                {"triggered_policies", triggered},
                                {"policies", pj}};
    }
};

}  // namespace

std::optional<Command> parse_command(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kCommandNames); ++i)
        if (kCommandNames[i] == name) return static_cast<Command>(i);
    return std::nullopt;
}

std::string_view to_string(Command c) noexcept { return kCommandNames[static_cast<std::size_t>(c)]; }

ReportSet run_command(const config::ScenarioConfig& cfg, Command command) {
    Run run{cfg, {}, json::object()};
    run.summary["command"] = to_string(command);
    run.summary["seed"] = cfg.seed;
    run.summary["monte_carlo_n"] = cfg.monte_carlo_n;

    switch (command) {
        case Command::optimize: run.optimize(); break;
        case Command::compare: run.compare(cfg.model); break;
        case Command::statics: run.statics(); break;
        case Command::settle: run.settle(cfg.settlement.derive_regime); break;
        case Command::escrow: run.escrow(); break;
        case Command::insure: run.insure(); break;
        case Command::all:
            run.settle(true);
            if (cfg.escrow) run.escrow();
            if (cfg.insurance) run.insure();
            break;
    }

    std::ostringstream summary;
    flatten(run.summary, "", summary);
    run.reports["summary"] = summary.str();
    return std::move(run.reports);
}

void write_reports(const ReportSet& reports, const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(out_dir);
        for (const auto& [name, contents] : reports) {
            const auto path = out_dir / name;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cli", "cannot open " + path.string() + " for writing");
            written.push_back(path);
            out << contents;
            out.flush();
            if (!out) throw Error("cli", "failed writing " + path.string());
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
}

int invoke(const Invocation& inv, std::ostream& err) {
    const auto command = parse_command(inv.command);
    if (!command) {
        err << "error: unknown command '" << inv.command
            << "' (expected optimize, compare, statics, settle, escrow, insure or all)\n";
        return kExitConfig;
    }
    try {
        auto cfg = config::parse_scenario(inv.config);
        if (inv.seed) cfg.seed = *inv.seed;
        if (inv.mc_n) {
            if (*inv.mc_n < 1) throw ConfigError("--mc-n: must be at least 1");
            cfg.monte_carlo_n = *inv.mc_n;
        }
        const auto reports = run_command(cfg, *command);
        write_reports(reports, inv.out);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error [config] " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error [" << e.module() << "] " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace agristable::cli
