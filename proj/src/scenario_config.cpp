// SPDX-License-Identifier: Apache-2.0
#include "agristable/scenario_config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "agristable/error.hpp"

namespace agristable::config {
namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Path-tracking readers. Every failure names the JSON pointer of the value.

class Node;

class Object {
public:
    Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Node at(const std::string& key);
    std::optional<Node> find(const std::string& key);

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + "/" + key + ": unknown key");
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& rule) const { throw ConfigError(path_ + ": " + rule); }

    const std::string& path() const { return path_; }
    bool is_null() const { return j_.is_null(); }

    Object object() const {
        if (!j_.is_object()) fail("expected an object");
        return Object(j_, path_);
    }

    std::vector<Node> array() const {
        if (!j_.is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_[i], path_ + "/" + std::to_string(i));
        return out;
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }

    std::int64_t integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        if (j_.is_number_unsigned() && j_.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
            fail("integer out of range");
        return j_.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        if (!j_.is_number_unsigned() && j_.get<std::int64_t>() < 0) fail("must be non-negative");
        return j_.get<std::uint64_t>();
    }

    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }

private:
    const json& j_;
    std::string path_;
};

Node Object::at(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(path_ + "/" + key + ": required key is missing");
    return Node(*it, path_ + "/" + key);
}

std::optional<Node> Object::find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Node(*it, path_ + "/" + key);
}

/// Runs a module constructor and re-throws its invariant failure with the
/// config location attached.
template <class F>
auto validated(const std::string& path, F&& make) {
    try {
        return make();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Model

econ::ShockDistribution read_shock(const Node& n) {
    Object o = n.object();
    const std::string family = o.at("family").string();
    auto dist = validated(n.path(), [&]() -> econ::ShockDistribution {
        if (family == "degenerate") return econ::ShockDistribution::degenerate(o.at("value").number());
        if (family == "lognormal") return econ::ShockDistribution::lognormal(o.at("mu").number(), o.at("sigma").number());
        if (family == "discrete") {
            std::vector<econ::Discrete::Atom> atoms;
            for (const Node& a : o.at("atoms").array()) {
                Object ao = a.object();
                atoms.push_back({ao.at("value").number(), ao.at("probability").number()});
                ao.finish();
            }
            return econ::ShockDistribution::discrete(std::move(atoms));
        }
        o.at("family").fail("family must be degenerate, lognormal or discrete");
    });
    o.finish();
    return dist;
}

econ::CostRegime read_regime(const Node& n, econ::RegimeLabel label) {
    Object o = n.object();
    const double w = o.at("input_price").number();
    const double tau = o.at("tau_i").number();
    const double cf = o.at("fixed_output_cost").number();
    std::optional<double> cap;
    if (auto c = o.find("capital_cap"); c && !c->is_null()) cap = c->number();
    std::optional<econ::Financing> financing;
    if (auto f = o.find("financing"); f && !f->is_null()) {
        Object fo = f->object();
        financing = econ::Financing{fo.at("fee_per_unit").number(), fo.at("interest_rate").number()};
        fo.finish();
    }
    o.finish();
    return validated(n.path(), [&] { return econ::CostRegime(label, w, tau, cf, cap, financing); });
}

econ::FarmScenario read_model(const Node& n) {
    Object o = n.object();
    Node prod = o.at("production");
    Object po = prod.object();
    const double tfp = po.at("tfp").number();
    const double alpha = po.at("alpha").number();
    po.finish();
    auto production = validated(prod.path(), [&] { return econ::ProductionParams(tfp, alpha); });
    auto price = read_shock(o.at("price"));
    auto yield = read_shock(o.at("yield"));
    auto baseline = read_regime(o.at("baseline"), econ::RegimeLabel::baseline);
    Node stable_node = o.at("stablecoin");
    auto stablecoin = read_regime(stable_node, econ::RegimeLabel::stablecoin);
    o.finish();
    return validated(stable_node.path(), [&] {
        return econ::FarmScenario(production, std::move(price), std::move(yield), std::move(baseline),
                                  std::move(stablecoin));
    });
}

std::vector<StaticsSweep> read_statics(const Node& n) {
    std::vector<StaticsSweep> out;
    for (const Node& s : n.array()) {
        Object o = s.object();
        StaticsSweep sweep;
        const std::string regime = o.at("regime").string();
        if (regime == "baseline")
            sweep.regime = econ::RegimeLabel::baseline;
        else if (regime == "stablecoin")
            sweep.regime = econ::RegimeLabel::stablecoin;
        else
            o.at("regime").fail("regime must be baseline or stablecoin");
        auto param = opt::parse_sweep_parameter(o.at("parameter").string());
        if (!param) o.at("parameter").fail("parameter must be tau_i, fixed_output_cost, capital_cap or input_price");
        sweep.parameter = *param;
        Node grid = o.at("grid");
        for (const Node& v : grid.array()) {
            if (v.is_null()) {
                if (sweep.parameter != opt::SweepParameter::capital_cap)
                    v.fail("only capital_cap grids accept null (unconstrained)");
                sweep.grid.emplace_back(std::nullopt);
            } else {
                sweep.grid.emplace_back(v.number());
            }
        }
        if (sweep.grid.empty()) grid.fail("grid must not be empty");
        o.finish();
        out.push_back(std::move(sweep));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rails and settlement

settlement::RailSpec read_rail(const Node& n, settlement::RailKind kind) {
    Object o = n.object();
    settlement::RailSpec r;
    r.kind = kind;
    {
        Node d = o.at("delay");
        Object dobj = d.object();
        const std::string k = dobj.at("kind").string();
        if (k == "constant") {
            r.delay.kind = settlement::DelaySpec::Kind::constant;
            r.delay.low = r.delay.high = dobj.at("value").integer();
        } else if (k == "uniform_int") {
            r.delay.kind = settlement::DelaySpec::Kind::uniform_int;
            r.delay.low = dobj.at("low").integer();
            r.delay.high = dobj.at("high").integer();
        } else {
            dobj.at("kind").fail("delay kind must be constant or uniform_int");
        }
        const std::string unit = dobj.at("unit").string();
        if (unit == "minutes")
            r.delay.unit = settlement::TimeUnit::minutes;
        else if (unit == "days")
            r.delay.unit = settlement::TimeUnit::days;
        else
            dobj.at("unit").fail("unit must be minutes or days");
        dobj.finish();
    }
    r.fx_fee_rate = o.at("fx_fee_rate").number();
    r.hops = o.at("hops").integer();
    r.per_hop_fee = o.at("per_hop_fee").integer();
    r.fixed_instrument_cost = o.at("fixed_instrument_cost").integer();
    r.network_fee = o.at("network_fee").integer();
    o.finish();
    validated(n.path(), [&] {
        r.validate();
        return 0;
    });
    return r;
}

SettlementConfig read_settlement(const Node& n) {
    Object o = n.object();
    SettlementConfig s;
    s.n_trades = o.at("n_trades").unsigned_integer();
    if (s.n_trades < 1) o.at("n_trades").fail("must be at least 1");
    {
        Node inv = o.at("invoice");
        Object io = inv.object();
        const std::string k = io.at("kind").string();
        if (k == "fixed") {
            s.invoice.kind = settlement::InvoiceDistribution::Kind::fixed;
            s.invoice.low = s.invoice.high = io.at("value").integer();
        } else if (k == "uniform_int") {
            s.invoice.kind = settlement::InvoiceDistribution::Kind::uniform_int;
            s.invoice.low = io.at("low").integer();
            s.invoice.high = io.at("high").integer();
        } else {
            io.at("kind").fail("invoice kind must be fixed or uniform_int");
        }
        io.finish();
        validated(inv.path(), [&] {
            s.invoice.validate();
            return 0;
        });
    }
    if (auto t = o.find("threads")) {
        const auto v = t->unsigned_integer();
        if (v < 1 || v > 256) t->fail("threads must lie in [1, 256]");
        s.threads = static_cast<unsigned>(v);
    }
    if (auto d = o.find("derive_regime")) s.derive_regime = d->boolean();
    if (auto b = o.find("bridge")) {
        Object bo = b->object();
        s.bridge.input_fee_reduction_fraction = bo.at("input_fee_reduction_fraction").number();
        if (!(s.bridge.input_fee_reduction_fraction >= 0.0 && s.bridge.input_fee_reduction_fraction <= 1.0))
            bo.at("input_fee_reduction_fraction").fail("must lie in [0, 1]");
        s.bridge.minor_per_model_unit = bo.at("minor_per_model_unit").number();
        if (!(s.bridge.minor_per_model_unit > 0.0)) bo.at("minor_per_model_unit").fail("must be positive");
        bo.finish();
    }
    o.finish();
    return s;
}

// ---------------------------------------------------------------------------
// Contracts

std::vector<AccountSeed> read_accounts(const Node& n) {
    std::vector<AccountSeed> out;
    std::set<std::string> ids;
    for (const Node& a : n.array()) {
        Object o = a.object();
        AccountSeed s;
        s.id = o.at("id").string();
        if (s.id.empty()) o.at("id").fail("must not be empty");
        if (!ids.insert(s.id).second) o.at("id").fail("duplicate account id");
        auto role = ledger::parse_role(o.at("role").string());
        if (!role) o.at("role").fail("unknown account role");
        if (*role == ledger::Role::issuer_reserve || *role == ledger::Role::fee_sink || *role == ledger::Role::fx_desk)
            o.at("role").fail("system roles cannot be declared");
        s.role = *role;
        if (auto b = o.find("stablecoin")) {
            s.stablecoin = b->integer();
            if (s.stablecoin < 0) b->fail("must be non-negative");
        }
        o.finish();
        out.push_back(std::move(s));
    }
    return out;
}

// The runner opens the vault and pool accounts itself.
void reject_declared(const Node& accounts_node, const std::vector<AccountSeed>& accounts, const std::string& id,
                     const std::string& what) {
    const auto nodes = accounts_node.array();
    for (std::size_t i = 0; i < accounts.size(); ++i)
        if (accounts[i].id == id) nodes[i].fail("'" + id + "' is the " + what + " and is opened automatically");
}

EscrowConfig read_escrow(const Node& n) {
    Object o = n.object();
    EscrowConfig e;
    e.accounts = read_accounts(o.at("accounts"));
    if (auto v = o.find("vault")) e.vault = v->string();
    reject_declared(o.at("accounts"), e.accounts, e.vault, "vault");
    for (const Node& f : o.at("orders").array()) {
        Object fo = f.object();
        EscrowFixture fx;
        Object po = fo.at("order").object();
        fx.order.id = po.at("id").string();
        fx.order.buyer = po.at("buyer").string();
        fx.order.seller = po.at("seller").string();
        fx.order.price = po.at("price").integer();
        fx.order.quantity_ordered = po.at("quantity").number();
        fx.order.quality_spec = po.at("quality_spec").string();
        fx.order.deadline = po.at("deadline").integer();
        fx.order.oracle_id = po.at("oracle_id").string();
        po.finish();
        validated(fo.at("order").path(), [&] {
            fx.order.validate();
            return 0;
        });
        if (auto a = fo.find("attestation"); a && !a->is_null()) {
            Object ao = a->object();
            contracts::OracleAttestation att;
            auto cid = ao.find("contract_id");
            att.contract_id = cid ? cid->string() : fx.order.id;
            att.measured_quantity = ao.at("measured_quantity").number();
            att.quality_pass = ao.at("quality_pass").boolean();
            att.timestamp = ao.at("timestamp").integer();
            att.oracle_id = ao.at("oracle_id").string();
            ao.finish();
            fx.attestation = std::move(att);
        }
        fx.settle_at = fo.at("settle_at").integer();
        fo.finish();
        e.orders.push_back(std::move(fx));
    }
    o.finish();
    return e;
}

contracts::Date read_date(const Node& n) {
    auto d = contracts::parse_iso_date(n.string());
    if (!d) n.fail("expected an ISO-8601 date (YYYY-MM-DD)");
    return *d;
}

InsuranceConfig read_insurance(const Node& n) {
    Object o = n.object();
    InsuranceConfig c;
    c.accounts = read_accounts(o.at("accounts"));
    if (auto p = o.find("pool_account")) c.pool_account = p->string();
    reject_declared(o.at("accounts"), c.accounts, c.pool_account, "pool account");
    if (auto f = o.find("pool_funding")) {
        c.pool_funding = f->integer();
        if (c.pool_funding < 0) f->fail("must be non-negative");
    }
    std::set<std::string> ids;
    for (const Node& p : o.at("policies").array()) {
        Object po = p.object();
        contracts::InsurancePolicy pol;
        pol.id = po.at("id").string();
        pol.holder = po.at("holder").string();
        pol.region = po.at("region").string();
        pol.window_start = read_date(po.at("window_start"));
        pol.window_end = read_date(po.at("window_end"));
        pol.threshold_mm = po.at("threshold_mm").number();
        pol.payout = po.at("payout").integer();
        pol.premium = po.at("premium").integer();
        po.finish();
        validated(p.path(), [&] {
            pol.validate();
            return 0;
        });
        if (!ids.insert(pol.id).second) p.fail("duplicate policy id");
        c.policies.push_back(std::move(pol));
    }
    for (const Node& r : o.at("rainfall").array()) {
        Object ro = r.object();
        RainfallBinding b;
        b.file = ro.at("file").string();
        auto region = ro.find("region");
        b.region = region ? region->string() : std::filesystem::path(b.file).stem().string();
        ro.finish();
        c.rainfall.push_back(std::move(b));
    }
    c.settle_on = read_date(o.at("settle_on"));
    o.finish();
    return c;
}

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ScenarioConfig parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        throw ConfigError("parse error at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }

    Object o = Node(root, "").object();
    const std::uint64_t seed = o.at("seed").unsigned_integer();
    const std::uint64_t mc_n = o.at("monte_carlo_n").unsigned_integer();
    if (mc_n < 1) o.at("monte_carlo_n").fail("must be at least 1");
    auto model = read_model(o.at("model"));

    std::vector<StaticsSweep> statics;
    if (auto s = o.find("statics")) statics = read_statics(*s);

    Object ro = o.at("rails").object();
    RailsConfig rails{read_rail(ro.at("traditional"), settlement::RailKind::traditional),
                      read_rail(ro.at("stablecoin"), settlement::RailKind::stablecoin)};
    ro.finish();

    SettlementConfig settle;
    if (auto s = o.find("settlement")) settle = read_settlement(*s);

    std::optional<EscrowConfig> escrow;
    if (auto e = o.find("escrow"); e && !e->is_null()) escrow = read_escrow(*e);
    std::optional<InsuranceConfig> insurance;
    if (auto i = o.find("insurance"); i && !i->is_null()) insurance = read_insurance(*i);
    o.finish();

    return ScenarioConfig{
        .seed = seed,
        .monte_carlo_n = mc_n,
        .model = std::move(model),
        .statics = std::move(statics),
        .rails = std::move(rails),
        .settlement = std::move(settle),
        .escrow = std::move(escrow),
        .insurance = std::move(insurance),
        .base_dir = base_dir,
    };
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json write_shock(const econ::ShockDistribution& d) {
    json j = {{"family", d.family_name()}};
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, econ::Degenerate>) {
                j["value"] = f.value;
            } else if constexpr (std::is_same_v<T, econ::LogNormal>) {
                j["mu"] = f.mu;
                j["sigma"] = f.sigma;
            } else {
                j["atoms"] = json::array();
                for (const auto& a : f.atoms) j["atoms"].push_back({{"value", a.value}, {"probability", a.probability}});
            }
        },
        d.family());
    return j;
}

json write_regime(const econ::CostRegime& r) {
    json j = {{"input_price", r.input_price()}, {"tau_i", r.tau_i()}, {"fixed_output_cost", r.fixed_output_cost()}};
    j["capital_cap"] = r.capital_cap() ? json(*r.capital_cap()) : json(nullptr);
    if (r.financing())
        j["financing"] = {{"fee_per_unit", r.financing()->fee_per_unit}, {"interest_rate", r.financing()->interest_rate}};
    return j;
}

json write_rail(const settlement::RailSpec& r) {
    json delay = {{"unit", settlement::to_string(r.delay.unit)}};
    if (r.delay.kind == settlement::DelaySpec::Kind::constant) {
        delay["kind"] = "constant";
        delay["value"] = r.delay.low;
    } else {
        delay["kind"] = "uniform_int";
        delay["low"] = r.delay.low;
        delay["high"] = r.delay.high;
    }
    return {{"delay", delay},
            {"fx_fee_rate", r.fx_fee_rate},
            {"hops", r.hops},
            {"per_hop_fee", r.per_hop_fee},
            {"fixed_instrument_cost", r.fixed_instrument_cost},
            {"network_fee", r.network_fee}};
}

json write_accounts(const std::vector<AccountSeed>& accounts) {
    json a = json::array();
    for (const auto& s : accounts) a.push_back({{"id", s.id}, {"role", ledger::to_string(s.role)}, {"stablecoin", s.stablecoin}});
    return a;
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig& c) {
    json root;
    root["seed"] = c.seed;
    root["monte_carlo_n"] = c.monte_carlo_n;
    root["model"] = {
        {"production", {{"tfp", c.model.production().tfp()}, {"alpha", c.model.production().alpha()}}},
        {"price", write_shock(c.model.price())},
        {"yield", write_shock(c.model.yield())},
        {"baseline", write_regime(c.model.baseline())},
        {"stablecoin", write_regime(c.model.stablecoin())},
    };
    if (!c.statics.empty()) {
        json s = json::array();
        for (const auto& sw : c.statics) {
            json grid = json::array();
            for (const auto& v : sw.grid) grid.push_back(v ? json(*v) : json(nullptr));
            s.push_back({{"regime", econ::to_string(sw.regime)}, {"parameter", opt::to_string(sw.parameter)}, {"grid", grid}});
        }
        root["statics"] = s;
    }
    root["rails"] = {{"traditional", write_rail(c.rails.traditional)}, {"stablecoin", write_rail(c.rails.stablecoin)}};

    json invoice;
    if (c.settlement.invoice.kind == settlement::InvoiceDistribution::Kind::fixed) {
        invoice = {{"kind", "fixed"}, {"value", c.settlement.invoice.low}};
    } else {
        invoice = {{"kind", "uniform_int"}, {"low", c.settlement.invoice.low}, {"high", c.settlement.invoice.high}};
    }
    root["settlement"] = {
        {"n_trades", c.settlement.n_trades},
        {"invoice", invoice},
        {"threads", c.settlement.threads},
        {"derive_regime", c.settlement.derive_regime},
        {"bridge",
         {{"input_fee_reduction_fraction", c.settlement.bridge.input_fee_reduction_fraction},
          {"minor_per_model_unit", c.settlement.bridge.minor_per_model_unit}}},
    };

    if (c.escrow) {
        json orders = json::array();
        for (const auto& f : c.escrow->orders) {
            const auto& po = f.order;
            json order = {{"order",
                           {{"id", po.id},
                            {"buyer", po.buyer},
                            {"seller", po.seller},
                            {"price", po.price},
                            {"quantity", po.quantity_ordered},
                            {"quality_spec", po.quality_spec},
                            {"deadline", po.deadline},
                            {"oracle_id", po.oracle_id}}},
                          {"settle_at", f.settle_at}};
            if (f.attestation) {
                const auto& a = *f.attestation;
                order["attestation"] = {{"contract_id", a.contract_id},
                                        {"measured_quantity", a.measured_quantity},
                                        {"quality_pass", a.quality_pass},
                                        {"timestamp", a.timestamp},
                                        {"oracle_id", a.oracle_id}};
            }
            orders.push_back(order);
        }
        root["escrow"] = {{"accounts", write_accounts(c.escrow->accounts)}, {"vault", c.escrow->vault}, {"orders", orders}};
    }

    if (c.insurance) {
        const auto& ins = *c.insurance;
        json policies = json::array();
        for (const auto& p : ins.policies)
            policies.push_back({{"id", p.id},
                                {"holder", p.holder},
                                {"region", p.region},
                                {"window_start", contracts::format_iso_date(p.window_start)},
                                {"window_end", contracts::format_iso_date(p.window_end)},
                                {"threshold_mm", p.threshold_mm},
                                {"payout", p.payout},
                                {"premium", p.premium}});
        json rainfall = json::array();
        for (const auto& b : ins.rainfall) rainfall.push_back({{"region", b.region}, {"file", b.file}});
        root["insurance"] = {{"accounts", write_accounts(ins.accounts)},
                             {"pool_account", ins.pool_account},
                             {"pool_funding", ins.pool_funding},
                             {"policies", policies},
                             {"rainfall", rainfall},
                             {"settle_on", contracts::format_iso_date(ins.settle_on)}};
    }
    return root.dump(2) + "\n";
}

}  // namespace agristable::config
