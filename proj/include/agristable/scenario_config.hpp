// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agristable/contracts.hpp"
#include "agristable/econ_model.hpp"
#include "agristable/ledger.hpp"
#include "agristable/optimizer.hpp"
#include "agristable/settlement_sim.hpp"

namespace agristable::config {

struct StaticsSweep {
    econ::RegimeLabel regime = econ::RegimeLabel::baseline;
    opt::SweepParameter parameter = opt::SweepParameter::tau_i;
    std::vector<std::optional<double>> grid;
    bool operator==(const StaticsSweep&) const = default;
};

struct SettlementConfig {
    std::uint64_t n_trades = 10000;
    settlement::InvoiceDistribution invoice{settlement::InvoiceDistribution::Kind::fixed, 1'000'000, 1'000'000};
    unsigned threads = 1;
    bool derive_regime = false;
    settlement::RegimeBridge bridge;
    bool operator==(const SettlementConfig&) const = default;
};

struct AccountSeed {
    std::string id;
    ledger::Role role = ledger::Role::farmer;
    ledger::Minor stablecoin = 0;  // minted at genesis
    bool operator==(const AccountSeed&) const = default;
};

struct EscrowFixture {
    contracts::PurchaseOrder order;
    std::optional<contracts::OracleAttestation> attestation;
    contracts::SimDay settle_at = 0;
    bool operator==(const EscrowFixture&) const = default;
};

struct EscrowConfig {
    std::vector<AccountSeed> accounts;
    std::string vault = "escrow_vault";
    std::vector<EscrowFixture> orders;
    bool operator==(const EscrowConfig&) const = default;
};

struct RainfallBinding {
    std::string region;
    std::string file;  // relative to the config file's directory
    bool operator==(const RainfallBinding&) const = default;
};

struct InsuranceConfig {
    std::vector<AccountSeed> accounts;
    std::string pool_account = "premium_pool";
    ledger::Minor pool_funding = 0;
    std::vector<contracts::InsurancePolicy> policies;
    std::vector<RainfallBinding> rainfall;
    contracts::Date settle_on;
    bool operator==(const InsuranceConfig&) const = default;
};

struct RailsConfig {
    settlement::RailSpec traditional;
    settlement::RailSpec stablecoin;
    bool operator==(const RailsConfig&) const = default;
};

/// Everything one run needs. Loaded from a single JSON document.
struct ScenarioConfig {
    std::uint64_t seed = 0;
    std::uint64_t monte_carlo_n = 1;
    econ::FarmScenario model;
    std::vector<StaticsSweep> statics;
    RailsConfig rails;
    SettlementConfig settlement;
    std::optional<EscrowConfig> escrow;
    std::optional<InsuranceConfig> insurance;
    /// Directory that relative file bindings resolve against; not serialized.
    std::filesystem::path base_dir;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError with line/column for syntax errors and with the JSON
/// pointer of the offending key for validation errors.
ScenarioConfig parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig parse_scenario(const std::filesystem::path& path);

/// Canonical JSON form; parse_scenario_text(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

}  // namespace agristable::config
