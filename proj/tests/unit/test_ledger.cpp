// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "agristable/error.hpp"
#include "agristable/ledger.hpp"
#include "support/ledger_ops.hpp"

using namespace agristable;
using namespace agristable::ledger;

namespace {

LedgerState two_party() {
    LedgerState s;
    s.open_account("buyer", Role::buyer);
    s.open_account("coop", Role::cooperative);
    return s;
}

template <class F>
void expect_atomic_failure(LedgerState& s, F&& op, LedgerError::Code code) {
    const LedgerState before = s;
    try {
        op(s);
        ADD_FAILURE() << "operation should have failed";
    } catch (const LedgerError& e) {
        EXPECT_EQ(e.code(), code);
    }
    EXPECT_EQ(s, before);
}

}  // namespace

TEST(Mint, FirstIssuance) {
    auto s = two_party();
    s.mint("buyer", 10000);
    EXPECT_EQ(s.circulating_stablecoin(), 10000);
    EXPECT_EQ(s.reserve_fiat(), 10000);
    EXPECT_EQ(s.balance("buyer", Currency::stablecoin), 10000);
    EXPECT_EQ(s.journal().back().op, OpKind::mint);
}

TEST(Mint, RejectsNonPositiveAndUnknown) {
    auto s = two_party();
    expect_atomic_failure(s, [](LedgerState& l) { l.mint("buyer", 0); }, LedgerError::Code::invalid_amount);
    expect_atomic_failure(s, [](LedgerState& l) { l.mint("nobody", 5); }, LedgerError::Code::unknown_account);
    expect_atomic_failure(s, [](LedgerState& l) { l.mint(std::string(LedgerState::kIssuer), 5); },
                          LedgerError::Code::invalid_amount);
}

TEST(Mint, TwoMintsMatchJournalOracle) {
    auto s = two_party();
    s.mint("buyer", 5000);
    s.mint("coop", 7000);
    const auto oracle = test_support::totals_from_journal(s.journal());
    EXPECT_EQ(oracle.circulating_stablecoin, 12000);
    EXPECT_EQ(s.circulating_stablecoin(), 12000);
    EXPECT_EQ(s.reserve_fiat(), 12000);
    EXPECT_EQ(s.totals(), oracle);
}

TEST(Redeem, BurnsAgainstReserve) {
    auto s = two_party();
    s.mint("buyer", 5000);
    s.redeem("buyer", 2000);
    EXPECT_EQ(s.circulating_stablecoin(), 3000);
    EXPECT_EQ(s.reserve_fiat(), 3000);
    expect_atomic_failure(s, [](LedgerState& l) { l.redeem("buyer", 3001); }, LedgerError::Code::insufficient_funds);
}

TEST(Transfer, FeeGoesToSink) {
    auto s = two_party();
    s.mint("buyer", 100);
    s.transfer("buyer", "coop", 60, 1);
    EXPECT_EQ(s.balance("buyer", Currency::stablecoin), 39);
    EXPECT_EQ(s.balance("coop", Currency::stablecoin), 60);
    EXPECT_EQ(s.balance(LedgerState::kFeeSink, Currency::stablecoin), 1);
    EXPECT_EQ(s.totals().stablecoin, 100);
}

TEST(Transfer, OverdraftLeavesStateUnchanged) {
    auto s = two_party();
    s.mint("buyer", 50);
    expect_atomic_failure(s, [](LedgerState& l) { l.transfer("buyer", "coop", 60); },
                          LedgerError::Code::insufficient_funds);
    // amount fits but amount + fee does not
    expect_atomic_failure(s, [](LedgerState& l) { l.transfer("buyer", "coop", 50, 1); },
                          LedgerError::Code::insufficient_funds);
    expect_atomic_failure(s, [](LedgerState& l) { l.transfer("buyer", "coop", 0); }, LedgerError::Code::invalid_amount);
    expect_atomic_failure(s, [](LedgerState& l) { l.transfer("buyer", "coop", 5, -1); },
                          LedgerError::Code::invalid_amount);
    expect_atomic_failure(s, [](LedgerState& l) { l.transfer("buyer", "ghost", 5); },
                          LedgerError::Code::unknown_account);
}

TEST(Transfer, RandomChainConservesTotals) {
    auto s = two_party();
    s.open_account("farmer", Role::farmer);
    s.mint("buyer", 1'000'000);
    s.deposit_fiat("coop", 500'000);
    const auto before = s.totals();
    std::mt19937_64 gen(3);
    const std::vector<std::string> ids{"buyer", "coop", "farmer", std::string(LedgerState::kFeeSink)};
    int applied = 0;
    while (applied < 1000) {
        const auto& from = ids[gen() % ids.size()];
        const auto& to = ids[gen() % ids.size()];
        const auto cur = gen() % 2 ? Currency::stablecoin : Currency::local_fiat;
        const Minor bal = s.balance(from, cur);
        if (bal < 2) continue;
        const Minor amount = 1 + static_cast<Minor>(gen() % static_cast<std::uint64_t>(bal - 1));
        const Minor fee = static_cast<Minor>(gen() % static_cast<std::uint64_t>(bal - amount + 1));
        s.transfer(from, to, amount, fee, cur);
        ++applied;
    }
    EXPECT_EQ(s.totals(), before);
    EXPECT_EQ(test_support::totals_from_journal(s.journal()), s.totals());
    s.check_invariants();
}

TEST(FxConvert, IdentityRate) {
    auto s = two_party();
    s.mint("coop", 10000);
    s.deposit_fiat(std::string(LedgerState::kFxDesk), 10000);
    EXPECT_EQ(s.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 10000, 1.0, 0.0), 10000);
    EXPECT_EQ(s.balance("coop", Currency::local_fiat), 10000);
    EXPECT_EQ(s.balance("coop", Currency::stablecoin), 0);
}

TEST(FxConvert, RateAndFeeRoundDown) {
    auto s = two_party();
    s.mint("coop", 10000);
    s.deposit_fiat(std::string(LedgerState::kFxDesk), 50'000'000);
    const auto before = s.totals();
    const Minor credited = s.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 10000, 4000.0, 0.03);
    // Integer oracle: 10000 * 4000 * 97 / 100.
    EXPECT_EQ(credited, Minor{10000} * 4000 * 97 / 100);
    EXPECT_EQ(credited, 38'800'000);
    EXPECT_EQ(s.balance("coop", Currency::local_fiat), 38'800'000);
    EXPECT_EQ(s.balance(LedgerState::kFxDesk, Currency::local_fiat), 11'200'000);
    EXPECT_EQ(s.totals(), before);
    EXPECT_EQ(s.journal().back().rate, 4000.0);
    EXPECT_EQ(s.journal().back().fee_rate, 0.03);
}

TEST(FxConvert, FloorsFractionalMinorUnits) {
    auto s = two_party();
    s.deposit_fiat("coop", 4001);
    s.mint(std::string(LedgerState::kFxDesk), 10);
    // 4001 / 4000 = 1.00025 -> 1
    EXPECT_EQ(s.fx_convert("coop", Currency::local_fiat, Currency::stablecoin, 4001, 1.0 / 4000.0, 0.0), 1);
    // Decimal rates are honoured exactly despite binary representation.
    s.deposit_fiat("fx_desk", 10'000'000);
    s.mint("coop", 1'000'000);
    EXPECT_EQ(s.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 1'000'000, 1.0, 0.03), 970'000);
    EXPECT_EQ(s.fx_convert("coop", Currency::local_fiat, Currency::stablecoin, 700, 0.1, 0.0), 70);
}

TEST(FxConvert, Guards) {
    auto s = two_party();
    s.mint("coop", 100);
    s.deposit_fiat(std::string(LedgerState::kFxDesk), 100);
    expect_atomic_failure(s, [](LedgerState& l) { l.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 101, 1.0, 0.0); },
                          LedgerError::Code::insufficient_funds);
    expect_atomic_failure(s, [](LedgerState& l) { l.fx_convert("coop", Currency::stablecoin, Currency::stablecoin, 10, 1.0, 0.0); },
                          LedgerError::Code::unsupported_pair);
    expect_atomic_failure(s, [](LedgerState& l) { l.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 10, 0.0, 0.0); },
                          LedgerError::Code::invalid_amount);
    expect_atomic_failure(s, [](LedgerState& l) { l.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 10, 1.0, 1.0); },
                          LedgerError::Code::invalid_amount);
    // desk only holds 100 local units
    expect_atomic_failure(s, [](LedgerState& l) { l.fx_convert("coop", Currency::stablecoin, Currency::local_fiat, 50, 4.0, 0.0); },
                          LedgerError::Code::insufficient_funds);
}

TEST(Accounts, OpeningRules) {
    LedgerState s;
    s.open_account("a", Role::farmer);
    EXPECT_THROW(s.open_account("a", Role::buyer), LedgerError);
    EXPECT_THROW(s.open_account("desk2", Role::fx_desk), LedgerError);
    EXPECT_THROW(s.open_account("", Role::farmer), LedgerError);
    EXPECT_THROW(s.account("zzz"), LedgerError);
}

TEST(ValueWrappers, LeaveInputUntouched) {
    const auto s0 = mint(two_party(), "buyer", 500);
    const auto s1 = transfer(s0, "buyer", "coop", 200, 5);
    EXPECT_EQ(s0.balance("buyer", Currency::stablecoin), 500);
    EXPECT_EQ(s1.balance("buyer", Currency::stablecoin), 295);
    EXPECT_EQ(s1.balance("coop", Currency::stablecoin), 200);
}

TEST(ToMinorUnits, RoundsHalfToEven) {
    EXPECT_EQ(to_minor_units(0.5), 0);
    EXPECT_EQ(to_minor_units(1.5), 2);
    EXPECT_EQ(to_minor_units(2.5), 2);
    EXPECT_EQ(to_minor_units(-2.5), -2);
    EXPECT_EQ(to_minor_units(0.125, 100.0), 12);
    EXPECT_EQ(to_minor_units(1.2345, 100.0), 123);
    EXPECT_THROW(to_minor_units(1e30), LedgerError);
}

// Properties over random operation sequences.

TEST(LedgerProperties, ReserveConservationReplayAtomicity) {
    LedgerState s;
    test_support::RandomLedgerDriver driver(77);
    driver.open_accounts(s, 6);
    int failures = 0;
    for (int i = 0; i < 3000; ++i) {
        const LedgerState snapshot = s;
        const auto totals_before = s.totals();
        const auto journal_len = s.journal().size();
        if (!driver.step(s)) {
            ++failures;
            ASSERT_EQ(s, snapshot) << "failed op mutated state at step " << i;
            continue;
        }
        ASSERT_LE(s.circulating_stablecoin(), s.reserve_fiat());
        const auto& e = s.journal().back();
        ASSERT_EQ(s.journal().size(), journal_len + 1);
        if (e.op == OpKind::transfer || e.op == OpKind::fx_convert) ASSERT_EQ(s.totals(), totals_before);
    }
    EXPECT_GT(failures, 100);
    s.check_invariants();
    EXPECT_EQ(replay(s.journal()), s);

    std::stringstream lines;
    write_journal(lines, s.journal());
    EXPECT_EQ(replay(read_journal(lines)), s);
}

TEST(Journal, LineFormat) {
    auto s = two_party();
    s.mint("buyer", 100);
    s.transfer("buyer", "coop", 60, 1, Currency::stablecoin, "po-1");
    std::stringstream out;
    write_journal(out, s.journal());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(out, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[3],
              R"({"op":"transfer","params":{"amount":60,"currency":"stablecoin","fee":1,"from":"buyer","memo":"po-1","to":"coop"},)"
              R"("seq":3,"totals":{"circulating_stablecoin":100,"local_fiat":0,"reserve_fiat":100,"stablecoin":100}})");
}

TEST(Journal, ReplayRejectsTamperedTotals) {
    auto s = two_party();
    s.mint("buyer", 100);
    auto journal = s.journal();
    journal.back().totals.reserve_fiat = 99;
    EXPECT_THROW(replay(journal), InvariantError);
}
