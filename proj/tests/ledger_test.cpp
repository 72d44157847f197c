#include "hummingbird/error.hpp"
#include "hummingbird/ledger.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace hummingbird;
using namespace hummingbird::ledger;

namespace {

constexpr std::int64_t kNine = 1'700'035'200 + 9 * 3600;
constexpr std::uint64_t kMbps = 1'000'000;
const wire::IsdAs kIa{1, 0xff0000000110};

Errc error_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::schema;
}

struct Market
{
    Pki pki{7};
    AsCredentials creds = pki.enroll(kIa);
    Ledger l{LedgerConfig{pki.root_key(), 0, "fee-sink"}};
    ObjectId token = 0;

    explicit Market(std::uint64_t fee = 0) : l(LedgerConfig{pki.root_key(), fee, "fee-sink"})
    {
        l.create_account("as", 1'000'000);
        l.create_account("alice", 1'000'000'000'000'000);
        l.create_account("bob", 1'000'000'000'000'000);
        token = l.register_as("as", creds.cert, prove_possession(creds, "as"));
        l.register_seller("as");
    }

    static AssetAttrs hour(std::uint16_t iface = 1, Direction dir = Direction::ingress)
    {
        return AssetAttrs{kIa, 100 * kMbps, kNine, kNine + 3600, iface, dir, 600, 5 * kMbps};
    }

    ObjectId issue(const AssetAttrs& a) { return l.issue("as", token, a); }
    ObjectId list(const AssetAttrs& a, std::uint64_t price = 1) { return l.create_listing("as", issue(a), price); }
};

unsigned __int128 total_area(const Ledger& l)
{
    unsigned __int128 s = 0;
    for (const auto& [_, v] : l.area_by_interface()) s += v;
    return s;
}

} // namespace

TEST(Ledger, TimeSplitRespectsGranularity)
{
    Market m;
    const auto a = m.issue(Market::hour());
    EXPECT_EQ(error_of([&] { m.l.split_time("as", a, kNine + 25 * 60); }), Errc::misaligned);
    EXPECT_EQ(error_of([&] { m.l.split_time("as", a, kNine); }), Errc::invalid_argument);
    const auto [early, late] = m.l.split_time("as", a, kNine + 10 * 60);
    EXPECT_EQ(m.l.asset(a), nullptr);
    EXPECT_EQ(m.l.asset(early)->attrs.start_time, kNine);
    EXPECT_EQ(m.l.asset(early)->attrs.expiration_time, kNine + 600);
    EXPECT_EQ(m.l.asset(late)->attrs.start_time, kNine + 600);
    EXPECT_EQ(m.l.asset(late)->attrs.expiration_time, kNine + 3600);
}

TEST(Ledger, BandwidthSplitRespectsMinimum)
{
    Market m;
    const auto a = m.issue(Market::hour());
    EXPECT_EQ(error_of([&] { m.l.split_bandwidth("as", a, 3 * kMbps); }), Errc::below_minimum);
    EXPECT_EQ(error_of([&] { m.l.split_bandwidth("as", a, 98 * kMbps); }), Errc::below_minimum);
    EXPECT_EQ(error_of([&] { m.l.split_bandwidth("as", a, 100 * kMbps); }), Errc::invalid_argument);
    const auto [rest, part] = m.l.split_bandwidth("as", a, 7 * kMbps);
    EXPECT_EQ(m.l.asset(rest)->attrs.bandwidth, 93 * kMbps);
    EXPECT_EQ(m.l.asset(part)->attrs.bandwidth, 7 * kMbps);
}

TEST(Ledger, FuseUndoesSplit)
{
    Market m;
    const auto orig = Market::hour();
    const auto a = m.issue(orig);
    const auto [x, y] = m.l.split_time("as", a, kNine + 1200);
    const auto t = m.l.fuse_time("as", y, x);
    EXPECT_EQ(m.l.asset(t)->attrs, orig);
    const auto [r, p] = m.l.split_bandwidth("as", t, 40 * kMbps);
    const auto b = m.l.fuse_bandwidth("as", r, p);
    EXPECT_EQ(m.l.asset(b)->attrs, orig);
    EXPECT_EQ(m.l.assets_of("as").size(), 1u);
    EXPECT_EQ(error_of([&] { m.l.fuse_time("as", b, b); }), Errc::invalid_argument);
}

TEST(Ledger, FuseRejectsIncompatibleAssets)
{
    Market m;
    const auto a = m.issue(Market::hour());
    const auto [x, y] = m.l.split_time("as", a, kNine + 1200);
    const auto [y1, y2] = m.l.split_time("as", y, kNine + 2400);
    EXPECT_EQ(error_of([&] { m.l.fuse_time("as", x, y2); }), Errc::incompatible);
    EXPECT_EQ(error_of([&] { m.l.fuse_bandwidth("as", x, y1); }), Errc::incompatible);
    const auto other = m.issue(Market::hour(2));
    const auto [o1, o2] = m.l.split_time("as", other, kNine + 1200);
    EXPECT_EQ(error_of([&] { m.l.fuse_time("as", x, o2); }), Errc::incompatible);
    EXPECT_EQ(error_of([&] { m.l.fuse_bandwidth("as", x, o1); }), Errc::incompatible);
    EXPECT_EQ(error_of([&] { m.l.fuse_time("alice", x, y1); }), Errc::not_owner);
}

TEST(Ledger, IssueNeedsMatchingToken)
{
    Market m;
    auto a = Market::hour();
    a.as = {1, 0xff0000000999};
    EXPECT_EQ(error_of([&] { m.issue(a); }), Errc::unauthorized);
    EXPECT_EQ(error_of([&] { m.l.issue("alice", m.token, Market::hour()); }), Errc::unauthorized);
    a = Market::hour();
    a.expiration_time += 60;
    EXPECT_EQ(error_of([&] { m.issue(a); }), Errc::misaligned);
    a = Market::hour();
    a.bandwidth = kMbps;
    EXPECT_EQ(error_of([&] { m.issue(a); }), Errc::below_minimum);
}

TEST(Ledger, RegistrationChecksCertificateAndPossession)
{
    Market m;
    const auto wrong_account = prove_possession(m.creds, "alice");
    EXPECT_EQ(error_of([&] { m.l.register_as("as", m.creds.cert, wrong_account); }), Errc::bad_signature);
    Pki rogue(8);
    const auto fake = rogue.enroll(kIa);
    EXPECT_FALSE(verify_certificate(fake.cert, m.pki.root_key()));
    EXPECT_TRUE(verify_certificate(m.creds.cert, m.pki.root_key()));
    EXPECT_EQ(error_of([&] { m.l.register_as("bob", fake.cert, prove_possession(fake, "bob")); }),
        Errc::bad_signature);
}

TEST(Ledger, BuyInsideListingLeavesThreeRemainders)
{
    Market m;
    const auto lid = m.list(Market::hour(), 3);
    const auto area = total_area(m.l);
    const auto seller_before = m.l.balance("as");
    const Want w{kNine + 1200, kNine + 1800, 20 * kMbps};
    const auto bought = m.l.buy("alice", lid, w);
    EXPECT_EQ(m.l.asset(bought)->owner, "alice");
    EXPECT_EQ(m.l.asset(bought)->attrs.bandwidth, 20 * kMbps);
    EXPECT_EQ(m.l.listing(lid), nullptr);

    const auto rem = m.l.all_listings();
    ASSERT_EQ(rem.size(), 3u);
    std::set<std::tuple<std::int64_t, std::int64_t, std::uint64_t>> got;
    for (const auto* l : rem) {
        EXPECT_EQ(l->unit_price, 3u);
        EXPECT_EQ(l->seller, "as");
        const auto& a = m.l.asset(l->asset)->attrs;
        got.emplace(a.start_time, a.expiration_time, a.bandwidth);
    }
    const std::set<std::tuple<std::int64_t, std::int64_t, std::uint64_t>> expect{
        {kNine, kNine + 1200, 100 * kMbps},
        {kNine + 1800, kNine + 3600, 100 * kMbps},
        {kNine + 1200, kNine + 1800, 80 * kMbps},
    };
    EXPECT_EQ(got, expect);
    EXPECT_EQ(total_area(m.l), area);
    EXPECT_EQ(m.l.balance("as") - seller_before, 3ull * 20 * kMbps * 600);
}

TEST(Ledger, BuyRejections)
{
    Market m;
    const auto lid = m.list(Market::hour());
    EXPECT_EQ(error_of([&] { m.l.buy("alice", lid, {kNine + 60, kNine + 600, kMbps * 10}); }), Errc::misaligned);
    EXPECT_EQ(error_of([&] { m.l.buy("alice", lid, {kNine, kNine + 4200, kMbps * 10}); }), Errc::invalid_argument);
    EXPECT_EQ(error_of([&] { m.l.buy("alice", lid, {kNine, kNine + 600, kMbps * 2}); }), Errc::below_minimum);
    EXPECT_EQ(error_of([&] { m.l.buy("alice", lid, {kNine, kNine + 600, kMbps * 97}); }), Errc::below_minimum);
    m.l.create_account("poor", 10);
    const auto h = m.l.state_hash();
    EXPECT_EQ(error_of([&] { m.l.buy("poor", lid, {kNine, kNine + 600, kMbps * 10}); }), Errc::insufficient_funds);
    EXPECT_EQ(m.l.state_hash(), h);
}

TEST(Ledger, SecondBuyerOfSameListingLoses)
{
    Market m;
    const auto lid = m.list(Market::hour());
    const Want w{kNine, kNine + 3600, 100 * kMbps};
    m.l.buy("alice", lid, w);
    EXPECT_EQ(error_of([&] { m.l.buy("bob", lid, w); }), Errc::not_found);
    EXPECT_TRUE(m.l.all_listings().empty());
}

TEST(Ledger, EscrowedAssetIsFrozen)
{
    Market m;
    const auto a = m.issue(Market::hour());
    const auto lid = m.l.create_listing("as", a, 1);
    EXPECT_EQ(error_of([&] { m.l.split_time("as", a, kNine + 600); }), Errc::bad_state);
    EXPECT_EQ(error_of([&] { m.l.cancel_listing("alice", lid); }), Errc::not_owner);
    m.l.cancel_listing("as", lid);
    m.l.split_time("as", a, kNine + 600);
    EXPECT_EQ(error_of([&] { m.l.create_listing("alice", 1, 1); }), Errc::unauthorized);
}

TEST(Ledger, RedeemPairingRules)
{
    Market m;
    const auto eph = BoxKeyPair::from_seed(derive_seed(1, "eph"));
    auto give = [&](AssetAttrs a) {
        const auto id = m.issue(a);
        m.l.transfer_asset("as", id, "alice");
        return id;
    };
    const auto in = give(Market::hour(1, Direction::ingress));
    const auto in2 = give(Market::hour(3, Direction::ingress));
    auto eg_attrs = Market::hour(2, Direction::egress);
    EXPECT_EQ(error_of([&] { m.l.redeem("alice", in, in2, eph.pub); }), Errc::incompatible);
    EXPECT_EQ(error_of([&] { m.l.redeem("alice", in, in, eph.pub); }), Errc::incompatible);
    eg_attrs.bandwidth = 50 * kMbps;
    const auto eg_bw = give(eg_attrs);
    EXPECT_EQ(error_of([&] { m.l.redeem("alice", in, eg_bw, eph.pub); }), Errc::incompatible);
    eg_attrs = Market::hour(2, Direction::egress);
    eg_attrs.start_time += 600;
    const auto eg_time = give(eg_attrs);
    EXPECT_EQ(error_of([&] { m.l.redeem("alice", in, eg_time, eph.pub); }), Errc::incompatible);
    const auto eg = give(Market::hour(2, Direction::egress));
    EXPECT_EQ(error_of([&] { m.l.redeem("bob", in, eg, eph.pub); }), Errc::not_owner);
    const auto req = m.l.redeem("alice", in, eg, eph.pub);
    EXPECT_EQ(m.l.asset(in), nullptr);
    EXPECT_EQ(m.l.asset(eg), nullptr);
    EXPECT_EQ(m.l.pending_requests(kIa), std::vector<ObjectId>{req});
    EXPECT_EQ(m.l.request(req)->requester, "alice");
}

TEST(Ledger, DeliveryCarriesSealedCredential)
{
    Market m;
    const auto eph = BoxKeyPair::from_seed(derive_seed(1, "eph"));
    const auto in_l = m.list(Market::hour(4, Direction::ingress));
    const auto eg_l = m.list(Market::hour(9, Direction::egress));
    const Want w{kNine + 600, kNine + 1800, 20 * kMbps};
    const auto block = m.l.execute_atomic(reserve_path_calls("alice", {{in_l, eg_l, w}}, eph.pub));
    ASSERT_TRUE(block.ok) << block.message;
    const auto req = block.results[2].ids.at(0);

    crypto::SecretValue sv;
    sv.bytes[0] = 0x5a;
    AsService svc(m.creds, "as", sv);
    EXPECT_EQ(svc.process_pending(m.l), 1u);
    EXPECT_TRUE(m.l.pending_requests(kIa).empty());
    const Delivery* d = m.l.delivery(req);
    ASSERT_NE(d, nullptr);
    EXPECT_EQ(d->requester, "alice");
    EXPECT_EQ(m.l.deliveries_for("alice").size(), 1u);

    const auto cred = open_delivery(*d, eph, m.l.certificate(kIa)->box_key);
    EXPECT_EQ(cred.res.ingress, 4);
    EXPECT_EQ(cred.res.egress, 9);
    EXPECT_EQ(cred.res.res_id, 0u);
    EXPECT_EQ(cred.res.res_start, std::uint32_t(kNine + 600));
    EXPECT_EQ(cred.res.duration, 1200);
    EXPECT_EQ(cred.res.bw, wire::quantize_bw(20 * kMbps));
    EXPECT_GE(wire::decode_bw(cred.res.bw), 20 * kMbps);
    EXPECT_EQ(cred.key, crypto::derive_key(sv, cred.res));

    const auto stranger = BoxKeyPair::from_seed(derive_seed(2, "eph"));
    EXPECT_EQ(error_of([&] { open_delivery(*d, stranger, m.l.certificate(kIa)->box_key); }), Errc::bad_signature);
    EXPECT_EQ(error_of([&] { m.l.deliver("as", req, *d); }), Errc::bad_state);
}

TEST(Ledger, DeliveryNeedsAuthToken)
{
    Market m;
    const auto eph = BoxKeyPair::from_seed(derive_seed(1, "eph"));
    const auto in_l = m.list(Market::hour(4, Direction::ingress));
    const auto eg_l = m.list(Market::hour(9, Direction::egress));
    const auto block = m.l.execute_atomic(
        reserve_path_calls("alice", {{in_l, eg_l, {kNine, kNine + 600, 10 * kMbps}}}, eph.pub));
    ASSERT_TRUE(block.ok);
    EXPECT_EQ(error_of([&] { m.l.deliver("bob", block.results[2].ids[0], Delivery{}); }), Errc::unauthorized);
    EXPECT_EQ(error_of([&] { m.l.deliver("as", 9999, Delivery{}); }), Errc::not_found);
}

TEST(Ledger, ConcurrentRedeemsGetDistinctResIds)
{
    Market m;
    const auto eph = BoxKeyPair::from_seed(derive_seed(1, "eph"));
    const auto in_l = m.list(Market::hour(4, Direction::ingress));
    const auto eg_l = m.list(Market::hour(9, Direction::egress));
    const auto b1 = m.l.execute_atomic(reserve_path_calls("alice", {{in_l, eg_l, {kNine, kNine + 1800, 10 * kMbps}}}, eph.pub));
    ASSERT_TRUE(b1.ok);
    // Remainders are relisted; pick the ones covering the same window.
    ObjectId in2 = 0, eg2 = 0;
    for (const auto* l : m.l.all_listings()) {
        const auto& a = m.l.asset(l->asset)->attrs;
        if (a.start_time == kNine && a.bandwidth == 90 * kMbps)
            (a.direction == Direction::ingress ? in2 : eg2) = l->id;
    }
    ASSERT_NE(in2, 0u);
    ASSERT_NE(eg2, 0u);
    const auto b2 = m.l.execute_atomic(reserve_path_calls("bob", {{in2, eg2, {kNine, kNine + 1800, 10 * kMbps}}}, eph.pub));
    ASSERT_TRUE(b2.ok) << b2.message;
    AsService svc(m.creds, "as", crypto::SecretValue{});
    EXPECT_EQ(svc.process_pending(m.l), 2u);
    const auto k = m.l.certificate(kIa)->box_key;
    const auto c1 = open_delivery(*m.l.delivery(b1.results[2].ids[0]), eph, k);
    const auto c2 = open_delivery(*m.l.delivery(b2.results[2].ids[0]), eph, k);
    EXPECT_NE(c1.res.res_id, c2.res.res_id);
}

TEST(Ledger, FailedBlockLeavesStateUnchanged)
{
    Market m;
    const auto eph = BoxKeyPair::from_seed(derive_seed(1, "eph"));
    const auto in_l = m.list(Market::hour(4, Direction::ingress));
    const auto eg_l = m.list(Market::hour(9, Direction::egress));
    const auto before = m.l.state_hash();
    const auto alice = m.l.balance("alice");
    // Second purchase is misaligned: the first must be rolled back.
    std::vector<HopOrder> hops{{in_l, eg_l, {kNine, kNine + 600, 10 * kMbps}}};
    auto calls = reserve_path_calls("alice", hops, eph.pub);
    calls[1] = {"buy", [&](Ledger& l, const std::vector<CallResult>&) {
                    return CallResult{{l.buy("alice", eg_l, {kNine + 1, kNine + 600, 10 * kMbps})}};
                }};
    const auto r = m.l.execute_atomic(calls);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_index, 1u);
    EXPECT_EQ(r.error, Errc::misaligned);
    EXPECT_TRUE(r.results.empty());
    EXPECT_EQ(m.l.state_hash(), before);
    EXPECT_EQ(m.l.balance("alice"), alice);
    EXPECT_NE(m.l.listing(in_l), nullptr);
    EXPECT_EQ(m.l.log().back().name, "execute_atomic");
}

TEST(Ledger, FeesAndPaymentsConserveBalances)
{
    Market m(5);
    const auto total = m.l.total_balance();
    const auto lid = m.list(Market::hour());
    m.l.buy("alice", lid, {kNine, kNine + 600, 10 * kMbps});
    EXPECT_EQ(m.l.total_balance(), total);
    EXPECT_GT(m.l.balance("fee-sink"), 0u);
    m.l.create_account("broke", 4);
    EXPECT_EQ(error_of([&] { m.l.register_seller("broke"); }), Errc::insufficient_funds);
    EXPECT_EQ(m.l.total_balance(), total + 4);
}

TEST(Ledger, PriceOverflowIsAnError)
{
    EXPECT_EQ(Ledger::price(3, {0, 10, 7}), 210u);
    EXPECT_EQ(error_of([] { Ledger::price(1ull << 40, {0, 1ll << 20, 1ull << 20}); }), Errc::overflow);
}

TEST(Ledger, RandomSplitFuseConservesArea)
{
    Market m;
    std::mt19937_64 rng(11);
    m.issue(Market::hour(1));
    m.issue(Market::hour(2, Direction::egress));
    const auto area = m.l.area_by_interface();
    for (int op = 0; op < 2000; ++op) {
        const auto mine = m.l.assets_of("as");
        const auto* a = mine[rng() % mine.size()];
        const auto* b = mine[rng() % mine.size()];
        try {
            switch (rng() % 4) {
            case 0: m.l.split_time("as", a->id, a->attrs.start_time + 600 * std::int64_t(1 + rng() % 5)); break;
            case 1: m.l.split_bandwidth("as", a->id, kMbps * (1 + rng() % 99)); break;
            case 2: m.l.fuse_time("as", a->id, b->id); break;
            default: m.l.fuse_bandwidth("as", a->id, b->id); break;
            }
        } catch (const Error&) {
        }
        ASSERT_EQ(m.l.area_by_interface(), area) << "op " << op;
    }
}

TEST(Ledger, LogIsDeterministic)
{
    auto run = [] {
        Market m;
        const auto lid = m.list(Market::hour());
        m.l.buy("alice", lid, {kNine, kNine + 600, 10 * kMbps});
        try {
            m.l.buy("bob", lid, {kNine, kNine + 600, 10 * kMbps});
        } catch (const Error&) {
        }
        return m.l.export_log();
    };
    const auto a = run();
    EXPECT_EQ(a, run());
    EXPECT_NE(a.find("not_found"), std::string::npos);
}
