#include "oracle.hpp"

#include "hummingbird/crypto.hpp"
#include "hummingbird/vectors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hummingbird;
using namespace hummingbird::crypto;

namespace {

Block block(std::string_view hex)
{
    const auto b = vectors::from_hex(hex);
    Block out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

// FIPS-197 known answers.
const Block kZeroCipher = block("66e94bd4ef8a2c3b884cfa59ca342b2e");
const Block kFipsKey = block("000102030405060708090a0b0c0d0e0f");
const Block kFipsPlain = block("00112233445566778899aabbccddeeff");
const Block kFipsCipher = block("69c4e0d86a7b0430d8cdb78070b4c55a");

} // namespace

TEST(Crypto, PrfIsAes128)
{
    EXPECT_EQ(prf(Key128{}, Block{}), kZeroCipher);
    EXPECT_EQ(prf(kFipsKey, kFipsPlain), kFipsCipher);
}

TEST(Crypto, DeriveKeyKnownAnswer)
{
    EXPECT_EQ(derive_key(SecretValue{}, ReservationInfo{}).bytes, kZeroCipher);
}

TEST(Crypto, DeriveKeyUsesResInfoLayout)
{
    SecretValue sv{kFipsKey};
    const ReservationInfo r{3, 9, 1234, BwCode{500}, 1'700'000'000, 600};
    const auto o = oracle::resinfo(3, 9, 1234, 500, 1'700'000'000, 600);
    Block in{};
    std::copy(o.begin(), o.end(), in.begin());
    EXPECT_EQ(derive_key(sv, r).bytes, prf(kFipsKey, in));
    EXPECT_EQ(derive_key(sv, r), derive_key(sv, r));
    ReservationInfo other = r;
    other.res_id += 1;
    EXPECT_NE(derive_key(sv, r), derive_key(sv, other));
}

TEST(Crypto, FlyoverMacKnownAnswerAndTruncation)
{
    const Mac m = flyover_mac(ReservationKey{}, wire::MacInput{});
    EXPECT_TRUE(std::equal(m.begin(), m.end(), kZeroCipher.begin()));
    const Mac one = flyover_mac(ReservationKey{}, wire::MacInput{}, 1);
    EXPECT_EQ(one[0], kZeroCipher[0]);
    for (std::size_t i = 1; i < one.size(); ++i) EXPECT_EQ(one[i], 0);
}

TEST(Crypto, FlyoverMacUsesMacInputLayout)
{
    const ReservationKey k{kFipsKey};
    const wire::MacInput in{{1, 0xff0000000110}, 1564, 10, 5, 77};
    const auto o = oracle::mac_input(1, 0xff0000000110, 1564, 10, 5, 77);
    Block b{};
    std::copy(o.begin(), o.end(), b.begin());
    const Block full = prf(kFipsKey, b);
    const Mac m = flyover_mac(k, in);
    EXPECT_TRUE(std::equal(m.begin(), m.end(), full.begin()));

    wire::MacInput longer = in;
    longer.pkt_len += 1;
    EXPECT_NE(flyover_mac(k, longer), m);
}

TEST(Crypto, PacketLengthOverflow)
{
    EXPECT_EQ(packet_length(100, 10), 140);
    EXPECT_EQ(packet_length(65535 - 4 * 255, 255), 65535);
    EXPECT_FALSE(packet_length(65535 - 4 * 255 + 1, 255));
    EXPECT_FALSE(packet_length(65535, 1));
}

TEST(Crypto, AggregateIsXor)
{
    const Mac m{1, 2, 3, 4, 5, 6};
    const Mac f{0xff, 0, 0x0f, 0xf0, 0xaa, 0x55};
    EXPECT_EQ(aggregate_mac(m, Mac{}), m);
    EXPECT_EQ(aggregate_mac(aggregate_mac(m, f), f), m);
    const Mac x = aggregate_mac(m, f);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(x[i], m[i] ^ f[i]);
}

TEST(Crypto, HopFieldMacLayoutAndSensitivity)
{
    const ForwardingKey k{kFipsKey};
    // 0(2) | SegID(2) | Timestamp(4) | 0(1) | ExpTime(1) | In(2) | Eg(2) | 0(2)
    const auto o = oracle::Bits{}
                       .fields({{16, 0}, {16, 0x1234}, {32, 1'700'000'000}, {8, 0}, {8, 63}, {16, 7}, {16, 9}, {16, 0}})
                       .data();
    Block b{};
    std::copy(o.begin(), o.end(), b.begin());
    const Block full = prf(kFipsKey, b);
    const Mac m = hop_field_mac(k, 0x1234, 1'700'000'000, 63, 7, 9);
    EXPECT_TRUE(std::equal(m.begin(), m.end(), full.begin()));
    EXPECT_EQ(hop_field_mac(k, 0x1234, 1'700'000'000, 63, 7, 9), m);
    EXPECT_NE(hop_field_mac(k, 0x1235, 1'700'000'000, 63, 7, 9), m);
    EXPECT_NE(hop_field_mac(k, 0x1234, 1'700'000'001, 63, 7, 9), m);
    EXPECT_NE(hop_field_mac(k, 0x1234, 1'700'000'000, 62, 7, 9), m);
    EXPECT_NE(hop_field_mac(k, 0x1234, 1'700'000'000, 63, 8, 9), m);
    EXPECT_NE(hop_field_mac(k, 0x1234, 1'700'000'000, 63, 7, 10), m);
}

TEST(Crypto, AlternatingKeysDoNotLeakCachedSchedules)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Key128 a, b;
        for (auto& x : a) x = std::uint8_t(rng());
        for (auto& x : b) x = std::uint8_t(rng());
        const Block in{};
        const Block pa = prf(a, in);
        const Block pb = prf(b, in);
        EXPECT_EQ(derive_key(SecretValue{a}, ReservationInfo{}).bytes, pa);
        EXPECT_EQ(derive_key(SecretValue{b}, ReservationInfo{}).bytes, pb);
        EXPECT_EQ(derive_key(SecretValue{a}, ReservationInfo{}).bytes, pa);
    }
}

TEST(Crypto, MacEqual)
{
    const Mac a{1, 2, 3, 4, 5, 6};
    Mac b = a;
    EXPECT_TRUE(mac_equal(a, b));
    b[5] ^= 1;
    EXPECT_FALSE(mac_equal(a, b));
}
