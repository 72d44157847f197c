#pragma once

#include "hummingbird/reservation.hpp"
#include "hummingbird/wire.hpp"

#include <array>
#include <cstdint>
#include <optional>

/// Reservation key derivation and per-packet authentication tags.
///
/// The PRF is a single AES-128 block encryption: both the key-derivation
/// input and the flyover MAC input are exactly one block.
namespace hummingbird::crypto {

using Key128 = std::array<std::uint8_t, 16>;
using wire::Block;
using wire::Mac;

/// AS-local secret value SV used to derive reservation keys.
struct SecretValue
{
    Key128 bytes{};
};

/// Per-reservation authentication key A_K.
struct ReservationKey
{
    Key128 bytes{};
    bool operator==(const ReservationKey&) const = default;
};

/// AS forwarding key K_i used for SCION hop-field MACs.
struct ForwardingKey
{
    Key128 bytes{};
};

inline constexpr std::size_t kDefaultTagLen = 6;

/// One AES-128 encryption of \p input under \p key.
Block prf(const Key128& key, const Block& input);

ReservationKey derive_key(const SecretValue& sv, const ReservationInfo& res);

/// PktLen = PayloadLen + 4 * HdrLen as a 16-bit value, or nullopt on
/// overflow (the packet must be dropped).
std::optional<std::uint16_t> packet_length(std::uint16_t payload_len, std::uint8_t hdr_len);

/// PRF over the 16-byte MAC input block, truncated to \p tag_len bytes.
/// Bytes past \p tag_len are zero so the result can be XORed into a 6-byte
/// MAC field directly.
Mac flyover_mac(const ReservationKey& key, const wire::MacInput& input,
    std::size_t tag_len = kDefaultTagLen);

Mac aggregate_mac(const Mac& hop_field_mac, const Mac& flyover_mac);

/// Stand-in for the SCION hop-field MAC: AES over the SCION MAC input layout
///   0(2) | SegID(2) | Timestamp(4) | 0(1) | ExpTime(1) | ConsIngress(2) | ConsEgress(2) | 0(2)
/// truncated to 6 bytes. Not interoperable with SCION (which uses CMAC).
Mac hop_field_mac(const ForwardingKey& key, std::uint16_t seg_id, std::uint32_t timestamp,
    std::uint8_t exp_time, std::uint16_t cons_ingress, std::uint16_t cons_egress);

inline Mac hop_field_mac(const ForwardingKey& key, const wire::InfoField& info,
    std::uint16_t seg_id, const wire::HopField& hop)
{
    return hop_field_mac(key, seg_id, info.timestamp, hop.exp_time, hop.cons_ingress,
        hop.cons_egress);
}

/// Constant-time comparison.
bool mac_equal(const Mac& a, const Mac& b);

} // namespace hummingbird::crypto
