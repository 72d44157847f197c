#pragma once

#include "hummingbird/error.hpp"
#include "hummingbird/reservation.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

/// Byte formats of the Hummingbird path type. All multi-byte fields are
/// big-endian; reserved bits are written as zero and rejected on decode.
namespace hummingbird::wire {

inline constexpr std::size_t kCommonHdrLen = 12;
inline constexpr std::size_t kMetaHdrLen = 12;
inline constexpr std::size_t kInfoFieldLen = 8;
inline constexpr std::size_t kHopFieldLen = 12;
inline constexpr std::size_t kFlyoverHopFieldLen = 20;
inline constexpr std::size_t kBlockLen = 16;
inline constexpr std::size_t kMacLen = 6;
inline constexpr std::size_t kMaxSegments = 3;
inline constexpr std::uint8_t kHopFieldWords = 3;
inline constexpr std::uint8_t kFlyoverWords = 5;
inline constexpr std::uint8_t kPathTypeHummingbird = 5;
inline constexpr std::uint32_t kMaxCounter = (1u << 22) - 1;

using Mac = std::array<std::uint8_t, kMacLen>;
using Block = std::array<std::uint8_t, kBlockLen>;
using Bytes = std::vector<std::uint8_t>;

struct IsdAs
{
    std::uint16_t isd = 0;
    std::uint64_t as = 0; // 48 bit

    bool operator==(const IsdAs&) const = default;
};

struct PathMetaHdr
{
    std::uint8_t curr_inf = 0;      // 2 bit
    std::uint8_t curr_hf = 0;       // in 4-byte units
    std::array<std::uint8_t, 3> seg_len{}; // 7 bit each, in 4-byte units
    std::uint32_t base_timestamp = 0;
    std::uint16_t millis_timestamp = 0; // 10 bit, < 1000
    std::uint32_t counter = 0;          // 22 bit

    /// Number of info fields implied by the segment lengths. Does not check
    /// for gaps; see validate_segments().
    std::size_t num_inf() const;
    /// Total length of all hop fields in 4-byte units.
    std::size_t hop_words() const { return std::size_t(seg_len[0]) + seg_len[1] + seg_len[2]; }

    bool operator==(const PathMetaHdr&) const = default;
};

struct InfoField
{
    bool peering = false;
    bool cons_dir = false;
    std::uint16_t seg_id = 0;
    std::uint32_t timestamp = 0;

    bool operator==(const InfoField&) const = default;
};

struct HopField
{
    bool ingress_alert = false;
    bool egress_alert = false;
    std::uint8_t exp_time = 0;
    std::uint16_t cons_ingress = 0;
    std::uint16_t cons_egress = 0;
    Mac mac{};

    bool operator==(const HopField&) const = default;
};

struct FlyoverHopField
{
    bool ingress_alert = false;
    bool egress_alert = false;
    std::uint8_t exp_time = 0;
    std::uint16_t cons_ingress = 0;
    std::uint16_t cons_egress = 0;
    Mac agg_mac{};
    std::uint32_t res_id = 0; // 22 bit
    BwCode bw;
    std::uint16_t res_start_offset = 0;
    std::uint16_t res_duration = 0;

    bool operator==(const FlyoverHopField&) const = default;
};

using Hop = std::variant<HopField, FlyoverHopField>;

enum class HopKind
{
    normal,
    flyover
};

inline HopKind kind_of(const Hop& hop)
{
    return std::holds_alternative<FlyoverHopField>(hop) ? HopKind::flyover : HopKind::normal;
}

inline std::uint8_t words_of(HopKind kind)
{
    return kind == HopKind::flyover ? kFlyoverWords : kHopFieldWords;
}

/// Drops the reservation part of a flyover, keeping the MAC field as is.
HopField to_hop_field(const FlyoverHopField& fly);

struct HummingbirdPath
{
    PathMetaHdr meta;
    std::vector<InfoField> infos;
    std::vector<Hop> hops;

    std::size_t encoded_size() const;

    bool operator==(const HummingbirdPath&) const = default;
};

/// Stand-in for the SCION common and address headers: only the fields the
/// Hummingbird data plane reads are kept.
///   HdrLen(1) | PathType(1) | PayloadLen(2) | DstISD(2) | DstAS(6)
struct CommonHeader
{
    std::uint8_t hdr_len = 0; // total header length in 4-byte units
    std::uint16_t payload_len = 0;
    IsdAs dst;

    bool operator==(const CommonHeader&) const = default;
};

struct Packet
{
    CommonHeader common;
    HummingbirdPath path;
    Bytes payload;

    bool operator==(const Packet&) const = default;
};

// Path-level codec.

/// Throws Error(segment_gap) if a later segment is present after an empty one.
void validate_segments(const PathMetaHdr& meta);
/// Throws Error(pointer_range) unless CurrINF/CurrHF point into the path or
/// just past its end (fully traversed).
void validate_pointers(const PathMetaHdr& meta);

Bytes encode_path(const HummingbirdPath& path);
void encode_path(const HummingbirdPath& path, Bytes& out);
HummingbirdPath decode_path(std::span<const std::uint8_t> bytes);

Bytes encode_packet(const Packet& pkt);
Packet decode_packet(std::span<const std::uint8_t> bytes);
/// Sets hdr_len and payload_len from the path and payload.
void finalize_lengths(Packet& pkt);

// Field-level codec, shared with the in-place router view.

void write_common(std::span<std::uint8_t> out, const CommonHeader& hdr);
CommonHeader read_common(std::span<const std::uint8_t> in);
void write_meta(std::span<std::uint8_t> out, const PathMetaHdr& meta);
PathMetaHdr read_meta(std::span<const std::uint8_t> in);
void write_info(std::span<std::uint8_t> out, const InfoField& info);
InfoField read_info(std::span<const std::uint8_t> in);
void write_hop(std::span<std::uint8_t> out, const HopField& hop);
void write_flyover(std::span<std::uint8_t> out, const FlyoverHopField& hop);
HopField read_hop(std::span<const std::uint8_t> in);
FlyoverHopField read_flyover(std::span<const std::uint8_t> in);
/// Reads the flyover bit of the hop field starting at \p in.
inline bool is_flyover(std::span<const std::uint8_t> in) { return (in[0] & 0x80) != 0; }

// Offsets relative to the start of the path header.

std::size_t info_field_offset(const PathMetaHdr& meta);
std::size_t hop_field_offset(const PathMetaHdr& meta);

/// Advances CurrHF past a hop field of the given kind.
PathMetaHdr advance_curr_hf(PathMetaHdr meta, HopKind kind);

// Bandwidth encoding.

/// Value of a 5-bit exponent / 5-bit significand pair.
std::uint64_t bw_value(unsigned exponent, unsigned significand);
std::uint64_t decode_bw(BwCode code);
/// Smallest code whose decoded value is at least \p raw.
BwCode quantize_bw(std::uint64_t raw);
std::uint64_t max_bw_value();

// Fixed 16-byte MAC input blocks.

struct MacInput
{
    IsdAs dst;
    std::uint16_t pkt_len = 0;
    std::uint16_t res_start_offset = 0;
    std::uint16_t millis = 0; // 10 bit
    std::uint32_t counter = 0; // 22 bit

    bool operator==(const MacInput&) const = default;
};

Block mac_input_block(const MacInput& in);
MacInput parse_mac_input_block(const Block& block);

Block resinfo_block(const ReservationInfo& res);
ReservationInfo parse_resinfo_block(const Block& block);

} // namespace hummingbird::wire
