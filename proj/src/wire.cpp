#include "hummingbird/wire.hpp"

#include "hummingbird/detail/bytes.hpp"

#include <algorithm>
#include <string>

namespace hummingbird::wire {

using namespace hummingbird::detail;

namespace {

[[noreturn]] void fail(Errc code, const std::string& what)
{
    throw Error(code, "wire: " + what);
}

void require_size(std::span<const std::uint8_t> in, std::size_t n, const char* what)
{
    if (in.size() < n) fail(Errc::truncated, std::string(what) + " truncated");
}

std::size_t hop_size(const Hop& hop)
{
    return kind_of(hop) == HopKind::flyover ? kFlyoverHopFieldLen : kHopFieldLen;
}

std::uint8_t hop_flags(bool flyover, bool ingress_alert, bool egress_alert)
{
    return static_cast<std::uint8_t>((flyover ? 0x80 : 0) | (ingress_alert ? 0x02 : 0)
        | (egress_alert ? 0x01 : 0));
}

void check_hop_ranges(const Hop& hop, std::size_t index)
{
    if (auto fly = std::get_if<FlyoverHopField>(&hop)) {
        if (fly->res_id > kMaxResId)
            fail(Errc::field_range, "hops[" + std::to_string(index) + "].res_id exceeds 22 bits");
        if (fly->bw.value > kMaxBwCode)
            fail(Errc::field_range, "hops[" + std::to_string(index) + "].bw exceeds 10 bits");
    }
}

// Checks that the hop sequence exactly fills the segments and that CurrHF
// lands on a hop boundary (or the end of the path).
void check_layout(const PathMetaHdr& meta, const std::vector<Hop>& hops)
{
    std::array<std::size_t, kMaxSegments> bounds{};
    std::size_t cum = 0;
    for (std::size_t i = 0; i < kMaxSegments; ++i) bounds[i] = cum += meta.seg_len[i];

    std::size_t words = 0;
    bool curr_aligned = meta.curr_hf == 0;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        check_hop_ranges(hops[i], i);
        const std::size_t end = words + words_of(kind_of(hops[i]));
        for (std::size_t b : bounds) {
            if (words < b && b < end)
                fail(Errc::length_mismatch,
                    "hops[" + std::to_string(i) + "] crosses a segment boundary");
        }
        words = end;
        if (words == meta.curr_hf) curr_aligned = true;
    }
    if (words != meta.hop_words())
        fail(Errc::length_mismatch, "seg_len does not match the hop fields");
    if (!curr_aligned) fail(Errc::pointer_range, "curr_hf is not at a hop field boundary");
}

} // namespace

HopField to_hop_field(const FlyoverHopField& fly)
{
    return HopField{
        .ingress_alert = fly.ingress_alert,
        .egress_alert = fly.egress_alert,
        .exp_time = fly.exp_time,
        .cons_ingress = fly.cons_ingress,
        .cons_egress = fly.cons_egress,
        .mac = fly.agg_mac,
    };
}

std::size_t PathMetaHdr::num_inf() const
{
    std::size_t n = 0;
    while (n < kMaxSegments && seg_len[n] > 0) ++n;
    return n;
}

std::size_t HummingbirdPath::encoded_size() const
{
    std::size_t size = kMetaHdrLen + kInfoFieldLen * infos.size();
    for (const auto& hop : hops) size += hop_size(hop);
    return size;
}

void validate_segments(const PathMetaHdr& meta)
{
    for (std::size_t i = 0; i < kMaxSegments; ++i) {
        if (meta.seg_len[i] > 0x7f)
            fail(Errc::field_range, "seg_len[" + std::to_string(i) + "] exceeds 7 bits");
    }
    for (std::size_t x = 1; x < kMaxSegments; ++x) {
        for (std::size_t y = 0; y < x; ++y) {
            if (meta.seg_len[x] > 0 && meta.seg_len[y] == 0)
                fail(Errc::segment_gap,
                    "seg_len[" + std::to_string(x) + "] > 0 but seg_len[" + std::to_string(y)
                        + "] == 0");
        }
    }
}

void validate_pointers(const PathMetaHdr& meta)
{
    const std::size_t n = meta.num_inf();
    if (n == 0) {
        if (meta.curr_inf != 0 || meta.curr_hf != 0)
            fail(Errc::pointer_range, "curr_inf/curr_hf must be zero on an empty path");
        return;
    }
    if (meta.curr_inf >= n)
        fail(Errc::pointer_range,
            "curr_inf " + std::to_string(meta.curr_inf) + " >= NumINF " + std::to_string(n));
    std::size_t start = 0;
    for (std::size_t i = 0; i < meta.curr_inf; ++i) start += meta.seg_len[i];
    const std::size_t end = start + meta.seg_len[meta.curr_inf];
    const bool inside = meta.curr_hf >= start && meta.curr_hf < end;
    const bool at_end = meta.curr_inf + 1u == n && meta.curr_hf == end;
    if (!inside && !at_end)
        fail(Errc::pointer_range,
            "curr_hf " + std::to_string(meta.curr_hf) + " outside segment "
                + std::to_string(meta.curr_inf));
}

// ---------------------------------------------------------------------------
// Field codecs

void write_common(std::span<std::uint8_t> out, const CommonHeader& hdr)
{
    if (out.size() < kCommonHdrLen) fail(Errc::truncated, "common header buffer");
    if (hdr.dst.as >> 48) fail(Errc::field_range, "dst.as exceeds 48 bits");
    out[0] = hdr.hdr_len;
    out[1] = kPathTypeHummingbird;
    store_be16(&out[2], hdr.payload_len);
    store_be16(&out[4], hdr.dst.isd);
    store_be48(&out[6], hdr.dst.as);
}

CommonHeader read_common(std::span<const std::uint8_t> in)
{
    require_size(in, kCommonHdrLen, "common header");
    if (in[1] != kPathTypeHummingbird)
        fail(Errc::field_range, "path type " + std::to_string(in[1]) + " is not Hummingbird");
    return CommonHeader{
        .hdr_len = in[0],
        .payload_len = load_be16(&in[2]),
        .dst = {load_be16(&in[4]), load_be48(&in[6])},
    };
}

void write_meta(std::span<std::uint8_t> out, const PathMetaHdr& meta)
{
    if (out.size() < kMetaHdrLen) fail(Errc::truncated, "meta header buffer");
    if (meta.curr_inf > 3) fail(Errc::field_range, "curr_inf exceeds 2 bits");
    if (meta.millis_timestamp >= 1000) fail(Errc::field_range, "millis_timestamp >= 1000");
    if (meta.counter > kMaxCounter) fail(Errc::field_range, "counter exceeds 22 bits");
    for (std::size_t i = 0; i < kMaxSegments; ++i) {
        if (meta.seg_len[i] > 0x7f)
            fail(Errc::field_range, "seg_len[" + std::to_string(i) + "] exceeds 7 bits");
    }
    const std::uint32_t w0 = (std::uint32_t(meta.curr_inf) << 30)
        | (std::uint32_t(meta.curr_hf) << 22) | (std::uint32_t(meta.seg_len[0]) << 14)
        | (std::uint32_t(meta.seg_len[1]) << 7) | std::uint32_t(meta.seg_len[2]);
    store_be32(&out[0], w0);
    store_be32(&out[4], meta.base_timestamp);
    store_be32(&out[8], (std::uint32_t(meta.millis_timestamp) << 22) | meta.counter);
}

PathMetaHdr read_meta(std::span<const std::uint8_t> in)
{
    require_size(in, kMetaHdrLen, "meta header");
    const std::uint32_t w0 = load_be32(&in[0]);
    if (w0 & (1u << 21)) fail(Errc::reserved_bits, "meta header reserved bit set");
    PathMetaHdr meta;
    meta.curr_inf = static_cast<std::uint8_t>(w0 >> 30);
    meta.curr_hf = static_cast<std::uint8_t>(w0 >> 22);
    meta.seg_len = {
        static_cast<std::uint8_t>((w0 >> 14) & 0x7f),
        static_cast<std::uint8_t>((w0 >> 7) & 0x7f),
        static_cast<std::uint8_t>(w0 & 0x7f),
    };
    meta.base_timestamp = load_be32(&in[4]);
    const std::uint32_t w2 = load_be32(&in[8]);
    meta.millis_timestamp = static_cast<std::uint16_t>(w2 >> 22);
    meta.counter = w2 & kMaxCounter;
    if (meta.millis_timestamp >= 1000) fail(Errc::field_range, "millis_timestamp >= 1000");
    return meta;
}

void write_info(std::span<std::uint8_t> out, const InfoField& info)
{
    if (out.size() < kInfoFieldLen) fail(Errc::truncated, "info field buffer");
    out[0] = static_cast<std::uint8_t>((info.peering ? 0x02 : 0) | (info.cons_dir ? 0x01 : 0));
    out[1] = 0;
    store_be16(&out[2], info.seg_id);
    store_be32(&out[4], info.timestamp);
}

InfoField read_info(std::span<const std::uint8_t> in)
{
    require_size(in, kInfoFieldLen, "info field");
    if ((in[0] & 0xfc) != 0 || in[1] != 0) fail(Errc::reserved_bits, "info field reserved bits set");
    return InfoField{
        .peering = (in[0] & 0x02) != 0,
        .cons_dir = (in[0] & 0x01) != 0,
        .seg_id = load_be16(&in[2]),
        .timestamp = load_be32(&in[4]),
    };
}

void write_hop(std::span<std::uint8_t> out, const HopField& hop)
{
    if (out.size() < kHopFieldLen) fail(Errc::truncated, "hop field buffer");
    out[0] = hop_flags(false, hop.ingress_alert, hop.egress_alert);
    out[1] = hop.exp_time;
    store_be16(&out[2], hop.cons_ingress);
    store_be16(&out[4], hop.cons_egress);
    std::copy(hop.mac.begin(), hop.mac.end(), &out[6]);
}

void write_flyover(std::span<std::uint8_t> out, const FlyoverHopField& hop)
{
    if (out.size() < kFlyoverHopFieldLen) fail(Errc::truncated, "flyover hop field buffer");
    if (hop.res_id > kMaxResId) fail(Errc::field_range, "res_id exceeds 22 bits");
    if (hop.bw.value > kMaxBwCode) fail(Errc::field_range, "bw exceeds 10 bits");
    out[0] = hop_flags(true, hop.ingress_alert, hop.egress_alert);
    out[1] = hop.exp_time;
    store_be16(&out[2], hop.cons_ingress);
    store_be16(&out[4], hop.cons_egress);
    std::copy(hop.agg_mac.begin(), hop.agg_mac.end(), &out[6]);
    store_be32(&out[12], (hop.res_id << 10) | hop.bw.value);
    store_be16(&out[16], hop.res_start_offset);
    store_be16(&out[18], hop.res_duration);
}

HopField read_hop(std::span<const std::uint8_t> in)
{
    require_size(in, kHopFieldLen, "hop field");
    if ((in[0] & 0x7c) != 0) fail(Errc::reserved_bits, "hop field reserved bits set");
    HopField hop;
    hop.ingress_alert = (in[0] & 0x02) != 0;
    hop.egress_alert = (in[0] & 0x01) != 0;
    hop.exp_time = in[1];
    hop.cons_ingress = load_be16(&in[2]);
    hop.cons_egress = load_be16(&in[4]);
    std::copy_n(&in[6], kMacLen, hop.mac.begin());
    return hop;
}

FlyoverHopField read_flyover(std::span<const std::uint8_t> in)
{
    require_size(in, kFlyoverHopFieldLen, "flyover hop field");
    const HopField base = read_hop(in);
    const std::uint32_t w3 = load_be32(&in[12]);
    return FlyoverHopField{
        .ingress_alert = base.ingress_alert,
        .egress_alert = base.egress_alert,
        .exp_time = base.exp_time,
        .cons_ingress = base.cons_ingress,
        .cons_egress = base.cons_egress,
        .agg_mac = base.mac,
        .res_id = w3 >> 10,
        .bw = BwCode{static_cast<std::uint16_t>(w3 & 0x3ff)},
        .res_start_offset = load_be16(&in[16]),
        .res_duration = load_be16(&in[18]),
    };
}

// ---------------------------------------------------------------------------
// Path codec

void encode_path(const HummingbirdPath& path, Bytes& out)
{
    const PathMetaHdr& meta = path.meta;
    validate_segments(meta);
    if (meta.curr_inf > 3) fail(Errc::field_range, "curr_inf exceeds 2 bits");
    validate_pointers(meta);
    if (path.infos.size() != meta.num_inf())
        fail(Errc::length_mismatch,
            "infos has " + std::to_string(path.infos.size()) + " entries but NumINF is "
                + std::to_string(meta.num_inf()));
    check_layout(meta, path.hops);

    const std::size_t base = out.size();
    out.resize(base + path.encoded_size());
    std::span<std::uint8_t> buf(out.data() + base, out.size() - base);
    write_meta(buf, meta);
    std::size_t off = kMetaHdrLen;
    for (const auto& info : path.infos) {
        write_info(buf.subspan(off), info);
        off += kInfoFieldLen;
    }
    for (const auto& hop : path.hops) {
        if (auto fly = std::get_if<FlyoverHopField>(&hop)) {
            write_flyover(buf.subspan(off), *fly);
            off += kFlyoverHopFieldLen;
        } else {
            write_hop(buf.subspan(off), std::get<HopField>(hop));
            off += kHopFieldLen;
        }
    }
}

Bytes encode_path(const HummingbirdPath& path)
{
    Bytes out;
    encode_path(path, out);
    return out;
}

HummingbirdPath decode_path(std::span<const std::uint8_t> bytes)
{
    HummingbirdPath path;
    path.meta = read_meta(bytes);
    validate_segments(path.meta);
    const std::size_t n = path.meta.num_inf();
    const std::size_t expected = kMetaHdrLen + kInfoFieldLen * n + 4 * path.meta.hop_words();
    if (bytes.size() < expected) fail(Errc::truncated, "path shorter than seg_len implies");
    if (bytes.size() > expected) fail(Errc::trailing_data, "trailing bytes after path");
    validate_pointers(path.meta);

    std::size_t off = kMetaHdrLen;
    for (std::size_t i = 0; i < n; ++i) {
        path.infos.push_back(read_info(bytes.subspan(off)));
        off += kInfoFieldLen;
    }
    std::size_t words = 0;
    for (std::size_t seg = 0; seg < n; ++seg) {
        const std::size_t seg_end = words + path.meta.seg_len[seg];
        while (words < seg_end) {
            auto field = bytes.subspan(off);
            const bool fly = is_flyover(field);
            const std::size_t w = fly ? kFlyoverWords : kHopFieldWords;
            if (words + w > seg_end)
                fail(Errc::length_mismatch,
                    "hop field crosses the end of segment " + std::to_string(seg));
            if (fly)
                path.hops.emplace_back(read_flyover(field));
            else
                path.hops.emplace_back(read_hop(field));
            words += w;
            off += 4 * w;
        }
    }
    check_layout(path.meta, path.hops);
    return path;
}

void finalize_lengths(Packet& pkt)
{
    const std::size_t hdr = kCommonHdrLen + pkt.path.encoded_size();
    if (hdr / 4 > 0xff) fail(Errc::overflow, "header length exceeds 1020 bytes");
    if (pkt.payload.size() > 0xffff) fail(Errc::overflow, "payload exceeds 65535 bytes");
    pkt.common.hdr_len = static_cast<std::uint8_t>(hdr / 4);
    pkt.common.payload_len = static_cast<std::uint16_t>(pkt.payload.size());
}

Bytes encode_packet(const Packet& pkt)
{
    const std::size_t hdr = kCommonHdrLen + pkt.path.encoded_size();
    if (std::size_t(pkt.common.hdr_len) * 4 != hdr)
        fail(Errc::length_mismatch, "common.hdr_len does not match the path");
    if (pkt.common.payload_len != pkt.payload.size())
        fail(Errc::length_mismatch, "common.payload_len does not match the payload");
    Bytes out(kCommonHdrLen);
    write_common(out, pkt.common);
    encode_path(pkt.path, out);
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

Packet decode_packet(std::span<const std::uint8_t> bytes)
{
    Packet pkt;
    pkt.common = read_common(bytes);
    const std::size_t hdr = std::size_t(pkt.common.hdr_len) * 4;
    if (hdr < kCommonHdrLen + kMetaHdrLen) fail(Errc::field_range, "hdr_len too small");
    const std::size_t total = hdr + pkt.common.payload_len;
    if (bytes.size() < total) fail(Errc::truncated, "packet shorter than hdr_len + payload_len");
    if (bytes.size() > total) fail(Errc::trailing_data, "trailing bytes after payload");
    pkt.path = decode_path(bytes.subspan(kCommonHdrLen, hdr - kCommonHdrLen));
    pkt.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(hdr), bytes.end());
    return pkt;
}

// ---------------------------------------------------------------------------
// Offsets

std::size_t info_field_offset(const PathMetaHdr& meta)
{
    return kMetaHdrLen + kInfoFieldLen * meta.curr_inf;
}

std::size_t hop_field_offset(const PathMetaHdr& meta)
{
    return kMetaHdrLen + kInfoFieldLen * meta.num_inf() + 4 * std::size_t(meta.curr_hf);
}

PathMetaHdr advance_curr_hf(PathMetaHdr meta, HopKind kind)
{
    const unsigned next = unsigned(meta.curr_hf) + words_of(kind);
    if (next > 0xff) fail(Errc::overflow, "curr_hf exceeds 8 bits");
    meta.curr_hf = static_cast<std::uint8_t>(next);
    return meta;
}

// ---------------------------------------------------------------------------
// Bandwidth

std::uint64_t bw_value(unsigned exponent, unsigned significand)
{
    if (exponent > 31 || significand > 31)
        fail(Errc::field_range, "bandwidth exponent/significand exceed 5 bits");
    if (exponent == 0) return significand;
    return (32ull + significand) << (exponent - 1);
}

std::uint64_t decode_bw(BwCode code)
{
    if (code.value > kMaxBwCode) fail(Errc::field_range, "bw code exceeds 10 bits");
    return bw_value(code.exponent(), code.significand());
}

std::uint64_t max_bw_value()
{
    return bw_value(31, 31);
}

BwCode quantize_bw(std::uint64_t raw)
{
    if (raw > max_bw_value())
        fail(Errc::field_range, "bandwidth " + std::to_string(raw) + " exceeds the 10-bit range");
    // Decoded values are strictly increasing in code order.
    std::uint16_t lo = 0;
    std::uint16_t hi = kMaxBwCode;
    while (lo < hi) {
        const auto mid = static_cast<std::uint16_t>((lo + hi) / 2);
        if (decode_bw(BwCode{mid}) >= raw)
            hi = mid;
        else
            lo = static_cast<std::uint16_t>(mid + 1);
    }
    return BwCode{lo};
}

// ---------------------------------------------------------------------------
// MAC input blocks

Block mac_input_block(const MacInput& in)
{
    if (in.dst.as >> 48) fail(Errc::field_range, "dst.as exceeds 48 bits");
    if (in.millis > 0x3ff) fail(Errc::field_range, "millis exceeds 10 bits");
    if (in.counter > kMaxCounter) fail(Errc::field_range, "counter exceeds 22 bits");
    Block b{};
    store_be16(&b[0], in.dst.isd);
    store_be48(&b[2], in.dst.as);
    store_be16(&b[8], in.pkt_len);
    store_be16(&b[10], in.res_start_offset);
    store_be32(&b[12], (std::uint32_t(in.millis) << 22) | in.counter);
    return b;
}

MacInput parse_mac_input_block(const Block& b)
{
    const std::uint32_t w3 = load_be32(&b[12]);
    return MacInput{
        .dst = {load_be16(&b[0]), load_be48(&b[2])},
        .pkt_len = load_be16(&b[8]),
        .res_start_offset = load_be16(&b[10]),
        .millis = static_cast<std::uint16_t>(w3 >> 22),
        .counter = w3 & kMaxCounter,
    };
}

Block resinfo_block(const ReservationInfo& res)
{
    if (res.res_id > kMaxResId) fail(Errc::field_range, "res_id exceeds 22 bits");
    if (res.bw.value > kMaxBwCode) fail(Errc::field_range, "bw exceeds 10 bits");
    Block b{};
    store_be16(&b[0], res.ingress);
    store_be16(&b[2], res.egress);
    store_be32(&b[4], (res.res_id << 10) | res.bw.value);
    store_be32(&b[8], res.res_start);
    store_be16(&b[12], res.duration);
    return b;
}

ReservationInfo parse_resinfo_block(const Block& b)
{
    if (b[14] != 0 || b[15] != 0) fail(Errc::reserved_bits, "resinfo padding not zero");
    const std::uint32_t w1 = load_be32(&b[4]);
    return ReservationInfo{
        .ingress = load_be16(&b[0]),
        .egress = load_be16(&b[2]),
        .res_id = w1 >> 10,
        .bw = BwCode{static_cast<std::uint16_t>(w1 & 0x3ff)},
        .res_start = load_be32(&b[8]),
        .duration = load_be16(&b[12]),
    };
}

} // namespace hummingbird::wire
