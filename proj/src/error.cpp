#include "hummingbird/error.hpp"

namespace hummingbird {

std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::truncated: return "truncated";
    case Errc::trailing_data: return "trailing_data";
    case Errc::segment_gap: return "segment_gap";
    case Errc::pointer_range: return "pointer_range";
    case Errc::reserved_bits: return "reserved_bits";
    case Errc::field_range: return "field_range";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::overflow: return "overflow";
    case Errc::packet_length_overflow: return "packet_length_overflow";
    case Errc::reservation_inactive: return "reservation_inactive";
    case Errc::counter_exhausted: return "counter_exhausted";
    case Errc::bad_state: return "bad_state";
    case Errc::id_space_exhausted: return "id_space_exhausted";
    case Errc::unknown_handle: return "unknown_handle";
    case Errc::not_found: return "not_found";
    case Errc::not_owner: return "not_owner";
    case Errc::unauthorized: return "unauthorized";
    case Errc::bad_signature: return "bad_signature";
    case Errc::misaligned: return "misaligned";
    case Errc::below_minimum: return "below_minimum";
    case Errc::incompatible: return "incompatible";
    case Errc::insufficient_funds: return "insufficient_funds";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::schema: return "schema";
    }
    return "unknown";
}

} // namespace hummingbird
