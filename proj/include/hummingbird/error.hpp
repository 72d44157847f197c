#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hummingbird {

enum class Errc
{
    // wire
    truncated,
    trailing_data,
    segment_gap,
    pointer_range,
    reserved_bits,
    field_range,
    length_mismatch,
    overflow,
    // crypto / source
    packet_length_overflow,
    reservation_inactive,
    counter_exhausted,
    bad_state,
    // residalloc
    id_space_exhausted,
    unknown_handle,
    // ledger
    not_found,
    not_owner,
    unauthorized,
    bad_signature,
    misaligned,
    below_minimum,
    incompatible,
    insufficient_funds,
    invalid_argument,
    // sim / cli
    schema,
};

std::string_view to_string(Errc code);

/// \brief Exception type thrown by all library components.
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), errc(code)
    {}

    Errc code() const noexcept { return errc; }

private:
    Errc errc;
};

} // namespace hummingbird
