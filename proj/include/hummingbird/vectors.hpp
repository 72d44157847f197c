#pragma once

#include "hummingbird/crypto.hpp"
#include "hummingbird/wire.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

/// Fixed packet vectors checked into tests/fixtures. Everything is derived
/// from constants here, so regeneration is bit-identical.
namespace hummingbird::vectors {

struct Vector
{
    std::string name;
    std::string description;
    wire::Bytes packet;
    // Keys and clock of the AS that processes the packet next.
    crypto::SecretValue sv;
    crypto::ForwardingKey fwd;
    std::int64_t now_ms = 0;
    std::string verdict;
    std::string reason;
};

std::vector<Vector> all();

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts upper and lower case and ignores whitespace. Throws
/// Error(invalid_argument) on anything else or an odd digit count.
wire::Bytes from_hex(std::string_view text);

/// vectors.json: one object per vector with keys, clock and expectation.
std::string manifest(const std::vector<Vector>& vs);
/// Writes <name>.hex for every vector plus vectors.json into \p dir.
void write_fixtures(const std::string& dir);

} // namespace hummingbird::vectors
