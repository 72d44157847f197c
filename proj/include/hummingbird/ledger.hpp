#pragma once

#include "hummingbird/crypto.hpp"
#include "hummingbird/residalloc.hpp"
#include "hummingbird/source.hpp"
#include "hummingbird/wire.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

/// In-memory stand-in for the reservation control plane: bandwidth assets,
/// marketplace, atomic transaction blocks, AS registration and redemption.
///
/// The ledger is a serial state machine. Every mutating call either succeeds
/// or throws hummingbird::Error without changing any state.
namespace hummingbird::ledger {

using AccountId = std::string;
using ObjectId = std::uint64_t;
using Digest = std::array<std::uint8_t, 32>;

using SignPublicKey = std::array<std::uint8_t, 32>;
using SignSecretKey = std::array<std::uint8_t, 64>;
using Signature = std::array<std::uint8_t, 64>;
using BoxPublicKey = std::array<std::uint8_t, 32>;
using BoxSecretKey = std::array<std::uint8_t, 32>;

/// 32-byte seed derived from a 64-bit seed and a label (SHA-256).
Digest derive_seed(std::uint64_t seed, std::string_view label);
Digest sha256(std::span<const std::uint8_t> data);
std::string hex(std::span<const std::uint8_t> data);

struct BoxKeyPair
{
    BoxPublicKey pub{};
    BoxSecretKey sec{};

    static BoxKeyPair from_seed(const Digest& seed);
};

// PKI stub ------------------------------------------------------------------

struct Certificate
{
    wire::IsdAs as;
    SignPublicKey sign_key{};
    BoxPublicKey box_key{}; // used to authenticate sealed deliveries
    Signature root_sig{};

    bool operator==(const Certificate&) const = default;
};

struct AsCredentials
{
    Certificate cert;
    SignSecretKey sign_secret{};
    BoxKeyPair box;
};

/// Self-signed root issuing AS certificates, all keys derived from a seed.
class Pki
{
public:
    explicit Pki(std::uint64_t seed);

    const SignPublicKey& root_key() const { return root_pub; }
    AsCredentials enroll(wire::IsdAs as) const;

private:
    std::uint64_t seed;
    SignPublicKey root_pub{};
    SignSecretKey root_sec{};
};

bool verify_certificate(const Certificate& cert, const SignPublicKey& root);
/// Signature proving possession of the certificate key, bound to the
/// account that registers.
Signature prove_possession(const AsCredentials& creds, const AccountId& account);

// Assets and market ---------------------------------------------------------

enum class Direction
{
    ingress,
    egress
};

std::string_view to_string(Direction d);

struct AssetAttrs
{
    wire::IsdAs as;
    std::uint64_t bandwidth = 0;  // bits per second
    std::int64_t start_time = 0;  // unix seconds
    std::int64_t expiration_time = 0;
    std::uint16_t interface = 0;
    Direction direction = Direction::ingress;
    std::int64_t time_granularity = 1; // seconds
    std::uint64_t min_bandwidth = 0;

    bool operator==(const AssetAttrs&) const = default;
};

struct BandwidthAsset
{
    ObjectId id = 0;
    AssetAttrs attrs;
    AccountId owner;
    std::optional<ObjectId> listing; // set while escrowed in a listing

    std::int64_t duration() const { return attrs.expiration_time - attrs.start_time; }
    bool operator==(const BandwidthAsset&) const = default;
};

struct AuthToken
{
    ObjectId id = 0;
    wire::IsdAs as;
    AccountId account;

    bool operator==(const AuthToken&) const = default;
};

struct Listing
{
    ObjectId id = 0;
    ObjectId asset = 0;
    std::uint64_t unit_price = 0; // per (bit/s * s)
    AccountId seller;

    bool operator==(const Listing&) const = default;
};

struct Want
{
    std::int64_t start_time = 0;
    std::int64_t expiration_time = 0;
    std::uint64_t bandwidth = 0;
};

struct RedeemRequest
{
    ObjectId id = 0;
    AssetAttrs ingress; // wrapped assets, out of circulation
    AssetAttrs egress;
    BoxPublicKey requester_key{};
    AccountId requester;

    bool operator==(const RedeemRequest&) const = default;
};

struct Delivery
{
    ObjectId request = 0;
    wire::IsdAs as;
    AccountId requester;
    std::array<std::uint8_t, 24> nonce{};
    std::vector<std::uint8_t> sealed;

    bool operator==(const Delivery&) const = default;
};

struct CallResult
{
    std::vector<ObjectId> ids;
};

struct LogRecord
{
    std::string name;
    std::string args_digest; // hex SHA-256 of the canonical argument string
    std::string result;      // "ok ..." or the error code
    std::string state_hash;  // hex SHA-256 after the call
};

class Ledger;

/// One call of a transaction block. Later calls see earlier results.
struct Call
{
    std::string name;
    std::function<CallResult(Ledger&, const std::vector<CallResult>&)> fn;
};

struct BlockResult
{
    bool ok = false;
    std::vector<CallResult> results;
    std::optional<std::size_t> failed_index;
    std::optional<Errc> error;
    std::string message;
};

struct LedgerConfig
{
    SignPublicKey pki_root{};
    std::uint64_t call_fee = 0; // flat fee per mutating call
    AccountId fee_sink = "fee-sink";
};

class Ledger
{
public:
    explicit Ledger(LedgerConfig cfg);

    // Setup.
    void create_account(const AccountId& account, std::uint64_t balance);
    std::uint64_t balance(const AccountId& account) const;
    std::uint64_t total_balance() const;
    void transfer(const AccountId& from, const AccountId& to, std::uint64_t amount);

    // Asset contract.
    ObjectId register_as(const AccountId& account, const Certificate& cert, const Signature& proof);
    ObjectId issue(const AccountId& account, ObjectId token, const AssetAttrs& attrs);
    std::pair<ObjectId, ObjectId> split_time(const AccountId& account, ObjectId asset, std::int64_t cut);
    std::pair<ObjectId, ObjectId> split_bandwidth(const AccountId& account, ObjectId asset,
        std::uint64_t part);
    ObjectId fuse_time(const AccountId& account, ObjectId a, ObjectId b);
    ObjectId fuse_bandwidth(const AccountId& account, ObjectId a, ObjectId b);
    void transfer_asset(const AccountId& from, ObjectId asset, const AccountId& to);

    // Market contract.
    void register_seller(const AccountId& account);
    ObjectId create_listing(const AccountId& seller, ObjectId asset, std::uint64_t unit_price);
    void cancel_listing(const AccountId& seller, ObjectId listing);
    /// Returns the purchased asset. Remainders are re-listed at the same
    /// unit price by the same seller.
    ObjectId buy(const AccountId& buyer, ObjectId listing, const Want& want);
    /// unit_price * bandwidth * duration, throwing Error(overflow) beyond 64 bits.
    static std::uint64_t price(std::uint64_t unit_price, const Want& want);

    // Redemption.
    ObjectId redeem(const AccountId& owner, ObjectId ingress_asset, ObjectId egress_asset,
        const BoxPublicKey& ephemeral_key);
    /// Called by the AS holding an auth token for the request's AS.
    void deliver(const AccountId& as_account, ObjectId request, const Delivery& delivery);

    /// Runs \p calls against a staged copy and commits only if all succeed.
    BlockResult execute_atomic(const std::vector<Call>& calls);

    // Queries.
    const BandwidthAsset* asset(ObjectId id) const;
    const Listing* listing(ObjectId id) const;
    const AuthToken* token(ObjectId id) const;
    const RedeemRequest* request(ObjectId id) const;
    const Certificate* certificate(wire::IsdAs as) const;
    std::vector<const Listing*> listings(wire::IsdAs as, std::uint16_t interface, Direction dir) const;
    std::vector<const Listing*> all_listings() const;
    std::vector<const BandwidthAsset*> assets_of(const AccountId& owner) const;
    std::vector<ObjectId> pending_requests(wire::IsdAs as) const;
    std::vector<const Delivery*> deliveries_for(const AccountId& requester) const;
    const Delivery* delivery(ObjectId request) const;

    /// Total bandwidth * duration per (AS, interface, direction) over all
    /// assets still in circulation.
    std::map<std::tuple<std::uint16_t, std::uint64_t, std::uint16_t, int>, unsigned __int128>
    area_by_interface() const;

    Digest state_hash() const;
    const std::vector<LogRecord>& log() const { return call_log; }
    /// One line per record: name args_digest result state_hash.
    std::string export_log() const;

private:
    struct State
    {
        ObjectId next_id = 1;
        std::map<AccountId, std::uint64_t> balances;
        std::map<ObjectId, BandwidthAsset> assets;
        std::map<ObjectId, AuthToken> tokens;
        std::map<ObjectId, Listing> listings;
        std::map<AccountId, bool> sellers;
        std::map<ObjectId, RedeemRequest> requests;
        std::map<ObjectId, Delivery> deliveries;
        std::map<std::pair<std::uint16_t, std::uint64_t>, Certificate> certs;
    };

    void charge_fee(const AccountId& account);
    BandwidthAsset& owned_asset(const AccountId& account, ObjectId id);
    void record(std::string name, const std::string& args, const std::string& result);

    template <typename F>
    auto logged(std::string name, const std::string& args, F&& f);

    LedgerConfig cfg;
    State st;
    std::vector<LogRecord> call_log;
};

// AS side -------------------------------------------------------------------

/// Delivers credentials for redeem requests addressed to one AS.
class AsService
{
public:
    AsService(AsCredentials creds, AccountId account, crypto::SecretValue sv);

    /// Processes every pending request for this AS. Returns the number of
    /// deliveries made.
    std::size_t process_pending(Ledger& ledger);
    /// Credentials for one request; exposed for tests.
    source::Credential make_credential(const RedeemRequest& req);

    const AsCredentials& credentials() const { return creds; }
    const AccountId& account() const { return acct; }
    residalloc::ResIdAllocator& allocator() { return alloc; }

private:
    AsCredentials creds;
    AccountId acct;
    crypto::SecretValue sv;
    residalloc::ResIdAllocator alloc;
};

/// Opens a delivery sealed for \p requester with the AS's box key from its
/// certificate. Throws Error(bad_signature) on authentication failure.
source::Credential open_delivery(const Delivery& d, const BoxKeyPair& requester,
    const BoxPublicKey& as_key);

/// Calls that buy one ingress and one egress capacity slice from the given
/// listings and redeem them as a pair, for each hop in order.
struct HopOrder
{
    ObjectId ingress_listing = 0;
    ObjectId egress_listing = 0;
    Want want;
};
std::vector<Call> reserve_path_calls(const AccountId& buyer, const std::vector<HopOrder>& hops,
    const BoxPublicKey& ephemeral_key);

} // namespace hummingbird::ledger
