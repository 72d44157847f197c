#include "hummingbird/ledger.hpp"

#include "hummingbird/detail/bytes.hpp"
#include "hummingbird/error.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <sstream>

namespace hummingbird::ledger {

namespace {

void ensure_sodium()
{
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

[[noreturn]] void fail(Errc code, const std::string& what)
{
    throw Error(code, "ledger: " + what);
}

std::string id_str(ObjectId id) { return "#" + std::to_string(id); }

std::string as_str(wire::IsdAs as)
{
    return std::to_string(as.isd) + "-" + std::to_string(as.as);
}

// Canonical byte serialization for hashing.
class Writer
{
public:
    void u8(std::uint8_t v) { buf.push_back(v); }
    void u64(std::uint64_t v)
    {
        for (int i = 7; i >= 0; --i) buf.push_back(std::uint8_t(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(std::uint64_t(v)); }
    void str(std::string_view s)
    {
        u64(s.size());
        buf.insert(buf.end(), s.begin(), s.end());
    }
    void bytes(std::span<const std::uint8_t> b)
    {
        u64(b.size());
        buf.insert(buf.end(), b.begin(), b.end());
    }
    void as(wire::IsdAs a)
    {
        u64(a.isd);
        u64(a.as);
    }
    void attrs(const AssetAttrs& a)
    {
        as(a.as);
        u64(a.bandwidth);
        i64(a.start_time);
        i64(a.expiration_time);
        u64(a.interface);
        u8(std::uint8_t(a.direction));
        i64(a.time_granularity);
        u64(a.min_bandwidth);
    }
    const std::vector<std::uint8_t>& data() const { return buf; }

private:
    std::vector<std::uint8_t> buf;
};

std::vector<std::uint8_t> cert_body(const Certificate& c)
{
    Writer w;
    w.str("hummingbird-cert");
    w.as(c.as);
    w.bytes(c.sign_key);
    w.bytes(c.box_key);
    return w.data();
}

std::vector<std::uint8_t> possession_msg(const Certificate& c, const AccountId& account)
{
    Writer w;
    w.str("hummingbird-register");
    w.as(c.as);
    w.str(account);
    return w.data();
}

bool same_except_time(const AssetAttrs& a, const AssetAttrs& b)
{
    return a.as == b.as && a.bandwidth == b.bandwidth && a.interface == b.interface
        && a.direction == b.direction && a.time_granularity == b.time_granularity
        && a.min_bandwidth == b.min_bandwidth;
}

bool same_except_bandwidth(const AssetAttrs& a, const AssetAttrs& b)
{
    return a.as == b.as && a.start_time == b.start_time && a.expiration_time == b.expiration_time
        && a.interface == b.interface && a.direction == b.direction
        && a.time_granularity == b.time_granularity && a.min_bandwidth == b.min_bandwidth;
}

constexpr std::size_t kCredentialLen = wire::kBlockLen + 16;

} // namespace

Digest sha256(std::span<const std::uint8_t> data)
{
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    return out;
}

Digest derive_seed(std::uint64_t seed, std::string_view label)
{
    Writer w;
    w.u64(seed);
    w.str(label);
    return sha256(w.data());
}

std::string hex(std::span<const std::uint8_t> data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

BoxKeyPair BoxKeyPair::from_seed(const Digest& seed)
{
    ensure_sodium();
    BoxKeyPair kp;
    crypto_box_seed_keypair(kp.pub.data(), kp.sec.data(), seed.data());
    return kp;
}

Pki::Pki(std::uint64_t seed) : seed(seed)
{
    ensure_sodium();
    const Digest s = derive_seed(seed, "pki-root");
    crypto_sign_seed_keypair(root_pub.data(), root_sec.data(), s.data());
}

AsCredentials Pki::enroll(wire::IsdAs as) const
{
    AsCredentials c;
    c.cert.as = as;
    const Digest s = derive_seed(seed, "as-sign-" + as_str(as));
    crypto_sign_seed_keypair(c.cert.sign_key.data(), c.sign_secret.data(), s.data());
    c.box = BoxKeyPair::from_seed(derive_seed(seed, "as-box-" + as_str(as)));
    c.cert.box_key = c.box.pub;
    const auto body = cert_body(c.cert);
    crypto_sign_detached(c.cert.root_sig.data(), nullptr, body.data(), body.size(), root_sec.data());
    return c;
}

bool verify_certificate(const Certificate& cert, const SignPublicKey& root)
{
    ensure_sodium();
    const auto body = cert_body(cert);
    return crypto_sign_verify_detached(cert.root_sig.data(), body.data(), body.size(), root.data()) == 0;
}

Signature prove_possession(const AsCredentials& creds, const AccountId& account)
{
    ensure_sodium();
    Signature sig{};
    const auto msg = possession_msg(creds.cert, account);
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), creds.sign_secret.data());
    return sig;
}

std::string_view to_string(Direction d)
{
    return d == Direction::ingress ? "ingress" : "egress";
}

// Ledger --------------------------------------------------------------------

Ledger::Ledger(LedgerConfig config) : cfg(std::move(config))
{
    st.balances[cfg.fee_sink] = 0;
}

void Ledger::record(std::string name, const std::string& args, const std::string& result)
{
    const Digest a = sha256(std::span(reinterpret_cast<const std::uint8_t*>(args.data()), args.size()));
    const Digest h = state_hash();
    call_log.push_back(LogRecord{std::move(name), hex(a), result, hex(h)});
}

template <typename F>
auto Ledger::logged(std::string name, const std::string& args, F&& f)
{
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(std::move(name), args, "ok");
        } else {
            auto r = f();
            std::ostringstream os;
            if constexpr (std::is_same_v<decltype(r), ObjectId>)
                os << "ok " << id_str(r);
            else
                os << "ok " << id_str(r.first) << " " << id_str(r.second);
            record(std::move(name), args, os.str());
            return r;
        }
    } catch (const Error& e) {
        record(std::move(name), args, std::string(hummingbird::to_string(e.code())));
        throw;
    }
}

void Ledger::create_account(const AccountId& account, std::uint64_t balance)
{
    logged("create_account", account + " " + std::to_string(balance), [&] {
        if (account.empty()) fail(Errc::invalid_argument, "empty account id");
        if (st.balances.contains(account)) fail(Errc::invalid_argument, "account exists: " + account);
        st.balances[account] = balance;
    });
}

std::uint64_t Ledger::balance(const AccountId& account) const
{
    auto it = st.balances.find(account);
    if (it == st.balances.end()) fail(Errc::not_found, "no account " + account);
    return it->second;
}

std::uint64_t Ledger::total_balance() const
{
    std::uint64_t sum = 0;
    for (const auto& [_, b] : st.balances) sum += b;
    return sum;
}

void Ledger::transfer(const AccountId& from, const AccountId& to, std::uint64_t amount)
{
    logged("transfer", from + " " + to + " " + std::to_string(amount), [&] {
        auto f = st.balances.find(from);
        auto t = st.balances.find(to);
        if (f == st.balances.end() || t == st.balances.end()) fail(Errc::not_found, "unknown account");
        if (f->second < amount) fail(Errc::insufficient_funds, from + " cannot pay " + std::to_string(amount));
        f->second -= amount;
        t->second += amount;
    });
}

void Ledger::charge_fee(const AccountId& account)
{
    if (cfg.call_fee == 0) return;
    st.balances.at(account) -= cfg.call_fee;
    st.balances.at(cfg.fee_sink) += cfg.call_fee;
}

BandwidthAsset& Ledger::owned_asset(const AccountId& account, ObjectId id)
{
    auto it = st.assets.find(id);
    if (it == st.assets.end()) fail(Errc::not_found, "no asset " + id_str(id));
    if (it->second.owner != account) fail(Errc::not_owner, account + " does not own " + id_str(id));
    if (it->second.listing) fail(Errc::bad_state, id_str(id) + " is escrowed in a listing");
    return it->second;
}

namespace {

// Fee precondition shared by all mutating calls: checked before any change.
void require_fee(const std::map<AccountId, std::uint64_t>& balances, const AccountId& account,
    std::uint64_t fee, std::uint64_t extra = 0)
{
    auto it = balances.find(account);
    if (it == balances.end()) fail(Errc::not_found, "no account " + account);
    if (it->second < fee || it->second - fee < extra)
        fail(Errc::insufficient_funds, account + " cannot pay " + std::to_string(fee + extra));
}

} // namespace

ObjectId Ledger::register_as(const AccountId& account, const Certificate& cert, const Signature& proof)
{
    return logged("register_as", account + " " + as_str(cert.as), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        if (!verify_certificate(cert, cfg.pki_root))
            fail(Errc::bad_signature, "certificate for " + as_str(cert.as) + " does not verify");
        ensure_sodium();
        const auto msg = possession_msg(cert, account);
        if (crypto_sign_verify_detached(proof.data(), msg.data(), msg.size(), cert.sign_key.data()) != 0)
            fail(Errc::bad_signature, "proof of key possession does not verify");
        const ObjectId id = st.next_id++;
        st.tokens[id] = AuthToken{id, cert.as, account};
        st.certs[{cert.as.isd, cert.as.as}] = cert;
        charge_fee(account);
        return id;
    });
}

ObjectId Ledger::issue(const AccountId& account, ObjectId token, const AssetAttrs& attrs)
{
    std::ostringstream args;
    args << account << " " << token << " " << as_str(attrs.as) << " " << attrs.bandwidth << " "
         << attrs.start_time << " " << attrs.expiration_time << " " << attrs.interface << " "
         << to_string(attrs.direction) << " " << attrs.time_granularity << " " << attrs.min_bandwidth;
    return logged("issue", args.str(), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        auto t = st.tokens.find(token);
        if (t == st.tokens.end()) fail(Errc::unauthorized, "no auth token " + id_str(token));
        if (t->second.account != account) fail(Errc::unauthorized, "token not issued to " + account);
        if (!(t->second.as == attrs.as))
            fail(Errc::unauthorized, "token for " + as_str(t->second.as) + " cannot issue for " + as_str(attrs.as));
        if (attrs.time_granularity <= 0) fail(Errc::invalid_argument, "time granularity must be positive");
        if (attrs.start_time >= attrs.expiration_time) fail(Errc::invalid_argument, "start must precede expiration");
        if ((attrs.expiration_time - attrs.start_time) % attrs.time_granularity != 0)
            fail(Errc::misaligned, "duration is not a multiple of the time granularity");
        if (attrs.bandwidth == 0 || attrs.bandwidth < attrs.min_bandwidth)
            fail(Errc::below_minimum, "bandwidth below the minimum");
        const ObjectId id = st.next_id++;
        st.assets[id] = BandwidthAsset{id, attrs, account, std::nullopt};
        charge_fee(account);
        return id;
    });
}

std::pair<ObjectId, ObjectId> Ledger::split_time(const AccountId& account, ObjectId asset, std::int64_t cut)
{
    return logged("split_time", account + " " + std::to_string(asset) + " " + std::to_string(cut), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        const BandwidthAsset orig = owned_asset(account, asset);
        const auto& a = orig.attrs;
        if (cut <= a.start_time || cut >= a.expiration_time)
            fail(Errc::invalid_argument, "cut outside the asset's validity");
        if ((cut - a.start_time) % a.time_granularity != 0)
            fail(Errc::misaligned, "cut not aligned to the time granularity");
        BandwidthAsset first = orig, second = orig;
        first.id = st.next_id++;
        first.attrs.expiration_time = cut;
        second.id = st.next_id++;
        second.attrs.start_time = cut;
        st.assets.erase(asset);
        st.assets[first.id] = first;
        st.assets[second.id] = second;
        charge_fee(account);
        return std::pair{first.id, second.id};
    });
}

std::pair<ObjectId, ObjectId> Ledger::split_bandwidth(const AccountId& account, ObjectId asset,
    std::uint64_t part)
{
    return logged("split_bandwidth", account + " " + std::to_string(asset) + " " + std::to_string(part), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        const BandwidthAsset orig = owned_asset(account, asset);
        const auto& a = orig.attrs;
        if (part == 0 || part >= a.bandwidth) fail(Errc::invalid_argument, "part must be inside (0, bandwidth)");
        if (part < a.min_bandwidth || a.bandwidth - part < a.min_bandwidth)
            fail(Errc::below_minimum, "both parts must be at least the minimum bandwidth");
        BandwidthAsset rest = orig, piece = orig;
        rest.id = st.next_id++;
        rest.attrs.bandwidth = a.bandwidth - part;
        piece.id = st.next_id++;
        piece.attrs.bandwidth = part;
        st.assets.erase(asset);
        st.assets[rest.id] = rest;
        st.assets[piece.id] = piece;
        charge_fee(account);
        return std::pair{rest.id, piece.id};
    });
}

ObjectId Ledger::fuse_time(const AccountId& account, ObjectId a, ObjectId b)
{
    return logged("fuse_time", account + " " + std::to_string(a) + " " + std::to_string(b), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        if (a == b) fail(Errc::invalid_argument, "cannot fuse an asset with itself");
        BandwidthAsset x = owned_asset(account, a);
        BandwidthAsset y = owned_asset(account, b);
        if (y.attrs.expiration_time == x.attrs.start_time) std::swap(x, y);
        if (!same_except_time(x.attrs, y.attrs))
            fail(Errc::incompatible, "assets differ in more than their time span");
        if (x.attrs.expiration_time != y.attrs.start_time)
            fail(Errc::incompatible, "time spans are not adjacent");
        BandwidthAsset fused = x;
        fused.id = st.next_id++;
        fused.attrs.expiration_time = y.attrs.expiration_time;
        st.assets.erase(a);
        st.assets.erase(b);
        st.assets[fused.id] = fused;
        charge_fee(account);
        return fused.id;
    });
}

ObjectId Ledger::fuse_bandwidth(const AccountId& account, ObjectId a, ObjectId b)
{
    return logged("fuse_bandwidth", account + " " + std::to_string(a) + " " + std::to_string(b), [&] {
        require_fee(st.balances, account, cfg.call_fee);
        if (a == b) fail(Errc::invalid_argument, "cannot fuse an asset with itself");
        const BandwidthAsset x = owned_asset(account, a);
        const BandwidthAsset y = owned_asset(account, b);
        if (!same_except_bandwidth(x.attrs, y.attrs))
            fail(Errc::incompatible, "assets differ in more than their bandwidth");
        if (x.attrs.bandwidth > std::numeric_limits<std::uint64_t>::max() - y.attrs.bandwidth)
            fail(Errc::overflow, "fused bandwidth overflows");
        BandwidthAsset fused = x;
        fused.id = st.next_id++;
        fused.attrs.bandwidth = x.attrs.bandwidth + y.attrs.bandwidth;
        st.assets.erase(a);
        st.assets.erase(b);
        st.assets[fused.id] = fused;
        charge_fee(account);
        return fused.id;
    });
}

void Ledger::transfer_asset(const AccountId& from, ObjectId asset, const AccountId& to)
{
    logged("transfer_asset", from + " " + std::to_string(asset) + " " + to, [&] {
        require_fee(st.balances, from, cfg.call_fee);
        if (!st.balances.contains(to)) fail(Errc::not_found, "no account " + to);
        owned_asset(from, asset).owner = to;
        charge_fee(from);
    });
}

void Ledger::register_seller(const AccountId& account)
{
    logged("register_seller", account, [&] {
        require_fee(st.balances, account, cfg.call_fee);
        st.sellers[account] = true;
        charge_fee(account);
    });
}

ObjectId Ledger::create_listing(const AccountId& seller, ObjectId asset, std::uint64_t unit_price)
{
    return logged("create_listing", seller + " " + std::to_string(asset) + " " + std::to_string(unit_price), [&] {
        require_fee(st.balances, seller, cfg.call_fee);
        if (!st.sellers.contains(seller)) fail(Errc::unauthorized, seller + " is not a registered seller");
        BandwidthAsset& a = owned_asset(seller, asset);
        const ObjectId id = st.next_id++;
        st.listings[id] = Listing{id, asset, unit_price, seller};
        a.listing = id;
        charge_fee(seller);
        return id;
    });
}

void Ledger::cancel_listing(const AccountId& seller, ObjectId listing)
{
    logged("cancel_listing", seller + " " + std::to_string(listing), [&] {
        require_fee(st.balances, seller, cfg.call_fee);
        auto it = st.listings.find(listing);
        if (it == st.listings.end()) fail(Errc::not_found, "no listing " + id_str(listing));
        if (it->second.seller != seller) fail(Errc::not_owner, "listing belongs to " + it->second.seller);
        st.assets.at(it->second.asset).listing.reset();
        st.listings.erase(it);
        charge_fee(seller);
    });
}

std::uint64_t Ledger::price(std::uint64_t unit_price, const Want& want)
{
    const auto duration = static_cast<unsigned __int128>(want.expiration_time - want.start_time);
    const unsigned __int128 p = static_cast<unsigned __int128>(unit_price) * want.bandwidth * duration;
    if (want.expiration_time < want.start_time || p > std::numeric_limits<std::uint64_t>::max())
        fail(Errc::overflow, "price exceeds 64 bits");
    return std::uint64_t(p);
}

ObjectId Ledger::buy(const AccountId& buyer, ObjectId listing, const Want& want)
{
    std::ostringstream args;
    args << buyer << " " << listing << " " << want.start_time << " " << want.expiration_time << " "
         << want.bandwidth;
    return logged("buy", args.str(), [&] {
        auto lit = st.listings.find(listing);
        if (lit == st.listings.end()) fail(Errc::not_found, "no listing " + id_str(listing));
        const Listing l = lit->second;
        const BandwidthAsset orig = st.assets.at(l.asset);
        const AssetAttrs& a = orig.attrs;

        if (want.start_time >= want.expiration_time) fail(Errc::invalid_argument, "empty time window");
        if (want.start_time < a.start_time || want.expiration_time > a.expiration_time)
            fail(Errc::invalid_argument, "window outside the listed asset");
        if ((want.start_time - a.start_time) % a.time_granularity != 0
            || (want.expiration_time - a.start_time) % a.time_granularity != 0)
            fail(Errc::misaligned, "window not aligned to the time granularity");
        if (want.bandwidth == 0 || want.bandwidth > a.bandwidth)
            fail(Errc::invalid_argument, "bandwidth outside (0, listed bandwidth]");
        if (want.bandwidth < a.min_bandwidth
            || (want.bandwidth < a.bandwidth && a.bandwidth - want.bandwidth < a.min_bandwidth))
            fail(Errc::below_minimum, "bandwidth split leaves a part below the minimum");
        const std::uint64_t cost = price(l.unit_price, want);
        require_fee(st.balances, buyer, cfg.call_fee, cost);

        st.listings.erase(listing);
        st.assets.erase(l.asset);
        auto relist = [&](AssetAttrs attrs) {
            const ObjectId aid = st.next_id++;
            const ObjectId lid = st.next_id++;
            st.assets[aid] = BandwidthAsset{aid, attrs, l.seller, lid};
            st.listings[lid] = Listing{lid, aid, l.unit_price, l.seller};
        };
        if (want.start_time > a.start_time) {
            AssetAttrs left = a;
            left.expiration_time = want.start_time;
            relist(left);
        }
        if (want.expiration_time < a.expiration_time) {
            AssetAttrs right = a;
            right.start_time = want.expiration_time;
            relist(right);
        }
        AssetAttrs bought = a;
        bought.start_time = want.start_time;
        bought.expiration_time = want.expiration_time;
        if (want.bandwidth < a.bandwidth) {
            AssetAttrs rest = bought;
            rest.bandwidth = a.bandwidth - want.bandwidth;
            relist(rest);
        }
        bought.bandwidth = want.bandwidth;
        const ObjectId id = st.next_id++;
        st.assets[id] = BandwidthAsset{id, bought, buyer, std::nullopt};

        st.balances.at(buyer) -= cost;
        st.balances.at(l.seller) += cost;
        charge_fee(buyer);
        return id;
    });
}

ObjectId Ledger::redeem(const AccountId& owner, ObjectId ingress_asset, ObjectId egress_asset,
    const BoxPublicKey& ephemeral_key)
{
    return logged("redeem", owner + " " + std::to_string(ingress_asset) + " " + std::to_string(egress_asset)
        + " " + hex(ephemeral_key), [&] {
        require_fee(st.balances, owner, cfg.call_fee);
        if (ingress_asset == egress_asset) fail(Errc::incompatible, "ingress and egress asset are the same");
        const BandwidthAsset in = owned_asset(owner, ingress_asset);
        const BandwidthAsset eg = owned_asset(owner, egress_asset);
        if (in.attrs.direction != Direction::ingress || eg.attrs.direction != Direction::egress)
            fail(Errc::incompatible, "need one ingress and one egress asset");
        if (!(in.attrs.as == eg.attrs.as)) fail(Errc::incompatible, "assets belong to different ASes");
        if (in.attrs.start_time != eg.attrs.start_time || in.attrs.expiration_time != eg.attrs.expiration_time)
            fail(Errc::incompatible, "validity periods differ");
        if (in.attrs.bandwidth != eg.attrs.bandwidth) fail(Errc::incompatible, "bandwidths differ");
        const ObjectId id = st.next_id++;
        st.requests[id] = RedeemRequest{id, in.attrs, eg.attrs, ephemeral_key, owner};
        st.assets.erase(ingress_asset);
        st.assets.erase(egress_asset);
        charge_fee(owner);
        return id;
    });
}

void Ledger::deliver(const AccountId& as_account, ObjectId request, const Delivery& delivery)
{
    logged("deliver", as_account + " " + std::to_string(request) + " " + hex(delivery.sealed), [&] {
        require_fee(st.balances, as_account, cfg.call_fee);
        auto it = st.requests.find(request);
        if (it == st.requests.end()) fail(Errc::not_found, "no redeem request " + id_str(request));
        if (st.deliveries.contains(request)) fail(Errc::bad_state, "request already delivered");
        const wire::IsdAs as = it->second.ingress.as;
        const bool authorized = std::any_of(st.tokens.begin(), st.tokens.end(), [&](const auto& t) {
            return t.second.account == as_account && t.second.as == as;
        });
        if (!authorized) fail(Errc::unauthorized, as_account + " holds no token for " + as_str(as));
        Delivery d = delivery;
        d.request = request;
        d.as = as;
        d.requester = it->second.requester;
        st.deliveries[request] = std::move(d);
        charge_fee(as_account);
    });
}

BlockResult Ledger::execute_atomic(const std::vector<Call>& calls)
{
    BlockResult out;
    Ledger staged = *this;
    staged.call_log.clear();
    for (std::size_t i = 0; i < calls.size(); ++i) {
        try {
            out.results.push_back(calls[i].fn(staged, out.results));
        } catch (const Error& e) {
            out.ok = false;
            out.failed_index = i;
            out.error = e.code();
            out.message = e.what();
            out.results.clear();
            record("execute_atomic", std::to_string(calls.size()) + " calls",
                "failed at " + std::to_string(i) + " (" + calls[i].name + "): "
                    + std::string(hummingbird::to_string(e.code())));
            return out;
        }
    }
    st = std::move(staged.st);
    for (auto& r : staged.call_log) call_log.push_back(std::move(r));
    record("execute_atomic", std::to_string(calls.size()) + " calls", "ok");
    out.ok = true;
    return out;
}

const BandwidthAsset* Ledger::asset(ObjectId id) const
{
    auto it = st.assets.find(id);
    return it == st.assets.end() ? nullptr : &it->second;
}

const Listing* Ledger::listing(ObjectId id) const
{
    auto it = st.listings.find(id);
    return it == st.listings.end() ? nullptr : &it->second;
}

const AuthToken* Ledger::token(ObjectId id) const
{
    auto it = st.tokens.find(id);
    return it == st.tokens.end() ? nullptr : &it->second;
}

const RedeemRequest* Ledger::request(ObjectId id) const
{
    auto it = st.requests.find(id);
    return it == st.requests.end() ? nullptr : &it->second;
}

const Certificate* Ledger::certificate(wire::IsdAs as) const
{
    auto it = st.certs.find({as.isd, as.as});
    return it == st.certs.end() ? nullptr : &it->second;
}

std::vector<const Listing*> Ledger::listings(wire::IsdAs as, std::uint16_t interface, Direction dir) const
{
    std::vector<const Listing*> out;
    for (const auto& [_, l] : st.listings) {
        const auto& a = st.assets.at(l.asset).attrs;
        if (a.as == as && a.interface == interface && a.direction == dir) out.push_back(&l);
    }
    return out;
}

std::vector<const Listing*> Ledger::all_listings() const
{
    std::vector<const Listing*> out;
    for (const auto& [_, l] : st.listings) out.push_back(&l);
    return out;
}

std::vector<const BandwidthAsset*> Ledger::assets_of(const AccountId& owner) const
{
    std::vector<const BandwidthAsset*> out;
    for (const auto& [_, a] : st.assets)
        if (a.owner == owner) out.push_back(&a);
    return out;
}

std::vector<ObjectId> Ledger::pending_requests(wire::IsdAs as) const
{
    std::vector<ObjectId> out;
    for (const auto& [id, r] : st.requests)
        if (r.ingress.as == as && !st.deliveries.contains(id)) out.push_back(id);
    return out;
}

std::vector<const Delivery*> Ledger::deliveries_for(const AccountId& requester) const
{
    std::vector<const Delivery*> out;
    for (const auto& [_, d] : st.deliveries)
        if (d.requester == requester) out.push_back(&d);
    return out;
}

const Delivery* Ledger::delivery(ObjectId request) const
{
    auto it = st.deliveries.find(request);
    return it == st.deliveries.end() ? nullptr : &it->second;
}

std::map<std::tuple<std::uint16_t, std::uint64_t, std::uint16_t, int>, unsigned __int128>
Ledger::area_by_interface() const
{
    std::map<std::tuple<std::uint16_t, std::uint64_t, std::uint16_t, int>, unsigned __int128> out;
    for (const auto& [_, a] : st.assets) {
        const auto key = std::tuple{a.attrs.as.isd, a.attrs.as.as, a.attrs.interface, int(a.attrs.direction)};
        out[key] += static_cast<unsigned __int128>(a.attrs.bandwidth) * std::uint64_t(a.duration());
    }
    return out;
}

Digest Ledger::state_hash() const
{
    Writer w;
    w.u64(st.next_id);
    w.u64(st.balances.size());
    for (const auto& [k, v] : st.balances) {
        w.str(k);
        w.u64(v);
    }
    w.u64(st.assets.size());
    for (const auto& [id, a] : st.assets) {
        w.u64(id);
        w.attrs(a.attrs);
        w.str(a.owner);
        w.u64(a.listing.value_or(0));
    }
    w.u64(st.tokens.size());
    for (const auto& [id, t] : st.tokens) {
        w.u64(id);
        w.as(t.as);
        w.str(t.account);
    }
    w.u64(st.listings.size());
    for (const auto& [id, l] : st.listings) {
        w.u64(id);
        w.u64(l.asset);
        w.u64(l.unit_price);
        w.str(l.seller);
    }
    w.u64(st.sellers.size());
    for (const auto& [k, _] : st.sellers) w.str(k);
    w.u64(st.requests.size());
    for (const auto& [id, r] : st.requests) {
        w.u64(id);
        w.attrs(r.ingress);
        w.attrs(r.egress);
        w.bytes(r.requester_key);
        w.str(r.requester);
    }
    w.u64(st.deliveries.size());
    for (const auto& [id, d] : st.deliveries) {
        w.u64(id);
        w.as(d.as);
        w.str(d.requester);
        w.bytes(d.nonce);
        w.bytes(d.sealed);
    }
    w.u64(st.certs.size());
    for (const auto& [_, c] : st.certs) {
        w.bytes(cert_body(c));
        w.bytes(c.root_sig);
    }
    return sha256(w.data());
}

std::string Ledger::export_log() const
{
    std::string out;
    for (const auto& r : call_log)
        out += r.name + " " + r.args_digest + " " + r.result + " " + r.state_hash + "\n";
    return out;
}

// AS service ----------------------------------------------------------------

AsService::AsService(AsCredentials creds, AccountId account, crypto::SecretValue sv)
    : creds(std::move(creds)), acct(std::move(account)), sv(sv)
{}

source::Credential AsService::make_credential(const RedeemRequest& req)
{
    const std::int64_t duration = req.ingress.expiration_time - req.ingress.start_time;
    if (duration <= 0 || duration > 0xffff)
        fail(Errc::invalid_argument, "reservation duration must fit in 16 bits");
    if (req.ingress.start_time < 0 || req.ingress.start_time > std::numeric_limits<std::uint32_t>::max())
        fail(Errc::invalid_argument, "reservation start must fit in 32 bits");
    if (req.ingress.bandwidth > wire::max_bw_value())
        fail(Errc::invalid_argument, "bandwidth exceeds the largest encodable value");
    ReservationInfo res;
    res.ingress = req.ingress.interface;
    res.egress = req.egress.interface;
    res.bw = wire::quantize_bw(req.ingress.bandwidth);
    res.res_start = std::uint32_t(req.ingress.start_time);
    res.duration = std::uint16_t(duration);
    res.res_id = alloc.assign(res.ingress,
        residalloc::ReservationInterval{req.ingress.start_time, req.ingress.expiration_time, req.id});
    return source::Credential{res, crypto::derive_key(sv, res)};
}

std::size_t AsService::process_pending(Ledger& ledger)
{
    ensure_sodium();
    std::size_t n = 0;
    for (ObjectId id : ledger.pending_requests(creds.cert.as)) {
        const RedeemRequest& req = *ledger.request(id);
        const source::Credential cred = make_credential(req);

        std::array<std::uint8_t, kCredentialLen> msg{};
        const wire::Block info = wire::resinfo_block(cred.res);
        std::copy(info.begin(), info.end(), msg.begin());
        std::copy(cred.key.bytes.begin(), cred.key.bytes.end(), msg.begin() + wire::kBlockLen);

        Delivery d;
        Writer w;
        w.str("delivery-nonce");
        w.u64(id);
        w.as(creds.cert.as);
        const Digest nd = sha256(w.data());
        std::copy_n(nd.begin(), d.nonce.size(), d.nonce.begin());
        d.sealed.resize(msg.size() + crypto_box_MACBYTES);
        if (crypto_box_easy(d.sealed.data(), msg.data(), msg.size(), d.nonce.data(),
                req.requester_key.data(), creds.box.sec.data()) != 0)
            fail(Errc::invalid_argument, "sealing failed for request " + id_str(id));
        ledger.deliver(acct, id, d);
        ++n;
    }
    return n;
}

source::Credential open_delivery(const Delivery& d, const BoxKeyPair& requester, const BoxPublicKey& as_key)
{
    ensure_sodium();
    if (d.sealed.size() != kCredentialLen + crypto_box_MACBYTES)
        fail(Errc::bad_signature, "sealed delivery has the wrong length");
    std::array<std::uint8_t, kCredentialLen> msg{};
    if (crypto_box_open_easy(msg.data(), d.sealed.data(), d.sealed.size(), d.nonce.data(),
            as_key.data(), requester.sec.data()) != 0)
        fail(Errc::bad_signature, "delivery does not authenticate");
    wire::Block info{};
    std::copy_n(msg.begin(), info.size(), info.begin());
    source::Credential cred;
    cred.res = wire::parse_resinfo_block(info);
    std::copy_n(msg.begin() + wire::kBlockLen, cred.key.bytes.size(), cred.key.bytes.begin());
    return cred;
}

std::vector<Call> reserve_path_calls(const AccountId& buyer, const std::vector<HopOrder>& hops,
    const BoxPublicKey& ephemeral_key)
{
    std::vector<Call> calls;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        const HopOrder h = hops[i];
        calls.push_back({"buy", [=](Ledger& l, const std::vector<CallResult>&) {
            return CallResult{{l.buy(buyer, h.ingress_listing, h.want)}};
        }});
        calls.push_back({"buy", [=](Ledger& l, const std::vector<CallResult>&) {
            return CallResult{{l.buy(buyer, h.egress_listing, h.want)}};
        }});
        calls.push_back({"redeem", [=](Ledger& l, const std::vector<CallResult>& prev) {
            const ObjectId in = prev[3 * i].ids.at(0);
            const ObjectId eg = prev[3 * i + 1].ids.at(0);
            return CallResult{{l.redeem(buyer, in, eg, ephemeral_key)}};
        }});
    }
    return calls;
}

} // namespace hummingbird::ledger
