#include "hummingbird/crypto.hpp"

#include "hummingbird/detail/bytes.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace hummingbird::crypto {

namespace {

// Reusable ECB contexts per thread. Rekeying through EVP costs far more than
// the block itself, so each context remembers its key and skips the rekey
// when the next call uses the same one (the SV and forwarding key of a
// router never change).
class AesEcb
{
public:
    AesEcb()
        : cipher(EVP_CIPHER_fetch(nullptr, "AES-128-ECB", nullptr), &EVP_CIPHER_free)
        , ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free)
    {
        if (!cipher || !ctx) throw std::runtime_error("crypto: AES-128-ECB unavailable");
        if (EVP_EncryptInit_ex2(ctx.get(), cipher.get(), nullptr, nullptr, nullptr) != 1)
            throw std::runtime_error("crypto: cipher init failed");
        EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    }

    Block encrypt(const Key128& key, const Block& in)
    {
        Block out{};
        int len = 0;
        if (!keyed || key != last_key) {
            if (EVP_EncryptInit_ex2(ctx.get(), nullptr, key.data(), nullptr, nullptr) != 1)
                throw std::runtime_error("crypto: AES key setup failed");
            last_key = key;
            keyed = true;
        }
        if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, in.data(), int(in.size())) != 1
            || len != int(out.size()))
            throw std::runtime_error("crypto: AES encryption failed");
        return out;
    }

private:
    std::unique_ptr<EVP_CIPHER, decltype(&EVP_CIPHER_free)> cipher;
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx;
    Key128 last_key{};
    bool keyed = false;
};

enum class Slot { generic, secret, forwarding, reservation, count };

AesEcb& thread_cipher(Slot slot)
{
    thread_local AesEcb aes[std::size_t(Slot::count)];
    return aes[std::size_t(slot)];
}

Mac truncate(const Block& block, std::size_t tag_len)
{
    Mac mac{};
    if (tag_len > mac.size()) tag_len = mac.size();
    for (std::size_t i = 0; i < tag_len; ++i) mac[i] = block[i];
    return mac;
}

} // namespace

Block prf(const Key128& key, const Block& input)
{
    return thread_cipher(Slot::generic).encrypt(key, input);
}

ReservationKey derive_key(const SecretValue& sv, const ReservationInfo& res)
{
    return ReservationKey{thread_cipher(Slot::secret).encrypt(sv.bytes, wire::resinfo_block(res))};
}

std::optional<std::uint16_t> packet_length(std::uint16_t payload_len, std::uint8_t hdr_len)
{
    const std::uint32_t len = std::uint32_t(payload_len) + 4u * hdr_len;
    if (len > 0xffff) return std::nullopt;
    return static_cast<std::uint16_t>(len);
}

Mac flyover_mac(const ReservationKey& key, const wire::MacInput& input, std::size_t tag_len)
{
    return truncate(thread_cipher(Slot::reservation).encrypt(key.bytes, wire::mac_input_block(input)), tag_len);
}

Mac aggregate_mac(const Mac& hop_field_mac, const Mac& flyover_mac)
{
    Mac out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hop_field_mac[i] ^ flyover_mac[i];
    return out;
}

Mac hop_field_mac(const ForwardingKey& key, std::uint16_t seg_id, std::uint32_t timestamp,
    std::uint8_t exp_time, std::uint16_t cons_ingress, std::uint16_t cons_egress)
{
    using namespace hummingbird::detail;
    Block in{};
    store_be16(&in[2], seg_id);
    store_be32(&in[4], timestamp);
    in[9] = exp_time;
    store_be16(&in[10], cons_ingress);
    store_be16(&in[12], cons_egress);
    return truncate(thread_cipher(Slot::forwarding).encrypt(key.bytes, in), wire::kMacLen);
}

bool mac_equal(const Mac& a, const Mac& b)
{
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<std::uint8_t>(a[i] ^ b[i]);
    return diff == 0;
}

} // namespace hummingbird::crypto
