#include <zmix/sealing.hpp>

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace zmix {

SymmetricKey random_key(Rng& rng) {
    SymmetricKey k{};
    rng.fill(k.data(), k.size());
    return k;
}

namespace {

std::uint64_t load64(const std::uint8_t* p) {
    std::uint64_t w = 0;
    for (int i = 7; i >= 0; --i) w = (w << 8) | p[i];
    return w;
}

void store64(std::uint8_t* p, std::uint64_t w) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(w >> (8 * i));
}

// Layout: nonce(16) | ciphertext | tag(16).
class KeyedPrpSealer final : public Sealer {
public:
    static constexpr std::size_t kNonce = 16;
    static constexpr std::size_t kTag = 16;

    std::size_t overhead() const override { return kNonce + kTag; }
    std::string_view name() const override { return "keyed-prp"; }

    Bytes seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext, Rng& rng) const override {
        Bytes out(kNonce + plaintext.size() + kTag);
        rng.fill(out.data(), kNonce);
        std::memcpy(out.data() + kNonce, plaintext.data(), plaintext.size());
        apply_keystream(key, out.data(), out.data() + kNonce, plaintext.size());
        tag(key, std::span(out.data(), kNonce + plaintext.size()), out.data() + kNonce + plaintext.size());
        return out;
    }

    std::optional<Bytes> open(const SymmetricKey& key, std::span<const std::uint8_t> sealed) const override {
        if (sealed.size() < overhead()) return std::nullopt;
        const std::size_t body = sealed.size() - overhead();
        std::array<std::uint8_t, kTag> expect{};
        tag(key, sealed.first(kNonce + body), expect.data());
        std::uint8_t diff = 0;
        for (std::size_t i = 0; i < kTag; ++i) diff |= expect[i] ^ sealed[kNonce + body + i];
        if (diff != 0) return std::nullopt;
        Bytes out(sealed.begin() + kNonce, sealed.begin() + kNonce + body);
        apply_keystream(key, sealed.data(), out.data(), body);
        return out;
    }

private:
    static void apply_keystream(const SymmetricKey& key, const std::uint8_t* nonce, std::uint8_t* data, std::size_t n) {
        const std::uint64_t k0 = load64(key.data()), k1 = load64(key.data() + 8);
        const std::uint64_t seed = mix64(k0 ^ load64(nonce)) ^ mix64(k1 ^ load64(nonce + 8));
        for (std::size_t block = 0; block * 8 < n; ++block) {
            std::uint8_t ks[8];
            store64(ks, mix64(seed ^ mix64(block)));
            for (std::size_t i = 0; i < 8 && block * 8 + i < n; ++i) data[block * 8 + i] ^= ks[i];
        }
    }

    // Two independent keyed lanes over 8-byte words, finished with the length.
    static void tag(const SymmetricKey& key, std::span<const std::uint8_t> msg, std::uint8_t* out) {
        std::uint64_t a = load64(key.data() + 16), b = load64(key.data() + 24);
        std::size_t i = 0;
        for (; i + 8 <= msg.size(); i += 8) {
            const std::uint64_t w = load64(msg.data() + i);
            a = mix64(a ^ w);
            b = mix64(b + (w ^ 0xa0761d6478bd642fULL));
        }
        std::uint8_t tail[8] = {};
        std::memcpy(tail, msg.data() + i, msg.size() - i);
        const std::uint64_t w = load64(tail) ^ (static_cast<std::uint64_t>(msg.size()) << 56);
        a = mix64(a ^ w ^ msg.size());
        b = mix64(b + w + msg.size());
        store64(out, mix64(a ^ load64(key.data())));
        store64(out + 8, mix64(b ^ load64(key.data() + 8)));
    }
};

// Layout: nonce(24) | secretbox (MAC 16 + ciphertext).
class SodiumSealer final : public Sealer {
public:
    SodiumSealer() {
        if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialise");
    }

    std::size_t overhead() const override { return crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES; }
    std::string_view name() const override { return "sodium"; }

    Bytes seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext, Rng& rng) const override {
        static_assert(crypto_secretbox_KEYBYTES == std::tuple_size_v<SymmetricKey>);
        Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plaintext.size());
        rng.fill(out.data(), crypto_secretbox_NONCEBYTES);
        crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(), plaintext.size(), out.data(),
                              key.data());
        return out;
    }

    std::optional<Bytes> open(const SymmetricKey& key, std::span<const std::uint8_t> sealed) const override {
        if (sealed.size() < overhead()) return std::nullopt;
        Bytes out(sealed.size() - overhead());
        const auto* box = sealed.data() + crypto_secretbox_NONCEBYTES;
        if (crypto_secretbox_open_easy(out.data(), box, sealed.size() - crypto_secretbox_NONCEBYTES, sealed.data(),
                                       key.data()) != 0)
            return std::nullopt;
        return out;
    }
};

} // namespace

std::unique_ptr<Sealer> make_sealer(SealingScheme scheme) {
    switch (scheme) {
    case SealingScheme::KeyedPrp: return std::make_unique<KeyedPrpSealer>();
    case SealingScheme::Sodium: return std::make_unique<SodiumSealer>();
    }
    throw std::invalid_argument("unknown sealing scheme");
}

std::optional<SealingScheme> parse_sealing_scheme(std::string_view s) {
    if (s == "keyed-prp") return SealingScheme::KeyedPrp;
    if (s == "sodium") return SealingScheme::Sodium;
    return std::nullopt;
}

std::string_view to_string(SealingScheme s) {
    return s == SealingScheme::Sodium ? "sodium" : "keyed-prp";
}

} // namespace zmix
