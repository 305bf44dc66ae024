#pragma once

#include <zmix/rng.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace zmix {

using Bytes = std::vector<std::uint8_t>;
using SymmetricKey = std::array<std::uint8_t, 32>;

SymmetricKey random_key(Rng& rng);

/// Authenticated symmetric sealing of one packet layer. open() returns
/// nothing when the key is wrong or any sealed byte was altered.
class Sealer {
public:
    virtual ~Sealer() = default;

    /// Bytes added by seal() on top of the plaintext.
    virtual std::size_t overhead() const = 0;
    virtual Bytes seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext, Rng& rng) const = 0;
    virtual std::optional<Bytes> open(const SymmetricKey& key, std::span<const std::uint8_t> sealed) const = 0;
    virtual std::string_view name() const = 0;
};

enum class SealingScheme : std::uint8_t {
    KeyedPrp, ///< fast keyed keystream + 128-bit tag; simulation only, not secure
    Sodium,   ///< XSalsa20-Poly1305 secretbox
};

std::unique_ptr<Sealer> make_sealer(SealingScheme scheme);

std::optional<SealingScheme> parse_sealing_scheme(std::string_view s);
std::string_view to_string(SealingScheme s);

} // namespace zmix
