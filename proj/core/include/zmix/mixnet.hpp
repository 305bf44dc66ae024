#pragma once

#include <zmix/ledger.hpp>
#include <zmix/network.hpp>
#include <zmix/rng.hpp>
#include <zmix/sealing.hpp>

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <variant>
#include <vector>

namespace zmix {

/// Every packet on the simulated wire has this size, whatever its depth.
inline constexpr std::size_t kPacketSize = 2048;

/// Bytes of routing header inside each layer: hop kind + next address.
inline constexpr std::size_t kHopHeaderSize = 9;

Bytes encode_transaction(const Transaction& tx);
/// Throws Error(Malformed) on truncated or inconsistent input.
Transaction decode_transaction(std::span<const std::uint8_t> bytes);

enum class MixBehavior : std::uint8_t { Honest, Dropper };

struct DelayPolicy {
    double mean_ticks = 50.0;
};

/// Exponential draw with the policy mean, rounded to the nearest tick and
/// floored at one tick. Throws Error(Malformed) if the mean is not positive.
Tick sample_delay(const DelayPolicy& policy, Rng& rng);

struct MixNode {
    std::uint32_t id = 0;
    NetAddr addr;
    SymmetricKey key{};
    MixBehavior behavior = MixBehavior::Honest;
    DelayPolicy policy;
    std::size_t position = 0;       // 0-based place in its cascade
    std::size_t cascade_length = 1;

    bool is_exit() const { return position + 1 == cascade_length; }
};

/// Fixed chain of mixes; the last one broadcasts.
struct Cascade {
    std::uint32_t id = 0;
    std::vector<MixNode> nodes;

    std::size_t length() const { return nodes.size(); }
    const MixNode& exit() const { return nodes.back(); }
};

/// What the exit layer tells the last mix to do with the payload.
enum class ExitInstruction : std::uint8_t {
    Broadcast = 1, ///< payload is a transaction
    LoopCover = 2, ///< drop silently
    DecoyCover = 3 ///< re-announce an already confirmed transaction
};

/// Onion on the wire. `body` is always kPacketSize bytes; the leading part is
/// the layer sealed for the addressed hop and the rest is padding.
struct LayeredPacket {
    NetAddr destination;
    std::uint32_t layers_remaining = 0;
    Bytes body;
};

/// Size of the sealed region a mix at `position` expects.
std::size_t sealed_size(std::size_t position, const Sealer& sealer);

/// Largest encoded payload a cascade of `length` can carry.
std::size_t payload_capacity(std::size_t length, const Sealer& sealer);

/// Throws Error(EmptyCascade) for a cascade without nodes and
/// Error(Malformed) if the payload does not fit.
LayeredPacket wrap(const Transaction& tx, const Cascade& cascade, const Sealer& sealer, Rng& rng);

/// Same wire shape as a real packet; only the exit learns it is cover.
/// `from_position` lets a mix inject cover for the remainder of its cascade.
LayeredPacket wrap_cover(const Cascade& cascade, ExitInstruction kind, const Sealer& sealer, Rng& rng,
                         std::size_t from_position = 0);

struct Forward {
    NetAddr next;
    LayeredPacket packet;
    Tick at = 0;
};

struct Broadcast {
    Transaction tx;
    Tick at = 0;
};

struct DecoyBroadcast {
    Tick at = 0;
};

enum class DropReason : std::uint8_t { Malicious, IntegrityFailure, WrongHop, CoverAtExit, Malformed };

const char* to_string(DropReason r);

struct Drop {
    DropReason reason = DropReason::Malicious;
};

using MixAction = std::variant<Forward, Broadcast, DecoyBroadcast, Drop>;

/// One hop: check addressing, remove exactly one layer, delay, and decide.
/// Failures come back as Drop with the reason; nothing here throws.
MixAction process(const MixNode& mix, const LayeredPacket& packet, Tick now, const Sealer& sealer, Rng& rng);

enum class CascadeSelection : std::uint8_t { Random, First };
enum class CoverExit : std::uint8_t { Drop, Decoy };

struct MixPosition {
    std::size_t cascade = 0;
    std::size_t position = 0;
    auto operator<=>(const MixPosition&) const = default;
};

struct MixnetConfig {
    std::size_t cascades = 1;
    std::size_t length = 3;
    double mean_delay = 50.0;
    double cover_rate = 0.0;     // per user per tick
    double mix_cover_rate = 0.0; // per non-exit mix per tick
    std::vector<MixPosition> droppers;
    std::size_t redundancy = 1;
    CascadeSelection selection = CascadeSelection::Random;
    SealingScheme sealing = SealingScheme::KeyedPrp;
    CoverExit cover_exit = CoverExit::Drop;
};

struct MixLogEntry {
    Tick time = 0;
    NetAddr mix;
    NetAddr from;
    std::string action;
    NetAddr to;
    Tick at = 0;
    std::string reason;
};

struct MixnetStats {
    std::size_t real_packets = 0;
    std::size_t cover_packets = 0;
    std::size_t user_cover_packets = 0;
    std::size_t exit_broadcasts = 0;
    std::size_t decoy_broadcasts = 0;
    std::map<DropReason, std::size_t> drops;
};

/// Cascades wired into a scheduler and network. Mixes hold no operation that
/// builds a transaction; an exit can only re-announce the one it decoded.
class Mixnet {
public:
    /// Mix NetAddrs are allocated from `first_addr` upward.
    Mixnet(const MixnetConfig& config, Network& network, std::uint64_t seed, std::uint64_t first_addr);

    const std::vector<Cascade>& cascades() const { return cascades_; }
    const MixnetConfig& config() const { return config_; }
    const Sealer& sealer() const { return *sealer_; }

    /// Sends `tx` through `k` distinct cascades drawn from `candidates`
    /// (random subset or the first k, per config). Throws
    /// Error(InsufficientCascades) unless 1 <= k <= candidates.size().
    void send_redundant(NetAddr user, const Transaction& tx, std::span<const std::size_t> candidates, std::size_t k);

    /// send_redundant over all cascades with the configured redundancy.
    void submit(NetAddr user, const Transaction& tx);

    /// Poisson loop cover from a user, rate lambda per tick, over [start, end).
    std::size_t emit_cover(NetAddr user, double lambda, Tick start, Tick end);

    /// Cover injected by a non-exit mix into the rest of its cascade.
    std::size_t emit_mix_cover(MixPosition mix, double lambda, Tick start, Tick end);

    bool is_mix(NetAddr a) const { return mix_index_.contains(a); }
    bool is_exit(NetAddr a) const;
    std::set<NetAddr> exit_addrs() const;

    /// Addresses each mix exchanged packets with during the run; the P2P
    /// cloud appears as kP2PNetwork.
    const std::map<NetAddr, std::set<NetAddr>>& observed() const { return observed_; }

    const std::vector<MixLogEntry>& log() const { return log_; }
    const MixnetStats& stats() const { return stats_; }

    /// Records an out-of-band exchange between a mix and a peer.
    void note_contact(NetAddr mix, NetAddr peer) { observed_[mix].insert(peer); }

    /// Hand a packet to the mix it is addressed to, at the current tick.
    void deliver(NetAddr from, LayeredPacket packet);

    /// Trace indices of decoy announcements (ground truth only).
    const std::vector<std::size_t>& decoy_trace_indices() const { return decoy_events_; }

    Rng& rng() { return rng_; }
    Network& network() { return network_; }

private:
    const MixNode& node(NetAddr a) const;
    void send(NetAddr from, LayeredPacket packet);
    void handle(const MixNode& mix, NetAddr from, const LayeredPacket& packet);

    MixnetConfig config_;
    Network& network_;
    Rng rng_;
    std::unique_ptr<Sealer> sealer_;
    std::vector<Cascade> cascades_;
    std::map<NetAddr, MixPosition> mix_index_;
    std::map<NetAddr, std::set<NetAddr>> observed_;
    std::vector<MixLogEntry> log_;
    std::vector<std::size_t> decoy_events_;
    MixnetStats stats_;
};

void write_mix_log_jsonl(std::ostream& out, const std::vector<MixLogEntry>& log);

} // namespace zmix
