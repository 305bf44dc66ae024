#include <zmix/mixnet.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>
#include <ostream>

namespace zmix {

namespace {

constexpr std::uint8_t kHopForward = 0;
constexpr std::uint8_t kHopExit = 1;
constexpr std::size_t kExitPrefix = 5; // instruction + u32 length
constexpr std::uint16_t kTxMagic = 0x5a54;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    Bytes take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    Bytes out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::uint64_t get(std::size_t n) {
        if (remaining() < n) throw Error(ErrorCode::Malformed, "truncated encoding");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += n;
        return v;
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_endpoints(Writer& w, const std::vector<Endpoint>& eps) {
    if (eps.size() > 0xffff) throw Error(ErrorCode::Malformed, "too many endpoints to encode");
    w.u16(static_cast<std::uint16_t>(eps.size()));
    for (const auto& e : eps) {
        w.u8(static_cast<std::uint8_t>(e.address.kind));
        w.u64(e.address.id);
        w.u64(e.amount.zatoshi());
    }
}

std::vector<Endpoint> read_endpoints(Reader& r) {
    std::vector<Endpoint> eps(r.u16());
    for (auto& e : eps) {
        const std::uint8_t kind = r.u8();
        if (kind > 1) throw Error(ErrorCode::Malformed, "bad address kind");
        e.address = {static_cast<AddressKind>(kind), r.u64()};
        e.amount = Amount(r.u64());
    }
    return eps;
}

LayeredPacket build_onion(const Cascade& cascade, std::size_t from, ExitInstruction instruction,
                          std::span<const std::uint8_t> payload, const Sealer& sealer, Rng& rng) {
    if (cascade.nodes.empty()) throw Error(ErrorCode::EmptyCascade, "cascade has no mixes");
    if (from >= cascade.length()) throw Error(ErrorCode::Malformed, "entry position beyond cascade");
    const std::size_t last = cascade.length() - 1;
    if (payload.size() > payload_capacity(cascade.length(), sealer))
        throw Error(ErrorCode::Malformed, "payload does not fit the packet");

    Bytes plain(sealed_size(last, sealer) - sealer.overhead(), 0);
    plain[0] = kHopExit;
    plain[kHopHeaderSize] = static_cast<std::uint8_t>(instruction);
    const auto len = static_cast<std::uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) plain[kHopHeaderSize + 1 + i] = static_cast<std::uint8_t>(len >> (8 * i));
    std::copy(payload.begin(), payload.end(), plain.begin() + kHopHeaderSize + kExitPrefix);

    Bytes blob = sealer.seal(cascade.nodes[last].key, plain, rng);
    for (std::size_t j = last; j-- > from;) {
        Bytes layer(kHopHeaderSize + blob.size());
        layer[0] = kHopForward;
        const std::uint64_t next = cascade.nodes[j + 1].addr.value;
        for (int i = 0; i < 8; ++i) layer[1 + i] = static_cast<std::uint8_t>(next >> (8 * i));
        std::copy(blob.begin(), blob.end(), layer.begin() + kHopHeaderSize);
        blob = sealer.seal(cascade.nodes[j].key, layer, rng);
    }

    // Entering mid-cascade leaves a shorter onion; pad it like a peeled one.
    const std::size_t sealed = blob.size();
    blob.resize(kPacketSize);
    rng.fill(blob.data() + sealed, kPacketSize - sealed);

    return LayeredPacket{cascade.nodes[from].addr, static_cast<std::uint32_t>(cascade.length() - from), std::move(blob)};
}

} // namespace

Bytes encode_transaction(const Transaction& tx) {
    Writer w;
    w.u16(kTxMagic);
    w.u64(tx.id);
    w.u8(static_cast<std::uint8_t>(tx.kind));
    w.u64(tx.timestamp);
    write_endpoints(w, tx.inputs);
    write_endpoints(w, tx.outputs);
    return w.take();
}

Transaction decode_transaction(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.u16() != kTxMagic) throw Error(ErrorCode::Malformed, "not an encoded transaction");
    Transaction tx;
    tx.id = r.u64();
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(TxKind::ZZ)) throw Error(ErrorCode::Malformed, "bad tx kind");
    tx.kind = static_cast<TxKind>(kind);
    tx.timestamp = r.u64();
    tx.inputs = read_endpoints(r);
    tx.outputs = read_endpoints(r);
    if (r.remaining() != 0) throw Error(ErrorCode::Malformed, "trailing bytes after transaction");
    return tx;
}

Tick sample_delay(const DelayPolicy& policy, Rng& rng) {
    if (!(policy.mean_ticks > 0.0) || !std::isfinite(policy.mean_ticks))
        throw Error(ErrorCode::Malformed, "delay mean must be positive");
    const double d = std::llround(rng.exponential(policy.mean_ticks));
    return d < 1.0 ? Tick{1} : static_cast<Tick>(d);
}

std::size_t sealed_size(std::size_t position, const Sealer& sealer) {
    const std::size_t step = sealer.overhead() + kHopHeaderSize;
    return position * step >= kPacketSize ? 0 : kPacketSize - position * step;
}

std::size_t payload_capacity(std::size_t length, const Sealer& sealer) {
    if (length == 0) return 0;
    const std::size_t exit_sealed = sealed_size(length - 1, sealer);
    const std::size_t reserved = sealer.overhead() + kHopHeaderSize + kExitPrefix;
    return exit_sealed > reserved ? exit_sealed - reserved : 0;
}

LayeredPacket wrap(const Transaction& tx, const Cascade& cascade, const Sealer& sealer, Rng& rng) {
    if (cascade.nodes.empty()) throw Error(ErrorCode::EmptyCascade, "cascade has no mixes");
    const Bytes payload = encode_transaction(tx);
    return build_onion(cascade, 0, ExitInstruction::Broadcast, payload, sealer, rng);
}

LayeredPacket wrap_cover(const Cascade& cascade, ExitInstruction kind, const Sealer& sealer, Rng& rng,
                         std::size_t from_position) {
    return build_onion(cascade, from_position, kind, {}, sealer, rng);
}

const char* to_string(DropReason r) {
    switch (r) {
    case DropReason::Malicious: return "malicious";
    case DropReason::IntegrityFailure: return "integrity_failure";
    case DropReason::WrongHop: return "wrong_hop";
    case DropReason::CoverAtExit: return "cover_at_exit";
    case DropReason::Malformed: return "malformed";
    }
    return "?";
}

MixAction process(const MixNode& mix, const LayeredPacket& packet, Tick now, const Sealer& sealer, Rng& rng) {
    if (packet.destination != mix.addr || packet.layers_remaining != mix.cascade_length - mix.position)
        return Drop{DropReason::WrongHop};
    if (packet.body.size() != kPacketSize) return Drop{DropReason::Malformed};

    const std::size_t n = sealed_size(mix.position, sealer);
    auto plain = sealer.open(mix.key, std::span(packet.body).first(n));
    if (!plain) return Drop{DropReason::IntegrityFailure};
    if (plain->size() < kHopHeaderSize) return Drop{DropReason::Malformed};

    if (mix.behavior == MixBehavior::Dropper) return Drop{DropReason::Malicious};

    const std::uint8_t hop = (*plain)[0];
    std::uint64_t next = 0;
    for (int i = 7; i >= 0; --i) next = (next << 8) | (*plain)[1 + i];
    const Tick at = now + sample_delay(mix.policy, rng);

    if (hop == kHopForward) {
        if (mix.is_exit()) return Drop{DropReason::Malformed};
        Bytes body(plain->begin() + kHopHeaderSize, plain->end());
        if (body.size() != sealed_size(mix.position + 1, sealer)) return Drop{DropReason::Malformed};
        const std::size_t inner = body.size();
        body.resize(kPacketSize);
        rng.fill(body.data() + inner, kPacketSize - inner);
        return Forward{NetAddr{next}, LayeredPacket{NetAddr{next}, packet.layers_remaining - 1, std::move(body)}, at};
    }
    if (hop != kHopExit || !mix.is_exit() || plain->size() < kHopHeaderSize + kExitPrefix)
        return Drop{DropReason::Malformed};

    const auto instruction = static_cast<ExitInstruction>((*plain)[kHopHeaderSize]);
    std::uint32_t len = 0;
    for (int i = 3; i >= 0; --i) len = (len << 8) | (*plain)[kHopHeaderSize + 1 + i];
    const std::size_t start = kHopHeaderSize + kExitPrefix;
    if (len > plain->size() - start) return Drop{DropReason::Malformed};

    switch (instruction) {
    case ExitInstruction::Broadcast:
        try {
            return Broadcast{decode_transaction(std::span(*plain).subspan(start, len)), at};
        } catch (const Error&) {
            return Drop{DropReason::Malformed};
        }
    case ExitInstruction::LoopCover: return Drop{DropReason::CoverAtExit};
    case ExitInstruction::DecoyCover: return DecoyBroadcast{at};
    }
    return Drop{DropReason::Malformed};
}

Mixnet::Mixnet(const MixnetConfig& config, Network& network, std::uint64_t seed, std::uint64_t first_addr)
    : config_(config), network_(network), rng_(seed), sealer_(make_sealer(config.sealing)) {
    if (config.cascades == 0 || config.length == 0) throw Error(ErrorCode::EmptyCascade, "mixnet needs at least one mix");
    if (payload_capacity(config.length, *sealer_) < 64)
        throw Error(ErrorCode::ConfigInvalid, "cascade too long for the fixed packet size");
    for (const auto& d : config.droppers)
        if (d.cascade >= config.cascades || d.position >= config.length)
            throw Error(ErrorCode::ConfigInvalid, "dropper position outside the mixnet");

    std::uint32_t id = 0;
    for (std::size_t c = 0; c < config.cascades; ++c) {
        Cascade cascade{static_cast<std::uint32_t>(c), {}};
        for (std::size_t p = 0; p < config.length; ++p, ++id) {
            MixNode m;
            m.id = id;
            m.addr = NetAddr{first_addr + id};
            m.key = random_key(rng_);
            m.policy = DelayPolicy{config.mean_delay};
            m.position = p;
            m.cascade_length = config.length;
            for (const auto& d : config.droppers)
                if (d.cascade == c && d.position == p) m.behavior = MixBehavior::Dropper;
            mix_index_.emplace(m.addr, MixPosition{c, p});
            cascade.nodes.push_back(m);
        }
        cascades_.push_back(std::move(cascade));
    }
}

const MixNode& Mixnet::node(NetAddr a) const {
    const auto& pos = mix_index_.at(a);
    return cascades_[pos.cascade].nodes[pos.position];
}

bool Mixnet::is_exit(NetAddr a) const {
    auto it = mix_index_.find(a);
    return it != mix_index_.end() && node(a).is_exit();
}

std::set<NetAddr> Mixnet::exit_addrs() const {
    std::set<NetAddr> out;
    for (const auto& c : cascades_) out.insert(c.exit().addr);
    return out;
}

void Mixnet::send_redundant(NetAddr user, const Transaction& tx, std::span<const std::size_t> candidates, std::size_t k) {
    if (k == 0 || k > candidates.size())
        throw Error(ErrorCode::InsufficientCascades, "need 1 <= k <= " + std::to_string(candidates.size()) +
                                                         " cascades, got k = " + std::to_string(k));
    for (std::size_t c : candidates)
        if (c >= cascades_.size()) throw Error(ErrorCode::InsufficientCascades, "unknown cascade index");

    std::vector<std::size_t> chosen(candidates.begin(), candidates.end());
    if (config_.selection == CascadeSelection::Random) {
        for (std::size_t i = 0; i < k; ++i) std::swap(chosen[i], chosen[rng_.uniform_int(i, chosen.size() - 1)]);
    }
    chosen.resize(k);

    for (std::size_t c : chosen) {
        LayeredPacket p = wrap(tx, cascades_[c], *sealer_, rng_);
        ++stats_.real_packets;
        send(user, std::move(p));
    }
}

void Mixnet::submit(NetAddr user, const Transaction& tx) {
    std::vector<std::size_t> all(cascades_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    send_redundant(user, tx, all, config_.redundancy);
}

std::size_t Mixnet::emit_cover(NetAddr user, double lambda, Tick start, Tick end) {
    const auto arrivals = poisson_arrivals(lambda, start, end, rng_);
    const auto kind = config_.cover_exit == CoverExit::Decoy ? ExitInstruction::DecoyCover : ExitInstruction::LoopCover;
    for (Tick t : arrivals) {
        network_.scheduler().schedule(t, [this, user, kind] {
            const auto& cascade = cascades_[rng_.uniform_int(0, cascades_.size() - 1)];
            LayeredPacket p = wrap_cover(cascade, kind, *sealer_, rng_);
            ++stats_.cover_packets;
            ++stats_.user_cover_packets;
            send(user, std::move(p));
        });
    }
    return arrivals.size();
}

std::size_t Mixnet::emit_mix_cover(MixPosition mix, double lambda, Tick start, Tick end) {
    if (mix.cascade >= cascades_.size() || mix.position + 1 >= config_.length)
        throw Error(ErrorCode::Malformed, "only a non-exit mix can inject cover");
    const auto arrivals = poisson_arrivals(lambda, start, end, rng_);
    const auto kind = config_.cover_exit == CoverExit::Decoy ? ExitInstruction::DecoyCover : ExitInstruction::LoopCover;
    for (Tick t : arrivals) {
        network_.scheduler().schedule(t, [this, mix, kind] {
            const auto& cascade = cascades_[mix.cascade];
            LayeredPacket p = wrap_cover(cascade, kind, *sealer_, rng_, mix.position + 1);
            const NetAddr self = cascade.nodes[mix.position].addr;
            observed_[self].insert(p.destination);
            ++stats_.cover_packets;
            send(self, std::move(p));
        });
    }
    return arrivals.size();
}

void Mixnet::send(NetAddr from, LayeredPacket packet) {
    network_.observe_wire(from, packet.destination, packet.body.size());
    deliver(from, std::move(packet));
}

void Mixnet::deliver(NetAddr from, LayeredPacket packet) {
    auto it = mix_index_.find(packet.destination);
    if (it == mix_index_.end()) throw Error(ErrorCode::Malformed, "packet addressed to a non-mix");
    handle(node(packet.destination), from, packet);
}

void Mixnet::handle(const MixNode& mix, NetAddr from, const LayeredPacket& packet) {
    Scheduler& sched = network_.scheduler();
    const Tick now = sched.now();
    observed_[mix.addr].insert(from);

    MixLogEntry entry{now, mix.addr, from, "", NetAddr{}, now, ""};
    MixAction action = process(mix, packet, now, *sealer_, rng_);
    const NetAddr self = mix.addr;

    if (auto* f = std::get_if<Forward>(&action)) {
        entry.action = "forward";
        entry.to = f->next;
        entry.at = f->at;
        sched.schedule(f->at, [this, self, pkt = std::move(f->packet)]() mutable {
            observed_[self].insert(pkt.destination);
            send(self, std::move(pkt));
        });
    } else if (auto* b = std::get_if<Broadcast>(&action)) {
        entry.action = "broadcast";
        entry.to = kP2PNetwork;
        entry.at = b->at;
        sched.schedule(b->at, [this, self, tx = std::move(b->tx)] {
            observed_[self].insert(kP2PNetwork);
            ++stats_.exit_broadcasts;
            network_.broadcast(self, tx);
        });
    } else if (auto* d = std::get_if<DecoyBroadcast>(&action)) {
        entry.action = "decoy";
        entry.to = kP2PNetwork;
        entry.at = d->at;
        sched.schedule(d->at, [this, self] {
            const auto& txs = network_.ledger().transactions();
            if (txs.empty()) return;
            observed_[self].insert(kP2PNetwork);
            ++stats_.decoy_broadcasts;
            const std::size_t index = network_.trace().size();
            if (network_.broadcast(self, txs.back()).event) decoy_events_.push_back(index);
        });
    } else {
        const auto reason = std::get<Drop>(action).reason;
        entry.action = "drop";
        entry.reason = to_string(reason);
        ++stats_.drops[reason];
    }
    log_.push_back(std::move(entry));
}

void write_mix_log_jsonl(std::ostream& out, const std::vector<MixLogEntry>& log) {
    for (const auto& e : log) {
        nlohmann::json j{{"time", e.time}, {"mix", e.mix.value}, {"from", e.from.value}, {"action", e.action}};
        if (e.action != "drop") {
            j["to"] = e.to.value;
            j["at"] = e.at;
        } else {
            j["reason"] = e.reason;
        }
        out << j.dump() << '\n';
    }
}

} // namespace zmix
