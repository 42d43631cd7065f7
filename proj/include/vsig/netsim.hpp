#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "vsig/bytes.hpp"
#include "vsig/rtp.hpp"

namespace vsig {

// PRNG: SplitMix64 (Steele/Lea/Flood 2014). Chosen for portability -- the
// output sequence is fixed across platforms and trivially re-implementable,
// so archives generated from a seed stay bit-identical everywhere. Substreams
// are derived by hashing a label into the seed (see docs/FORMAT.md).
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi] inclusive.
    uint64_t next_range(uint64_t lo, uint64_t hi) {
        if (hi <= lo) return lo;
        return lo + next() % (hi - lo + 1);
    }

    static uint64_t hash_label(std::string_view label) {
        uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : label) {
            h ^= uint8_t(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    SplitMix64 substream(std::string_view label) const {
        SplitMix64 seeder(state_ ^ hash_label(label));
        return SplitMix64(seeder.next());
    }

private:
    uint64_t state_;
};

// ---------------------------------------------------------------------------
// Discrete-event loop over virtual time
// ---------------------------------------------------------------------------

class EventQueue {
public:
    using Handler = std::function<void()>;

    void push(int64_t time_ms, Handler fn) {
        heap_.push(Item{time_ms, next_seq_++, std::move(fn)});
    }

    int64_t now() const { return now_; }
    bool empty() const { return heap_.empty(); }

    // Runs events in (time, insertion) order until the queue drains or the
    // optional horizon is reached. Events at equal times run in push order.
    void run(int64_t horizon_ms = -1) {
        while (!heap_.empty()) {
            if (horizon_ms >= 0 && heap_.top().time > horizon_ms) break;
            Item item = heap_.top();
            heap_.pop();
            now_ = item.time;
            item.fn();
        }
    }

private:
    struct Item {
        int64_t time;
        uint64_t seq;
        Handler fn;
        bool operator>(const Item& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap_;
    uint64_t next_seq_ = 0;
    int64_t now_ = 0;
};

// ---------------------------------------------------------------------------
// Synthetic RTP streams
// ---------------------------------------------------------------------------

struct SilenceWindow {
    int64_t start_ms = 0;
    int64_t end_ms = 0;
};

struct StreamSpec {
    uint32_t packets_per_second = 50;  // 20 ms telephony framing
    uint32_t payload_bytes = 160;
    int64_t duration_ms = 0;
    std::vector<SilenceWindow> silence;
    uint32_t ssrc = 0;
    uint8_t payload_type = 0;
    uint32_t sample_rate = 8000;

    bool valid() const {
        if (packets_per_second == 0 || duration_ms < 0) return false;
        for (const SilenceWindow& s : silence)
            if (s.start_ms < 0 || s.end_ms > duration_ms || s.start_ms > s.end_ms) return false;
        return true;
    }
    bool in_silence(int64_t t) const {
        for (const SilenceWindow& s : silence)
            if (t >= s.start_ms && t < s.end_ms) return true;
        return false;
    }
};

struct ScheduledPacket {
    int64_t send_time_ms = 0;
    RtpPacket packet;
};

// Deterministic media source. Sequence numbers run consecutively mod 2^16
// from a seeded start (silence suppresses sending but not numbering of
// non-sent slots: suppressed slots simply do not consume sequence numbers,
// as a silence-suppressing sender would behave); the media timestamp keeps
// advancing through silence on the sample clock.
inline std::vector<ScheduledPacket> generate_stream(const StreamSpec& spec, uint64_t seed) {
    if (!spec.valid()) throw Error("invalid stream spec");
    SplitMix64 g = SplitMix64(seed).substream("stream-" + std::to_string(spec.ssrc));
    uint16_t seq = uint16_t(g.next());
    uint32_t ts = uint32_t(g.next());
    uint32_t ticks_per_packet = spec.sample_rate / spec.packets_per_second;
    std::vector<ScheduledPacket> out;
    for (uint64_t i = 0;; ++i) {
        int64_t t = int64_t(i * 1000 / spec.packets_per_second);
        if (t >= spec.duration_ms) break;
        if (!spec.in_silence(t)) {
            RtpPacket p;
            p.payload_type = spec.payload_type;
            p.sequence_number = seq++;
            p.media_timestamp = ts + uint32_t(i) * ticks_per_packet;
            p.ssrc = spec.ssrc;
            p.marker = out.empty();
            p.payload.resize(spec.payload_bytes);
            Bytes noise;  // deterministic filler
            for (size_t b = 0; b < p.payload.size(); b += 8) {
                uint64_t v = g.next();
                for (size_t j = 0; j < 8 && b + j < p.payload.size(); ++j)
                    p.payload[b + j] = uint8_t(v >> (8 * j));
            }
            out.push_back({t, std::move(p)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lossy channels
// ---------------------------------------------------------------------------

struct LossBurst {
    int64_t start_ms = 0;
    int64_t end_ms = 0;
    double probability = 0.0;
};

// One direction of a channel. `deterministic_loss` replaces the coin flip
// with an error-accumulator drop pattern so a scripted burst hits its rate
// exactly.
struct ChannelSpec {
    double loss_probability = 0.0;
    int64_t delay_min_ms = 0;
    int64_t delay_max_ms = 0;
    bool reorder = false;  // when false, FIFO order is enforced
    double duplicate_probability = 0.0;
    std::vector<LossBurst> bursts;
    bool deterministic_loss = false;

    bool valid() const {
        return loss_probability >= 0 && loss_probability <= 1 && duplicate_probability >= 0 &&
               duplicate_probability <= 1 && delay_min_ms >= 0 && delay_min_ms <= delay_max_ms;
    }

    double loss_at(int64_t t) const {
        for (const LossBurst& b : bursts)
            if (t >= b.start_ms && t < b.end_ms) return b.probability;
        return loss_probability;
    }
};

struct Delivery {
    int64_t receive_time_ms = 0;
    size_t packet_pos = 0;  // position in the input schedule
    bool duplicate = false;
};

struct TransmitResult {
    std::vector<Delivery> deliveries;  // ordered by receive time, then input order
    std::vector<uint8_t> delivered;    // ground truth per input packet
};

// Applies seeded loss/delay/duplication to a schedule. The per-packet draw
// order (loss, delay, duplicate, duplicate-delay) is fixed so a rerun with
// the same seed reproduces the exact delivery schedule; the ground-truth log
// is the oracle for delta-report correctness.
inline TransmitResult transmit(const ChannelSpec& spec, std::span<const ScheduledPacket> packets,
                               SplitMix64 rng) {
    if (!spec.valid()) throw Error("invalid channel spec");
    TransmitResult result;
    result.delivered.assign(packets.size(), 0);
    double loss_acc = 0.0;
    int64_t fifo_floor = 0;
    for (size_t i = 0; i < packets.size(); ++i) {
        int64_t t = packets[i].send_time_ms;
        double p_loss = spec.loss_at(t);
        bool drop;
        if (spec.deterministic_loss) {
            loss_acc += p_loss;
            drop = loss_acc >= 1.0;
            if (drop) loss_acc -= 1.0;
        } else {
            drop = rng.next_double() < p_loss;
        }
        if (drop) continue;
        result.delivered[i] = 1;
        int64_t delay = int64_t(rng.next_range(uint64_t(spec.delay_min_ms), uint64_t(spec.delay_max_ms)));
        int64_t arrival = t + delay;
        if (!spec.reorder) {
            arrival = std::max(arrival, fifo_floor);
            fifo_floor = arrival;
        }
        result.deliveries.push_back({arrival, i, false});
        if (spec.duplicate_probability > 0 && rng.next_double() < spec.duplicate_probability) {
            int64_t d2 = int64_t(rng.next_range(uint64_t(spec.delay_min_ms), uint64_t(spec.delay_max_ms)));
            int64_t a2 = t + d2;
            if (!spec.reorder) {
                a2 = std::max(a2, fifo_floor);
                fifo_floor = a2;
            }
            result.deliveries.push_back({a2, i, true});
        }
    }
    std::stable_sort(result.deliveries.begin(), result.deliveries.end(),
                     [](const Delivery& a, const Delivery& b) { return a.receive_time_ms < b.receive_time_ms; });
    return result;
}

// Per-message signalling channel: one draw pair (loss, delay) per send.
class SignalChannel {
public:
    SignalChannel() : rng_(0) {}
    SignalChannel(ChannelSpec spec, SplitMix64 rng) : spec_(std::move(spec)), rng_(rng) {}

    // Returns the arrival time, or nullopt when the message is lost.
    std::optional<int64_t> offer(int64_t send_time_ms) {
        if (cut_at_ms_ >= 0 && send_time_ms >= cut_at_ms_) return std::nullopt;
        double p = spec_.loss_at(send_time_ms);
        if (p >= 1.0 || (p > 0.0 && rng_.next_double() < p)) return std::nullopt;
        int64_t delay = int64_t(rng_.next_range(uint64_t(spec_.delay_min_ms), uint64_t(spec_.delay_max_ms)));
        return send_time_ms + delay;
    }

    void cut_at(int64_t t) { cut_at_ms_ = t; }

private:
    ChannelSpec spec_;
    SplitMix64 rng_;
    int64_t cut_at_ms_ = -1;
};

}  // namespace vsig
