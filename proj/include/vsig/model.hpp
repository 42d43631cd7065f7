#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsig/bytes.hpp"
#include "vsig/rtp.hpp"

namespace vsig {

using ParticipantId = uint16_t;

constexpr uint32_t kMinIntervalMs = 100;
constexpr uint32_t kDefaultIntervalMs = 1000;  // one second is sufficient at desk scale
constexpr uint16_t kFormatVersion = 1;

// Interval identity. Indices are 1-based everywhere. For two-party sessions
// `owner` is a Direction; for conferences it is the owning participant index.
enum class Direction : uint8_t { AtoB = 0, BtoA = 1 };

struct IntervalId {
    uint64_t index = 0;
    uint8_t owner = 0;

    Direction direction() const { return Direction(owner); }

    // Two-party law: odd index <=> A->B, even index <=> B->A.
    static Direction bilateral_direction(uint64_t index) {
        return index % 2 == 1 ? Direction::AtoB : Direction::BtoA;
    }
    // Conference law: owner(k) = (k-1) mod M.
    static uint8_t conference_owner(uint64_t index, uint16_t participants) {
        return uint8_t((index - 1) % participants);
    }

    bool operator==(const IntervalId&) const = default;
};

// Which packets of an interval a receiver actually got, as RTP sequence
// numbers, sorted strictly ascending.
struct DeltaReport {
    uint64_t interval_index = 0;
    ParticipantId receiver = 0;
    std::vector<uint16_t> received;

    bool sorted_strictly() const {
        return std::is_sorted(received.begin(), received.end()) &&
               std::adjacent_find(received.begin(), received.end()) == received.end();
    }
    bool contains(uint16_t seq) const {
        return std::binary_search(received.begin(), received.end(), seq);
    }

    bool operator==(const DeltaReport&) const = default;
};

struct Interval {
    IntervalId id;
    int64_t window_start_ms = 0;
    int64_t window_end_ms = 0;
    std::vector<RtpPacket> packets;  // buffered packets, ascending sequence number
    DeltaReport delta;               // restriction actually signed

    bool empty() const { return packets.empty(); }

    // Every delta entry must name a buffered packet.
    bool delta_consistent() const {
        for (uint16_t seq : delta.received) {
            bool found = std::any_of(packets.begin(), packets.end(),
                                     [&](const RtpPacket& p) { return p.sequence_number == seq; });
            if (!found) return false;
        }
        return delta.sorted_strictly();
    }
};

enum class MetaKind : uint8_t { Initial = 0, Final = 1 };

enum class Termination : uint8_t {
    None = 0,  // initial metas only
    Intentional = 1,
    Timeout = 2,
    PolicyAbort = 3,
    ChannelLoss = 4,
};

// Session metadata signed at the chain ends. `sip_data` holds the call
// negotiation fields; `auth_data` carries the encoded certificates needed to
// verify the chain (signer leaf, timestamp authorities, conference roster).
struct SessionMeta {
    MetaKind kind = MetaKind::Initial;
    uint16_t format_version = kFormatVersion;
    uint32_t interval_duration_ms = kDefaultIntervalMs;
    std::map<std::string, std::string> sip_data;
    Bytes auth_data;
    std::array<uint8_t, 16> nonce{};
    Termination termination = Termination::None;

    bool nonce_nonzero() const {
        return std::any_of(nonce.begin(), nonce.end(), [](uint8_t b) { return b != 0; });
    }
    bool well_formed() const {
        if (interval_duration_ms < kMinIntervalMs || !nonce_nonzero()) return false;
        if (kind == MetaKind::Initial) return termination == Termination::None;
        return termination != Termination::None;
    }
};

struct TimestampToken {
    ParticipantId authority = 0;
    int64_t asserted_time_ms = 0;
    std::array<uint8_t, 32> covered_digest{};
    Bytes signature;

    bool operator==(const TimestampToken&) const = default;
};

// Position of a link in the signature chain.
struct ChainIndex {
    enum class Kind : uint8_t { Init = 0, Link = 1, Final = 2 };
    Kind kind = Kind::Init;
    uint64_t link = 0;    // interval index (two-party) or linear step (conference)
    uint32_t round = 0;   // conference only
    uint16_t holder = 0;  // conference only

    static ChainIndex init() { return {}; }
    static ChainIndex interval(uint64_t l) { return {Kind::Link, l, 0, 0}; }
    static ChainIndex step(uint64_t pos, uint32_t r, uint16_t m) { return {Kind::Link, pos, r, m}; }
    static ChainIndex final(uint64_t pos) { return {Kind::Final, pos, 0, 0}; }

    bool operator==(const ChainIndex&) const = default;
};

// One link S of the chain: a signature, who made it, and the digest of the
// exact bytes it covers. Timestamp tokens ride only on the first and final
// links.
struct SecurityValue {
    ChainIndex chain_index;
    ParticipantId signer = 0;
    Bytes signature;
    std::array<uint8_t, 32> covered_digest{};
    std::optional<TimestampToken> tsa_token;

    bool token_placement_ok() const {
        bool endpoint = chain_index.kind != ChainIndex::Kind::Link;
        return tsa_token.has_value() == endpoint;
    }
};

enum class PolicyAction : uint8_t { Ignore = 0, Notify = 1, AbortSigning = 2, TerminateCall = 3 };

struct LossPolicy {
    double threshold = 1.0;  // loss ratio in [0,1]
    uint32_t window_ms = kDefaultIntervalMs;
    PolicyAction action = PolicyAction::Ignore;

    bool valid_for(uint32_t d_ms) const {
        return threshold >= 0.0 && threshold <= 1.0 && window_ms >= d_ms;
    }
};

enum class AuditCheck : uint8_t {
    InitialTimestamp,
    InitialSignature,
    IntervalChaining,
    PacketLoss,
    SeqMonotonic,
    DriftVsSystem,
    DriftVsGrid,
    BoundaryOverlap,
    ReplayWindow,
    FinalTimestamp,
    MultilateralCompleteness,
};

enum class Verdict : uint8_t { Pass, Fail, Inapplicable };

struct AuditFinding {
    AuditCheck check;
    Verdict verdict = Verdict::Inapplicable;
    std::string detail;
    std::optional<uint64_t> location;  // interval index, when localisable
};

inline const char* audit_check_name(AuditCheck c) {
    switch (c) {
        case AuditCheck::InitialTimestamp: return "InitialTimestamp";
        case AuditCheck::InitialSignature: return "InitialSignature";
        case AuditCheck::IntervalChaining: return "IntervalChaining";
        case AuditCheck::PacketLoss: return "PacketLoss";
        case AuditCheck::SeqMonotonic: return "SeqMonotonic";
        case AuditCheck::DriftVsSystem: return "DriftVsSystem";
        case AuditCheck::DriftVsGrid: return "DriftVsGrid";
        case AuditCheck::BoundaryOverlap: return "BoundaryOverlap";
        case AuditCheck::ReplayWindow: return "ReplayWindow";
        case AuditCheck::FinalTimestamp: return "FinalTimestamp";
        case AuditCheck::MultilateralCompleteness: return "MultilateralCompleteness";
    }
    return "?";
}

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::Fail: return "Fail";
        case Verdict::Inapplicable: return "Inapplicable";
    }
    return "?";
}

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::None: return "none";
        case Termination::Intentional: return "intentional";
        case Termination::Timeout: return "timeout";
        case Termination::PolicyAbort: return "policy-abort";
        case Termination::ChannelLoss: return "channel-loss";
    }
    return "?";
}

// Number of interval durations needed to cover a call: ceil(T/D).
inline uint64_t interval_count(uint64_t total_duration_ms, uint64_t d_ms) {
    if (d_ms == 0) throw std::invalid_argument("interval duration must be positive");
    if (total_duration_ms == 0) return 0;
    return (total_duration_ms + d_ms - 1) / d_ms;
}

// Packet-wise loss over a window of intervals: 1 - sum|delta| / sum K.
// A window without buffered packets counts as lossless.
inline double loss_ratio(std::span<const Interval> window) {
    uint64_t buffered = 0, received = 0;
    for (const Interval& iv : window) {
        buffered += iv.packets.size();
        received += iv.delta.received.size();
    }
    if (buffered == 0) return 0.0;
    return 1.0 - double(received) / double(buffered);
}

}  // namespace vsig
