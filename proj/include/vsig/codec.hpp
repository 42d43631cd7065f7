#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsig/bytes.hpp"
#include "vsig/crypto.hpp"
#include "vsig/model.hpp"
#include "vsig/rtp.hpp"

namespace vsig {

// Archive file layout (extension .vsig), all integers big-endian:
//
//   "VSIG" | u16 format version (=1) | records...
//   record: u8 type | u32 body length | body
//
// Record order: init-meta, its tsa-token, interval records in strictly
// increasing order, and (when the session terminated) final-meta plus its
// tsa-token as the last two records.

constexpr char kArchiveMagic[4] = {'V', 'S', 'I', 'G'};
constexpr uint16_t kArchiveVersion = 1;

// sip_data key that marks a conference archive and carries M.
constexpr const char* kConferenceKey = "conference_m";

enum class RecordType : uint8_t {
    InitMeta = 0x01,
    Interval = 0x02,
    FinalMeta = 0x03,
    TsaToken = 0x04,
};

// ---------------------------------------------------------------------------
// Canonical byte encodings (everything that is hashed or signed)
// ---------------------------------------------------------------------------

inline Bytes canonical_meta_bytes(const SessionMeta& m) {
    ByteWriter w;
    w.u16(m.format_version);
    w.u8(uint8_t(m.kind));
    w.u32(m.interval_duration_ms);
    w.u8(uint8_t(m.termination));
    w.raw(ByteView(m.nonce));
    w.u16(uint16_t(m.sip_data.size()));
    for (const auto& [k, v] : m.sip_data) {  // std::map iterates in key order
        w.u16(uint16_t(k.size()));
        w.raw(to_bytes(k));
        w.u16(uint16_t(v.size()));
        w.raw(to_bytes(v));
    }
    w.u32(uint32_t(m.auth_data.size()));
    w.raw(m.auth_data);
    return w.take();
}

inline SessionMeta decode_meta(ByteReader& r) {
    SessionMeta m;
    m.format_version = r.u16();
    uint8_t kind = r.u8();
    if (kind > 1) throw DecodeError(r.offset() - 1, "bad meta kind");
    m.kind = MetaKind(kind);
    m.interval_duration_ms = r.u32();
    uint8_t term = r.u8();
    if (term > uint8_t(Termination::ChannelLoss)) throw DecodeError(r.offset() - 1, "bad termination code");
    m.termination = Termination(term);
    Bytes nonce = r.raw(16);
    std::copy(nonce.begin(), nonce.end(), m.nonce.begin());
    uint16_t pairs = r.u16();
    std::string prev_key;
    for (uint16_t i = 0; i < pairs; ++i) {
        std::string k = to_string(r.view(r.u16()));
        std::string v = to_string(r.view(r.u16()));
        if (i > 0 && !(prev_key < k)) throw DecodeError(r.offset(), "sip_data keys not strictly sorted");
        prev_key = k;
        m.sip_data[k] = v;
    }
    m.auth_data = r.raw(r.u32());
    return m;
}

// Signed image of an interval: only packets listed in delta contribute
// (this is I' -- the interval restricted to what was actually received).
inline Bytes canonical_interval_bytes(const Interval& iv) {
    ByteWriter w;
    w.u64(iv.id.index);
    w.u8(iv.id.owner);
    w.u64(uint64_t(iv.window_start_ms));
    w.u64(uint64_t(iv.window_end_ms));
    std::vector<const RtpPacket*> signed_packets;
    for (const RtpPacket& p : iv.packets)
        if (iv.delta.contains(p.sequence_number)) signed_packets.push_back(&p);
    std::sort(signed_packets.begin(), signed_packets.end(),
              [](const RtpPacket* a, const RtpPacket* b) { return a->sequence_number < b->sequence_number; });
    w.u32(uint32_t(signed_packets.size()));
    for (const RtpPacket* p : signed_packets) {
        p->write_header(w);
        w.u16(uint16_t(p->payload.size()));
        w.raw(p->payload);
    }
    w.u32(uint32_t(iv.delta.received.size()));
    for (uint16_t seq : iv.delta.received) w.u16(seq);
    return w.take();
}

// Chain construction: the signed message for link l is the canonical content
// followed by the previous link's signature and covered digest.
inline Bytes chain_message(ByteView content, const SecurityValue& previous) {
    Bytes out;
    out.reserve(content.size() + previous.signature.size() + previous.covered_digest.size());
    out.insert(out.end(), content.begin(), content.end());
    out.insert(out.end(), previous.signature.begin(), previous.signature.end());
    out.insert(out.end(), previous.covered_digest.begin(), previous.covered_digest.end());
    return out;
}

// ---------------------------------------------------------------------------
// Signature container
// ---------------------------------------------------------------------------

// Purpose-built stand-in for a PKCS#7 envelope: signature plus signer
// identity, with the certificate chain carried only by the first record.
struct SignatureContainer {
    ParticipantId signer = 0;
    uint8_t algorithm = 1;
    Bytes signature;
    Bytes cert_chain;  // encoded certificate list; empty outside the init record

    void encode(ByteWriter& w) const {
        w.u16(signer);
        w.u8(algorithm);
        w.u16(uint16_t(signature.size()));
        w.raw(signature);
        w.u32(uint32_t(cert_chain.size()));
        w.raw(cert_chain);
    }
    static SignatureContainer decode(ByteReader& r) {
        SignatureContainer c;
        c.signer = r.u16();
        c.algorithm = r.u8();
        c.signature = r.raw(r.u16());
        c.cert_chain = r.raw(r.u32());
        return c;
    }
    size_t encoded_size() const { return 2 + 1 + 2 + signature.size() + 4 + cert_chain.size(); }
};

// ---------------------------------------------------------------------------
// Record bodies
// ---------------------------------------------------------------------------

// Predecessor link embedded in continuation segments (conference join/leave
// re-initialisation chains the fresh init to the previous final link).
struct PredLink {
    Bytes signature;
    Digest covered_digest{};
};

struct InitRecord {
    SessionMeta meta;  // kind Initial
    SignatureContainer container;
    std::optional<PredLink> pred;
};

struct FinalRecord {
    SessionMeta meta;  // kind Final
    SignatureContainer container;
};

// Stored form of one two-party interval: all buffered packets (flagged by
// delta membership) plus the delta and the chain link.
struct IntervalRecord {
    Interval interval;
    SignatureContainer container;
};

struct ManifestEntry {
    uint16_t sequence_number = 0;
    Digest digest{};
    bool operator==(const ManifestEntry&) const = default;
};

// Per-interval component of a conference round payload D_{r,m}.
struct ConferenceIntervalData {
    uint64_t index = 0;
    int64_t window_start_ms = 0;
    int64_t window_end_ms = 0;
    std::vector<RtpPacket> packets;       // holder's sent packets, ascending seq
    std::vector<uint8_t> in_theta;        // parallel to packets
    std::vector<DeltaReport> deltas;      // ascending receiver id
    std::vector<ManifestEntry> manifest;  // ascending seq; hashes over header+payload

    std::set<uint16_t> theta() const {
        std::set<uint16_t> t;
        for (const DeltaReport& d : deltas) t.insert(d.received.begin(), d.received.end());
        return t;
    }
};

// Stored form of one Sec_mult step.
struct ConferenceStep {
    uint32_t round = 0;
    uint16_t holder = 0;
    bool finalizing = false;
    std::vector<ConferenceIntervalData> intervals;  // ascending index
    SignatureContainer container;
};

inline Digest packet_digest(const RtpPacket& p) {
    ByteWriter w;
    p.write_header(w);
    w.raw(p.payload);
    return sha256(w.bytes());
}

// Signed image of a conference step: round position, windows, per-receiver
// deltas and the hash manifest -- never the raw packets (hash indirection).
inline Bytes canonical_step_bytes(const ConferenceStep& s) {
    ByteWriter w;
    w.u32(s.round);
    w.u16(s.holder);
    w.u8(s.finalizing ? 1 : 0);
    w.u8(uint8_t(s.intervals.size()));
    for (const ConferenceIntervalData& iv : s.intervals) {
        w.u64(iv.index);
        w.u64(uint64_t(iv.window_start_ms));
        w.u64(uint64_t(iv.window_end_ms));
        w.u16(uint16_t(iv.deltas.size()));
        for (const DeltaReport& d : iv.deltas) {
            w.u16(d.receiver);
            w.u32(uint32_t(d.received.size()));
            for (uint16_t seq : d.received) w.u16(seq);
        }
        w.u32(uint32_t(iv.manifest.size()));
        for (const ManifestEntry& e : iv.manifest) {
            w.u16(e.sequence_number);
            w.raw(ByteView(e.digest));
        }
    }
    return w.take();
}

namespace detail {

inline void encode_packet_list(ByteWriter& w, const std::vector<RtpPacket>& packets,
                               const std::vector<uint8_t>& flags) {
    w.u32(uint32_t(packets.size()));
    for (size_t i = 0; i < packets.size(); ++i) {
        w.u8(flags[i]);
        packets[i].write_header(w);
        w.u16(uint16_t(packets[i].payload.size()));
        w.raw(packets[i].payload);
    }
}

inline void decode_packet_list(ByteReader& r, std::vector<RtpPacket>& packets,
                               std::vector<uint8_t>& flags) {
    uint32_t count = r.u32();
    packets.clear();
    flags.clear();
    std::optional<uint16_t> prev_seq;
    for (uint32_t i = 0; i < count; ++i) {
        uint8_t flag = r.u8();
        if (flag > 1) throw DecodeError(r.offset() - 1, "bad packet flag");
        RtpPacket p = RtpPacket::read_header(r);
        p.payload = r.raw(r.u16());
        if (prev_seq && !(*prev_seq < p.sequence_number))
            throw DecodeError(r.offset(), "packets not strictly ascending by sequence number");
        prev_seq = p.sequence_number;
        flags.push_back(flag);
        packets.push_back(std::move(p));
    }
}

inline void decode_delta_list(ByteReader& r, DeltaReport& d) {
    uint32_t n = r.u32();
    d.received.clear();
    std::optional<uint16_t> prev;
    for (uint32_t i = 0; i < n; ++i) {
        uint16_t seq = r.u16();
        if (prev && !(*prev < seq)) throw DecodeError(r.offset(), "delta not strictly ascending");
        prev = seq;
        d.received.push_back(seq);
    }
}

}  // namespace detail

inline Bytes encode_init_body(const InitRecord& rec) {
    ByteWriter w;
    w.raw(canonical_meta_bytes(rec.meta));
    rec.container.encode(w);
    w.u8(rec.pred ? 1 : 0);
    if (rec.pred) {
        w.u16(uint16_t(rec.pred->signature.size()));
        w.raw(rec.pred->signature);
        w.raw(ByteView(rec.pred->covered_digest));
    }
    return w.take();
}

inline InitRecord decode_init_body(ByteReader& r) {
    InitRecord rec;
    rec.meta = decode_meta(r);
    if (rec.meta.kind != MetaKind::Initial) throw DecodeError(r.offset(), "init record carries final meta");
    rec.container = SignatureContainer::decode(r);
    if (r.u8()) {
        PredLink p;
        p.signature = r.raw(r.u16());
        Bytes d = r.raw(32);
        std::copy(d.begin(), d.end(), p.covered_digest.begin());
        rec.pred = std::move(p);
    }
    r.expect_done("init record");
    return rec;
}

inline Bytes encode_final_body(const FinalRecord& rec) {
    ByteWriter w;
    w.raw(canonical_meta_bytes(rec.meta));
    rec.container.encode(w);
    return w.take();
}

inline FinalRecord decode_final_body(ByteReader& r) {
    FinalRecord rec;
    rec.meta = decode_meta(r);
    if (rec.meta.kind != MetaKind::Final) throw DecodeError(r.offset(), "final record carries initial meta");
    rec.container = SignatureContainer::decode(r);
    r.expect_done("final record");
    return rec;
}

inline Bytes encode_token_body(const TimestampToken& t) {
    ByteWriter w;
    w.u16(t.authority);
    w.u64(uint64_t(t.asserted_time_ms));
    w.raw(ByteView(t.covered_digest));
    w.u16(uint16_t(t.signature.size()));
    w.raw(t.signature);
    return w.take();
}

inline TimestampToken decode_token_body(ByteReader& r) {
    TimestampToken t;
    t.authority = r.u16();
    t.asserted_time_ms = int64_t(r.u64());
    Bytes d = r.raw(32);
    std::copy(d.begin(), d.end(), t.covered_digest.begin());
    t.signature = r.raw(r.u16());
    r.expect_done("tsa token");
    return t;
}

inline Bytes encode_interval_body(const IntervalRecord& rec) {
    const Interval& iv = rec.interval;
    std::vector<uint8_t> flags;
    flags.reserve(iv.packets.size());
    for (const RtpPacket& p : iv.packets) flags.push_back(iv.delta.contains(p.sequence_number) ? 1 : 0);
    ByteWriter w;
    w.u64(iv.id.index);
    w.u8(iv.id.owner);
    w.u64(uint64_t(iv.window_start_ms));
    w.u64(uint64_t(iv.window_end_ms));
    detail::encode_packet_list(w, iv.packets, flags);
    w.u32(uint32_t(iv.delta.received.size()));
    for (uint16_t seq : iv.delta.received) w.u16(seq);
    rec.container.encode(w);
    return w.take();
}

inline IntervalRecord decode_interval_body(ByteReader& r) {
    IntervalRecord rec;
    Interval& iv = rec.interval;
    iv.id.index = r.u64();
    iv.id.owner = r.u8();
    iv.window_start_ms = int64_t(r.u64());
    iv.window_end_ms = int64_t(r.u64());
    std::vector<uint8_t> flags;
    detail::decode_packet_list(r, iv.packets, flags);
    iv.delta.interval_index = iv.id.index;
    detail::decode_delta_list(r, iv.delta);
    for (size_t i = 0; i < iv.packets.size(); ++i) {
        bool in_delta = iv.delta.contains(iv.packets[i].sequence_number);
        if (bool(flags[i]) != in_delta) throw DecodeError(r.offset(), "packet flag does not match delta");
    }
    for (uint16_t seq : iv.delta.received) {
        bool present = std::any_of(iv.packets.begin(), iv.packets.end(),
                                   [&](const RtpPacket& p) { return p.sequence_number == seq; });
        if (!present) throw DecodeError(r.offset(), "delta names a packet that is not stored");
    }
    rec.container = SignatureContainer::decode(r);
    r.expect_done("interval record");
    return rec;
}

inline Bytes encode_conference_body(const ConferenceStep& s) {
    ByteWriter w;
    w.u32(s.round);
    w.u16(s.holder);
    w.u8(s.finalizing ? 1 : 0);
    w.u8(uint8_t(s.intervals.size()));
    for (const ConferenceIntervalData& iv : s.intervals) {
        w.u64(iv.index);
        w.u64(uint64_t(iv.window_start_ms));
        w.u64(uint64_t(iv.window_end_ms));
        detail::encode_packet_list(w, iv.packets, iv.in_theta);
        w.u16(uint16_t(iv.deltas.size()));
        for (const DeltaReport& d : iv.deltas) {
            w.u16(d.receiver);
            w.u32(uint32_t(d.received.size()));
            for (uint16_t seq : d.received) w.u16(seq);
        }
        w.u32(uint32_t(iv.manifest.size()));
        for (const ManifestEntry& e : iv.manifest) {
            w.u16(e.sequence_number);
            w.raw(ByteView(e.digest));
        }
    }
    s.container.encode(w);
    return w.take();
}

inline ConferenceStep decode_conference_body(ByteReader& r) {
    ConferenceStep s;
    s.round = r.u32();
    s.holder = r.u16();
    uint8_t fin = r.u8();
    if (fin > 1) throw DecodeError(r.offset() - 1, "bad finalizing flag");
    s.finalizing = fin != 0;
    uint8_t count = r.u8();
    uint64_t prev_index = 0;
    for (uint8_t i = 0; i < count; ++i) {
        ConferenceIntervalData iv;
        iv.index = r.u64();
        if (iv.index <= prev_index) throw DecodeError(r.offset(), "step intervals not ascending");
        prev_index = iv.index;
        iv.window_start_ms = int64_t(r.u64());
        iv.window_end_ms = int64_t(r.u64());
        detail::decode_packet_list(r, iv.packets, iv.in_theta);
        uint16_t nrecv = r.u16();
        std::optional<uint16_t> prev_recv;
        for (uint16_t j = 0; j < nrecv; ++j) {
            DeltaReport d;
            d.interval_index = iv.index;
            d.receiver = r.u16();
            if (prev_recv && !(*prev_recv < d.receiver))
                throw DecodeError(r.offset(), "delta receivers not ascending");
            prev_recv = d.receiver;
            detail::decode_delta_list(r, d);
            iv.deltas.push_back(std::move(d));
        }
        uint32_t nman = r.u32();
        std::optional<uint16_t> prev_seq;
        for (uint32_t j = 0; j < nman; ++j) {
            ManifestEntry e;
            e.sequence_number = r.u16();
            if (prev_seq && !(*prev_seq < e.sequence_number))
                throw DecodeError(r.offset(), "manifest not ascending");
            prev_seq = e.sequence_number;
            Bytes d = r.raw(32);
            std::copy(d.begin(), d.end(), e.digest.begin());
            iv.manifest.push_back(e);
        }
        // Flags and manifest sequence numbers must both mirror theta.
        std::set<uint16_t> theta = iv.theta();
        for (size_t j = 0; j < iv.packets.size(); ++j) {
            bool in = theta.count(iv.packets[j].sequence_number) != 0;
            if (bool(iv.in_theta[j]) != in) throw DecodeError(r.offset(), "packet flag does not match theta");
        }
        std::set<uint16_t> manifest_seqs;
        for (const ManifestEntry& e : iv.manifest) manifest_seqs.insert(e.sequence_number);
        if (manifest_seqs != theta) throw DecodeError(r.offset(), "manifest does not cover theta");
        s.intervals.push_back(std::move(iv));
    }
    s.container = SignatureContainer::decode(r);
    r.expect_done("conference record");
    return s;
}

// ---------------------------------------------------------------------------
// Whole-archive encode/decode
// ---------------------------------------------------------------------------

struct ArchiveFile {
    InitRecord init;
    TimestampToken t1;
    std::vector<IntervalRecord> intervals;    // two-party sessions
    std::vector<ConferenceStep> steps;        // conference sessions
    std::optional<FinalRecord> final_record;  // absent => unterminated
    std::optional<TimestampToken> t2;

    bool conference() const { return init.meta.sip_data.count(kConferenceKey) != 0; }
    uint16_t conference_size() const {
        return uint16_t(std::stoul(init.meta.sip_data.at(kConferenceKey)));
    }
    bool terminated() const { return final_record.has_value() && t2.has_value(); }
};

inline void append_record(Bytes& out, RecordType type, ByteView body) {
    out.push_back(uint8_t(type));
    for (int s = 24; s >= 0; s -= 8) out.push_back(uint8_t(uint32_t(body.size()) >> s));
    out.insert(out.end(), body.begin(), body.end());
}

inline Bytes archive_header() {
    Bytes out(kArchiveMagic, kArchiveMagic + 4);
    out.push_back(uint8_t(kArchiveVersion >> 8));
    out.push_back(uint8_t(kArchiveVersion));
    return out;
}

inline Bytes encode_archive(const ArchiveFile& a) {
    Bytes out = archive_header();
    append_record(out, RecordType::InitMeta, ByteView(encode_init_body(a.init)));
    append_record(out, RecordType::TsaToken, ByteView(encode_token_body(a.t1)));
    for (const IntervalRecord& rec : a.intervals)
        append_record(out, RecordType::Interval, ByteView(encode_interval_body(rec)));
    for (const ConferenceStep& s : a.steps)
        append_record(out, RecordType::Interval, ByteView(encode_conference_body(s)));
    if (a.final_record) append_record(out, RecordType::FinalMeta, ByteView(encode_final_body(*a.final_record)));
    if (a.t2) append_record(out, RecordType::TsaToken, ByteView(encode_token_body(*a.t2)));
    return out;
}

struct RawRecord {
    RecordType type;
    size_t body_offset;  // within the archive bytes
    Bytes body;
};

inline std::vector<RawRecord> split_records(ByteView bytes) {
    if (bytes.size() < 6) throw DecodeError(0, "archive shorter than header");
    if (!std::equal(kArchiveMagic, kArchiveMagic + 4, bytes.begin())) throw DecodeError(0, "bad magic");
    uint16_t version = uint16_t(bytes[4]) << 8 | bytes[5];
    if (version != kArchiveVersion) throw DecodeError(4, "unsupported format version");
    std::vector<RawRecord> records;
    size_t pos = 6;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 5) throw DecodeError(pos, "truncated record header");
        uint8_t type = bytes[pos];
        if (type < uint8_t(RecordType::InitMeta) || type > uint8_t(RecordType::TsaToken))
            throw DecodeError(pos, "unknown record type");
        uint32_t len = 0;
        for (int i = 0; i < 4; ++i) len = len << 8 | bytes[pos + 1 + i];
        if (bytes.size() - pos - 5 < len) throw DecodeError(pos, "truncated record");
        RawRecord r;
        r.type = RecordType(type);
        r.body_offset = pos + 5;
        r.body.assign(bytes.begin() + pos + 5, bytes.begin() + pos + 5 + len);
        records.push_back(std::move(r));
        pos += 5 + size_t(len);
    }
    return records;
}

template <typename T>
inline T decode_body_at(const RawRecord& rec, T (*fn)(ByteReader&)) {
    try {
        ByteReader r{ByteView(rec.body)};
        return fn(r);
    } catch (const DecodeError& e) {
        throw DecodeError(rec.body_offset + e.offset(), e.what());
    }
}

inline ArchiveFile decode_archive(ByteView bytes) {
    std::vector<RawRecord> records = split_records(bytes);
    if (records.size() < 2) throw DecodeError(6, "archive lacks init records");
    if (records[0].type != RecordType::InitMeta) throw DecodeError(6, "first record is not init-meta");
    if (records[1].type != RecordType::TsaToken)
        throw DecodeError(records[1].body_offset - 5, "init-meta not followed by tsa-token");

    ArchiveFile a;
    a.init = decode_body_at(records[0], decode_init_body);
    a.t1 = decode_body_at(records[1], decode_token_body);
    bool conference = a.conference();

    size_t i = 2;
    uint64_t prev_index = 0;
    std::optional<std::pair<uint32_t, uint16_t>> prev_step;
    for (; i < records.size() && records[i].type == RecordType::Interval; ++i) {
        if (conference) {
            ConferenceStep s = decode_body_at(records[i], decode_conference_body);
            std::pair<uint32_t, uint16_t> pos{s.round, s.holder};
            if (prev_step && !(*prev_step < pos))
                throw DecodeError(records[i].body_offset, "conference steps out of order");
            prev_step = pos;
            a.steps.push_back(std::move(s));
        } else {
            IntervalRecord rec = decode_body_at(records[i], decode_interval_body);
            if (rec.interval.id.index <= prev_index)
                throw DecodeError(records[i].body_offset, "interval records out of order");
            prev_index = rec.interval.id.index;
            a.intervals.push_back(std::move(rec));
        }
    }
    if (i < records.size()) {
        if (records[i].type != RecordType::FinalMeta)
            throw DecodeError(records[i].body_offset - 5, "unexpected record after intervals");
        a.final_record = decode_body_at(records[i], decode_final_body);
        ++i;
        if (i >= records.size())
            throw DecodeError(bytes.size(), "final-meta without closing tsa-token");
        if (records[i].type != RecordType::TsaToken)
            throw DecodeError(records[i].body_offset - 5, "final-meta not followed by tsa-token");
        a.t2 = decode_body_at(records[i], decode_token_body);
        ++i;
    }
    if (i != records.size()) throw DecodeError(records[i].body_offset - 5, "records after final tsa-token");
    return a;
}

}  // namespace vsig
