#pragma once

#include <cstdint>

#include "vsig/bytes.hpp"

namespace vsig {

constexpr uint8_t kRtpVersion = 2;
constexpr size_t kRtpHeaderSize = 12;
constexpr size_t kMaxPayloadSize = 1400;

// One media packet. Only the fixed 12-byte header is modelled; CSRC lists
// and extensions are absent from the generated streams.
struct RtpPacket {
    uint8_t version = kRtpVersion;
    bool marker = false;
    uint8_t payload_type = 0;       // 7 bits
    uint16_t sequence_number = 0;   // wraps mod 2^16
    uint32_t media_timestamp = 0;   // sample clock ticks
    uint32_t ssrc = 0;
    Bytes payload;

    bool well_formed() const {
        return version == kRtpVersion && payload_type < 0x80 &&
               payload.size() <= kMaxPayloadSize;
    }

    // Fixed header as it appears on the wire (P=0, X=0, CC=0).
    void write_header(ByteWriter& w) const {
        w.u8(uint8_t(version << 6));
        w.u8(uint8_t((marker ? 0x80 : 0) | (payload_type & 0x7F)));
        w.u16(sequence_number);
        w.u32(media_timestamp);
        w.u32(ssrc);
    }

    Bytes wire_header() const {
        ByteWriter w;
        write_header(w);
        return w.take();
    }

    static RtpPacket read_header(ByteReader& r) {
        RtpPacket p;
        uint8_t b0 = r.u8();
        p.version = b0 >> 6;
        uint8_t b1 = r.u8();
        p.marker = (b1 & 0x80) != 0;
        p.payload_type = b1 & 0x7F;
        p.sequence_number = r.u16();
        p.media_timestamp = r.u32();
        p.ssrc = r.u32();
        return p;
    }

    bool operator==(const RtpPacket& o) const = default;
};

// Signed distance from a to b in sequence-number space; positive when b is
// ahead of a, handling the 16-bit wrap.
inline int seq_distance(uint16_t a, uint16_t b) {
    return int16_t(uint16_t(b - a));
}

}  // namespace vsig
