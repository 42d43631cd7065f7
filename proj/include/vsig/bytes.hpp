#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsig {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structural failure while parsing wire/archive bytes. Carries the byte
// offset at which decoding gave up.
class DecodeError : public Error {
public:
    DecodeError(size_t offset, const std::string& msg)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

class CryptoError : public Error {
public:
    explicit CryptoError(const std::string& msg) : Error(msg) {}
};

class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

inline std::string to_hex(ByteView b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (uint8_t c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xF]);
    }
    return out;
}

inline std::optional<Bytes> from_hex(std::string_view s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) return std::nullopt;
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = uint8_t(hi << 4 | lo);
    }
    return out;
}

// All multi-byte integers on the wire are big-endian (network byte order,
// matching RTP).
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }
    void u32(uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(uint8_t(v >> s));
    }
    void u64(uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) buf_.push_back(uint8_t(v >> s));
    }
    void raw(ByteView b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void raw(const Bytes& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    uint8_t u8() {
        need(1, "u8");
        return data_[pos_++];
    }
    uint16_t u16() {
        need(2, "u16");
        uint16_t v = uint16_t(data_[pos_]) << 8 | data_[pos_ + 1];
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4, "u32");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        need(8, "u64");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 8;
        return v;
    }
    Bytes raw(size_t n) {
        need(n, "raw bytes");
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }
    ByteView view(size_t n) {
        need(n, "raw bytes");
        ByteView out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    size_t offset() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    void expect_done(const char* what) const {
        if (!done()) throw DecodeError(pos_, std::string("trailing bytes after ") + what);
    }

private:
    void need(size_t n, const char* what) const {
        if (data_.size() - pos_ < n)
            throw DecodeError(pos_, std::string("truncated ") + what);
    }

    ByteView data_;
    size_t pos_ = 0;
};

inline std::string base64_encode(ByteView in) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= in.size(); i += 3) {
        uint32_t v = in[i] << 16 | in[i + 1] << 8 | in[i + 2];
        out.push_back(tbl[v >> 18 & 63]);
        out.push_back(tbl[v >> 12 & 63]);
        out.push_back(tbl[v >> 6 & 63]);
        out.push_back(tbl[v & 63]);
    }
    if (i + 1 == in.size()) {
        uint32_t v = in[i] << 16;
        out.push_back(tbl[v >> 18 & 63]);
        out.push_back(tbl[v >> 12 & 63]);
        out += "==";
    } else if (i + 2 == in.size()) {
        uint32_t v = in[i] << 16 | in[i + 1] << 8;
        out.push_back(tbl[v >> 18 & 63]);
        out.push_back(tbl[v >> 12 & 63]);
        out.push_back(tbl[v >> 6 & 63]);
        out.push_back('=');
    }
    return out;
}

inline std::optional<Bytes> base64_decode(std::string_view in) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    Bytes out;
    uint32_t acc = 0;
    int bits = 0;
    size_t pad = 0;
    for (char c : in) {
        if (c == '\n' || c == '\r') continue;
        if (c == '=') {
            ++pad;
            continue;
        }
        if (pad) return std::nullopt;
        int v = val(c);
        if (v < 0) return std::nullopt;
        acc = acc << 6 | uint32_t(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(uint8_t(acc >> bits));
        }
    }
    if (pad > 2) return std::nullopt;
    return out;
}

}  // namespace vsig
