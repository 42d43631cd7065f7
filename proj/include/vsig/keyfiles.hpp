#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vsig/bytes.hpp"
#include "vsig/crypto.hpp"

namespace vsig {

// Key material on disk: PEM-like text blocks, one file per key or
// certificate. A directory holds root.cert, ca.key, party_<id>.key/.cert and
// tsa_<id>.key/.cert.

inline std::string pem_wrap(const std::string& tag, ByteView der) {
    std::string b64 = base64_encode(der);
    std::string out = "-----BEGIN " + tag + "-----\n";
    for (size_t i = 0; i < b64.size(); i += 64) out += b64.substr(i, 64) + "\n";
    out += "-----END " + tag + "-----\n";
    return out;
}

inline Bytes pem_unwrap(const std::string& text, const std::string& tag) {
    std::string begin = "-----BEGIN " + tag + "-----";
    std::string end = "-----END " + tag + "-----";
    size_t b = text.find(begin);
    if (b == std::string::npos) throw Error("missing PEM block: " + tag);
    b += begin.size();
    size_t e = text.find(end, b);
    if (e == std::string::npos) throw Error("unterminated PEM block: " + tag);
    auto decoded = base64_decode(std::string_view(text).substr(b, e - b));
    if (!decoded) throw Error("bad base64 in PEM block: " + tag);
    return *decoded;
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

inline Bytes encode_keypair(uint8_t algorithm, const KeyPair& k) {
    ByteWriter w;
    w.u8(algorithm);
    w.u16(uint16_t(k.public_key.size()));
    w.raw(k.public_key);
    w.u32(uint32_t(k.private_key.size()));
    w.raw(k.private_key);
    return w.take();
}

inline std::pair<uint8_t, KeyPair> decode_keypair(ByteView bytes) {
    ByteReader r{bytes};
    uint8_t alg = r.u8();
    KeyPair k;
    k.public_key = r.raw(r.u16());
    k.private_key = r.raw(r.u32());
    r.expect_done("key pair");
    return {alg, k};
}

}  // namespace detail

inline void save_key_material(const std::filesystem::path& dir, const KeyMaterial& km) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    detail::write_text_file(dir / "root.cert", pem_wrap("VSIG CERTIFICATE", ByteView(km.root.encode())));
    detail::write_text_file(dir / "ca.key",
                            pem_wrap("VSIG PRIVATE KEY", ByteView(detail::encode_keypair(km.algorithm, km.root_keys))));
    for (const auto& [id, ident] : km.parties) {
        std::string stem = "party_" + std::to_string(id);
        detail::write_text_file(dir / (stem + ".key"),
                                pem_wrap("VSIG PRIVATE KEY",
                                         ByteView(detail::encode_keypair(ident.algorithm, ident.keys))));
        detail::write_text_file(dir / (stem + ".cert"),
                                pem_wrap("VSIG CERTIFICATE", ByteView(ident.leaf().encode())));
    }
    for (const auto& [id, entry] : km.authorities) {
        std::string stem = "tsa_" + std::to_string(id);
        detail::write_text_file(dir / (stem + ".key"),
                                pem_wrap("VSIG PRIVATE KEY",
                                         ByteView(detail::encode_keypair(km.algorithm, entry.first))));
        detail::write_text_file(dir / (stem + ".cert"),
                                pem_wrap("VSIG CERTIFICATE", ByteView(entry.second.encode())));
    }
}

inline Certificate load_certificate(const std::filesystem::path& file) {
    Bytes der = pem_unwrap(detail::read_text_file(file), "VSIG CERTIFICATE");
    ByteReader r{ByteView(der)};
    Certificate c = Certificate::decode(r);
    r.expect_done("certificate");
    return c;
}

inline KeyMaterial load_key_material(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    KeyMaterial km;
    km.root = load_certificate(dir / "root.cert");
    if (fs::exists(dir / "ca.key")) {
        auto [alg, keys] = detail::decode_keypair(
            ByteView(pem_unwrap(detail::read_text_file(dir / "ca.key"), "VSIG PRIVATE KEY")));
        km.algorithm = alg;
        km.root_keys = keys;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".key") continue;
        std::string stem = entry.path().stem().string();
        auto [alg, keys] = detail::decode_keypair(
            ByteView(pem_unwrap(detail::read_text_file(entry.path()), "VSIG PRIVATE KEY")));
        if (stem.rfind("party_", 0) == 0) {
            ParticipantId id = ParticipantId(std::stoul(stem.substr(6)));
            SignerIdentity ident;
            ident.id = id;
            ident.algorithm = alg;
            ident.keys = keys;
            ident.chain = {load_certificate(dir / (stem + ".cert"))};
            km.algorithm = alg;
            km.parties[id] = std::move(ident);
        } else if (stem.rfind("tsa_", 0) == 0) {
            ParticipantId id = ParticipantId(std::stoul(stem.substr(4)));
            km.authorities[id] = {keys, load_certificate(dir / (stem + ".cert"))};
        }
    }
    return km;
}

}  // namespace vsig
