#pragma once

#include <openssl/bn.h>
#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsig/bytes.hpp"
#include "vsig/model.hpp"

namespace vsig {

using Digest = std::array<uint8_t, 32>;

constexpr ParticipantId kRootId = 0xFFFF;
constexpr ParticipantId kT1Id = 1000;
constexpr ParticipantId kT2Id = 1001;

inline Digest sha256(ByteView data) {
    Digest out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

inline Digest sha256(const Bytes& data) { return sha256(ByteView(data)); }

// Deterministic byte generator: SHA-256 in counter mode over a seed-derived
// key. Used for reproducible key generation, nonces, and anywhere test runs
// must be bit-stable.
class Drbg {
public:
    explicit Drbg(uint64_t seed, std::string_view label = {}) {
        ByteWriter w;
        w.u64(seed);
        w.raw(to_bytes(label));
        key_ = sha256(w.bytes());
    }

    Drbg fork(std::string_view label) {
        ByteWriter w;
        w.raw(ByteView(key_));
        w.raw(to_bytes("/"));
        w.raw(to_bytes(label));
        Drbg child(0);
        child.key_ = sha256(w.bytes());
        return child;
    }

    Bytes next_bytes(size_t n) {
        Bytes out;
        out.reserve(n);
        while (out.size() < n) {
            ByteWriter w;
            w.raw(ByteView(key_));
            w.u64(counter_++);
            Digest block = sha256(w.bytes());
            size_t take = std::min(block.size(), n - out.size());
            out.insert(out.end(), block.begin(), block.begin() + take);
        }
        return out;
    }

    uint64_t next_u64() {
        Bytes b = next_bytes(8);
        uint64_t v = 0;
        for (uint8_t c : b) v = v << 8 | c;
        return v;
    }

    std::array<uint8_t, 16> next_nonce() {
        std::array<uint8_t, 16> n{};
        Bytes b = next_bytes(16);
        std::copy(b.begin(), b.end(), n.begin());
        return n;
    }

private:
    Digest key_{};
    uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Big-number helpers (OpenSSL BIGNUM with RAII)
// ---------------------------------------------------------------------------

class Bn {
public:
    Bn() : p_(BN_new()) {}
    explicit Bn(ByteView big_endian) : p_(BN_bin2bn(big_endian.data(), int(big_endian.size()), nullptr)) {}
    explicit Bn(unsigned long w) : p_(BN_new()) { BN_set_word(p_, w); }
    Bn(const Bn& o) : p_(BN_dup(o.p_)) {}
    Bn(Bn&& o) noexcept : p_(o.p_) { o.p_ = nullptr; }
    Bn& operator=(Bn o) {
        std::swap(p_, o.p_);
        return *this;
    }
    ~Bn() {
        if (p_) BN_free(p_);
    }

    BIGNUM* get() const { return p_; }
    int bits() const { return BN_num_bits(p_); }
    bool is_odd() const { return BN_is_odd(p_); }
    bool is_one() const { return BN_is_one(p_); }
    bool is_zero() const { return BN_is_zero(p_); }
    int cmp(const Bn& o) const { return BN_cmp(p_, o.p_); }

    Bytes to_bytes(size_t width) const {
        Bytes out(width);
        if (BN_bn2binpad(p_, out.data(), int(width)) < 0)
            throw CryptoError("bignum wider than requested encoding");
        return out;
    }

private:
    BIGNUM* p_;
};

namespace detail {

inline BN_CTX* bn_ctx() {
    thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> ctx(BN_CTX_new(), BN_CTX_free);
    return ctx.get();
}

inline Bn mod_exp(const Bn& a, const Bn& e, const Bn& m) {
    Bn r;
    if (!BN_mod_exp(r.get(), a.get(), e.get(), m.get(), bn_ctx())) throw CryptoError("mod_exp failed");
    return r;
}

inline Bn mul(const Bn& a, const Bn& b) {
    Bn r;
    BN_mul(r.get(), a.get(), b.get(), bn_ctx());
    return r;
}

inline Bn sub_word(const Bn& a, unsigned long w) {
    Bn r = a;
    BN_sub_word(r.get(), w);
    return r;
}

inline Bn mod(const Bn& a, const Bn& m) {
    Bn r;
    BN_nnmod(r.get(), a.get(), m.get(), bn_ctx());
    return r;
}

inline Bn gcd(const Bn& a, const Bn& b) {
    Bn r;
    BN_gcd(r.get(), a.get(), b.get(), bn_ctx());
    return r;
}

inline std::optional<Bn> mod_inverse(const Bn& a, const Bn& m) {
    Bn r;
    if (!BN_mod_inverse(r.get(), a.get(), m.get(), bn_ctx())) return std::nullopt;
    return r;
}

inline const std::vector<uint32_t>& small_primes() {
    static const std::vector<uint32_t> primes = [] {
        std::vector<uint32_t> out;
        std::vector<bool> sieve(2048, true);
        for (uint32_t i = 2; i < sieve.size(); ++i) {
            if (!sieve[i]) continue;
            out.push_back(i);
            for (uint32_t j = i * i; j < sieve.size(); j += i) sieve[j] = false;
        }
        return out;
    }();
    return primes;
}

inline bool passes_trial_division(const Bn& n) {
    for (uint32_t p : small_primes()) {
        BN_ULONG r = BN_mod_word(n.get(), p);
        if (r == 0) return false;
    }
    return true;
}

// Miller-Rabin with witnesses drawn from the caller's generator, so the whole
// search is reproducible from the seed.
inline bool miller_rabin(const Bn& n, Drbg& g, int rounds = 40) {
    Bn n_minus_1 = sub_word(n, 1);
    Bn d = n_minus_1;
    int s = 0;
    while (!d.is_odd()) {
        BN_rshift1(d.get(), d.get());
        ++s;
    }
    size_t width = size_t(n.bits() + 7) / 8;
    for (int i = 0; i < rounds; ++i) {
        Bn a(ByteView(g.next_bytes(width)));
        a = mod(a, sub_word(n, 3));
        BN_add_word(a.get(), 2);  // a in [2, n-2]
        Bn x = mod_exp(a, d, n);
        if (x.is_one() || x.cmp(n_minus_1) == 0) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            BN_mod_sqr(x.get(), x.get(), n.get(), bn_ctx());
            if (x.cmp(n_minus_1) == 0) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

inline Bn generate_prime(int bits, Drbg& g, const Bn& e) {
    for (;;) {
        Bytes cand = g.next_bytes(size_t(bits) / 8);
        cand[0] |= 0xC0;  // keep the product at full width
        cand.back() |= 0x01;
        Bn p{ByteView(cand)};
        if (!passes_trial_division(p)) continue;
        if (!miller_rabin(p, g)) continue;
        if (!gcd(sub_word(p, 1), e).is_one()) continue;
        return p;
    }
}

inline Bytes mgf1(ByteView seed, size_t len) {
    Bytes out;
    out.reserve(len);
    for (uint32_t counter = 0; out.size() < len; ++counter) {
        ByteWriter w;
        w.raw(seed);
        w.u32(counter);
        Digest block = sha256(w.bytes());
        size_t take = std::min(block.size(), len - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RSA keys and signature schemes
// ---------------------------------------------------------------------------

struct RsaPublicKey {
    Bytes n;  // big-endian modulus
    uint32_t e = 65537;

    size_t modulus_size() const { return n.size(); }

    Bytes encode() const {
        ByteWriter w;
        w.u16(uint16_t(n.size()));
        w.raw(n);
        w.u32(e);
        return w.take();
    }
    static RsaPublicKey decode(ByteReader& r) {
        RsaPublicKey k;
        k.n = r.raw(r.u16());
        k.e = r.u32();
        return k;
    }
};

struct RsaPrivateKey {
    RsaPublicKey pub;
    Bytes d, p, q, dp, dq, qinv;

    Bytes encode() const {
        ByteWriter w;
        w.raw(pub.encode());
        for (const Bytes* part : {&d, &p, &q, &dp, &dq, &qinv}) {
            w.u16(uint16_t(part->size()));
            w.raw(*part);
        }
        return w.take();
    }
    static RsaPrivateKey decode(ByteReader& r) {
        RsaPrivateKey k;
        k.pub = RsaPublicKey::decode(r);
        for (Bytes* part : {&k.d, &k.p, &k.q, &k.dp, &k.dq, &k.qinv}) *part = r.raw(r.u16());
        return k;
    }
};

struct KeyPair {
    Bytes public_key;   // scheme-specific encoding
    Bytes private_key;  // empty when only the public half is held

    bool has_private() const { return !private_key.empty(); }
};

namespace detail {

inline RsaPrivateKey rsa_generate(Drbg& g, int bits) {
    Bn e(65537UL);
    Bn p = generate_prime(bits / 2, g, e);
    Bn q = generate_prime(bits / 2, g, e);
    while (p.cmp(q) == 0) q = generate_prime(bits / 2, g, e);
    Bn n = mul(p, q);
    Bn p1 = sub_word(p, 1), q1 = sub_word(q, 1);
    Bn phi = mul(p1, q1);
    Bn d = *mod_inverse(e, phi);
    RsaPrivateKey key;
    size_t k = size_t(bits) / 8, h = k / 2;
    key.pub.n = n.to_bytes(k);
    key.pub.e = 65537;
    key.d = d.to_bytes(k);
    key.p = p.to_bytes(h);
    key.q = q.to_bytes(h);
    key.dp = mod(d, p1).to_bytes(h);
    key.dq = mod(d, q1).to_bytes(h);
    key.qinv = mod_inverse(Bn(ByteView(key.q)), p)->to_bytes(h);
    return key;
}

// s = em^d mod n via CRT.
inline Bytes rsa_private_op(const RsaPrivateKey& key, const Bn& em) {
    Bn p{ByteView(key.p)}, q{ByteView(key.q)};
    Bn m1 = mod_exp(mod(em, p), Bn{ByteView(key.dp)}, p);
    Bn m2 = mod_exp(mod(em, q), Bn{ByteView(key.dq)}, q);
    Bn h;
    BN_mod_sub(h.get(), m1.get(), m2.get(), p.get(), bn_ctx());
    BN_mod_mul(h.get(), h.get(), Bn{ByteView(key.qinv)}.get(), p.get(), bn_ctx());
    Bn s = mul(h, q);
    BN_add(s.get(), s.get(), m2.get());
    return s.to_bytes(key.pub.modulus_size());
}

inline Bytes rsa_public_op(const RsaPublicKey& key, ByteView sig) {
    Bn n{ByteView(key.n)};
    Bn s{sig};
    if (s.cmp(n) >= 0) throw CryptoError("signature out of range");
    return mod_exp(s, Bn(static_cast<unsigned long>(key.e)), n).to_bytes(key.modulus_size());
}

// EMSA-PSS with SHA-256, MGF1-SHA-256 and an empty salt. The empty salt keeps
// signing deterministic, which the reproducible-archive contract relies on.
inline Bytes pss_encode(ByteView msg, size_t em_bits) {
    size_t em_len = (em_bits + 7) / 8;
    const size_t h_len = 32;
    if (em_len < h_len + 2) throw CryptoError("modulus too small for PSS");
    Digest m_hash = sha256(msg);
    ByteWriter mp;
    for (int i = 0; i < 8; ++i) mp.u8(0);
    mp.raw(ByteView(m_hash));
    Digest h = sha256(mp.bytes());

    Bytes db(em_len - h_len - 1, 0);
    db[db.size() - 1] = 0x01;
    Bytes mask = mgf1(ByteView(h), db.size());
    for (size_t i = 0; i < db.size(); ++i) db[i] ^= mask[i];
    db[0] &= uint8_t(0xFF >> (8 * em_len - em_bits));

    Bytes em;
    em.reserve(em_len);
    em.insert(em.end(), db.begin(), db.end());
    em.insert(em.end(), h.begin(), h.end());
    em.push_back(0xBC);
    return em;
}

inline bool pss_verify(ByteView msg, ByteView em, size_t em_bits) {
    size_t em_len = (em_bits + 7) / 8;
    const size_t h_len = 32;
    if (em.size() != em_len || em_len < h_len + 2) return false;
    if (em[em_len - 1] != 0xBC) return false;
    ByteView masked_db = em.subspan(0, em_len - h_len - 1);
    ByteView h = em.subspan(em_len - h_len - 1, h_len);
    if (masked_db[0] & uint8_t(~(0xFF >> (8 * em_len - em_bits)))) return false;
    Bytes db(masked_db.begin(), masked_db.end());
    Bytes mask = mgf1(h, db.size());
    for (size_t i = 0; i < db.size(); ++i) db[i] ^= mask[i];
    db[0] &= uint8_t(0xFF >> (8 * em_len - em_bits));
    for (size_t i = 0; i + 1 < db.size(); ++i)
        if (db[i] != 0) return false;
    if (db[db.size() - 1] != 0x01) return false;

    Digest m_hash = sha256(msg);
    ByteWriter mp;
    for (int i = 0; i < 8; ++i) mp.u8(0);
    mp.raw(ByteView(m_hash));
    Digest expect = sha256(mp.bytes());
    return std::equal(h.begin(), h.end(), expect.begin());
}

// EMSA-PKCS1-v1_5 with SHA-256 (alternative scheme).
inline Bytes pkcs1_encode(ByteView msg, size_t em_len) {
    static const uint8_t digest_info[] = {0x30, 0x31, 0x30, 0x0d, 0x06, 0x09, 0x60, 0x86, 0x48, 0x01,
                                          0x65, 0x03, 0x04, 0x02, 0x01, 0x05, 0x00, 0x04, 0x20};
    Digest h = sha256(msg);
    size_t t_len = sizeof(digest_info) + h.size();
    if (em_len < t_len + 11) throw CryptoError("modulus too small for PKCS#1");
    Bytes em;
    em.reserve(em_len);
    em.push_back(0x00);
    em.push_back(0x01);
    em.insert(em.end(), em_len - t_len - 3, 0xFF);
    em.push_back(0x00);
    em.insert(em.end(), std::begin(digest_info), std::end(digest_info));
    em.insert(em.end(), h.begin(), h.end());
    return em;
}

}  // namespace detail

// Signing is pluggable behind this interface; every container records the
// algorithm id next to the signature bytes.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual uint8_t id() const = 0;
    virtual const char* name() const = 0;
    virtual KeyPair generate(Drbg& g, int bits) const = 0;
    virtual Bytes sign(const Bytes& private_key, ByteView msg) const = 0;
    virtual bool verify(const Bytes& public_key, ByteView msg, ByteView sig) const = 0;
};

class RsaPssScheme final : public SignatureScheme {
public:
    uint8_t id() const override { return 1; }
    const char* name() const override { return "rsa-pss-sha256"; }

    KeyPair generate(Drbg& g, int bits) const override {
        RsaPrivateKey key = detail::rsa_generate(g, bits);
        return {key.pub.encode(), key.encode()};
    }

    Bytes sign(const Bytes& private_key, ByteView msg) const override {
        ByteReader r{ByteView(private_key)};
        RsaPrivateKey key = RsaPrivateKey::decode(r);
        size_t em_bits = size_t(Bn{ByteView(key.pub.n)}.bits()) - 1;
        Bytes em = detail::pss_encode(msg, em_bits);
        return detail::rsa_private_op(key, Bn{ByteView(em)});
    }

    bool verify(const Bytes& public_key, ByteView msg, ByteView sig) const override {
        try {
            ByteReader r{ByteView(public_key)};
            RsaPublicKey key = RsaPublicKey::decode(r);
            if (sig.size() != key.modulus_size()) return false;
            size_t em_bits = size_t(Bn{ByteView(key.n)}.bits()) - 1;
            Bytes em = detail::rsa_public_op(key, sig);
            // rsa_public_op pads to the modulus size; PSS expects ceil(em_bits/8).
            size_t em_len = (em_bits + 7) / 8;
            ByteView trimmed = ByteView(em).subspan(em.size() - em_len);
            return detail::pss_verify(msg, trimmed, em_bits);
        } catch (const Error&) {
            return false;
        }
    }
};

class RsaPkcs1Scheme final : public SignatureScheme {
public:
    uint8_t id() const override { return 2; }
    const char* name() const override { return "rsa-pkcs1-sha256"; }

    KeyPair generate(Drbg& g, int bits) const override {
        RsaPrivateKey key = detail::rsa_generate(g, bits);
        return {key.pub.encode(), key.encode()};
    }

    Bytes sign(const Bytes& private_key, ByteView msg) const override {
        ByteReader r{ByteView(private_key)};
        RsaPrivateKey key = RsaPrivateKey::decode(r);
        Bytes em = detail::pkcs1_encode(msg, key.pub.modulus_size());
        return detail::rsa_private_op(key, Bn{ByteView(em)});
    }

    bool verify(const Bytes& public_key, ByteView msg, ByteView sig) const override {
        try {
            ByteReader r{ByteView(public_key)};
            RsaPublicKey key = RsaPublicKey::decode(r);
            if (sig.size() != key.modulus_size()) return false;
            Bytes em = detail::rsa_public_op(key, sig);
            return em == detail::pkcs1_encode(msg, key.modulus_size());
        } catch (const Error&) {
            return false;
        }
    }
};

inline const SignatureScheme* scheme_by_id(uint8_t id) {
    static const RsaPssScheme pss;
    static const RsaPkcs1Scheme pkcs1;
    switch (id) {
        case 1: return &pss;
        case 2: return &pkcs1;
        default: return nullptr;
    }
}

inline const SignatureScheme& default_scheme() { return *scheme_by_id(1); }

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct Certificate {
    ParticipantId subject = 0;
    std::string subject_name;
    ParticipantId issuer = 0;
    uint8_t algorithm = 1;
    Bytes public_key;
    Bytes signature;  // issuer's signature over tbs_bytes()

    Bytes tbs_bytes() const {
        ByteWriter w;
        w.u16(subject);
        w.u16(uint16_t(subject_name.size()));
        w.raw(to_bytes(subject_name));
        w.u16(issuer);
        w.u8(algorithm);
        w.u16(uint16_t(public_key.size()));
        w.raw(public_key);
        return w.take();
    }

    Bytes encode() const {
        ByteWriter w;
        w.raw(tbs_bytes());
        w.u16(uint16_t(signature.size()));
        w.raw(signature);
        return w.take();
    }

    static Certificate decode(ByteReader& r) {
        Certificate c;
        c.subject = r.u16();
        c.subject_name = to_string(r.view(r.u16()));
        c.issuer = r.u16();
        c.algorithm = r.u8();
        c.public_key = r.raw(r.u16());
        c.signature = r.raw(r.u16());
        return c;
    }

    bool operator==(const Certificate&) const = default;
};

inline Bytes encode_certificates(const std::vector<Certificate>& certs) {
    ByteWriter w;
    w.u16(uint16_t(certs.size()));
    for (const Certificate& c : certs) {
        Bytes e = c.encode();
        w.u32(uint32_t(e.size()));
        w.raw(e);
    }
    return w.take();
}

inline std::vector<Certificate> decode_certificates(ByteView bytes) {
    ByteReader r{bytes};
    std::vector<Certificate> out;
    uint16_t count = r.u16();
    for (uint16_t i = 0; i < count; ++i) {
        Bytes body = r.raw(r.u32());
        ByteReader cr{ByteView(body)};
        out.push_back(Certificate::decode(cr));
        cr.expect_done("certificate");
    }
    r.expect_done("certificate list");
    return out;
}

inline bool certificate_signed_by(const Certificate& cert, const Certificate& signer) {
    const SignatureScheme* s = scheme_by_id(signer.algorithm);
    return s && s->verify(signer.public_key, ByteView(cert.tbs_bytes()), ByteView(cert.signature));
}

// Leaf-first chain; the last element must be signed by the trusted root.
inline bool validate_chain(const std::vector<Certificate>& chain, const Certificate& root) {
    if (chain.empty()) return false;
    for (size_t i = 0; i + 1 < chain.size(); ++i)
        if (!certificate_signed_by(chain[i], chain[i + 1])) return false;
    return certificate_signed_by(chain.back(), root);
}

// ---------------------------------------------------------------------------
// Identities and signing
// ---------------------------------------------------------------------------

struct SignatureFragment {
    Bytes signature;
    Digest covered_digest{};
};

struct SignerIdentity {
    ParticipantId id = 0;
    uint8_t algorithm = 1;
    KeyPair keys;
    std::vector<Certificate> chain;  // leaf first, root excluded
    std::set<std::array<uint8_t, 16>> used_nonces;

    const Certificate& leaf() const {
        if (chain.empty()) throw CryptoError("identity has no certificate");
        return chain.front();
    }
    bool consistent() const {
        return !chain.empty() && chain.front().subject == id &&
               chain.front().public_key == keys.public_key &&
               chain.front().algorithm == algorithm;
    }
};

inline SignatureFragment sign_message(const SignerIdentity& identity, ByteView msg) {
    if (!identity.keys.has_private()) throw CryptoError("signing unavailable: no private key");
    const SignatureScheme* s = scheme_by_id(identity.algorithm);
    if (!s) throw CryptoError("signing unavailable: unknown algorithm");
    return {s->sign(identity.keys.private_key, msg), sha256(msg)};
}

inline bool verify_message(uint8_t algorithm, const Bytes& public_key, ByteView msg, ByteView sig) {
    const SignatureScheme* s = scheme_by_id(algorithm);
    return s && s->verify(public_key, msg, sig);
}

// ---------------------------------------------------------------------------
// Timestamp authority
// ---------------------------------------------------------------------------

class TimestampAuthority {
public:
    TimestampAuthority() = default;
    TimestampAuthority(ParticipantId id, KeyPair keys, Certificate cert, uint8_t algorithm = 1)
        : id_(id), keys_(std::move(keys)), cert_(std::move(cert)), algorithm_(algorithm) {}

    ParticipantId id() const { return id_; }
    const Certificate& certificate() const { return cert_; }

    void set_clock(std::function<int64_t()> now) { now_ = std::move(now); }
    void set_available(bool v) { available_ = v; }

    static Bytes token_tbs(ParticipantId authority, int64_t time_ms, const Digest& digest) {
        ByteWriter w;
        w.u16(authority);
        w.u64(uint64_t(time_ms));
        w.raw(ByteView(digest));
        return w.take();
    }

    TimestampToken stamp(const Digest& covered) const {
        if (!available_ || !now_) throw CryptoError("timestamp unavailable");
        TimestampToken t;
        t.authority = id_;
        t.asserted_time_ms = now_();
        t.covered_digest = covered;
        const SignatureScheme* s = scheme_by_id(algorithm_);
        if (!s || !keys_.has_private()) throw CryptoError("timestamp unavailable");
        t.signature = s->sign(keys_.private_key, ByteView(token_tbs(t.authority, t.asserted_time_ms, covered)));
        return t;
    }

    static bool verify_token(const TimestampToken& t, const Certificate& authority_cert) {
        if (t.authority != authority_cert.subject) return false;
        Bytes tbs = token_tbs(t.authority, t.asserted_time_ms, t.covered_digest);
        return verify_message(authority_cert.algorithm, authority_cert.public_key, ByteView(tbs),
                              ByteView(t.signature));
    }

private:
    ParticipantId id_ = 0;
    KeyPair keys_;
    Certificate cert_;
    uint8_t algorithm_ = 1;
    std::function<int64_t()> now_;
    bool available_ = true;
};

// ---------------------------------------------------------------------------
// Key material for a whole deployment (root CA, parties, authorities)
// ---------------------------------------------------------------------------

struct KeyMaterial {
    Certificate root;  // self-signed test root
    KeyPair root_keys;
    uint8_t algorithm = 1;
    std::map<ParticipantId, SignerIdentity> parties;
    std::map<ParticipantId, std::pair<KeyPair, Certificate>> authorities;

    SignerIdentity& party(ParticipantId id) {
        auto it = parties.find(id);
        if (it == parties.end()) throw CryptoError("no key material for participant " + std::to_string(id));
        return it->second;
    }
    const SignerIdentity& party(ParticipantId id) const {
        auto it = parties.find(id);
        if (it == parties.end()) throw CryptoError("no key material for participant " + std::to_string(id));
        return it->second;
    }
    const std::pair<KeyPair, Certificate>& authority(ParticipantId id) const {
        auto it = authorities.find(id);
        if (it == authorities.end()) throw CryptoError("no key material for authority " + std::to_string(id));
        return it->second;
    }

    TimestampAuthority make_tsa(ParticipantId id, std::function<int64_t()> clock) const {
        const auto& [keys, cert] = authority(id);
        TimestampAuthority tsa(id, keys, cert, algorithm);
        tsa.set_clock(std::move(clock));
        return tsa;
    }
};

inline Certificate issue_certificate(ParticipantId subject, const std::string& name, uint8_t algorithm,
                                     const Bytes& subject_public, ParticipantId issuer,
                                     const KeyPair& issuer_keys) {
    Certificate c;
    c.subject = subject;
    c.subject_name = name;
    c.issuer = issuer;
    c.algorithm = algorithm;
    c.public_key = subject_public;
    const SignatureScheme* s = scheme_by_id(algorithm);
    if (!s) throw CryptoError("unknown algorithm");
    c.signature = s->sign(issuer_keys.private_key, ByteView(c.tbs_bytes()));
    return c;
}

inline KeyMaterial generate_key_material(uint64_t seed, uint16_t party_count, int bits = 2048,
                                         uint8_t algorithm = 1) {
    const SignatureScheme* s = scheme_by_id(algorithm);
    if (!s) throw CryptoError("unknown algorithm");
    Drbg root_g = Drbg(seed, "keys").fork("root");
    KeyMaterial km;
    km.algorithm = algorithm;
    km.root_keys = s->generate(root_g, bits);
    km.root = issue_certificate(kRootId, "test-root", algorithm, km.root_keys.public_key, kRootId,
                                km.root_keys);
    for (uint16_t id = 0; id < party_count; ++id) {
        Drbg g = Drbg(seed, "keys").fork("party-" + std::to_string(id));
        SignerIdentity ident;
        ident.id = id;
        ident.algorithm = algorithm;
        ident.keys = s->generate(g, bits);
        ident.chain = {issue_certificate(id, "party-" + std::to_string(id), algorithm,
                                         ident.keys.public_key, kRootId, km.root_keys)};
        km.parties[id] = std::move(ident);
    }
    for (ParticipantId id : {kT1Id, kT2Id}) {
        Drbg g = Drbg(seed, "keys").fork("tsa-" + std::to_string(id));
        KeyPair keys = s->generate(g, bits);
        Certificate cert = issue_certificate(id, "tsa-" + std::to_string(id), algorithm,
                                             keys.public_key, kRootId, km.root_keys);
        km.authorities[id] = {std::move(keys), std::move(cert)};
    }
    return km;
}

}  // namespace vsig
