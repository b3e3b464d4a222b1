#include "trustboot/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/evp.h>

#include <cstring>
#include <memory>
#include <stdexcept>

namespace trustboot::crypto {

namespace {

constexpr size_t kIvLen = 12;
constexpr size_t kTagLen = 16;
constexpr size_t kRawKeyLen = 32;  // ed25519 / x25519 raw key width

constexpr std::string_view kIvLabel = "trustboot.iv.v1";
constexpr std::string_view kWrapLabel = "trustboot.wrap.v1";
constexpr std::string_view kDhLabel = "trustboot.dh-kdf.v1";
constexpr std::string_view kCardLabel = "trustboot.card.v1";

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using BnPtr = std::unique_ptr<BIGNUM, decltype(&BN_free)>;
using BnCtxPtr = std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)>;

[[noreturn]] void crypto_abort(const char* what) {
    throw std::runtime_error(std::string("crypto: ") + what);
}

Bytes digest(std::string_view label, std::initializer_list<ByteView> parts) {
    MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) crypto_abort("sha256 init");
    EVP_DigestUpdate(ctx.get(), label.data(), label.size());
    for (ByteView p : parts) EVP_DigestUpdate(ctx.get(), p.data(), p.size());
    Bytes out(32);
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != 32) crypto_abort("sha256 final");
    return out;
}

PkeyPtr raw_key(int type, bool is_private, ByteView raw) {
    EVP_PKEY* k = is_private
                      ? EVP_PKEY_new_raw_private_key(type, nullptr, raw.data(), raw.size())
                      : EVP_PKEY_new_raw_public_key(type, nullptr, raw.data(), raw.size());
    return PkeyPtr(k, EVP_PKEY_free);
}

std::array<uint8_t, kRawKeyLen> raw_public_of(EVP_PKEY* priv) {
    std::array<uint8_t, kRawKeyLen> out{};
    size_t len = out.size();
    if (EVP_PKEY_get_raw_public_key(priv, out.data(), &len) != 1 || len != out.size()) {
        crypto_abort("raw public extraction");
    }
    return out;
}

// X25519 scalar multiplication; empty result on failure.
Bytes x25519(ByteView scalar, ByteView peer_public) {
    PkeyPtr sk = raw_key(EVP_PKEY_X25519, true, scalar);
    PkeyPtr pk = raw_key(EVP_PKEY_X25519, false, peer_public);
    if (!sk || !pk) return {};
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(sk.get(), nullptr), EVP_PKEY_CTX_free);
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_derive_set_peer(ctx.get(), pk.get()) != 1) {
        return {};
    }
    size_t len = 0;
    if (EVP_PKEY_derive(ctx.get(), nullptr, &len) != 1) return {};
    Bytes out(len);
    if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1) return {};
    out.resize(len);
    return out;
}

BnPtr to_bn(ByteView b) {
    return BnPtr(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr), BN_free);
}

Bytes from_bn(const BIGNUM* n) {
    Bytes out(static_cast<size_t>(BN_num_bytes(n)));
    BN_bn2bin(n, out.data());
    return out;
}

}  // namespace

Bytes sha256(ByteView data) {
    Bytes out(32);
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
        crypto_abort("sha256");
    }
    return out;
}

SymKey SymKey::generate(Rng& rng) {
    SymKey k;
    rng.fill(k.bytes);
    return k;
}

Result<SymKey> SymKey::from(ByteView b) {
    if (b.size() != kSymKeyLen) return Err::AuthFail;
    SymKey k;
    std::memcpy(k.bytes.data(), b.data(), kSymKeyLen);
    return k;
}

Nonce Nonce::generate(Rng& rng) {
    Nonce n;
    rng.fill(n.bytes);
    return n;
}

Result<Nonce> Nonce::from(ByteView b) {
    if (b.size() != kNonceLen) return Err::AuthFail;
    Nonce n;
    std::memcpy(n.bytes.data(), b.data(), kNonceLen);
    return n;
}

bool Nonce::is_zero() const {
    for (uint8_t b : bytes)
        if (b) return false;
    return true;
}

Nonce inc(const Nonce& n, uint64_t k) {
    Nonce out = n;
    // Add k into the low-order (rightmost) bytes with carry.
    unsigned carry = 0;
    for (int i = static_cast<int>(kNonceLen) - 1; i >= 0; --i) {
        unsigned add = carry;
        int shift = static_cast<int>(kNonceLen) - 1 - i;
        if (shift < 8) add += static_cast<unsigned>((k >> (8 * shift)) & 0xff);
        unsigned sum = out.bytes[static_cast<size_t>(i)] + add;
        out.bytes[static_cast<size_t>(i)] = static_cast<uint8_t>(sum & 0xff);
        carry = sum >> 8;
    }
    return out;
}

Bytes sym_encrypt(const SymKey& key, ByteView plaintext) {
    Bytes iv_full = digest(kIvLabel, {ByteView(key.bytes), plaintext});
    Bytes out(kIvLen + plaintext.size() + kTagLen);
    std::memcpy(out.data(), iv_full.data(), kIvLen);

    CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    if (!ctx ||
        EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.bytes.data(), out.data()) != 1) {
        crypto_abort("gcm init");
    }
    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data() + kIvLen, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1) {
        crypto_abort("gcm update");
    }
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kIvLen + len, &fin) != 1) crypto_abort("gcm final");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen,
                            out.data() + kIvLen + plaintext.size()) != 1) {
        crypto_abort("gcm tag");
    }
    return out;
}

Result<Bytes> sym_decrypt(const SymKey& key, ByteView ciphertext) {
    if (ciphertext.size() < kIvLen + kTagLen) return Err::AuthFail;
    size_t body_len = ciphertext.size() - kIvLen - kTagLen;
    const uint8_t* iv = ciphertext.data();
    const uint8_t* body = ciphertext.data() + kIvLen;
    const uint8_t* tag = ciphertext.data() + kIvLen + body_len;

    CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    if (!ctx ||
        EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.bytes.data(), iv) != 1) {
        crypto_abort("gcm init");
    }
    Bytes out(body_len);
    int len = 0;
    if (body_len > 0 &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, body, static_cast<int>(body_len)) != 1) {
        return Err::AuthFail;
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                            const_cast<uint8_t*>(tag)) != 1) {
        return Err::AuthFail;
    }
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) return Err::AuthFail;
    return out;
}

KeyPair KeyPair::generate(Rng& rng) {
    KeyPair kp;
    auto ed_seed = rng.array<kRawKeyLen>();
    auto x_scalar = rng.array<kRawKeyLen>();

    PkeyPtr ed = raw_key(EVP_PKEY_ED25519, true, ed_seed);
    PkeyPtr xk = raw_key(EVP_PKEY_X25519, true, x_scalar);
    if (!ed || !xk) crypto_abort("keypair generation");
    auto ed_pub = raw_public_of(ed.get());
    auto x_pub = raw_public_of(xk.get());

    std::memcpy(kp.priv.bytes.data(), ed_seed.data(), kRawKeyLen);
    std::memcpy(kp.priv.bytes.data() + kRawKeyLen, x_scalar.data(), kRawKeyLen);
    std::memcpy(kp.pub.bytes.data(), ed_pub.data(), kRawKeyLen);
    std::memcpy(kp.pub.bytes.data() + kRawKeyLen, x_pub.data(), kRawKeyLen);
    return kp;
}

Envelope pk_encrypt(const PublicKey& pub, ByteView plaintext, Rng& rng) {
    SymKey ephemeral = SymKey::generate(rng);
    auto eph_scalar = rng.array<kRawKeyLen>();

    PkeyPtr eph = raw_key(EVP_PKEY_X25519, true, eph_scalar);
    if (!eph) crypto_abort("ephemeral key");
    auto eph_pub = raw_public_of(eph.get());

    Bytes shared = x25519(eph_scalar, ByteView(pub.bytes).subspan(kRawKeyLen));
    if (shared.empty()) crypto_abort("x25519 derive");
    Bytes kek_bytes = digest(kWrapLabel, {shared});
    SymKey kek = SymKey::from(ByteView(kek_bytes).first(kSymKeyLen)).value();

    Envelope env;
    env.wrapped_key.assign(eph_pub.begin(), eph_pub.end());
    Bytes wrap_ct = sym_encrypt(kek, ephemeral.bytes);
    env.wrapped_key.insert(env.wrapped_key.end(), wrap_ct.begin(), wrap_ct.end());
    env.body = sym_encrypt(ephemeral, plaintext);
    return env;
}

Result<Bytes> pk_decrypt(const PrivateKey& priv, const Envelope& env) {
    if (env.wrapped_key.size() <= kRawKeyLen) return Err::AuthFail;
    ByteView eph_pub = ByteView(env.wrapped_key).first(kRawKeyLen);
    ByteView wrap_ct = ByteView(env.wrapped_key).subspan(kRawKeyLen);

    Bytes shared = x25519(ByteView(priv.bytes).subspan(kRawKeyLen), eph_pub);
    if (shared.empty()) return Err::AuthFail;
    Bytes kek_bytes = digest(kWrapLabel, {shared});
    SymKey kek = SymKey::from(ByteView(kek_bytes).first(kSymKeyLen)).value();

    auto ek_bytes = sym_decrypt(kek, wrap_ct);
    if (!ek_bytes) return Err::AuthFail;
    auto ek = SymKey::from(*ek_bytes);
    if (!ek) return Err::AuthFail;
    auto plain = sym_decrypt(*ek, env.body);
    if (!plain) return Err::AuthFail;
    return plain;
}

Bytes sign(const PrivateKey& priv, ByteView message) {
    PkeyPtr ed = raw_key(EVP_PKEY_ED25519, true, ByteView(priv.bytes).first(kRawKeyLen));
    if (!ed) crypto_abort("signing key");
    MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, ed.get()) != 1) {
        crypto_abort("sign init");
    }
    Bytes sig(kSigLen);
    size_t len = sig.size();
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
        len != kSigLen) {
        crypto_abort("sign");
    }
    return sig;
}

bool verify(const PublicKey& pub, ByteView message, ByteView signature) {
    if (signature.size() != kSigLen) return false;
    PkeyPtr ed = raw_key(EVP_PKEY_ED25519, false, ByteView(pub.bytes).first(kRawKeyLen));
    if (!ed) return false;
    MdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, ed.get()) != 1) {
        return false;
    }
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                            message.size()) == 1;
}

Cert Cert::issue(const KeyPair& kp) {
    return Cert{kp.pub, sign(kp.priv, kp.pub.bytes)};
}

bool Cert::valid() const {
    return verify(pub, pub.bytes, self_sig);
}

DhParams toy_group() {
    return DhParams{{23}, {5}};
}

DhParams standard_group() {
    // RFC 3526, 2048-bit MODP group (id 14).
    static const char* kHex =
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E08"
        "8A67CC74020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B"
        "302B0A6DF25F14374FE1356D6D51C245E485B576625E7EC6F44C42E9"
        "A637ED6B0BFF5CB6F406B7EDEE386BFB5A899FA5AE9F24117C4B1FE6"
        "49286651ECE45B3DC2007CB8A163BF0598DA48361C55D39A69163FA8"
        "FD24CF5F83655D23DCA3AD961C62F356208552BB9ED529077096966D"
        "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3BE39E772C"
        "180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
        "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFF"
        "FFFFFFFF";
    BIGNUM* p = nullptr;
    if (BN_hex2bn(&p, kHex) == 0) crypto_abort("modp group");
    BnPtr guard(p, BN_free);
    return DhParams{from_bn(p), {2}};
}

Result<Bytes> dh_share(const DhParams& params, ByteView secret) {
    BnPtr p = to_bn(params.p), g = to_bn(params.g), s = to_bn(secret);
    BnPtr r(BN_new(), BN_free);
    BnCtxPtr ctx(BN_CTX_new(), BN_CTX_free);
    if (!p || !g || !s || !r || !ctx) return Err::Internal;
    if (BN_mod_exp(r.get(), g.get(), s.get(), p.get(), ctx.get()) != 1) {
        return Result<Bytes>(Err::Internal, "mod_exp failed");
    }
    return from_bn(r.get());
}

DhKey dh_gen(const DhParams& params, Rng& rng) {
    BnPtr p = to_bn(params.p);
    BnCtxPtr ctx(BN_CTX_new(), BN_CTX_free);
    // secret = 2 + (r mod (p - 3)), giving the uniform-ish range [2, p-2]
    BnPtr range(BN_dup(p.get()), BN_free);
    BN_sub_word(range.get(), 3);
    Bytes raw = rng.bytes(params.p.size() + 8);
    BnPtr r = to_bn(raw);
    BnPtr secret(BN_new(), BN_free);
    if (BN_mod(secret.get(), r.get(), range.get(), ctx.get()) != 1) crypto_abort("dh_gen mod");
    BN_add_word(secret.get(), 2);

    DhKey out;
    out.secret = from_bn(secret.get());
    auto share = dh_share(params, out.secret);
    if (!share) crypto_abort("dh_gen share");
    out.share = *share;
    return out;
}

SymKey dh_kdf(ByteView shared_secret_be) {
    Bytes h = digest(kDhLabel, {shared_secret_be});
    return SymKey::from(ByteView(h).first(kSymKeyLen)).value();
}

Result<SymKey> dh_shared(const DhParams& params, ByteView secret, ByteView peer_share) {
    BnPtr p = to_bn(params.p), peer = to_bn(peer_share), s = to_bn(secret);
    BnCtxPtr ctx(BN_CTX_new(), BN_CTX_free);
    if (!p || !peer || !s || !ctx) return Err::Internal;

    // Reject 0, 1 and p-1 (and anything outside the group).
    BnPtr upper(BN_dup(p.get()), BN_free);
    BN_sub_word(upper.get(), 1);
    if (BN_is_zero(peer.get()) || BN_is_one(peer.get()) || BN_cmp(peer.get(), upper.get()) >= 0) {
        return Result<SymKey>(Err::DegenerateShare, "peer share outside [2, p-2]");
    }

    BnPtr r(BN_new(), BN_free);
    if (BN_mod_exp(r.get(), peer.get(), s.get(), p.get(), ctx.get()) != 1) {
        return Result<SymKey>(Err::Internal, "mod_exp failed");
    }
    return dh_kdf(from_bn(r.get()));
}

Result<SymKey> derive_card_key(ByteView password, ByteView salt) {
    if (password.empty()) return Err::EmptyPassword;
    Bytes salted(kCardLabel.begin(), kCardLabel.end());
    salted.insert(salted.end(), salt.begin(), salt.end());
    std::array<uint8_t, kSymKeyLen> out{};
    if (PKCS5_PBKDF2_HMAC(reinterpret_cast<const char*>(password.data()),
                          static_cast<int>(password.size()), salted.data(),
                          static_cast<int>(salted.size()), 1000, EVP_sha256(),
                          static_cast<int>(out.size()), out.data()) != 1) {
        crypto_abort("pbkdf2");
    }
    return SymKey{out};
}

}  // namespace trustboot::crypto

namespace trustboot {

const char* err_name(Err e) {
    switch (e) {
        case Err::AuthFail: return "AuthFail";
        case Err::DegenerateShare: return "DegenerateShare";
        case Err::EmptyPassword: return "EmptyPassword";
        case Err::MalformedPacket: return "MalformedPacket";
        case Err::DuplicateEmployee: return "DuplicateEmployee";
        case Err::WrongPassword: return "WrongPassword";
        case Err::IntegrityError: return "IntegrityError";
        case Err::BadCardSignature: return "BadCardSignature";
        case Err::AlreadyProvisioned: return "AlreadyProvisioned";
        case Err::WrongPhase: return "WrongPhase";
        case Err::MasterNotTrusted: return "MasterNotTrusted";
        case Err::UnknownEmployee: return "UnknownEmployee";
        case Err::AparamMismatch: return "AparamMismatch";
        case Err::ReplayDetected: return "ReplayDetected";
        case Err::UnknownMaster: return "UnknownMaster";
        case Err::BadMasterSignature: return "BadMasterSignature";
        case Err::BadEmsSignature: return "BadEmsSignature";
        case Err::BadSmSignature: return "BadSmSignature";
        case Err::WrongNetwork: return "WrongNetwork";
        case Err::CounterMismatch: return "CounterMismatch";
        case Err::NotVerified: return "NotVerified";
        case Err::WrongCapability: return "WrongCapability";
        case Err::UnknownPrincipal: return "UnknownPrincipal";
        case Err::IndexOutOfRange: return "IndexOutOfRange";
        case Err::ConfigError: return "ConfigError";
        case Err::IoError: return "IoError";
        case Err::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace trustboot
