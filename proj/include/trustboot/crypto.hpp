#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "trustboot/bytes.hpp"
#include "trustboot/result.hpp"
#include "trustboot/rng.hpp"

namespace trustboot::crypto {

inline constexpr size_t kSymKeyLen = 16;
inline constexpr size_t kNonceLen = 16;
inline constexpr size_t kSigLen = 64;

// 128-bit symmetric key. Ciphertexts produced under it are authenticated
// (AES-128-GCM), so decryption with the wrong key is always detected.
struct SymKey {
    std::array<uint8_t, kSymKeyLen> bytes{};

    static SymKey generate(Rng& rng);
    static Result<SymKey> from(ByteView b);
    auto operator<=>(const SymKey&) const = default;
};

// 128-bit nonce, same width as SymKey on purpose: the verification phase
// encrypts under NONCE_S and RND_S, so nonces double as keys and are
// secret values rather than public counters.
struct Nonce {
    std::array<uint8_t, kNonceLen> bytes{};

    static Nonce generate(Rng& rng);
    static Result<Nonce> from(ByteView b);
    SymKey as_key() const { return SymKey{bytes}; }
    bool is_zero() const;
    auto operator<=>(const Nonce&) const = default;
};

// Big-endian integer increment, wrapping modulo 2^128.
Nonce inc(const Nonce& n, uint64_t k = 1);

// One public value serves both signature verification (Ed25519) and
// envelope encryption (X25519); the two raw keys are carried side by side.
struct PublicKey {
    std::array<uint8_t, 64> bytes{};  // ed25519 verify key || x25519 share
    auto operator<=>(const PublicKey&) const = default;
};

struct PrivateKey {
    std::array<uint8_t, 64> bytes{};  // ed25519 seed || x25519 scalar
    auto operator<=>(const PrivateKey&) const = default;
};

struct KeyPair {
    PublicKey pub;
    PrivateKey priv;

    static KeyPair generate(Rng& rng);
};

// Hybrid public-key envelope: an ephemeral SymKey wrapped for the
// recipient plus the payload encrypted under that ephemeral key. This is
// what lets multi-field packets ride under a public key.
struct Envelope {
    Bytes wrapped_key;
    Bytes body;

    bool operator==(const Envelope&) const = default;
};

// Authenticated symmetric encryption. The GCM IV is derived from
// (key, plaintext), which keeps the function deterministic without
// touching the scenario RNG.
Bytes sym_encrypt(const SymKey& key, ByteView plaintext);
Result<Bytes> sym_decrypt(const SymKey& key, ByteView ciphertext);

Envelope pk_encrypt(const PublicKey& pub, ByteView plaintext, Rng& rng);
Result<Bytes> pk_decrypt(const PrivateKey& priv, const Envelope& env);

// Ed25519 detached signatures. Authenticity claims are always made with a
// real signature, never via decrypt-with-public-key tricks.
Bytes sign(const PrivateKey& priv, ByteView message);
bool verify(const PublicKey& pub, ByteView message, ByteView signature);

// Self-signed root: a public key plus a signature over that key by the
// matching private key. Stands in for Cert_EMS.
struct Cert {
    PublicKey pub;
    Bytes self_sig;

    static Cert issue(const KeyPair& kp);
    bool valid() const;
    bool operator==(const Cert&) const = default;
};

// Diffie-Hellman over Z_p*, parameters as big-endian byte strings.
struct DhParams {
    Bytes p;
    Bytes g;

    bool operator==(const DhParams&) const = default;
};

DhParams toy_group();       // p = 23, g = 5; small enough to test exhaustively
DhParams standard_group();  // RFC 3526 group 14 (2048-bit MODP), g = 2

// share = g^secret mod p. No range check on `secret`: tests force values.
Result<Bytes> dh_share(const DhParams& params, ByteView secret);

struct DhKey {
    Bytes secret;
    Bytes share;
};

// secret uniform in [2, p-2], drawn from the scenario RNG.
DhKey dh_gen(const DhParams& params, Rng& rng);

// KDF(peer_share^secret mod p). Rejects peer shares outside [2, p-2]
// (0, 1 and p-1 land in trivial subgroups).
Result<SymKey> dh_shared(const DhParams& params, ByteView secret, ByteView peer_share);

// Hash of the big-endian shared-secret encoding with a fixed context
// label, truncated to key length. Exposed so the oracle tests can check
// agreement output independently of dh_shared.
SymKey dh_kdf(ByteView shared_secret_be);

// Password-based key for the ID-card payload (PBKDF2-HMAC-SHA256).
Result<SymKey> derive_card_key(ByteView password, ByteView salt);

Bytes sha256(ByteView data);

}  // namespace trustboot::crypto
