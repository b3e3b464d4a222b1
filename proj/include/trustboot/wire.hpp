#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trustboot/bytes.hpp"
#include "trustboot/crypto.hpp"
#include "trustboot/result.hpp"

namespace trustboot::wire {

enum class Role : uint8_t {
    EMS = 1,
    SM = 2,
    HH = 3,
    ID_CARD = 4,
    SLAVE = 5,
    MASTER = 6,
    EMPLOYEE = 7,
    ADVERSARY = 8,  // synthetic sender for injected traffic
};

const char* role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

struct PrincipalId {
    Role role;
    std::string name;

    auto operator<=>(const PrincipalId&) const = default;
};

// Renders as "ROLE:name", e.g. "SLAVE:s1".
std::string to_string(const PrincipalId& id);

enum class Capability : uint8_t {
    SYM_ONLY = 0,
    ASYM_CAPABLE = 1,
};

// Commissioning payload written into the device by the handheld. The
// employee identity inside it is what the audit trail traces back to.
struct ConfigurationData {
    PrincipalId slave_id;
    PrincipalId employee_id;
    std::optional<PrincipalId> handheld_id;
    Capability capability = Capability::SYM_ONLY;
    std::vector<std::pair<std::string, Bytes>> settings;  // ordered key/value pairs

    bool operator==(const ConfigurationData&) const = default;

    // Routing entry used in hierarchical scenarios: the master a slave
    // hangs under, recorded at commissioning time.
    static constexpr const char* kMasterSetting = "master";
    std::optional<std::string> master_name() const;
};

// Per-employee secret issued by the EMS at registration. Lives in the
// registry and, encrypted, on the ID card; never on the wire in clear.
struct Aparam {
    std::array<uint8_t, 16> secret{};

    auto operator<=>(const Aparam&) const = default;
};

// APARAM under the EMS public key, plus the EMS signature the handheld
// checks before commissioning.
struct EncApparam {
    crypto::Envelope env;
    Bytes ems_signature;

    bool operator==(const EncApparam&) const = default;
};

// ---------------------------------------------------------------------------
// Packet variants. Tags are fixed (0x01..0x0B); the codec is strict and
// deterministic so transcripts are byte-reproducible and adversary
// injection is unambiguous.
// ---------------------------------------------------------------------------

struct PAuthComm { crypto::Envelope env; bool operator==(const PAuthComm&) const = default; };
struct PJoin { crypto::Envelope env; bool operator==(const PJoin&) const = default; };
struct PJoinFwd { crypto::Envelope env; bool operator==(const PJoinFwd&) const = default; };
struct PAuthDev { crypto::Envelope env; bool operator==(const PAuthDev&) const = default; };
struct Delegation { crypto::Envelope env; bool operator==(const Delegation&) const = default; };
struct Challenge { Bytes ct; bool operator==(const Challenge&) const = default; };
struct ChallengeResponse { Bytes ct; bool operator==(const ChallengeResponse&) const = default; };
struct KeyDelivery { Bytes ct; bool operator==(const KeyDelivery&) const = default; };
struct PDh1 { Bytes ct; bool operator==(const PDh1&) const = default; };
struct PDh2 {
    Bytes ct_nonce;  // E(K_S, counter)
    Bytes ct_share;  // E(RND_S, B)
    bool operator==(const PDh2&) const = default;
};
struct PDh3 { Bytes ct; bool operator==(const PDh3&) const = default; };

using Packet = std::variant<PAuthComm, PJoin, PJoinFwd, PAuthDev, Delegation, Challenge,
                            ChallengeResponse, KeyDelivery, PDh1, PDh2, PDh3>;

uint8_t tag_of(const Packet& p);
const char* packet_name(const Packet& p);

Bytes encode(const Packet& p);
// Strict inverse of encode: unknown tag, truncation, or trailing bytes
// all fail with MalformedPacket.
Result<Packet> decode(ByteView b);

// ---------------------------------------------------------------------------
// Canonical sub-encodings used inside envelope plaintexts. Field orders
// follow the protocol tuples left to right.
// ---------------------------------------------------------------------------

Bytes encode_principal(const PrincipalId& id);
Result<PrincipalId> decode_principal(ByteView b);

Bytes encode_cd(const ConfigurationData& cd);
Result<ConfigurationData> decode_cd(ByteView b);

Bytes encode_enc_apparam(const EncApparam& ea);
Result<EncApparam> decode_enc_apparam(ByteView b);

Bytes encode_envelope(const crypto::Envelope& env);
Result<crypto::Envelope> decode_envelope(ByteView b);

// Length-prefixed tuple writer/reader shared by the codec and the actor
// plaintext layouts. All integers are big-endian.
class Writer {
public:
    void u8(uint8_t v);
    void u32(uint32_t v);
    void blob(ByteView b);  // u32 length + bytes
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView b) : in_(b) {}

    Result<uint8_t> u8();
    Result<uint32_t> u32();
    Result<Bytes> blob();
    bool done() const { return pos_ == in_.size(); }
    // Trailing garbage is an error everywhere in this protocol.
    Result<void> expect_done() const;

private:
    ByteView in_;
    size_t pos_ = 0;
};

}  // namespace trustboot::wire
