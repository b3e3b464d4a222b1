#include "trustboot/wire.hpp"

#include <cstring>

namespace trustboot::wire {

namespace {

constexpr uint8_t kTagPAuthComm = 0x01;
constexpr uint8_t kTagPJoin = 0x02;
constexpr uint8_t kTagPJoinFwd = 0x03;
constexpr uint8_t kTagPAuthDev = 0x04;
constexpr uint8_t kTagDelegation = 0x05;
constexpr uint8_t kTagChallenge = 0x06;
constexpr uint8_t kTagChallengeResponse = 0x07;
constexpr uint8_t kTagKeyDelivery = 0x08;
constexpr uint8_t kTagPDh1 = 0x09;
constexpr uint8_t kTagPDh2 = 0x0A;
constexpr uint8_t kTagPDh3 = 0x0B;

Result<void> malformed(const char* what) {
    return Result<void>(Err::MalformedPacket, what);
}

}  // namespace

const char* role_name(Role r) {
    switch (r) {
        case Role::EMS: return "EMS";
        case Role::SM: return "SM";
        case Role::HH: return "HH";
        case Role::ID_CARD: return "ID";
        case Role::SLAVE: return "S";
        case Role::MASTER: return "M";
        case Role::EMPLOYEE: return "EMP";
        case Role::ADVERSARY: return "ADV";
    }
    return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
    if (name == "EMS") return Role::EMS;
    if (name == "SM") return Role::SM;
    if (name == "HH") return Role::HH;
    if (name == "ID") return Role::ID_CARD;
    if (name == "S") return Role::SLAVE;
    if (name == "M") return Role::MASTER;
    if (name == "EMP") return Role::EMPLOYEE;
    if (name == "ADV") return Role::ADVERSARY;
    return std::nullopt;
}

std::string to_string(const PrincipalId& id) {
    return std::string(role_name(id.role)) + ":" + id.name;
}

std::optional<std::string> ConfigurationData::master_name() const {
    for (const auto& [k, v] : settings) {
        if (k == kMasterSetting) return trustboot::to_string(ByteView(v));
    }
    return std::nullopt;
}

// --- Writer / Reader --------------------------------------------------------

void Writer::u8(uint8_t v) {
    out_.push_back(v);
}

void Writer::u32(uint32_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 24));
    out_.push_back(static_cast<uint8_t>(v >> 16));
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
}

void Writer::blob(ByteView b) {
    u32(static_cast<uint32_t>(b.size()));
    out_.insert(out_.end(), b.begin(), b.end());
}

Result<uint8_t> Reader::u8() {
    if (pos_ + 1 > in_.size()) return Result<uint8_t>(Err::MalformedPacket, "truncated u8");
    return in_[pos_++];
}

Result<uint32_t> Reader::u32() {
    if (pos_ + 4 > in_.size()) return Result<uint32_t>(Err::MalformedPacket, "truncated u32");
    uint32_t v = static_cast<uint32_t>(in_[pos_]) << 24 | static_cast<uint32_t>(in_[pos_ + 1]) << 16 |
                 static_cast<uint32_t>(in_[pos_ + 2]) << 8 | static_cast<uint32_t>(in_[pos_ + 3]);
    pos_ += 4;
    return v;
}

Result<Bytes> Reader::blob() {
    auto len = u32();
    if (!len) return len.error();
    if (pos_ + *len > in_.size()) return Result<Bytes>(Err::MalformedPacket, "truncated blob");
    Bytes out(in_.begin() + static_cast<ptrdiff_t>(pos_),
              in_.begin() + static_cast<ptrdiff_t>(pos_ + *len));
    pos_ += *len;
    return out;
}

Result<void> Reader::expect_done() const {
    if (!done()) return malformed("trailing bytes");
    return ok();
}

// --- Sub-encodings -----------------------------------------------------------

Bytes encode_principal(const PrincipalId& id) {
    Writer w;
    w.u8(static_cast<uint8_t>(id.role));
    w.blob(to_bytes(id.name));
    return w.take();
}

static Result<PrincipalId> read_principal(Reader& r) {
    auto role = r.u8();
    if (!role) return role.error();
    if (*role < 1 || *role > 8) return Result<PrincipalId>(Err::MalformedPacket, "bad role");
    auto name = r.blob();
    if (!name) return name.error();
    return PrincipalId{static_cast<Role>(*role), trustboot::to_string(ByteView(*name))};
}

Result<PrincipalId> decode_principal(ByteView b) {
    Reader r(b);
    auto id = read_principal(r);
    if (!id) return id;
    if (auto d = r.expect_done(); !d) return d.error();
    return id;
}

Bytes encode_cd(const ConfigurationData& cd) {
    Writer w;
    w.blob(encode_principal(cd.slave_id));
    w.blob(encode_principal(cd.employee_id));
    w.u8(cd.handheld_id ? 1 : 0);
    if (cd.handheld_id) w.blob(encode_principal(*cd.handheld_id));
    w.u8(static_cast<uint8_t>(cd.capability));
    w.u32(static_cast<uint32_t>(cd.settings.size()));
    for (const auto& [k, v] : cd.settings) {
        w.blob(to_bytes(k));
        w.blob(v);
    }
    return w.take();
}

Result<ConfigurationData> decode_cd(ByteView b) {
    Reader r(b);
    ConfigurationData cd;

    auto slave = r.blob();
    if (!slave) return slave.error();
    auto slave_id = decode_principal(*slave);
    if (!slave_id) return slave_id.error();
    cd.slave_id = *slave_id;

    auto emp = r.blob();
    if (!emp) return emp.error();
    auto emp_id = decode_principal(*emp);
    if (!emp_id) return emp_id.error();
    cd.employee_id = *emp_id;

    auto has_hh = r.u8();
    if (!has_hh) return has_hh.error();
    if (*has_hh > 1) return Result<ConfigurationData>(Err::MalformedPacket, "bad optional flag");
    if (*has_hh) {
        auto hh = r.blob();
        if (!hh) return hh.error();
        auto hh_id = decode_principal(*hh);
        if (!hh_id) return hh_id.error();
        cd.handheld_id = *hh_id;
    }

    auto cap = r.u8();
    if (!cap) return cap.error();
    if (*cap > 1) return Result<ConfigurationData>(Err::MalformedPacket, "bad capability");
    cd.capability = static_cast<Capability>(*cap);

    auto n = r.u32();
    if (!n) return n.error();
    for (uint32_t i = 0; i < *n; ++i) {
        auto k = r.blob();
        if (!k) return k.error();
        auto v = r.blob();
        if (!v) return v.error();
        cd.settings.emplace_back(trustboot::to_string(ByteView(*k)), *v);
    }
    if (auto d = r.expect_done(); !d) return d.error();
    return cd;
}

Bytes encode_envelope(const crypto::Envelope& env) {
    Writer w;
    w.blob(env.wrapped_key);
    w.blob(env.body);
    return w.take();
}

Result<crypto::Envelope> decode_envelope(ByteView b) {
    Reader r(b);
    auto wrapped = r.blob();
    if (!wrapped) return wrapped.error();
    auto body = r.blob();
    if (!body) return body.error();
    if (auto d = r.expect_done(); !d) return d.error();
    return crypto::Envelope{*wrapped, *body};
}

Bytes encode_enc_apparam(const EncApparam& ea) {
    Writer w;
    w.blob(encode_envelope(ea.env));
    w.blob(ea.ems_signature);
    return w.take();
}

Result<EncApparam> decode_enc_apparam(ByteView b) {
    Reader r(b);
    auto env_bytes = r.blob();
    if (!env_bytes) return env_bytes.error();
    auto env = decode_envelope(*env_bytes);
    if (!env) return env.error();
    auto sig = r.blob();
    if (!sig) return sig.error();
    if (auto d = r.expect_done(); !d) return d.error();
    return EncApparam{*env, *sig};
}

// --- Packet codec ------------------------------------------------------------

uint8_t tag_of(const Packet& p) {
    return static_cast<uint8_t>(p.index() + 1);
}

const char* packet_name(const Packet& p) {
    static const char* names[] = {"PAuthComm", "PJoin",    "PJoinFwd",    "PAuthDev",
                                  "Delegation", "Challenge", "ChallengeResponse", "KeyDelivery",
                                  "PDh1",      "PDh2",     "PDh3"};
    return names[p.index()];
}

Bytes encode(const Packet& p) {
    Writer w;
    w.u8(tag_of(p));
    std::visit(
        [&w](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PAuthComm> || std::is_same_v<T, PJoin> ||
                          std::is_same_v<T, PJoinFwd> || std::is_same_v<T, PAuthDev> ||
                          std::is_same_v<T, Delegation>) {
                w.blob(v.env.wrapped_key);
                w.blob(v.env.body);
            } else if constexpr (std::is_same_v<T, PDh2>) {
                w.blob(v.ct_nonce);
                w.blob(v.ct_share);
            } else {
                w.blob(v.ct);
            }
        },
        p);
    return w.take();
}

Result<Packet> decode(ByteView b) {
    Reader r(b);
    auto tag = r.u8();
    if (!tag) return tag.error();
    if (*tag < kTagPAuthComm || *tag > kTagPDh3) {
        return Result<Packet>(Err::MalformedPacket, "unknown tag");
    }

    auto read_env = [&r]() -> Result<crypto::Envelope> {
        auto wrapped = r.blob();
        if (!wrapped) return wrapped.error();
        auto body = r.blob();
        if (!body) return body.error();
        return crypto::Envelope{*wrapped, *body};
    };

    Packet out;
    switch (*tag) {
        case kTagPAuthComm: {
            auto e = read_env();
            if (!e) return e.error();
            out = PAuthComm{*e};
            break;
        }
        case kTagPJoin: {
            auto e = read_env();
            if (!e) return e.error();
            out = PJoin{*e};
            break;
        }
        case kTagPJoinFwd: {
            auto e = read_env();
            if (!e) return e.error();
            out = PJoinFwd{*e};
            break;
        }
        case kTagPAuthDev: {
            auto e = read_env();
            if (!e) return e.error();
            out = PAuthDev{*e};
            break;
        }
        case kTagDelegation: {
            auto e = read_env();
            if (!e) return e.error();
            out = Delegation{*e};
            break;
        }
        case kTagChallenge: {
            auto ct = r.blob();
            if (!ct) return ct.error();
            out = Challenge{*ct};
            break;
        }
        case kTagChallengeResponse: {
            auto ct = r.blob();
            if (!ct) return ct.error();
            out = ChallengeResponse{*ct};
            break;
        }
        case kTagKeyDelivery: {
            auto ct = r.blob();
            if (!ct) return ct.error();
            out = KeyDelivery{*ct};
            break;
        }
        case kTagPDh1: {
            auto ct = r.blob();
            if (!ct) return ct.error();
            out = PDh1{*ct};
            break;
        }
        case kTagPDh2: {
            auto a = r.blob();
            if (!a) return a.error();
            auto b2 = r.blob();
            if (!b2) return b2.error();
            out = PDh2{*a, *b2};
            break;
        }
        case kTagPDh3: {
            auto ct = r.blob();
            if (!ct) return ct.error();
            out = PDh3{*ct};
            break;
        }
        default:
            return Result<Packet>(Err::MalformedPacket, "unknown tag");
    }
    if (auto d = r.expect_done(); !d) return d.error();
    return out;
}

}  // namespace trustboot::wire
