#include "trustboot/wire.hpp"

#include <gtest/gtest.h>

#include "trustboot/rng.hpp"

using namespace trustboot;
using namespace trustboot::wire;

namespace {

crypto::Envelope rand_env(Rng& rng) {
    return {rng.bytes(1 + rng.below(80)), rng.bytes(1 + rng.below(120))};
}

Bytes rand_ct(Rng& rng) { return rng.bytes(1 + rng.below(100)); }

Packet rand_packet(Rng& rng) {
    switch (1 + rng.below(11)) {
        case 1: return PAuthComm{rand_env(rng)};
        case 2: return PJoin{rand_env(rng)};
        case 3: return PJoinFwd{rand_env(rng)};
        case 4: return PAuthDev{rand_env(rng)};
        case 5: return Delegation{rand_env(rng)};
        case 6: return Challenge{rand_ct(rng)};
        case 7: return ChallengeResponse{rand_ct(rng)};
        case 8: return KeyDelivery{rand_ct(rng)};
        case 9: return PDh1{rand_ct(rng)};
        case 10: return PDh2{rand_ct(rng), rand_ct(rng)};
        default: return PDh3{rand_ct(rng)};
    }
}

PrincipalId rand_principal(Rng& rng) {
    Role roles[] = {Role::EMS, Role::SM,     Role::HH,       Role::ID_CARD,
                    Role::SLAVE, Role::MASTER, Role::EMPLOYEE, Role::ADVERSARY};
    std::string name;
    size_t len = rng.below(12);
    for (size_t i = 0; i < len; ++i)
        name += char('a' + rng.below(26));
    return {roles[rng.below(8)], name};
}

}  // namespace

TEST(Codec, RoundTripProperty) {
    Rng rng(101);
    for (int i = 0; i < 500; ++i) {
        Packet p = rand_packet(rng);
        Bytes b = encode(p);
        ASSERT_FALSE(b.empty());
        EXPECT_EQ(b[0], tag_of(p));
        auto back = decode(b);
        ASSERT_TRUE(back.ok()) << "iter " << i;
        EXPECT_EQ(back.value(), p) << "iter " << i;
        EXPECT_EQ(encode(back.value()), b) << "re-encode differs, iter " << i;
    }
}

TEST(Codec, EveryPrefixRejected) {
    Rng rng(102);
    for (int i = 0; i < 24; ++i) {
        Bytes b = encode(rand_packet(rng));
        for (size_t cut = 0; cut < b.size(); ++cut) {
            auto r = decode(ByteView(b).first(cut));
            ASSERT_FALSE(r.ok()) << "prefix " << cut << " of " << b.size();
            EXPECT_EQ(r.code(), Err::MalformedPacket);
        }
    }
}

TEST(Codec, TrailingBytesRejected) {
    Rng rng(103);
    for (int i = 0; i < 24; ++i) {
        Bytes b = encode(rand_packet(rng));
        b.push_back(0x00);
        auto r = decode(b);
        ASSERT_FALSE(r.ok());
        EXPECT_EQ(r.code(), Err::MalformedPacket);
    }
}

TEST(Codec, UnknownTagsRejected) {
    Bytes body = encode(Challenge{Bytes{1, 2, 3}});
    for (int tag = 0; tag < 256; ++tag) {
        if (tag >= 1 && tag <= 11) continue;
        Bytes b = body;
        b[0] = uint8_t(tag);
        EXPECT_FALSE(decode(b).ok()) << tag;
    }
    EXPECT_FALSE(decode(Bytes{}).ok());
}

TEST(Codec, RandomBytesAlmostNeverDecode) {
    Rng rng(104);
    int accepted = 0;
    for (int i = 0; i < 1000; ++i)
        if (decode(rng.bytes(1 + rng.below(64))).ok()) ++accepted;
    // Strict framing: junk must not parse.
    EXPECT_EQ(accepted, 0);
}

TEST(Principals, RoundTrip) {
    Rng rng(105);
    for (int i = 0; i < 200; ++i) {
        PrincipalId p = rand_principal(rng);
        auto back = decode_principal(encode_principal(p));
        ASSERT_TRUE(back.ok());
        EXPECT_EQ(back.value(), p);
    }
}

TEST(Principals, Naming) {
    EXPECT_EQ(to_string({Role::SLAVE, "s1"}), "S:s1");
    EXPECT_EQ(to_string({Role::EMS, "ems"}), "EMS:ems");
    EXPECT_EQ(role_from_name("M"), Role::MASTER);
    EXPECT_EQ(role_from_name("bogus"), std::nullopt);
    EXPECT_FALSE(decode_principal(Bytes{99, 0, 0, 0, 0}).ok());  // bad role byte
}

TEST(ConfigData, RoundTripWithSettings) {
    ConfigurationData cd;
    cd.slave_id = {Role::SLAVE, "s9"};
    cd.employee_id = {Role::EMPLOYEE, "alice"};
    cd.handheld_id = PrincipalId{Role::HH, "hh1"};
    cd.capability = Capability::ASYM_CAPABLE;
    cd.settings.emplace_back("rate", Bytes{0x01, 0x02});
    cd.settings.emplace_back(ConfigurationData::kMasterSetting, to_bytes("m1"));

    auto back = decode_cd(encode_cd(cd));
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(back.value(), cd);
    EXPECT_EQ(back.value().master_name(), "m1");

    ConfigurationData plain;
    plain.slave_id = {Role::SLAVE, "s0"};
    plain.employee_id = {Role::EMPLOYEE, "bob"};
    auto back2 = decode_cd(encode_cd(plain));
    ASSERT_TRUE(back2.ok());
    EXPECT_EQ(back2.value(), plain);
    EXPECT_EQ(back2.value().master_name(), std::nullopt);
    EXPECT_EQ(back2.value().handheld_id, std::nullopt);
}

TEST(ConfigData, TruncationRejected) {
    ConfigurationData cd;
    cd.slave_id = {Role::SLAVE, "s9"};
    cd.employee_id = {Role::EMPLOYEE, "alice"};
    Bytes b = encode_cd(cd);
    for (size_t cut = 0; cut < b.size(); ++cut)
        EXPECT_FALSE(decode_cd(ByteView(b).first(cut)).ok()) << cut;
}

TEST(EncApparamCodec, RoundTrip) {
    Rng rng(106);
    EncApparam ea{rand_env(rng), rng.bytes(64)};
    auto back = decode_enc_apparam(encode_enc_apparam(ea));
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(back.value(), ea);

    crypto::Envelope env = rand_env(rng);
    auto env_back = decode_envelope(encode_envelope(env));
    ASSERT_TRUE(env_back.ok());
    EXPECT_EQ(env_back.value(), env);
}

TEST(ReaderWriter, TupleDiscipline) {
    Writer w;
    w.u8(7);
    w.u32(0xDEADBEEF);
    w.blob(Bytes{9, 8, 7});
    Bytes b = w.take();

    Reader r(b);
    auto v8 = r.u8();
    ASSERT_TRUE(v8.ok());
    EXPECT_EQ(v8.value(), 7);
    auto v32 = r.u32();
    ASSERT_TRUE(v32.ok());
    EXPECT_EQ(v32.value(), 0xDEADBEEFu);
    auto vb = r.blob();
    ASSERT_TRUE(vb.ok());
    EXPECT_EQ(vb.value(), (Bytes{9, 8, 7}));
    EXPECT_TRUE(r.done());
    EXPECT_TRUE(r.expect_done().ok());

    Reader r2(b);
    (void)r2.u8();
    EXPECT_FALSE(r2.expect_done().ok());  // unread input left

    // Length prefix pointing past the end must fail, not over-read.
    Writer w2;
    w2.u32(100);
    Bytes short_blob = w2.take();
    short_blob.push_back(1);
    Reader r3(short_blob);
    EXPECT_FALSE(r3.blob().ok());
}

TEST(ReaderWriter, BigEndianLayout) {
    Writer w;
    w.u32(0x01020304);
    EXPECT_EQ(w.take(), (Bytes{1, 2, 3, 4}));
}
