#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "trustboot/audit.hpp"
#include "trustboot/crypto.hpp"
#include "trustboot/knowledge.hpp"
#include "trustboot/result.hpp"
#include "trustboot/rng.hpp"
#include "trustboot/wire.hpp"

namespace trustboot::actors {

using wire::Capability;
using wire::ConfigurationData;
using wire::PrincipalId;

// Ambient per-run services: one RNG, one audit trail, the simulation
// clock. Actors never own these.
struct Ctx {
    Rng& rng;
    AuditLog& audit;
    uint64_t tick = 0;
};

// A packet ready for the bus, tagged with its symbolic lifting so the
// deduction engine can reason about what an observer learns from it.
struct Outgoing {
    wire::Packet pkt;
    dy::TermPtr term;
};

// ---- symbolic atom naming --------------------------------------------------

std::string atom_id(const PrincipalId& id);            // "id:ROLE:name", public
std::string atom_aparam(const PrincipalId& employee);  // "aparam:name"
std::string atom_nonce_s(const PrincipalId& slave);
std::string atom_rnd_s(const PrincipalId& slave);
std::string atom_chal(const PrincipalId& slave);  // challenger nonce of the session
std::string atom_skey(const PrincipalId& slave);  // established session key
std::string atom_cd(const PrincipalId& slave);
std::string atom_psk(const PrincipalId& master);  // SM<->master pre-shared key

// ---- employee management / ID card -----------------------------------------

// The card never exposes plaintext: the payload is locked under a
// password-derived key and carries an integrity digest so tampering and
// wrong passwords stay distinguishable.
struct IdCard {
    PrincipalId employee_id;
    Bytes salt;
    Bytes locked_payload;
    Bytes payload_digest;
};

struct EmsState {
    PrincipalId id;
    crypto::KeyPair keypair;
    PrincipalId sm_id;
    crypto::PublicKey sm_pub;
    std::map<std::string, wire::Aparam> registry;        // employee name -> secret
    std::set<std::pair<std::string, Bytes>> seen_joins;  // (slave name, NONCE_S)
    std::map<std::string, crypto::PublicKey> known_masters;
};

Result<IdCard> ems_register_employee(EmsState& ems, const PrincipalId& employee,
                                     std::string_view password, Rng& rng);

Result<wire::EncApparam> card_unlock(const IdCard& card, std::string_view password);

// ---- handheld + slave commissioning ----------------------------------------

struct Handheld {
    PrincipalId id;
    Bytes scratch;  // transient card material; wiped after every commission

    Bytes serialize_state() const;  // scanned by the wipe test
};

enum class Phase { EMPTY, PROVISIONED, JOIN_SENT, CHALLENGED, VERIFIED, KEYED };
const char* phase_name(Phase p);

// Contents of the modeled tamper-proof region: the steal-device action
// cannot read anything in here.
struct TamperStore {
    crypto::Envelope p_authcomm;
    ConfigurationData cd;
    crypto::PublicKey ems_pub;
    PrincipalId ems_id;
};

struct SlaveState {
    PrincipalId id;
    Phase phase = Phase::EMPTY;
    std::optional<TamperStore> store;
    crypto::Nonce nonce_s;  // zero until the join is built; wiped at KEYED
    crypto::Nonce rnd_s;
    std::optional<crypto::SymKey> session_key;
    std::optional<crypto::SymKey> dh_pending_key;  // K_S between PDh2 and PDh3

    dy::TermPtr p_authcomm_term;  // simulator tag, carried not inspected

    // Everything outside the tamper-proof store, as the steal-device
    // adversary action would dump it.
    Bytes serialize_insecure_fields() const;
};

// Writes {P_authComm, CD, ems_pub} into the slave and audits the
// commissioning under the employee named in the CD. The handheld's copy
// of the card material is wiped before returning.
Result<void> hh_commission(Handheld& hh, const IdCard& card, std::string_view password,
                           const ConfigurationData& cd, const crypto::PublicKey& ems_pub,
                           const PrincipalId& ems_id, SlaveState& slave, Ctx& ctx);

Result<Outgoing> slave_build_pjoin(SlaveState& slave, Ctx& ctx);

// ---- verification sessions (SM and master share the machinery) -------------

struct VerifierSession {
    enum class St { CHALLENGED, VERIFIED, DH_SENT };
    ConfigurationData cd;
    crypto::Nonce nonce_s;
    crypto::Nonce challenger;
    crypto::Nonce rnd_s;  // filled at VERIFIED
    St st = St::CHALLENGED;
    std::optional<crypto::SymKey> supplied_key;  // hierarchical SM-supplied mode
    crypto::DhParams dh_params;
    Bytes dh_secret;
};

struct VerifierCore {
    PrincipalId id;
    std::map<std::string, VerifierSession> pending;  // slave name -> session
    std::map<std::string, crypto::SymKey> issued_keys;
};

struct MasterLink {
    PrincipalId id;
    crypto::PublicKey pub;
    std::optional<crypto::SymKey> psk;  // set in pre-shared delegation mode
};

struct SmState {
    VerifierCore core;
    crypto::KeyPair keypair;
    PrincipalId ems_id;
    crypto::PublicKey ems_pub;
    std::map<std::string, MasterLink> known_masters;
};

struct MasterState {
    VerifierCore core;
    crypto::KeyPair keypair;
    PrincipalId ems_id, sm_id;
    crypto::PublicKey ems_pub, sm_pub;
    bool trusted = false;  // set once its own direct run has completed
    std::optional<crypto::SymKey> psk;
    std::deque<PrincipalId> awaiting;  // slaves forwarded, delegation not yet seen
    std::optional<crypto::SymKey> sm_supplied_key;  // from the last delegation
};

// `from` is transport metadata: the bus tells the master who sent the
// join; the packet itself stays opaque to it. `pjoin_term` is the
// simulator's symbolic tag for the forwarded bytes.
Result<Outgoing> master_forward(MasterState& m, const wire::PJoin& pjoin,
                                const PrincipalId& from, const dy::TermPtr& pjoin_term,
                                Ctx& ctx);

Result<Outgoing> ems_process_join(EmsState& ems, const wire::Packet& pkt, Ctx& ctx);

// Direct topology: returns a Challenge. Hierarchical (CD carries a master
// routing entry): returns a Delegation for that master, optionally
// carrying an SM-supplied session key.
Result<Outgoing> sm_begin_verification(SmState& sm, const wire::PAuthDev& pad, Ctx& ctx,
                                       std::optional<crypto::SymKey> supply_key = {});

Result<Outgoing> master_challenge(MasterState& m, const wire::Delegation& del, Ctx& ctx);

Result<Outgoing> slave_answer_challenge(SlaveState& slave, const wire::Challenge& ch,
                                        Ctx& ctx);

Result<void> verifier_check_response(VerifierCore& v, const PrincipalId& slave,
                                     const wire::ChallengeResponse& resp, Ctx& ctx);

Result<Outgoing> issue_symmetric_key(VerifierCore& v, const PrincipalId& slave, Ctx& ctx);

Result<void> slave_accept_key(SlaveState& slave, const wire::KeyDelivery& kd, Ctx& ctx);

Result<Outgoing> verifier_dh_init(VerifierCore& v, const PrincipalId& slave,
                                  const crypto::DhParams& params, Ctx& ctx);

Result<Outgoing> slave_dh_respond(SlaveState& slave, const wire::PDh1& p1, Ctx& ctx);

Result<Outgoing> verifier_dh_finish(VerifierCore& v, const PrincipalId& slave,
                                    const wire::PDh2& p2, Ctx& ctx);

Result<void> slave_dh_confirm(SlaveState& slave, const wire::PDh3& p3, Ctx& ctx);

}  // namespace trustboot::actors
