#include "trustboot/actors.hpp"

#include <algorithm>

namespace trustboot::actors {

namespace {

using crypto::Nonce;
using crypto::SymKey;
using dy::Term;
using dy::TermPtr;

Bytes nonce_bytes(const Nonce& n) { return Bytes(n.bytes.begin(), n.bytes.end()); }
Bytes key_bytes(const SymKey& k) { return Bytes(k.bytes.begin(), k.bytes.end()); }

bool counter_is(ByteView got, const Nonce& base, uint64_t k) {
    Nonce want = crypto::inc(base, k);
    return got.size() == crypto::kNonceLen &&
           std::equal(got.begin(), got.end(), want.bytes.begin());
}

TermPtr t_id(const PrincipalId& id) { return Term::atom(atom_id(id)); }
TermPtr t_ctr(const PrincipalId& slave, uint64_t k) {
    return Term::inc(Term::atom(atom_nonce_s(slave)), k);
}

// (E(pk(EMS), APARAM), sign(EMS, that ciphertext)) — the signature covers
// the ciphertext, so it authenticates the issuance without exposing the
// secret to signature-body extraction.
TermPtr enc_apparam_term(const PrincipalId& ems, const PrincipalId& employee) {
    auto inner = Term::pk_enc(wire::to_string(ems), Term::atom(atom_aparam(employee)));
    return Term::pair(inner, Term::sig(wire::to_string(ems), inner));
}

TermPtr p_authcomm_term_for(const PrincipalId& ems, const PrincipalId& slave,
                            const PrincipalId& employee) {
    return Term::pk_enc(wire::to_string(ems),
                        Term::pair(Term::atom(atom_cd(slave)), enc_apparam_term(ems, employee)));
}

Result<std::vector<Bytes>> read_blobs(ByteView data, size_t n) {
    wire::Reader r(data);
    std::vector<Bytes> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        auto b = r.blob();
        if (!b.ok()) return b.error();
        out.push_back(b.take());
    }
    if (auto done = r.expect_done(); !done.ok()) return done.error();
    return out;
}

}  // namespace

std::string atom_id(const PrincipalId& id) { return "id:" + wire::to_string(id); }
std::string atom_aparam(const PrincipalId& employee) { return "aparam:" + employee.name; }
std::string atom_nonce_s(const PrincipalId& slave) { return "nonce_s:" + slave.name; }
std::string atom_rnd_s(const PrincipalId& slave) { return "rnd_s:" + slave.name; }
std::string atom_chal(const PrincipalId& slave) { return "chal:" + slave.name; }
std::string atom_skey(const PrincipalId& slave) { return "skey:" + slave.name; }
std::string atom_cd(const PrincipalId& slave) { return "cd:" + slave.name; }
std::string atom_psk(const PrincipalId& master) { return "psk:" + master.name; }

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::EMPTY: return "EMPTY";
        case Phase::PROVISIONED: return "PROVISIONED";
        case Phase::JOIN_SENT: return "JOIN_SENT";
        case Phase::CHALLENGED: return "CHALLENGED";
        case Phase::VERIFIED: return "VERIFIED";
        case Phase::KEYED: return "KEYED";
    }
    return "?";
}

// ---- EMS: registration and card issuance -----------------------------------

Result<IdCard> ems_register_employee(EmsState& ems, const PrincipalId& employee,
                                     std::string_view password, Rng& rng) {
    if (ems.registry.count(employee.name))
        return {Err::DuplicateEmployee, employee.name};

    wire::Aparam ap;
    rng.fill(ap.secret);

    crypto::Envelope env = crypto::pk_encrypt(ems.keypair.pub, ap.secret, rng);
    Bytes env_bytes = wire::encode_envelope(env);
    wire::EncApparam ea{std::move(env), crypto::sign(ems.keypair.priv, env_bytes)};
    Bytes payload = wire::encode_enc_apparam(ea);

    IdCard card;
    card.employee_id = employee;
    card.salt = rng.bytes(16);
    auto key = crypto::derive_card_key(to_bytes(password), card.salt);
    if (!key.ok()) return key.error();
    card.locked_payload = crypto::sym_encrypt(key.value(), payload);
    card.payload_digest = crypto::sha256(card.locked_payload);

    ems.registry.emplace(employee.name, ap);
    return card;
}

Result<wire::EncApparam> card_unlock(const IdCard& card, std::string_view password) {
    if (crypto::sha256(card.locked_payload) != card.payload_digest)
        return {Err::IntegrityError, "card payload mutated"};
    auto key = crypto::derive_card_key(to_bytes(password), card.salt);
    if (!key.ok()) return key.error();
    auto payload = crypto::sym_decrypt(key.value(), card.locked_payload);
    if (!payload.ok()) return {Err::WrongPassword, "card payload did not open"};
    auto ea = wire::decode_enc_apparam(payload.value());
    if (!ea.ok()) return {Err::IntegrityError, "card payload undecodable"};
    return ea.take();
}

// ---- commissioning ----------------------------------------------------------

Bytes Handheld::serialize_state() const {
    wire::Writer w;
    w.blob(wire::encode_principal(id));
    w.blob(scratch);
    return w.take();
}

Result<void> hh_commission(Handheld& hh, const IdCard& card, std::string_view password,
                           const ConfigurationData& cd, const crypto::PublicKey& ems_pub,
                           const PrincipalId& ems_id, SlaveState& slave, Ctx& ctx) {
    if (slave.phase != Phase::EMPTY)
        return {Err::AlreadyProvisioned, slave.id.name};

    auto ea = card_unlock(card, password);
    if (!ea.ok()) return ea.error();

    hh.scratch = wire::encode_enc_apparam(ea.value());
    auto wipe = [&hh] {
        std::fill(hh.scratch.begin(), hh.scratch.end(), uint8_t{0});
        hh.scratch.clear();
    };

    if (!crypto::verify(ems_pub, wire::encode_envelope(ea.value().env),
                        ea.value().ems_signature)) {
        wipe();
        return {Err::BadCardSignature, "issuer signature on card material failed"};
    }

    wire::Writer w;
    w.blob(wire::encode_cd(cd));
    w.blob(hh.scratch);
    crypto::Envelope p_authcomm = crypto::pk_encrypt(ems_pub, w.take(), ctx.rng);
    wipe();

    slave.store = TamperStore{std::move(p_authcomm), cd, ems_pub, ems_id};
    slave.phase = Phase::PROVISIONED;
    slave.p_authcomm_term = p_authcomm_term_for(ems_id, cd.slave_id, card.employee_id);

    std::string hh_name = cd.handheld_id ? cd.handheld_id->name : hh.id.name;
    ctx.audit.note_commission(slave.id.name, cd.employee_id.name, hh_name, ctx.tick);
    return ok();
}

// ---- slave join -------------------------------------------------------------

Bytes SlaveState::serialize_insecure_fields() const {
    wire::Writer w;
    w.blob(wire::encode_principal(id));
    w.u8(static_cast<uint8_t>(phase));
    w.blob(nonce_s.bytes);
    w.blob(rnd_s.bytes);
    w.blob(session_key ? key_bytes(*session_key) : Bytes{});
    w.blob(dh_pending_key ? key_bytes(*dh_pending_key) : Bytes{});
    return w.take();
}

Result<Outgoing> slave_build_pjoin(SlaveState& slave, Ctx& ctx) {
    if (slave.phase != Phase::PROVISIONED)
        return {Err::WrongPhase, std::string("slave is ") + phase_name(slave.phase)};
    const TamperStore& st = *slave.store;

    slave.nonce_s = Nonce::generate(ctx.rng);

    wire::Writer w;
    w.blob(wire::encode_envelope(st.p_authcomm));
    w.blob(wire::encode_principal(slave.id));
    w.blob(slave.nonce_s.bytes);
    crypto::Envelope env = crypto::pk_encrypt(st.ems_pub, w.take(), ctx.rng);

    slave.phase = Phase::JOIN_SENT;

    auto term = Term::pk_enc(
        wire::to_string(st.ems_id),
        Term::tuple({slave.p_authcomm_term, t_id(slave.id),
                     Term::atom(atom_nonce_s(slave.id))}));
    return Outgoing{wire::PJoin{std::move(env)}, std::move(term)};
}

// ---- master forwarding ------------------------------------------------------

Result<Outgoing> master_forward(MasterState& m, const wire::PJoin& pjoin,
                                const PrincipalId& from, const dy::TermPtr& pjoin_term,
                                Ctx& ctx) {
    if (!m.trusted) return {Err::MasterNotTrusted, m.core.id.name};

    Bytes pj_bytes = wire::encode(wire::Packet{pjoin});
    Bytes mid = wire::encode_principal(m.core.id);
    Bytes sig = crypto::sign(m.keypair.priv, mid);

    wire::Writer w;
    w.blob(pj_bytes);
    w.blob(mid);
    w.blob(sig);
    crypto::Envelope env = crypto::pk_encrypt(m.ems_pub, w.take(), ctx.rng);

    m.awaiting.push_back(from);

    auto owner = wire::to_string(m.core.id);
    auto term = Term::pk_enc(
        wire::to_string(m.ems_id),
        Term::tuple({pjoin_term, t_id(m.core.id), Term::sig(owner, t_id(m.core.id))}));
    return Outgoing{wire::PJoinFwd{std::move(env)}, std::move(term)};
}

// ---- EMS join processing ----------------------------------------------------

Result<Outgoing> ems_process_join(EmsState& ems, const wire::Packet& pkt, Ctx& ctx) {
    std::string slave_name;  // best effort, for the audit trail
    auto reject = [&](Err code, std::string detail) -> Error {
        ctx.audit.record(AuditStep::REJECTED, slave_name, detail, ctx.tick);
        return Error{code, std::move(detail)};
    };

    const wire::PJoin* pjoin = nullptr;
    wire::Packet unwrapped;  // keeps a decoded inner PJoin alive
    std::string via = "direct";

    if (const auto* fwd = std::get_if<wire::PJoinFwd>(&pkt)) {
        auto plain = crypto::pk_decrypt(ems.keypair.priv, fwd->env);
        if (!plain.ok()) return reject(Err::AuthFail, "forwarded join did not open");
        auto fields = read_blobs(plain.value(), 3);
        if (!fields.ok()) return reject(Err::MalformedPacket, "forwarded join body");
        const Bytes& pj_bytes = fields.value()[0];
        const Bytes& mid_bytes = fields.value()[1];
        const Bytes& sig = fields.value()[2];

        auto mid = wire::decode_principal(mid_bytes);
        if (!mid.ok()) return reject(Err::MalformedPacket, "forwarder principal");
        auto known = ems.known_masters.find(mid.value().name);
        if (known == ems.known_masters.end())
            return reject(Err::UnknownMaster, mid.value().name);
        if (!crypto::verify(known->second, mid_bytes, sig))
            return reject(Err::BadMasterSignature, mid.value().name);

        auto inner = wire::decode(pj_bytes);
        if (!inner.ok()) return reject(Err::MalformedPacket, "forwarded join payload");
        unwrapped = inner.take();
        pjoin = std::get_if<wire::PJoin>(&unwrapped);
        if (!pjoin) return reject(Err::MalformedPacket, "forwarded payload is not a join");
        via = "via " + wire::to_string(mid.value());
    } else if (const auto* pj = std::get_if<wire::PJoin>(&pkt)) {
        pjoin = pj;
    } else {
        return reject(Err::MalformedPacket,
                      std::string("unexpected ") + wire::packet_name(pkt));
    }

    auto plain = crypto::pk_decrypt(ems.keypair.priv, pjoin->env);
    if (!plain.ok()) return reject(Err::AuthFail, "join did not open");
    auto fields = read_blobs(plain.value(), 3);
    if (!fields.ok()) return reject(Err::MalformedPacket, "join body");

    auto pac_env = wire::decode_envelope(fields.value()[0]);
    if (!pac_env.ok()) return reject(Err::MalformedPacket, "commissioning envelope");
    auto sid = wire::decode_principal(fields.value()[1]);
    if (!sid.ok()) return reject(Err::MalformedPacket, "slave principal");
    slave_name = sid.value().name;
    auto nonce = Nonce::from(fields.value()[2]);
    if (!nonce.ok()) return reject(Err::MalformedPacket, "nonce");

    auto pac_plain = crypto::pk_decrypt(ems.keypair.priv, pac_env.value());
    if (!pac_plain.ok()) return reject(Err::AuthFail, "commissioning blob did not open");
    auto pac_fields = read_blobs(pac_plain.value(), 2);
    if (!pac_fields.ok()) return reject(Err::MalformedPacket, "commissioning body");
    Bytes cd_bytes = pac_fields.value()[0];
    auto cd = wire::decode_cd(cd_bytes);
    if (!cd.ok()) return reject(Err::MalformedPacket, "configuration data");
    auto ea = wire::decode_enc_apparam(pac_fields.value()[1]);
    if (!ea.ok()) return reject(Err::MalformedPacket, "card material");

    if (!crypto::verify(ems.keypair.pub, wire::encode_envelope(ea.value().env),
                        ea.value().ems_signature))
        return reject(Err::AuthFail, "card material signature");
    auto ap = crypto::pk_decrypt(ems.keypair.priv, ea.value().env);
    if (!ap.ok()) return reject(Err::AuthFail, "card material did not open");

    const auto& employee = cd.value().employee_id;
    auto reg = ems.registry.find(employee.name);
    if (reg == ems.registry.end()) return reject(Err::UnknownEmployee, employee.name);
    if (ap.value().size() != reg->second.secret.size() ||
        !std::equal(ap.value().begin(), ap.value().end(), reg->second.secret.begin()))
        return reject(Err::AparamMismatch, employee.name);

    std::pair<std::string, Bytes> seen{sid.value().name, fields.value()[2]};
    if (ems.seen_joins.count(seen)) return reject(Err::ReplayDetected, sid.value().name);
    ems.seen_joins.insert(std::move(seen));

    ctx.audit.record(AuditStep::AUTHENTICATED, sid.value().name, via, ctx.tick);

    Bytes eid = wire::encode_principal(ems.id);
    Bytes sig = crypto::sign(ems.keypair.priv, eid);
    wire::Writer w;
    w.blob(cd_bytes);
    w.blob(nonce.value().bytes);
    w.blob(eid);
    w.blob(sig);
    crypto::Envelope env = crypto::pk_encrypt(ems.sm_pub, w.take(), ctx.rng);

    auto owner = wire::to_string(ems.id);
    auto term = Term::pk_enc(
        wire::to_string(ems.sm_id),
        Term::tuple({Term::atom(atom_cd(sid.value())), Term::atom(atom_nonce_s(sid.value())),
                     t_id(ems.id), Term::sig(owner, t_id(ems.id))}));
    return Outgoing{wire::PAuthDev{std::move(env)}, std::move(term)};
}

// ---- SM verification entry --------------------------------------------------

namespace {

// Challenge body: fresh challenger nonce + NONCE_S+1, all under NONCE_S.
Outgoing make_challenge(VerifierSession& s, const PrincipalId& slave, Ctx& ctx) {
    s.challenger = Nonce::generate(ctx.rng);
    wire::Writer w;
    w.blob(s.challenger.bytes);
    w.blob(crypto::inc(s.nonce_s, 1).bytes);
    Bytes ct = crypto::sym_encrypt(s.nonce_s.as_key(), w.take());

    auto term = Term::sym_enc(Term::atom(atom_nonce_s(slave)),
                              Term::pair(Term::atom(atom_chal(slave)), t_ctr(slave, 1)));
    return Outgoing{wire::Challenge{std::move(ct)}, std::move(term)};
}

}  // namespace

Result<Outgoing> sm_begin_verification(SmState& sm, const wire::PAuthDev& pad, Ctx& ctx,
                                       std::optional<crypto::SymKey> supply_key) {
    auto plain = crypto::pk_decrypt(sm.keypair.priv, pad.env);
    if (!plain.ok()) return {Err::AuthFail, "device authorization did not open"};
    auto fields = read_blobs(plain.value(), 4);
    if (!fields.ok()) return {Err::MalformedPacket, "device authorization body"};

    auto cd = wire::decode_cd(fields.value()[0]);
    if (!cd.ok()) return {Err::MalformedPacket, "configuration data"};
    auto nonce = Nonce::from(fields.value()[1]);
    if (!nonce.ok()) return {Err::MalformedPacket, "nonce"};
    if (!crypto::verify(sm.ems_pub, fields.value()[2], fields.value()[3]))
        return {Err::BadEmsSignature, "issuer signature"};

    const PrincipalId& slave = cd.value().slave_id;
    VerifierSession session;
    session.cd = cd.value();
    session.nonce_s = nonce.value();

    auto master_name = cd.value().master_name();
    if (!master_name) {
        // Direct topology: challenge the slave ourselves.
        auto out = make_challenge(session, slave, ctx);
        sm.core.pending[slave.name] = std::move(session);
        return out;
    }

    // Hierarchical: hand the session to the responsible master.
    auto link = sm.known_masters.find(*master_name);
    if (link == sm.known_masters.end()) return {Err::UnknownMaster, *master_name};

    Bytes smid = wire::encode_principal(sm.core.id);
    Bytes sig = crypto::sign(sm.keypair.priv, smid);
    wire::Writer w;
    w.blob(nonce.value().bytes);
    w.blob(smid);
    w.blob(sig);
    w.u8(static_cast<uint8_t>(session.cd.capability));
    w.u8(supply_key ? 1 : 0);
    if (supply_key) w.blob(supply_key->bytes);
    Bytes payload = w.take();

    crypto::Envelope env;
    TermPtr env_term;
    auto owner = wire::to_string(sm.core.id);
    std::vector<TermPtr> parts{Term::atom(atom_nonce_s(slave)), t_id(sm.core.id),
                               Term::sig(owner, t_id(sm.core.id))};
    if (supply_key) parts.push_back(Term::atom(atom_skey(slave)));
    auto body_term = Term::tuple(std::move(parts));

    if (link->second.psk) {
        env.body = crypto::sym_encrypt(*link->second.psk, payload);
        env_term = Term::sym_enc(Term::atom(atom_psk(link->second.id)), body_term);
    } else {
        env = crypto::pk_encrypt(link->second.pub, payload, ctx.rng);
        env_term = Term::pk_enc(wire::to_string(link->second.id), body_term);
    }

    session.supplied_key = supply_key;
    sm.core.pending[slave.name] = std::move(session);
    return Outgoing{wire::Delegation{std::move(env)}, std::move(env_term)};
}

// ---- master delegation ------------------------------------------------------

Result<Outgoing> master_challenge(MasterState& m, const wire::Delegation& del, Ctx& ctx) {
    Result<Bytes> plain = Err::AuthFail;
    if (del.env.wrapped_key.empty()) {
        if (!m.psk) return {Err::AuthFail, "no shared key configured"};
        plain = crypto::sym_decrypt(*m.psk, del.env.body);
    } else {
        plain = crypto::pk_decrypt(m.keypair.priv, del.env);
    }
    if (!plain.ok()) return {Err::AuthFail, "delegation did not open"};

    wire::Reader r(plain.value());
    auto nonce_blob = r.blob();
    if (!nonce_blob.ok()) return {Err::MalformedPacket, "delegation nonce"};
    auto smid = r.blob();
    if (!smid.ok()) return {Err::MalformedPacket, "delegation principal"};
    auto sig = r.blob();
    if (!sig.ok()) return {Err::MalformedPacket, "delegation signature"};
    auto cap = r.u8();
    if (!cap.ok()) return {Err::MalformedPacket, "delegation capability"};
    auto has_key = r.u8();
    if (!has_key.ok()) return {Err::MalformedPacket, "delegation key flag"};
    std::optional<SymKey> supplied;
    if (has_key.value()) {
        auto kb = r.blob();
        if (!kb.ok()) return {Err::MalformedPacket, "delegation key"};
        auto k = SymKey::from(kb.value());
        if (!k.ok()) return {Err::MalformedPacket, "delegation key size"};
        supplied = k.value();
    }
    if (auto done = r.expect_done(); !done.ok())
        return {Err::MalformedPacket, "delegation trailing bytes"};

    if (!crypto::verify(m.sm_pub, smid.value(), sig.value()))
        return {Err::BadSmSignature, "delegation signature"};

    auto nonce = Nonce::from(nonce_blob.value());
    if (!nonce.ok()) return {Err::MalformedPacket, "delegation nonce size"};

    if (m.awaiting.empty())
        return {Err::UnknownPrincipal, "no forwarded join awaiting delegation"};
    PrincipalId slave = m.awaiting.front();
    m.awaiting.pop_front();

    VerifierSession session;
    session.cd.slave_id = slave;
    session.cd.capability = static_cast<Capability>(cap.value());
    session.nonce_s = nonce.value();
    session.supplied_key = supplied;

    auto out = make_challenge(session, slave, ctx);
    m.core.pending[slave.name] = std::move(session);
    return out;
}

// ---- challenge-response -----------------------------------------------------

Result<Outgoing> slave_answer_challenge(SlaveState& slave, const wire::Challenge& ch,
                                        Ctx& ctx) {
    if (slave.phase != Phase::JOIN_SENT)
        return {Err::WrongPhase, std::string("slave is ") + phase_name(slave.phase)};

    auto plain = crypto::sym_decrypt(slave.nonce_s.as_key(), ch.ct);
    if (!plain.ok()) return {Err::WrongNetwork, "challenge not under our nonce"};
    auto fields = read_blobs(plain.value(), 2);
    if (!fields.ok()) return {Err::WrongNetwork, "challenge body"};
    auto challenger = Nonce::from(fields.value()[0]);
    if (!challenger.ok()) return {Err::WrongNetwork, "challenger nonce size"};
    if (!counter_is(fields.value()[1], slave.nonce_s, 1))
        return {Err::WrongNetwork, "challenge counter off schedule"};

    slave.rnd_s = Nonce::generate(ctx.rng);
    wire::Writer w;
    w.blob(slave.rnd_s.bytes);
    w.blob(crypto::inc(slave.nonce_s, 2).bytes);
    Bytes ct = crypto::sym_encrypt(challenger.value().as_key(), w.take());

    slave.phase = Phase::CHALLENGED;

    auto term = Term::sym_enc(Term::atom(atom_chal(slave.id)),
                              Term::pair(Term::atom(atom_rnd_s(slave.id)), t_ctr(slave.id, 2)));
    return Outgoing{wire::ChallengeResponse{std::move(ct)}, std::move(term)};
}

Result<void> verifier_check_response(VerifierCore& v, const PrincipalId& slave,
                                     const wire::ChallengeResponse& resp, Ctx& ctx) {
    auto reject = [&](Err code, std::string detail) -> Error {
        ctx.audit.record(AuditStep::REJECTED, slave.name, detail, ctx.tick);
        return Error{code, std::move(detail)};
    };

    auto it = v.pending.find(slave.name);
    if (it == v.pending.end()) return reject(Err::AuthFail, "no session for responder");
    VerifierSession& s = it->second;

    auto plain = crypto::sym_decrypt(s.challenger.as_key(), resp.ct);
    if (!plain.ok()) return reject(Err::AuthFail, "response not under challenger nonce");
    auto fields = read_blobs(plain.value(), 2);
    if (!fields.ok()) return reject(Err::AuthFail, "response body");
    auto rnd = Nonce::from(fields.value()[0]);
    if (!rnd.ok()) return reject(Err::AuthFail, "device nonce size");
    if (!counter_is(fields.value()[1], s.nonce_s, 2))
        return reject(Err::CounterMismatch, "response counter off schedule");

    s.rnd_s = rnd.value();
    s.st = VerifierSession::St::VERIFIED;
    ctx.audit.record(AuditStep::VERIFIED, slave.name, "", ctx.tick);
    return ok();
}

// ---- symmetric key establishment ---------------------------------------------

Result<Outgoing> issue_symmetric_key(VerifierCore& v, const PrincipalId& slave, Ctx& ctx) {
    auto it = v.pending.find(slave.name);
    if (it == v.pending.end() || it->second.st != VerifierSession::St::VERIFIED)
        return {Err::NotVerified, slave.name};
    VerifierSession& s = it->second;
    if (s.cd.capability != Capability::SYM_ONLY)
        return {Err::WrongCapability, "device negotiates its key instead"};

    SymKey key = s.supplied_key ? *s.supplied_key : SymKey::generate(ctx.rng);
    wire::Writer w;
    w.blob(key.bytes);
    w.blob(crypto::inc(s.nonce_s, 3).bytes);
    Bytes ct = crypto::sym_encrypt(s.rnd_s.as_key(), w.take());

    v.issued_keys[slave.name] = key;
    ctx.audit.record(AuditStep::KEY_ISSUED, slave.name, "symmetric", ctx.tick);

    auto term = Term::sym_enc(Term::atom(atom_rnd_s(slave)),
                              Term::pair(Term::atom(atom_skey(slave)), t_ctr(slave, 3)));
    return Outgoing{wire::KeyDelivery{std::move(ct)}, std::move(term)};
}

Result<void> slave_accept_key(SlaveState& slave, const wire::KeyDelivery& kd, Ctx&) {
    if (slave.phase != Phase::CHALLENGED)
        return {Err::WrongPhase, std::string("slave is ") + phase_name(slave.phase)};

    auto plain = crypto::sym_decrypt(slave.rnd_s.as_key(), kd.ct);
    if (!plain.ok()) return {Err::AuthFail, "key delivery not under our nonce"};
    auto fields = read_blobs(plain.value(), 2);
    if (!fields.ok()) return {Err::AuthFail, "key delivery body"};
    auto key = SymKey::from(fields.value()[0]);
    if (!key.ok()) return {Err::AuthFail, "key size"};
    if (!counter_is(fields.value()[1], slave.nonce_s, 3))
        return {Err::CounterMismatch, "key delivery counter off schedule"};

    slave.session_key = key.value();
    slave.phase = Phase::KEYED;
    slave.nonce_s = Nonce{};  // wipe: these must not outlive the session
    slave.rnd_s = Nonce{};
    return ok();
}

// ---- DH key establishment -----------------------------------------------------

Result<Outgoing> verifier_dh_init(VerifierCore& v, const PrincipalId& slave,
                                  const crypto::DhParams& params, Ctx& ctx) {
    auto it = v.pending.find(slave.name);
    if (it == v.pending.end() || it->second.st != VerifierSession::St::VERIFIED)
        return {Err::NotVerified, slave.name};
    VerifierSession& s = it->second;
    if (s.cd.capability != Capability::ASYM_CAPABLE)
        return {Err::WrongCapability, "device cannot negotiate"};

    crypto::DhKey dh = crypto::dh_gen(params, ctx.rng);
    s.dh_params = params;
    s.dh_secret = dh.secret;
    s.st = VerifierSession::St::DH_SENT;

    wire::Writer w;
    w.blob(params.p);
    w.blob(params.g);
    w.blob(dh.share);
    w.blob(crypto::inc(s.nonce_s, 3).bytes);
    Bytes ct = crypto::sym_encrypt(s.rnd_s.as_key(), w.take());

    auto term = Term::sym_enc(
        Term::atom(atom_rnd_s(slave)),
        Term::tuple({Term::atom("dh:p"), Term::atom("dh:g"),
                     Term::atom("dhA:" + slave.name), t_ctr(slave, 3)}));
    return Outgoing{wire::PDh1{std::move(ct)}, std::move(term)};
}

Result<Outgoing> slave_dh_respond(SlaveState& slave, const wire::PDh1& p1, Ctx& ctx) {
    if (slave.phase != Phase::CHALLENGED)
        return {Err::WrongPhase, std::string("slave is ") + phase_name(slave.phase)};

    auto plain = crypto::sym_decrypt(slave.rnd_s.as_key(), p1.ct);
    if (!plain.ok()) return {Err::AuthFail, "negotiation offer not under our nonce"};
    auto fields = read_blobs(plain.value(), 4);
    if (!fields.ok()) return {Err::AuthFail, "negotiation offer body"};
    if (!counter_is(fields.value()[3], slave.nonce_s, 3))
        return {Err::CounterMismatch, "offer counter off schedule"};

    crypto::DhParams params{fields.value()[0], fields.value()[1]};
    const Bytes& peer_share = fields.value()[2];

    crypto::DhKey mine = crypto::dh_gen(params, ctx.rng);
    auto k = crypto::dh_shared(params, mine.secret, peer_share);
    if (!k.ok()) return k.error();  // DegenerateShare

    wire::Writer wn;
    wn.blob(crypto::inc(slave.nonce_s, 4).bytes);
    Bytes ct_nonce = crypto::sym_encrypt(k.value(), wn.take());
    wire::Writer ws;
    ws.blob(mine.share);
    Bytes ct_share = crypto::sym_encrypt(slave.rnd_s.as_key(), ws.take());

    slave.dh_pending_key = k.value();
    slave.phase = Phase::VERIFIED;

    auto term = Term::pair(
        Term::sym_enc(Term::atom(atom_skey(slave.id)), t_ctr(slave.id, 4)),
        Term::sym_enc(Term::atom(atom_rnd_s(slave.id)), Term::atom("dhB:" + slave.id.name)));
    return Outgoing{wire::PDh2{std::move(ct_nonce), std::move(ct_share)}, std::move(term)};
}

Result<Outgoing> verifier_dh_finish(VerifierCore& v, const PrincipalId& slave,
                                    const wire::PDh2& p2, Ctx& ctx) {
    auto reject = [&](Err code, std::string detail) -> Error {
        ctx.audit.record(AuditStep::REJECTED, slave.name, detail, ctx.tick);
        return Error{code, std::move(detail)};
    };

    auto it = v.pending.find(slave.name);
    if (it == v.pending.end() || it->second.st != VerifierSession::St::DH_SENT)
        return reject(Err::AuthFail, "no negotiation in progress");
    VerifierSession& s = it->second;

    auto share_plain = crypto::sym_decrypt(s.rnd_s.as_key(), p2.ct_share);
    if (!share_plain.ok()) return reject(Err::AuthFail, "peer share not under device nonce");
    auto share_fields = read_blobs(share_plain.value(), 1);
    if (!share_fields.ok()) return reject(Err::AuthFail, "peer share body");

    auto k = crypto::dh_shared(s.dh_params, s.dh_secret, share_fields.value()[0]);
    if (!k.ok()) return reject(k.code(), "degenerate peer share");

    auto nonce_plain = crypto::sym_decrypt(k.value(), p2.ct_nonce);
    if (!nonce_plain.ok()) return reject(Err::AuthFail, "key confirmation failed");
    auto nonce_fields = read_blobs(nonce_plain.value(), 1);
    if (!nonce_fields.ok()) return reject(Err::AuthFail, "key confirmation body");
    if (!counter_is(nonce_fields.value()[0], s.nonce_s, 4))
        return reject(Err::CounterMismatch, "confirmation counter off schedule");

    wire::Writer w;
    w.blob(crypto::inc(s.nonce_s, 5).bytes);
    Bytes ct = crypto::sym_encrypt(k.value(), w.take());

    v.issued_keys[slave.name] = k.value();
    ctx.audit.record(AuditStep::KEY_ISSUED, slave.name, "negotiated", ctx.tick);

    auto term = Term::sym_enc(Term::atom(atom_skey(slave)), t_ctr(slave, 5));
    return Outgoing{wire::PDh3{std::move(ct)}, std::move(term)};
}

Result<void> slave_dh_confirm(SlaveState& slave, const wire::PDh3& p3, Ctx&) {
    if (slave.phase != Phase::VERIFIED || !slave.dh_pending_key)
        return {Err::WrongPhase, std::string("slave is ") + phase_name(slave.phase)};

    auto plain = crypto::sym_decrypt(*slave.dh_pending_key, p3.ct);
    if (!plain.ok()) return {Err::AuthFail, "confirmation not under negotiated key"};
    auto fields = read_blobs(plain.value(), 1);
    if (!fields.ok()) return {Err::AuthFail, "confirmation body"};
    if (!counter_is(fields.value()[0], slave.nonce_s, 5))
        return {Err::CounterMismatch, "confirmation counter off schedule"};

    slave.session_key = *slave.dh_pending_key;
    slave.dh_pending_key.reset();
    slave.phase = Phase::KEYED;
    slave.nonce_s = Nonce{};
    slave.rnd_s = Nonce{};
    return ok();
}

}  // namespace trustboot::actors
