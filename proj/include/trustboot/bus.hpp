#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trustboot/bytes.hpp"
#include "trustboot/knowledge.hpp"
#include "trustboot/result.hpp"
#include "trustboot/wire.hpp"

namespace trustboot::sim {

using wire::PrincipalId;

enum class Disposition { DELIVERED, DROPPED, INJECTED, REPLAYED };
const char* disposition_name(Disposition d);

struct BusEvent {
    uint64_t tick = 0;
    PrincipalId from;
    PrincipalId to;
    Bytes bytes;
    Disposition disposition = Disposition::DELIVERED;
    dy::TermPtr term;  // symbolic lifting; null for raw injections

    std::string to_line() const;  // tick, from, to, disposition, hex bytes
};

// Adversary interception rule: any unset field matches everything.
// `remaining` < 0 means the rule never expires.
struct DropRule {
    std::optional<PrincipalId> from;
    std::optional<PrincipalId> to;
    std::optional<uint8_t> tag;
    int remaining = -1;
};

struct Delivery {
    PrincipalId from;
    Bytes bytes;
    Disposition disposition;
};

// Deterministic single-threaded message bus. Every send is appended to
// the transcript with a strictly increasing tick; the adversary observes
// everything that actually crosses the wire and may drop, replay, or
// inject per its script.
class Bus {
public:
    static PrincipalId adversary_id() {
        return {wire::Role::ADVERSARY, "adv"};
    }

    void register_principal(const PrincipalId& id);
    bool registered(const PrincipalId& id) const;
    void add_drop_rule(DropRule rule);

    Result<Disposition> send(const PrincipalId& from, const PrincipalId& to,
                             const wire::Packet& pkt, dy::TermPtr term);
    Result<Disposition> replay(size_t event_index, const PrincipalId& to);
    Result<Disposition> inject(const PrincipalId& to, Bytes bytes);

    std::optional<Delivery> fetch(const PrincipalId& to);

    const std::vector<BusEvent>& transcript() const { return events_; }
    uint64_t now() const { return tick_; }

    // The adversary's passive view: bytes of everything that crossed the
    // wire (dropped traffic never did).
    std::vector<Bytes> observed_bytes() const;
    // Symbolic terms for the deduction engine. Includes dropped events:
    // an intercepting adversary read them even though no one else did.
    std::vector<dy::TermPtr> terms() const;

    std::string render_transcript() const;  // one to_line() per event

private:
    Disposition append(BusEvent ev);
    bool should_drop(const PrincipalId& from, const PrincipalId& to, uint8_t tag);

    uint64_t tick_ = 0;
    std::set<PrincipalId> principals_;
    std::vector<BusEvent> events_;
    std::vector<DropRule> drops_;
    std::map<PrincipalId, std::deque<Delivery>> inboxes_;
};

}  // namespace trustboot::sim
