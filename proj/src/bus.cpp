#include "trustboot/bus.hpp"

#include <sstream>

namespace trustboot::sim {

const char* disposition_name(Disposition d) {
    switch (d) {
        case Disposition::DELIVERED: return "DELIVERED";
        case Disposition::DROPPED: return "DROPPED";
        case Disposition::INJECTED: return "INJECTED";
        case Disposition::REPLAYED: return "REPLAYED";
    }
    return "?";
}

std::string BusEvent::to_line() const {
    std::ostringstream os;
    os << tick << '\t' << wire::to_string(from) << '\t' << wire::to_string(to) << '\t'
       << disposition_name(disposition) << '\t' << to_hex(bytes);
    return os.str();
}

void Bus::register_principal(const PrincipalId& id) { principals_.insert(id); }

bool Bus::registered(const PrincipalId& id) const { return principals_.count(id) > 0; }

void Bus::add_drop_rule(DropRule rule) { drops_.push_back(std::move(rule)); }

bool Bus::should_drop(const PrincipalId& from, const PrincipalId& to, uint8_t tag) {
    for (auto& rule : drops_) {
        if (rule.remaining == 0) continue;
        if (rule.from && *rule.from != from) continue;
        if (rule.to && *rule.to != to) continue;
        if (rule.tag && *rule.tag != tag) continue;
        if (rule.remaining > 0) --rule.remaining;
        return true;
    }
    return false;
}

Disposition Bus::append(BusEvent ev) {
    ev.tick = ++tick_;
    Disposition d = ev.disposition;
    if (d != Disposition::DROPPED)
        inboxes_[ev.to].push_back({ev.from, ev.bytes, d});
    events_.push_back(std::move(ev));
    return d;
}

Result<Disposition> Bus::send(const PrincipalId& from, const PrincipalId& to,
                              const wire::Packet& pkt, dy::TermPtr term) {
    if (!registered(from)) return {Err::UnknownPrincipal, wire::to_string(from)};
    if (!registered(to)) return {Err::UnknownPrincipal, wire::to_string(to)};

    BusEvent ev;
    ev.from = from;
    ev.to = to;
    ev.bytes = wire::encode(pkt);
    ev.term = std::move(term);
    ev.disposition = should_drop(from, to, wire::tag_of(pkt)) ? Disposition::DROPPED
                                                              : Disposition::DELIVERED;
    return append(std::move(ev));
}

Result<Disposition> Bus::replay(size_t event_index, const PrincipalId& to) {
    if (event_index >= events_.size())
        return {Err::IndexOutOfRange,
                "event " + std::to_string(event_index) + " of " +
                    std::to_string(events_.size())};
    if (!registered(to)) return {Err::UnknownPrincipal, wire::to_string(to)};

    const BusEvent& orig = events_[event_index];
    BusEvent ev;
    ev.from = orig.from;  // replays keep the original claimed sender
    ev.to = to;
    ev.bytes = orig.bytes;
    ev.term = orig.term;
    ev.disposition = Disposition::REPLAYED;
    return append(std::move(ev));
}

Result<Disposition> Bus::inject(const PrincipalId& to, Bytes bytes) {
    if (!registered(to)) return {Err::UnknownPrincipal, wire::to_string(to)};

    BusEvent ev;
    ev.from = adversary_id();
    ev.to = to;
    ev.bytes = std::move(bytes);
    ev.disposition = Disposition::INJECTED;
    return append(std::move(ev));
}

std::optional<Delivery> Bus::fetch(const PrincipalId& to) {
    auto it = inboxes_.find(to);
    if (it == inboxes_.end() || it->second.empty()) return std::nullopt;
    Delivery d = std::move(it->second.front());
    it->second.pop_front();
    return d;
}

std::vector<Bytes> Bus::observed_bytes() const {
    std::vector<Bytes> out;
    for (const auto& ev : events_)
        if (ev.disposition != Disposition::DROPPED) out.push_back(ev.bytes);
    return out;
}

std::vector<dy::TermPtr> Bus::terms() const {
    std::vector<dy::TermPtr> out;
    for (const auto& ev : events_)
        if (ev.term) out.push_back(ev.term);
    return out;
}

std::string Bus::render_transcript() const {
    std::string out;
    for (const auto& ev : events_) {
        out += ev.to_line();
        out += '\n';
    }
    return out;
}

}  // namespace trustboot::sim
