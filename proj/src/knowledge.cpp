#include "trustboot/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace trustboot::dy {

namespace {

size_t hash_mix(size_t seed, size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

size_t hash_of(Term::Kind kind, const std::string& label, const TermPtr& l,
               const TermPtr& r, uint64_t k) {
    size_t h = hash_mix(0x51ab5e, static_cast<size_t>(kind));
    h = hash_mix(h, std::hash<std::string>{}(label));
    if (l) h = hash_mix(h, l->hash());
    if (r) h = hash_mix(h, r->hash());
    return hash_mix(h, static_cast<size_t>(k));
}

}  // namespace

Term::Term(Kind kind, std::string label, TermPtr left, TermPtr right, uint64_t k)
    : kind_(kind),
      label_(std::move(label)),
      left_(std::move(left)),
      right_(std::move(right)),
      inc_k_(k) {
    if (left_) depth_ = std::max(depth_, left_->depth() + 1);
    if (right_) depth_ = std::max(depth_, right_->depth() + 1);
    hash_ = hash_of(kind_, label_, left_, right_, inc_k_);
}

TermPtr Term::atom(std::string label) {
    return TermPtr(new Term(Kind::Atom, std::move(label), nullptr, nullptr, 0));
}

TermPtr Term::pair(TermPtr left, TermPtr right) {
    return TermPtr(new Term(Kind::Pair, {}, std::move(left), std::move(right), 0));
}

TermPtr Term::tuple(std::vector<TermPtr> parts) {
    if (parts.empty()) return atom("unit");
    TermPtr t = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) t = pair(parts[i], t);
    return t;
}

TermPtr Term::sym_enc(TermPtr key, TermPtr body) {
    return TermPtr(new Term(Kind::SymEnc, {}, std::move(key), std::move(body), 0));
}

TermPtr Term::pk_enc(std::string owner, TermPtr body) {
    return TermPtr(new Term(Kind::PkEnc, std::move(owner), std::move(body), nullptr, 0));
}

TermPtr Term::sig(std::string owner, TermPtr body) {
    return TermPtr(new Term(Kind::Sig, std::move(owner), std::move(body), nullptr, 0));
}

TermPtr Term::inc(TermPtr body, uint64_t k) {
    return TermPtr(new Term(Kind::Inc, {}, std::move(body), nullptr, k));
}

bool Term::equals(const Term& o) const {
    if (this == &o) return true;
    if (kind_ != o.kind_ || hash_ != o.hash_ || inc_k_ != o.inc_k_ || label_ != o.label_)
        return false;
    if (static_cast<bool>(left_) != static_cast<bool>(o.left_)) return false;
    if (static_cast<bool>(right_) != static_cast<bool>(o.right_)) return false;
    if (left_ && !left_->equals(*o.left_)) return false;
    if (right_ && !right_->equals(*o.right_)) return false;
    return true;
}

std::string Term::to_string() const {
    switch (kind_) {
        case Kind::Atom:
            return label_;
        case Kind::Pair:
            return "(pair " + left_->to_string() + " " + right_->to_string() + ")";
        case Kind::SymEnc:
            return "(senc " + left_->to_string() + " " + right_->to_string() + ")";
        case Kind::PkEnc:
            return "(penc " + label_ + " " + left_->to_string() + ")";
        case Kind::Sig:
            return "(sig " + label_ + " " + left_->to_string() + ")";
        case Kind::Inc:
            return "(inc " + left_->to_string() + " " + std::to_string(inc_k_) + ")";
    }
    return "?";
}

std::string pk_atom(const std::string& owner) { return "pk:" + owner; }
std::string sk_atom(const std::string& owner) { return "sk:" + owner; }

// ---- parser ---------------------------------------------------------------

namespace {

struct Parser {
    std::string_view s;
    size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }

    static bool sym_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_' ||
               c == '-' || c == '.' || c == '/';
    }

    Result<std::string> symbol() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && sym_char(s[pos])) ++pos;
        if (pos == start)
            return {Err::MalformedPacket, "expected symbol at offset " + std::to_string(pos)};
        return std::string(s.substr(start, pos - start));
    }

    Result<TermPtr> term() {
        skip_ws();
        if (pos >= s.size()) return {Err::MalformedPacket, "unexpected end of term"};
        if (s[pos] != '(') {
            auto sym = symbol();
            if (!sym.ok()) return sym.error();
            return Term::atom(sym.take());
        }
        ++pos;  // '('
        auto head = symbol();
        if (!head.ok()) return head.error();
        const std::string& h = head.value();
        TermPtr out;
        if (h == "pair" || h == "senc") {
            auto a = term();
            if (!a.ok()) return a.error();
            auto b = term();
            if (!b.ok()) return b.error();
            out = h == "pair" ? Term::pair(a.take(), b.take())
                              : Term::sym_enc(a.take(), b.take());
        } else if (h == "penc" || h == "sig") {
            auto owner = symbol();
            if (!owner.ok()) return owner.error();
            auto body = term();
            if (!body.ok()) return body.error();
            out = h == "penc" ? Term::pk_enc(owner.take(), body.take())
                              : Term::sig(owner.take(), body.take());
        } else if (h == "inc") {
            auto body = term();
            if (!body.ok()) return body.error();
            auto num = symbol();
            if (!num.ok()) return num.error();
            uint64_t k = 0;
            auto [p, ec] = std::from_chars(num.value().data(),
                                           num.value().data() + num.value().size(), k);
            if (ec != std::errc{} || p != num.value().data() + num.value().size())
                return {Err::MalformedPacket, "bad increment count '" + num.value() + "'"};
            out = Term::inc(body.take(), k);
        } else {
            return {Err::MalformedPacket, "unknown term head '" + h + "'"};
        }
        skip_ws();
        if (pos >= s.size() || s[pos] != ')')
            return {Err::MalformedPacket, "expected ')' at offset " + std::to_string(pos)};
        ++pos;
        return out;
    }
};

}  // namespace

Result<TermPtr> parse_term(std::string_view text) {
    Parser p{text};
    auto t = p.term();
    if (!t.ok()) return t;
    if (!p.at_end())
        return {Err::MalformedPacket, "trailing characters after term at offset " +
                                          std::to_string(p.pos)};
    return t;
}

// ---- derivation steps -----------------------------------------------------

std::string DerivationStep::to_string() const {
    std::ostringstream os;
    os << rule << ":";
    for (const auto& p : premises) os << " [" << p->to_string() << "]";
    os << " => " << result->to_string();
    return os.str();
}

// ---- closure --------------------------------------------------------------

bool KnowledgeSet::add(TermPtr t, DerivationStep step) {
    auto [it, fresh] = set_.insert(t);
    if (!fresh) return false;
    order_.push_back(t);
    step.result = t;
    prov_.emplace(std::move(t), std::move(step));
    return true;
}

KnowledgeSet KnowledgeSet::close(const std::vector<TermPtr>& initial, int compose_depth_cap) {
    KnowledgeSet ks;
    ks.depth_cap_ = compose_depth_cap;
    for (const auto& t : initial) ks.add(t, {"assume", {}, nullptr});

    // Saturate under decomposition. New terms are appended to order_ and
    // picked up by the sweep; the outer loop re-scans because a key learned
    // late can unlock a ciphertext processed earlier.
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < ks.order_.size(); ++i) {
            TermPtr t = ks.order_[i];
            switch (t->kind()) {
                case Term::Kind::Pair:
                    changed |= ks.add(t->left(), {"proj-1", {t}, nullptr});
                    changed |= ks.add(t->right(), {"proj-2", {t}, nullptr});
                    break;
                case Term::Kind::Sig:
                    // Signatures are not confidentiality devices: the signed
                    // body is recoverable by anyone holding the signature.
                    changed |= ks.add(t->left(), {"sig-body", {t}, nullptr});
                    break;
                case Term::Kind::Inc:
                    changed |= ks.add(t->left(), {"inc-invert", {t}, nullptr});
                    break;
                case Term::Kind::SymEnc:
                    if (ks.synthesizable(t->left(), ks.depth_cap_))
                        changed |= ks.add(t->right(), {"sym-dec", {t, t->left()}, nullptr});
                    break;
                case Term::Kind::PkEnc: {
                    auto sk = Term::atom(sk_atom(t->label()));
                    if (ks.set_.count(sk))
                        changed |= ks.add(t->left(), {"pk-dec", {t, sk}, nullptr});
                    break;
                }
                case Term::Kind::Atom:
                    break;
            }
        }
    }
    return ks;
}

bool KnowledgeSet::contains(const TermPtr& t) const { return set_.count(t) > 0; }

// Composition side: can the adversary build t from the saturated set?
// Structural recursion on the target, so this terminates without a
// composition frontier. The budget counts cryptographic nesting only
// (pairing and increments are free), matching the cap's definition as
// the deepest encryption nesting in the protocol plus one.
bool KnowledgeSet::synthesizable(const TermPtr& t, int budget) const {
    if (set_.count(t)) return true;
    switch (t->kind()) {
        case Term::Kind::Atom:
            return false;  // atoms are never invented
        case Term::Kind::Pair:
            return synthesizable(t->left(), budget) && synthesizable(t->right(), budget);
        case Term::Kind::SymEnc:
            return budget > 0 && synthesizable(t->left(), budget - 1) &&
                   synthesizable(t->right(), budget - 1);
        case Term::Kind::PkEnc:
            return budget > 0 && set_.count(Term::atom(pk_atom(t->label()))) > 0 &&
                   synthesizable(t->left(), budget - 1);
        case Term::Kind::Sig:
            // Forging requires the signing key.
            return budget > 0 && set_.count(Term::atom(sk_atom(t->label()))) > 0 &&
                   synthesizable(t->left(), budget - 1);
        case Term::Kind::Inc:
            return synthesizable(t->left(), budget);
    }
    return false;
}

bool KnowledgeSet::derivable(const TermPtr& t) const {
    return synthesizable(t, depth_cap_);
}

bool KnowledgeSet::derivable_atom(const std::string& label) const {
    return derivable(Term::atom(label));
}

bool KnowledgeSet::collect_derivation(const TermPtr& t, TermSet& visited,
                                      std::vector<DerivationStep>& out, int budget) const {
    if (visited.count(t)) return true;
    if (auto it = prov_.find(t); it != prov_.end()) {
        for (const auto& prem : it->second.premises)
            if (!collect_derivation(prem, visited, out, budget)) return false;
        visited.insert(t);
        out.push_back(it->second);
        return true;
    }
    // Not in the saturated set: reconstruct a synthesis step.
    const char* rule = nullptr;
    std::vector<TermPtr> premises;
    int child_budget = budget;
    switch (t->kind()) {
        case Term::Kind::Atom:
            return false;
        case Term::Kind::Pair:
            rule = "pair-compose";
            premises = {t->left(), t->right()};
            break;
        case Term::Kind::SymEnc:
            if (budget <= 0) return false;
            rule = "sym-enc";
            premises = {t->left(), t->right()};
            child_budget = budget - 1;
            break;
        case Term::Kind::PkEnc:
            if (budget <= 0) return false;
            rule = "pk-enc";
            premises = {Term::atom(pk_atom(t->label())), t->left()};
            child_budget = budget - 1;
            break;
        case Term::Kind::Sig:
            if (budget <= 0) return false;
            rule = "sign";
            premises = {Term::atom(sk_atom(t->label())), t->left()};
            child_budget = budget - 1;
            break;
        case Term::Kind::Inc:
            rule = "inc-apply";
            premises = {t->left()};
            break;
    }
    for (const auto& prem : premises)
        if (!collect_derivation(prem, visited, out, child_budget)) return false;
    visited.insert(t);
    out.push_back({rule, std::move(premises), t});
    return true;
}

std::optional<std::vector<DerivationStep>> KnowledgeSet::derivation(const TermPtr& t) const {
    if (!derivable(t)) return std::nullopt;
    TermSet visited;
    std::vector<DerivationStep> out;
    if (!collect_derivation(t, visited, out, depth_cap_)) return std::nullopt;
    return out;
}

std::vector<SecrecyResult> check_secrecy(const std::vector<TermPtr>& transcript_terms,
                                         const std::vector<TermPtr>& initial_knowledge,
                                         const std::vector<std::string>& secret_atoms) {
    std::vector<TermPtr> all = initial_knowledge;
    all.insert(all.end(), transcript_terms.begin(), transcript_terms.end());
    KnowledgeSet ks = KnowledgeSet::close(all);

    std::vector<SecrecyResult> results;
    results.reserve(secret_atoms.size());
    for (const auto& name : secret_atoms) {
        SecrecyResult r;
        r.secret = name;
        auto target = Term::atom(name);
        r.derivable = ks.derivable(target);
        if (r.derivable) {
            if (auto path = ks.derivation(target)) r.path = std::move(*path);
        }
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace trustboot::dy
