#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trustboot/result.hpp"

namespace trustboot::dy {

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Symbolic message term under the perfect-cryptography abstraction.
// Every protocol packet has a lossless lifting into this shape; the
// simulator tags each ciphertext it sends with the corresponding term.
class Term {
public:
    enum class Kind { Atom, Pair, SymEnc, PkEnc, Sig, Inc };

    static TermPtr atom(std::string label);
    static TermPtr pair(TermPtr left, TermPtr right);
    // Right-nested pairs: tuple(a,b,c) = pair(a, pair(b, c)).
    static TermPtr tuple(std::vector<TermPtr> parts);
    static TermPtr sym_enc(TermPtr key, TermPtr body);
    static TermPtr pk_enc(std::string owner, TermPtr body);
    static TermPtr sig(std::string owner, TermPtr body);
    static TermPtr inc(TermPtr body, uint64_t k);

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }  // Atom label / PkEnc, Sig owner
    const TermPtr& left() const { return left_; }        // Pair left / SymEnc key / unary body
    const TermPtr& right() const { return right_; }      // Pair right / SymEnc body
    uint64_t inc_k() const { return inc_k_; }
    int depth() const { return depth_; }
    size_t hash() const { return hash_; }

    bool equals(const Term& other) const;
    std::string to_string() const;

private:
    Term(Kind kind, std::string label, TermPtr left, TermPtr right, uint64_t k);

    Kind kind_ = Kind::Atom;
    std::string label_;
    TermPtr left_, right_;
    uint64_t inc_k_ = 0;
    int depth_ = 1;
    size_t hash_ = 0;
};

// Parses the textual form produced by Term::to_string:
//   atom | (pair T T) | (senc T T) | (penc owner T) | (sig owner T) | (inc T k)
Result<TermPtr> parse_term(std::string_view text);

// Atom naming conventions for key material. Knowing sk_atom(X) opens
// PkEnc(X, ...) and forges Sig(X, ...); pk_atom(X) only constructs.
std::string pk_atom(const std::string& owner);
std::string sk_atom(const std::string& owner);

struct TermPtrHash {
    size_t operator()(const TermPtr& t) const { return t->hash(); }
};
struct TermPtrEq {
    bool operator()(const TermPtr& a, const TermPtr& b) const { return a->equals(*b); }
};
using TermSet = std::unordered_set<TermPtr, TermPtrHash, TermPtrEq>;

struct DerivationStep {
    std::string rule;
    std::vector<TermPtr> premises;
    TermPtr result;

    std::string to_string() const;
};

// Least fixpoint of the adversary deduction rules over a finite term set.
// close() saturates under decomposition (projection, decryption with a
// derivable key, signature-body extraction, increment inversion);
// derivable() additionally answers composition queries (pairing,
// encryption, increment application) structurally, which keeps the engine
// exact on these protocols without materialising the infinite composition
// space. Composition nesting is capped at the deepest packet shape plus
// one.
class KnowledgeSet {
public:
    static constexpr int kComposeDepthCap = 5;

    static KnowledgeSet close(const std::vector<TermPtr>& initial,
                              int compose_depth_cap = kComposeDepthCap);

    // Membership in the decomposition-saturated set.
    bool contains(const TermPtr& t) const;
    // Full Dolev-Yao derivability (decomposition set + synthesis).
    bool derivable(const TermPtr& t) const;
    bool derivable_atom(const std::string& label) const;

    // Rule sequence ending in `t`, replayable step by step; empty option
    // when t is not derivable.
    std::optional<std::vector<DerivationStep>> derivation(const TermPtr& t) const;

    size_t size() const { return order_.size(); }
    const std::vector<TermPtr>& terms() const { return order_; }

private:
    bool add(TermPtr t, DerivationStep step);
    bool synthesizable(const TermPtr& t, int budget) const;
    bool collect_derivation(const TermPtr& t, TermSet& visited,
                            std::vector<DerivationStep>& out, int budget) const;

    TermSet set_;
    std::vector<TermPtr> order_;  // insertion order, for deterministic output
    std::unordered_map<TermPtr, DerivationStep, TermPtrHash, TermPtrEq> prov_;
    int depth_cap_ = kComposeDepthCap;
};

struct SecrecyResult {
    std::string secret;
    bool derivable = false;
    std::vector<DerivationStep> path;  // empty unless derivable
};

// The secrecy check: a secret leaks iff its atom is in the closure of
// initial knowledge plus everything observed on the wire.
std::vector<SecrecyResult> check_secrecy(const std::vector<TermPtr>& transcript_terms,
                                         const std::vector<TermPtr>& initial_knowledge,
                                         const std::vector<std::string>& secret_atoms);

}  // namespace trustboot::dy
