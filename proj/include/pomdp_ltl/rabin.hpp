#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pomdp_ltl/common.hpp"

namespace pomdp_ltl::rabin {

/// A letter is a subset of the atomic propositions, encoded as a bitmask over
/// the automaton's ordered AP set.
using Letter = std::uint32_t;

struct UnknownState : DomainError {
    using DomainError::DomainError;
};
struct UnknownLetter : DomainError {
    using DomainError::DomainError;
};
struct UnknownName : DomainError {
    using DomainError::DomainError;
};

struct RabinPair {
    std::vector<int> avoid;
    std::vector<int> repeat;
};

/// Deterministic Rabin automaton over the alphabet 2^atomic_props.
struct Dra {
    std::vector<std::string> states;
    std::vector<std::string> atomic_props;
    // delta[q][letter]; size |Q| x 2^|AP|
    std::vector<std::vector<int>> delta;
    int initial = 0;
    std::vector<RabinPair> pairs;

    int n_states() const { return static_cast<int>(states.size()); }
    int n_letters() const { return 1 << atomic_props.size(); }
    int state_index(const std::string& name) const;
};

/// Structural check: delta total, indices in range, |pairs| >= 1.
std::vector<std::string> validate_dra(const Dra& dra);

int dra_step(const Dra& dra, int q, Letter letter);

/// Rabin acceptance of the ultimately periodic word prefix . cycle^omega:
/// the states visited infinitely often are those on the eventual cycle of
/// the (deterministic) run.
bool accepts_lasso(const Dra& dra, const std::vector<Letter>& prefix,
                   const std::vector<Letter>& cycle);

/// Hand-built automata for the two case-study objectives over AP = {a,b,c}:
///   "case1": eventually-always b, never c.
///   "case2": infinitely often a, infinitely often b, never c.
Dra builtin_dra(const std::string& name);

Dra parse_dra(std::istream& in);
Dra parse_dra_file(const std::string& path);
std::string serialize_dra(const Dra& dra);

}  // namespace pomdp_ltl::rabin
