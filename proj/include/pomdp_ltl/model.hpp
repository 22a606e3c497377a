#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pomdp_ltl/common.hpp"

namespace pomdp_ltl::model {

/// A truth assignment to the atomic propositions, as a bitmask over the
/// ordered AP set of the owning model/automaton.
using Letter = std::uint32_t;

struct ZeroLikelihood : DomainError {
    using DomainError::DomainError;
};

/// Finite labeled POMDP. Immutable after construction; all operations on it
/// are pure functions.
struct LabeledPomdp {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<std::string> observations;
    std::vector<std::string> atomic_props;

    // transition[a](i, j) = T(s_j | s_i, a)
    std::vector<Mat> transition;
    // observation_fn(i, o) = O(o | s_i)
    Mat observation_fn;
    Vec initial;
    // labeling[i] = h(s_i) as an AP bitmask
    std::vector<Letter> labeling;
    // Per-state rewards are accepted in the file format but unused by
    // synthesis; the LTL reward schemes are constructed downstream.
    Vec state_reward;

    int n_states() const { return static_cast<int>(states.size()); }
    int n_actions() const { return static_cast<int>(actions.size()); }
    int n_observations() const { return static_cast<int>(observations.size()); }

    int state_index(const std::string& name) const;
    int action_index(const std::string& name) const;
    int observation_index(const std::string& name) const;
};

struct Belief {
    Vec p;

    double operator[](int i) const { return p(i); }
    int size() const { return static_cast<int>(p.size()); }
};

struct Violation {
    std::string where;
    double deviation = 0.0;
    std::string message;
};

/// Checks the stochasticity and labeling invariants. Empty result iff the
/// model is valid; each entry names the offending row and its deviation.
std::vector<Violation> validate_pomdp(const LabeledPomdp& m, double tol = 1e-12);

/// b_0(s) proportional to iota_init(s) * O(o0 | s).
Belief belief_init(const LabeledPomdp& m, int o0);

/// b_t(s) proportional to O(o | s) * sum_{s'} T(s | s', a) b_prev(s').
Belief belief_update(const LabeledPomdp& m, const Belief& b_prev, int action, int obs);

LabeledPomdp parse_pomdp(std::istream& in);
LabeledPomdp parse_pomdp_file(const std::string& path);
std::string serialize_pomdp(const LabeledPomdp& m);

}  // namespace pomdp_ltl::model
