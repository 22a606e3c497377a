#pragma once

#include <string>
#include <vector>

#include "pomdp_ltl/common.hpp"
#include "pomdp_ltl/model.hpp"
#include "pomdp_ltl/rabin.hpp"

namespace pomdp_ltl::product {

struct AlphabetMismatch : DomainError {
    using DomainError::DomainError;
};
struct EmptyRepeat : DomainError {
    using DomainError::DomainError;
};
struct EmptySteadyPartition : DomainError {
    using DomainError::DomainError;
};

/// Synchronized POMDP x DRA. The automaton advances on the label of the
/// SOURCE model state: T(<s_j,q_l> | <s_i,q_k>, a) = T(s_j|s_i,a) iff
/// q_l = delta(q_k, h(s_i)). States are ordered model-state major; pruning
/// (optional) drops states unreachable from the support of the initial
/// distribution and renumbers.
struct ProductPomdp {
    std::vector<std::string> actions;
    std::vector<std::string> observations;
    std::vector<std::string> atomic_props;
    std::vector<std::string> state_names;

    int n_model = 0;
    int n_dra = 0;
    std::vector<int> model_of;  // per product state
    std::vector<int> dra_of;

    std::vector<Mat> transition;  // transition[a](i, j)
    Mat observation_fn;           // (i, o)
    Vec initial;

    struct RabinPair {
        std::vector<char> avoid;   // indicator over product states
        std::vector<char> repeat;
    };
    std::vector<RabinPair> pairs;
    int rabin_index = 0;

    int n_states() const { return static_cast<int>(state_names.size()); }
    int n_actions() const { return static_cast<int>(actions.size()); }
    int n_observations() const { return static_cast<int>(observations.size()); }
};

ProductPomdp build_product(const model::LabeledPomdp& m, const rabin::Dra& dra,
                           bool prune = false);

/// Transition family in which every state of the selected pair's Avoid set
/// is a sink (self-loop with probability 1 under every action).
std::vector<Mat> modified_transition(const ProductPomdp& p);

/// Reward data for the synthesis criterion: repeat/avoid indicators over
/// product states and the steady-partition indicator over I-states.
struct LtlRewards {
    Vec repeat_reward;   // over product states
    Vec avoid_reward;    // over product states
    Vec istate_reward;   // over I-states (indicator of the steady partition)
    double discount = 0.95;
};

LtlRewards make_ltl_rewards(const ProductPomdp& p, const std::vector<char>& steady,
                            double discount);

/// Uniform distribution over (s in Repeat, g steady) pairs, as a vector over
/// the global chain states indexed s * |G| + g.
Vec steady_state_seed(const ProductPomdp& p, const std::vector<char>& steady);

/// Restriction of the seed to a fixed I-state g, renormalized over the
/// Repeat set; a vector over product states.
Vec steady_seed_slice(const ProductPomdp& p, const std::vector<char>& steady, int g);

std::string serialize_product(const ProductPomdp& p);

}  // namespace pomdp_ltl::product
