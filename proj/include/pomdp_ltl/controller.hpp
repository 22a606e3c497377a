#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pomdp_ltl/common.hpp"
#include "pomdp_ltl/product.hpp"

namespace pomdp_ltl::controller {

struct StructureViolation : DomainError {
    using DomainError::DomainError;
};

/// Stochastic finite-state controller. I-states are partitioned by the
/// `steady` flags; rows out of steady I-states never re-enter the transient
/// partition. `omega[g * n_observations + o](g2, a)` is the joint probability
/// of moving to I-state g2 while taking action a, after observing o in
/// I-state g. The initial I-state rule is the stored argmax result.
struct Sfsc {
    int n_istates = 0;
    int n_actions = 0;
    int n_observations = 0;
    std::vector<char> steady;
    std::vector<Mat> omega;
    int initial_istate = 0;

    Mat& w(int g, int o) { return omega[g * n_observations + o]; }
    const Mat& w(int g, int o) const { return omega[g * n_observations + o]; }

    int n_steady() const;
};

/// Uniform row over the allowed (g', a) support, respecting the structure
/// constraint for steady sources.
Sfsc make_uniform_sfsc(int n_istates, int n_actions, int n_observations,
                       const std::vector<char>& steady);

/// Stochasticity and structure checks; empty result iff valid.
std::vector<std::string> check_sfsc(const Sfsc& c, double tol = 1e-10);

/// The controller induced on the original POMDP shares all parameters with
/// the product-level controller; only the controlled plant changes.
Sfsc induce_controller(const Sfsc& product_sfsc);

enum class EvalMethod { direct, richardson };

/// Solves V = r + beta * T V on the plain global chain, where the reward at
/// (s, g) is repeat_reward(s) * istate_reward(g). Returns V indexed
/// s * |G| + g.
Vec evaluate_discounted(const product::ProductPomdp& p, const Sfsc& c,
                        const product::LtlRewards& rewards,
                        EvalMethod method = EvalMethod::direct, double tol = 1e-9);

/// Expectation of V at I-state g under a belief over product states.
double value_at_belief(const Vec& values, int n_istates, int g, const Vec& belief);

/// Argmax I-state for the belief; ties broken by lowest index.
int best_istate(const Vec& values, int n_istates, const Vec& belief);

Sfsc parse_sfsc(std::istream& in, const std::vector<std::string>& action_names,
                const std::vector<std::string>& observation_names);
std::string serialize_sfsc(const Sfsc& c, const std::vector<std::string>& action_names,
                           const std::vector<std::string>& observation_names);

}  // namespace pomdp_ltl::controller
