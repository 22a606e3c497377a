#pragma once

#include <string>
#include <vector>

#include "pomdp_ltl/common.hpp"
#include "pomdp_ltl/controller.hpp"
#include "pomdp_ltl/product.hpp"

namespace pomdp_ltl::chain {

struct ResidualTooLarge : NumericalError {
    using NumericalError::NumericalError;
};
struct SingularSystem : NumericalError {
    using NumericalError::NumericalError;
};

/// Finite Markov chain on (product state, I-state) pairs, product-state
/// major: index = s * |G| + g. The ssd kind makes the selected Avoid set a
/// sink for steady I-states and forbids steady-to-transient moves.
struct GlobalChain {
    enum class Kind { plain, ssd };
    Kind kind = Kind::plain;
    int n_product = 0;
    int n_istates = 0;
    Mat T;
    Vec initial;

    int n() const { return n_product * n_istates; }
    int idx(int s, int g) const { return s * n_istates + g; }
};

GlobalChain build_global_chain(const product::ProductPomdp& p,
                               const controller::Sfsc& c, GlobalChain::Kind kind);

struct ClassDecomposition {
    std::vector<std::vector<int>> classes;  // communicating classes
    std::vector<char> recurrent;            // per class
    std::vector<int> class_of;              // per state
};

/// Communicating classes = strongly connected components of the positive
/// transition digraph; a class is recurrent iff it has no outgoing edge.
ClassDecomposition decompose_classes(const Mat& T);

/// Limiting matrix, computed structurally: unique invariant measure per
/// recurrent class plus absorption probabilities from the transient states.
Mat limiting_matrix(const Mat& T);

struct PoissonSolution {
    Vec gain;      // g = limiting * charge
    Vec bias;      // h = deviation * charge
    Vec charge;
    Mat limiting;
    Mat fundamental;  // Z = (I - T + limiting)^-1
    Mat deviation;    // H = Z (I - limiting)
};

/// Solves the two-part Poisson system; both parts are verified to 1e-8
/// before returning.
PoissonSolution poisson_solve(const Mat& T, const Vec& charge);

/// initial' * gain for the avoid charge on an ssd chain: the probability of
/// ever visiting Avoid x steady states from `initial`.
double absorption_probability(const GlobalChain& ssd, const Vec& initial,
                              const Vec& avoid_charge);

struct FeasibleSetsReport {
    ClassDecomposition decomposition;
    std::vector<char> feasible;  // per class
    Vec class_reach;             // Pr[path is absorbed into class], per class
    double satisfaction = 0.0;   // sum of reach over feasible classes
};

/// Flags each recurrent class whose projection meets some pair's Repeat set
/// while missing that pair's Avoid set; the satisfaction probability is the
/// mass absorbed into flagged classes from the chain's initial distribution.
FeasibleSetsReport phi_feasible_sets(const GlobalChain& plain,
                                     const product::ProductPomdp& p);

/// Support closure of `initial` under positive transitions of T.
std::vector<char> reachable_states(const Mat& T, const Vec& initial);

}  // namespace pomdp_ltl::chain
