#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pomdp_ltl/chain.hpp"
#include "pomdp_ltl/controller.hpp"
#include "pomdp_ltl/lp.hpp"
#include "pomdp_ltl/product.hpp"

namespace pomdp_ltl::bpi {

struct Infeasible : DomainError {
    using DomainError::DomainError;
};

struct BpiConfig {
    int n_max = 15;
    int n_new = 3;
    double beta = 0.95;
    double eps_beta = 1e-9;
    double eps_feas = 1e-6;
    double eps_improve = 1e-7;
    double m1 = 1e3;  // lower magnitude bound for average-value variables
    double m2 = 1e3;  // upper bound
    int max_iterations = 30;
    int rabin_index = 0;
    // Above this many bilinear products the relaxed improvement program is
    // replaced by the improvement LP; exact re-verification still gates
    // every accepted change.
    long bilinear_max_products = 4000;
    double belief_merge_tol = 1e-9;
    double lp_tol = 1e-9;
};

/// Exact feasibility data for the current controller: the gain vector of the
/// steady-detecting chain under the avoid charge, and the residual against
/// the uniform distribution on the Repeat x steady states that are actually
/// reachable from the closed loop's initial distribution. An empty support
/// gives residual 0.
struct FeasibilityInfo {
    chain::GlobalChain ssd;
    Vec gain;          // over chain states; zero when there is no steady block
    Vec seed;          // uniform over reachable Repeat x steady states
    double residual = 0.0;
    bool vacuous = true;
};

FeasibilityInfo feasibility_info(const product::ProductPomdp& p,
                                 const controller::Sfsc& c, const BpiConfig& cfg);

struct ImproveOutcome {
    bool improved = false;
    double eps = 0.0;
    std::vector<Mat> new_rows;        // per observation, when improved
    std::vector<Vec> tangent_beliefs; // over product states, when tangent
};

/// Improvement LP for one I-state: maximizes the uniform value improvement
/// epsilon over the I-state's rows. `allowed` optionally masks (o, g', a)
/// entries (indexed o * |G| * |Act| + g' * |Act| + a) that must stay zero,
/// on top of the partition structure constraint.
ImproveOutcome improve_istate_lp(const product::ProductPomdp& p,
                                 const controller::Sfsc& c, const Vec& values, int g,
                                 const BpiConfig& cfg,
                                 const std::vector<char>* allowed = nullptr);

/// Improvement program with the Poisson/feasibility/structure blocks for
/// steady I-states, solved through the McCormick relaxation and verified
/// exactly before acceptance; falls back to the LP when the product count
/// exceeds the configured cap. Transient I-states reduce to the plain LP.
ImproveOutcome improve_istate_bilinear(const product::ProductPomdp& p,
                                       const controller::Sfsc& c, const Vec& values,
                                       int g, const BpiConfig& cfg);

/// 2 |S| |O| |G| |Act|: distinct products appearing in the two Poisson
/// blocks of the improvement program.
long bilinear_product_count(const product::ProductPomdp& p, const controller::Sfsc& c);

/// Candidate pruning for steady successors: each (g, a) is tried as a
/// phantom deterministic steady I-state appended to a copy of the
/// controller, and dropped iff the re-solved feasibility residual exceeds
/// eps_feas.
std::vector<std::pair<int, int>> prune_candidates(
    const product::ProductPomdp& p, const controller::Sfsc& c,
    const std::vector<std::pair<int, int>>& candidates, const BpiConfig& cfg);

struct AddResult {
    controller::Sfsc sfsc;
    int added = 0;
};

/// One-step lookahead escape from a local maximum: forwards each tangent
/// belief, applies the successor-constrained DP backup, and adds a
/// deterministic I-state per improvable forwarded belief, assigned to the
/// source I-state's partition.
AddResult add_istates(const product::ProductPomdp& p, const controller::Sfsc& c,
                      const Vec& values,
                      const std::vector<std::pair<int, Vec>>& tangent,
                      const BpiConfig& cfg);

struct SeedAttempt {
    int n_tr = 0;
    int n_ss = 0;
    double residual = 0.0;
    double objective = 0.0;  // max over steady g of iota' gain_repeat(., g)
    bool feasible = false;
};

struct SeedResult {
    bool found = false;
    controller::Sfsc sfsc;
    std::vector<SeedAttempt> attempts;
};

/// Search for a feasible controller of the requested size: the dual-Poisson
/// relaxed program on small instances, and a safety-game-guided
/// deterministic construction otherwise; every candidate is accepted only
/// after exact verification. Retries with a grown steady partition until
/// n_max is exhausted.
SeedResult find_initial_controller(const product::ProductPomdp& p, int n_tr, int n_ss,
                                   const BpiConfig& cfg);

struct IterationRecord {
    int iteration = 0;
    int n_istates = 0;
    int n_steady = 0;
    double value = 0.0;     // value of the initial belief
    double residual = 0.0;  // feasibility residual after the iteration
    std::vector<double> eps_per_istate;
    int added = 0;
};

struct BpiReport {
    std::vector<IterationRecord> iterations;
    std::vector<controller::Sfsc> iterates;  // controller after each iteration
    controller::Sfsc controller;
    double satisfaction = 0.0;
};

BpiReport run_bpi(const product::ProductPomdp& p, const controller::Sfsc& seed,
                  const BpiConfig& cfg);

/// CSV series: iteration, istates, steady, value, residual, added.
std::string report_csv(const BpiReport& report);

}  // namespace pomdp_ltl::bpi
