#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pomdp_ltl/bpi.hpp"
#include "pomdp_ltl/controller.hpp"
#include "pomdp_ltl/model.hpp"
#include "pomdp_ltl/product.hpp"
#include "pomdp_ltl/rabin.hpp"

namespace pomdp_ltl::harness {

struct InvalidSpec : DomainError {
    using DomainError::DomainError;
};

/// M x N grid, cell i = x + M*y. Movement actions move with probability
/// p_fwd, slip laterally with p_lat each, and any wall-blocked mass stays
/// put; Stop is deterministic. Observations put obs_true on the actual cell
/// and obs_neighbor on each existing 4-neighbor, renormalized.
struct GridWorldSpec {
    int m = 7;
    int n = 1;
    double p_fwd = 0.8;
    double p_lat = 0.1;
    double obs_true = 0.6;
    double obs_neighbor = 0.1;
    int start_cell = 1;
};

model::LabeledPomdp build_gridworld(const GridWorldSpec& spec);

struct SimTrace {
    std::vector<int> states;        // s_0 .. s_H
    std::vector<int> observations;  // o_0 .. o_{H-1}
    std::vector<int> istates;       // I-state before each step
    std::vector<int> actions;       // a_0 .. a_{H-1}
    std::vector<int> dra_states;    // q_0 .. q_H, driven by source labels
    bool hit_bad = false;
    bool reached_goal = false;  // by the deadline, without touching bad first
};

struct SimConfig {
    int horizon = 200;
    int n_traces = 10000;
    std::uint64_t seed = 1;
    int goal_cell = 6;
    int bad_cell = 3;
    int goal_deadline = 20;
    std::vector<std::vector<int>> prefixes;  // model-state prefixes to count
};

struct SimStats {
    int n_traces = 0;
    double reach_goal = 0.0;        // fraction with reached_goal
    double hit_bad = 0.0;           // fraction ever visiting the bad cell
    double repeat_tail_freq = 0.0;  // mean Repeat-state frequency, second half
    std::vector<double> prefix_freq;
};

/// Closed-loop Monte Carlo execution: sample observation, draw the joint
/// (next I-state, action) from the controller, step the model, and co-run
/// the automaton on the emitted source labels. Deterministic per seed.
SimStats simulate(const model::LabeledPomdp& m, const rabin::Dra& dra,
                  const controller::Sfsc& c, const SimConfig& cfg,
                  std::vector<SimTrace>* traces = nullptr);

struct CaseStudyConfig {
    int id = 1;
    int rows = -1;  // grid rows; default 2 for case 1, 3 for case 2
    GridWorldSpec grid;
    bpi::BpiConfig bpi;
    SimConfig sim;
    int series_traces = 2000;  // per-iterate simulation budget for the series
};

struct CaseStudyResult {
    model::LabeledPomdp model;
    rabin::Dra dra;
    product::ProductPomdp product;
    controller::Sfsc seed;
    bpi::BpiReport report;
    SimStats seed_stats;
    SimStats final_stats;
    // iteration, istates, steady, value, residual, added, reach_goal,
    // repeat_freq (analytic long-run Repeat frequency of the iterate)
    std::string series_csv;
    std::vector<std::pair<int, double>> repeat_freq_by_steady;
};

/// Benchmark seed for the first objective: a transient I-state exploring
/// uniformly, a steady Stop I-state, and a deterministic hand-over when the
/// goal cell is observed.
controller::Sfsc case1_seed(const product::ProductPomdp& p, int goal_obs);

CaseStudyResult run_case_study(const CaseStudyConfig& cfg);

}  // namespace pomdp_ltl::harness
