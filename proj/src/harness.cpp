#include "pomdp_ltl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pomdp_ltl/chain.hpp"

namespace pomdp_ltl::harness {

namespace {

constexpr model::Letter kA = 1, kB = 2, kC = 4;

}  // namespace

model::LabeledPomdp build_gridworld(const GridWorldSpec& spec) {
    if (spec.m < 2 || spec.n < 1) throw InvalidSpec("grid must be at least 2 x 1");
    if (spec.p_fwd < 0 || spec.p_lat < 0 || spec.p_fwd + 2 * spec.p_lat > 1 + 1e-12)
        throw InvalidSpec("slip probabilities must be nonnegative with mass at most 1");
    if (spec.obs_true <= 0 || spec.obs_neighbor < 0)
        throw InvalidSpec("observation weights must be positive on the true cell");
    const int n_cells = spec.m * spec.n;
    if (spec.start_cell < 0 || spec.start_cell >= n_cells)
        throw InvalidSpec("start cell out of range");

    model::LabeledPomdp m;
    for (int i = 0; i < n_cells; ++i) {
        m.states.push_back("c" + std::to_string(i));
        m.observations.push_back("c" + std::to_string(i));
    }
    m.actions = {"Right", "Left", "Up", "Down", "Stop"};
    m.atomic_props = {"a", "b", "c"};

    auto cell = [&](int x, int y) { return x + spec.m * y; };
    auto inside = [&](int x, int y) {
        return x >= 0 && x < spec.m && y >= 0 && y < spec.n;
    };
    // Per movement action: intended direction and the two lateral slips.
    const int dir[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    m.transition.assign(5, Mat::Zero(n_cells, n_cells));
    for (int a = 0; a < 4; ++a) {
        const int lat[2][2] = {{dir[a][1], dir[a][0]}, {-dir[a][1], -dir[a][0]}};
        for (int y = 0; y < spec.n; ++y)
            for (int x = 0; x < spec.m; ++x) {
                const int s = cell(x, y);
                auto put = [&](int dx, int dy, double p) {
                    if (inside(x + dx, y + dy))
                        m.transition[a](s, cell(x + dx, y + dy)) += p;
                    else
                        m.transition[a](s, s) += p;  // wall: stay put
                };
                put(dir[a][0], dir[a][1], spec.p_fwd);
                put(lat[0][0], lat[0][1], spec.p_lat);
                put(lat[1][0], lat[1][1], spec.p_lat);
                m.transition[a](s, s) +=
                    std::max(0.0, 1.0 - spec.p_fwd - 2 * spec.p_lat);
                m.transition[a].row(s) /= m.transition[a].row(s).sum();
            }
    }
    m.transition[4] = Mat::Identity(n_cells, n_cells);

    m.observation_fn = Mat::Zero(n_cells, n_cells);
    for (int y = 0; y < spec.n; ++y)
        for (int x = 0; x < spec.m; ++x) {
            const int s = cell(x, y);
            m.observation_fn(s, s) = spec.obs_true;
            for (const auto& d : dir)
                if (inside(x + d[0], y + d[1]))
                    m.observation_fn(s, cell(x + d[0], y + d[1])) = spec.obs_neighbor;
            m.observation_fn.row(s) /= m.observation_fn.row(s).sum();
        }

    m.initial = Vec::Zero(n_cells);
    m.initial(spec.start_cell) = 1.0;
    m.labeling.assign(n_cells, 0);
    m.labeling[0] = kA;
    if (n_cells > 3) m.labeling[3] = kC;
    if (n_cells > 6) m.labeling[6] = kB;
    m.state_reward = Vec::Zero(n_cells);
    return m;
}

namespace {

struct TraceRng {
    std::mt19937_64 eng;

    explicit TraceRng(std::uint64_t seed) : eng(seed) {}

    double uniform() {
        return static_cast<double>(eng() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Index of the sampled entry of a (sub)stochastic row; the last positive
    // entry absorbs rounding slack.
    template <typename Row>
    int sample(const Row& row, int n) {
        const double u = uniform();
        double acc = 0.0;
        int last = 0;
        for (int i = 0; i < n; ++i) {
            const double p = row(i);
            if (p <= 0.0) continue;
            acc += p;
            last = i;
            if (u < acc) return i;
        }
        return last;
    }
};

}  // namespace

SimStats simulate(const model::LabeledPomdp& m, const rabin::Dra& dra,
                  const controller::Sfsc& c, const SimConfig& cfg,
                  std::vector<SimTrace>* traces) {
    const int ns = m.n_states(), no = m.n_observations(), na = m.n_actions();
    const int ng = c.n_istates;
    std::vector<char> repeat_q(dra.n_states(), 0);
    if (!dra.pairs.empty())
        for (int q : dra.pairs[0].repeat) repeat_q[q] = 1;

    SimStats stats;
    stats.n_traces = cfg.n_traces;
    stats.prefix_freq.assign(cfg.prefixes.size(), 0.0);
    double repeat_sum = 0.0;
    int reach_count = 0, bad_count = 0;
    const int tail_start = cfg.horizon / 2;

    for (int trace = 0; trace < cfg.n_traces; ++trace) {
        TraceRng rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (trace + 1));
        SimTrace tr;
        int s = rng.sample(m.initial, ns);
        int q = dra.initial;
        int g = c.initial_istate;
        tr.states.push_back(s);
        tr.dra_states.push_back(q);
        int tail_repeat = 0;
        bool bad_seen = s == cfg.bad_cell;
        bool goal_seen = !bad_seen && s == cfg.goal_cell;
        for (int t = 0; t < cfg.horizon; ++t) {
            const int o = rng.sample(m.observation_fn.row(s), no);
            const Mat& w = c.w(g, o);
            const int joint = rng.sample(
                [&](int i) { return w(i / na, i % na); }, ng * na);
            const int g2 = joint / na, a = joint % na;
            const int s2 = rng.sample(m.transition[a].row(s), ns);
            q = rabin::dra_step(dra, q, m.labeling[s]);
            tr.observations.push_back(o);
            tr.istates.push_back(g);
            tr.actions.push_back(a);
            tr.states.push_back(s2);
            tr.dra_states.push_back(q);
            s = s2;
            g = g2;
            if (s == cfg.bad_cell) bad_seen = true;
            if (!bad_seen && !goal_seen && s == cfg.goal_cell &&
                t + 1 <= cfg.goal_deadline)
                goal_seen = true;
            if (t + 1 >= tail_start && repeat_q[q]) ++tail_repeat;
        }
        tr.hit_bad = bad_seen;
        tr.reached_goal = goal_seen;
        if (bad_seen) ++bad_count;
        if (goal_seen) ++reach_count;
        repeat_sum += static_cast<double>(tail_repeat) /
                      std::max(1, cfg.horizon - tail_start + 1);
        for (size_t i = 0; i < cfg.prefixes.size(); ++i) {
            const auto& pre = cfg.prefixes[i];
            if (pre.size() <= tr.states.size() &&
                std::equal(pre.begin(), pre.end(), tr.states.begin()))
                stats.prefix_freq[i] += 1.0;
        }
        if (traces) traces->push_back(std::move(tr));
    }
    stats.reach_goal = static_cast<double>(reach_count) / cfg.n_traces;
    stats.hit_bad = static_cast<double>(bad_count) / cfg.n_traces;
    stats.repeat_tail_freq = repeat_sum / cfg.n_traces;
    for (double& f : stats.prefix_freq) f /= cfg.n_traces;
    return stats;
}

controller::Sfsc case1_seed(const product::ProductPomdp& p, int goal_obs) {
    const int na = p.n_actions(), no = p.n_observations();
    const int stop = static_cast<int>(
        std::find(p.actions.begin(), p.actions.end(), "Stop") - p.actions.begin());
    if (stop == na) throw InvalidSpec("case1 seed requires a Stop action");
    controller::Sfsc c;
    c.n_istates = 2;
    c.n_actions = na;
    c.n_observations = no;
    c.steady = {0, 1};
    c.initial_istate = 0;
    c.omega.assign(static_cast<size_t>(2) * no, Mat::Zero(2, na));
    for (int o = 0; o < no; ++o) {
        if (o == goal_obs)
            c.w(0, o)(1, stop) = 1.0;  // hand over and park
        else
            c.w(0, o).row(0).setConstant(1.0 / na);  // uniform exploration
        c.w(1, o)(1, stop) = 1.0;
    }
    return c;
}

namespace {

// Long-run fraction of time in the selected Repeat set under the closed
// loop, from the limiting matrix of the plain global chain.
double analytic_repeat_frequency(const product::ProductPomdp& p,
                                 const controller::Sfsc& c, int rabin_index) {
    chain::GlobalChain gc =
        chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    Mat pi = chain::limiting_matrix(gc.T);
    Vec indicator(gc.n());
    const auto& repeat = p.pairs.at(rabin_index).repeat;
    for (int i = 0; i < gc.n(); ++i)
        indicator(i) = repeat[i / gc.n_istates] ? 1.0 : 0.0;
    return gc.initial.dot(pi * indicator);
}

}  // namespace

CaseStudyResult run_case_study(const CaseStudyConfig& cfg) {
    if (cfg.id != 1 && cfg.id != 2) throw InvalidSpec("unknown case-study id");
    CaseStudyResult result;
    GridWorldSpec grid = cfg.grid;
    grid.n = cfg.rows > 0 ? cfg.rows : (cfg.id == 1 ? 2 : 3);
    result.model = build_gridworld(grid);
    result.dra = rabin::builtin_dra(cfg.id == 1 ? "case1" : "case2");
    result.product = product::build_product(result.model, result.dra, true);

    if (cfg.id == 1) {
        const int goal_obs = result.model.observation_index(
            "c" + std::to_string(cfg.sim.goal_cell));
        result.seed = case1_seed(result.product, goal_obs);
    } else {
        bpi::SeedResult seed = bpi::find_initial_controller(result.product, 1, 2, cfg.bpi);
        if (!seed.found) {
            std::string sizes;
            for (const auto& attempt : seed.attempts)
                sizes += " " + std::to_string(attempt.n_tr + attempt.n_ss);
            throw bpi::Infeasible("no feasible initial controller; sizes tried:" +
                                  sizes);
        }
        result.seed = seed.sfsc;
    }

    result.report = bpi::run_bpi(result.product, result.seed, cfg.bpi);
    result.seed_stats = simulate(result.model, result.dra, result.seed, cfg.sim);
    result.final_stats =
        simulate(result.model, result.dra, result.report.controller, cfg.sim);

    SimConfig series_sim = cfg.sim;
    series_sim.n_traces = cfg.series_traces;
    std::ostringstream os;
    os << "iteration,istates,steady,value,residual,added,reach_goal,repeat_freq\n";
    for (size_t i = 0; i < result.report.iterations.size(); ++i) {
        const auto& rec = result.report.iterations[i];
        const auto& it = result.report.iterates[i];
        SimStats st = simulate(result.model, result.dra, it, series_sim);
        const double freq =
            analytic_repeat_frequency(result.product, it, cfg.bpi.rabin_index);
        os << rec.iteration << ',' << rec.n_istates << ',' << rec.n_steady << ','
           << format_double(rec.value) << ',' << format_double(rec.residual) << ','
           << rec.added << ',' << format_double(st.reach_goal) << ','
           << format_double(freq) << '\n';
        if (result.repeat_freq_by_steady.empty() ||
            result.repeat_freq_by_steady.back().first != rec.n_steady)
            result.repeat_freq_by_steady.emplace_back(rec.n_steady, freq);
        else
            result.repeat_freq_by_steady.back().second = freq;
    }
    result.series_csv = os.str();
    return result;
}

}  // namespace pomdp_ltl::harness
