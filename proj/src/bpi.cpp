#include "pomdp_ltl/bpi.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace pomdp_ltl::bpi {

namespace {

product::LtlRewards rewards_for(const product::ProductPomdp& p,
                                const controller::Sfsc& c, const BpiConfig& cfg) {
    return product::make_ltl_rewards(p, c.steady, cfg.beta);
}

// values(s * |G| + g) viewed as an |S| x |G| matrix.
Mat value_matrix(const Vec& values, int ns, int ng) {
    Mat v(ns, ng);
    for (int s = 0; s < ns; ++s)
        for (int g = 0; g < ng; ++g) v(s, g) = values(s * ng + g);
    return v;
}

// One-step expected next value: W_a(s, g2) = sum_s2 T_a(s, s2) V(s2, g2).
std::vector<Mat> next_value(const product::ProductPomdp& p, const Mat& vmat) {
    std::vector<Mat> w;
    w.reserve(p.n_actions());
    for (const Mat& t : p.transition) w.push_back(t * vmat);
    return w;
}

int mask_index(int o, int g2, int a, int ng, int na) { return (o * ng + g2) * na + a; }

// Clamps to [0, 1] and renormalizes each (g, o) slice to mass one.
void normalize_rows(controller::Sfsc& c) {
    for (Mat& w : c.omega) {
        w = w.cwiseMax(0.0).cwiseMin(1.0);
        const double sum = w.sum();
        if (sum > 0) w /= sum;
    }
}

controller::Sfsc with_row(const controller::Sfsc& c, int g,
                          const std::vector<Mat>& new_rows) {
    controller::Sfsc out = c;
    for (int o = 0; o < c.n_observations; ++o) out.w(g, o) = new_rows[o];
    normalize_rows(out);
    return out;
}

// Copy with one extra I-state whose rows are all zero; existing rows gain a
// zero successor entry.
controller::Sfsc grow_sfsc(const controller::Sfsc& c, bool steady_flag) {
    controller::Sfsc out;
    out.n_istates = c.n_istates + 1;
    out.n_actions = c.n_actions;
    out.n_observations = c.n_observations;
    out.steady = c.steady;
    out.steady.push_back(steady_flag ? 1 : 0);
    out.initial_istate = c.initial_istate;
    out.omega.assign(static_cast<size_t>(out.n_istates) * out.n_observations,
                     Mat::Zero(out.n_istates, out.n_actions));
    for (int g = 0; g < c.n_istates; ++g)
        for (int o = 0; o < c.n_observations; ++o)
            out.w(g, o).topRows(c.n_istates) = c.w(g, o);
    return out;
}

Vec tangent_fallback(const product::ProductPomdp& p) { return p.initial; }

// Belief from the duals of the per-state improvement rows: magnitudes,
// clamped and normalized; degenerate duals fall back to the initial
// distribution. Rows without an eps term (pinned states) are excluded.
Vec belief_from_duals(const product::ProductPomdp& p, const Vec& duals, int first_row,
                      const std::vector<char>* pinned = nullptr) {
    const int ns = p.n_states();
    Vec b(ns);
    for (int s = 0; s < ns; ++s) {
        const double d = duals(first_row + s);
        b(s) = std::isfinite(d) && !(pinned && (*pinned)[s]) ? std::abs(d) : 0.0;
    }
    const double sum = b.sum();
    if (sum <= 1e-12) return tangent_fallback(p);
    return b / sum;
}

// States whose point-mass DP backup over the usable successor set cannot
// exceed the current value. Rejecting-sink states (and any row already at
// its backup optimum) would pin the uniform eps at zero, so they get a
// plain non-degradation constraint instead of the eps term.
std::vector<char> pinned_states(const product::ProductPomdp& p,
                                const controller::Sfsc& c, const Vec& values, int g,
                                const product::LtlRewards& rewards,
                                const std::vector<Mat>& nv,
                                const std::vector<char>& usable, double beta) {
    const int ns = p.n_states(), ng = c.n_istates, no = p.n_observations(),
              na = p.n_actions();
    std::vector<char> pinned(ns, 0);
    for (int s = 0; s < ns; ++s) {
        double cap = rewards.repeat_reward(s) * rewards.istate_reward(g);
        for (int o = 0; o < no; ++o) {
            const double po = p.observation_fn(s, o);
            if (po == 0.0) continue;
            double best = -lp::kInf;
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a)
                    if (usable[mask_index(o, g2, a, ng, na)])
                        best = std::max(best, nv[a](s, g2));
            cap += beta * po * best;
        }
        if (cap <= values(s * ng + g) + 1e-10) pinned[s] = 1;
    }
    return pinned;
}

}  // namespace

FeasibilityInfo feasibility_info(const product::ProductPomdp& p,
                                 const controller::Sfsc& c, const BpiConfig& cfg) {
    FeasibilityInfo fi;
    fi.ssd = chain::build_global_chain(p, c, chain::GlobalChain::Kind::ssd);
    const int ns = p.n_states(), ng = c.n_istates, n = fi.ssd.n();
    fi.gain = Vec::Zero(n);
    fi.seed = Vec::Zero(n);
    if (c.n_steady() == 0) return fi;

    // The steady block is closed in the steady-detecting chain, so the gain
    // restricted to it solves on the block alone.
    std::vector<int> block;
    std::vector<int> block_of(n, -1);
    for (int s = 0; s < ns; ++s)
        for (int g = 0; g < ng; ++g)
            if (c.steady[g]) {
                block_of[fi.ssd.idx(s, g)] = static_cast<int>(block.size());
                block.push_back(fi.ssd.idx(s, g));
            }
    const int k = static_cast<int>(block.size());
    Mat tb(k, k);
    Vec charge(k);
    const auto& avoid = p.pairs.at(cfg.rabin_index).avoid;
    const auto& repeat = p.pairs.at(cfg.rabin_index).repeat;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) tb(i, j) = fi.ssd.T(block[i], block[j]);
        charge(i) = avoid[block[i] / ng] ? 1.0 : 0.0;
    }
    chain::PoissonSolution sol = chain::poisson_solve(tb, charge);
    for (int i = 0; i < k; ++i) fi.gain(block[i]) = sol.gain(i);

    std::vector<char> reach = chain::reachable_states(fi.ssd.T, fi.ssd.initial);
    std::vector<int> support;
    for (int i : block)
        if (reach[i] && repeat[i / ng]) support.push_back(i);
    if (support.empty()) return fi;
    fi.vacuous = false;
    for (int i : support) fi.seed(i) = 1.0 / static_cast<double>(support.size());
    fi.residual = fi.seed.dot(fi.gain);
    return fi;
}

ImproveOutcome improve_istate_lp(const product::ProductPomdp& p,
                                 const controller::Sfsc& c, const Vec& values, int g,
                                 const BpiConfig& cfg, const std::vector<char>* allowed) {
    const int ns = p.n_states(), ng = c.n_istates, no = p.n_observations(),
              na = p.n_actions();
    const product::LtlRewards rewards = rewards_for(p, c, cfg);
    const Mat vmat = value_matrix(values, ns, ng);
    const std::vector<Mat> nv = next_value(p, vmat);

    std::vector<char> usable(static_cast<size_t>(no) * ng * na, 0);
    for (int o = 0; o < no; ++o)
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a) {
                bool ok = !(c.steady[g] && !c.steady[g2]);
                if (ok && allowed && !(*allowed)[mask_index(o, g2, a, ng, na)])
                    // Keep the current support usable so the program stays
                    // feasible under any mask.
                    ok = c.w(g, o)(g2, a) > 0;
                usable[mask_index(o, g2, a, ng, na)] = ok;
            }
    const std::vector<char> pinned =
        pinned_states(p, c, values, g, rewards, nv, usable, cfg.beta);
    const bool any_improvable =
        std::find(pinned.begin(), pinned.end(), 0) != pinned.end();

    lp::LinearProgram prog;
    const int eps_var = prog.add_var("eps", -lp::kInf, any_improvable ? lp::kInf : 0.0);
    std::vector<int> wvar(static_cast<size_t>(no) * ng * na);
    for (int o = 0; o < no; ++o)
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                wvar[mask_index(o, g2, a, ng, na)] = prog.add_var(
                    "w", 0.0, usable[mask_index(o, g2, a, ng, na)] ? 1.0 : 0.0);

    // One row per product state: the improved row must dominate the current
    // value there by eps, or merely not degrade it where no usable row can
    // beat the backup (pinned states).
    for (int s = 0; s < ns; ++s) {
        lp::Terms terms;
        if (!pinned[s]) terms.emplace_back(eps_var, -1.0);
        for (int o = 0; o < no; ++o) {
            const double po = p.observation_fn(s, o);
            if (po == 0.0) continue;
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a) {
                    const double coeff = cfg.beta * po * nv[a](s, g2);
                    if (coeff != 0.0)
                        terms.emplace_back(wvar[mask_index(o, g2, a, ng, na)], coeff);
                }
        }
        const double r =
            rewards.repeat_reward(s) * rewards.istate_reward(g);
        prog.add_constraint(std::move(terms), '>', values(s * ng + g) - r);
    }
    for (int o = 0; o < no; ++o) {
        lp::Terms terms;
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                terms.emplace_back(wvar[mask_index(o, g2, a, ng, na)], 1.0);
        prog.add_constraint(std::move(terms), '=', 1.0);
    }
    prog.set_objective(true, {{eps_var, 1.0}});

    lp::LpResult res = lp::solve_lp(prog, cfg.lp_tol);
    ImproveOutcome out;
    if (res.status == lp::LpResult::Status::optimal && res.value > cfg.eps_improve) {
        out.improved = true;
        out.eps = res.value;
        out.new_rows.assign(no, Mat::Zero(ng, na));
        for (int o = 0; o < no; ++o)
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a)
                    out.new_rows[o](g2, a) = res.x(wvar[mask_index(o, g2, a, ng, na)]);
        return out;
    }
    out.eps = res.status == lp::LpResult::Status::optimal ? res.value : 0.0;
    if (res.status == lp::LpResult::Status::optimal)
        out.tangent_beliefs.push_back(belief_from_duals(p, res.duals, 0, &pinned));
    else
        out.tangent_beliefs.push_back(tangent_fallback(p));
    return out;
}

long bilinear_product_count(const product::ProductPomdp& p, const controller::Sfsc& c) {
    return 2L * p.n_states() * p.n_observations() * c.n_istates * p.n_actions();
}

namespace {

// Exact verification shared by every acceptance path: structure, residual.
bool verify_feasible(const product::ProductPomdp& p, const controller::Sfsc& c,
                     const BpiConfig& cfg, double* residual = nullptr) {
    if (!controller::check_sfsc(c).empty()) return false;
    try {
        FeasibilityInfo fi = feasibility_info(p, c, cfg);
        if (residual) *residual = fi.residual;
        return fi.residual <= cfg.eps_feas;
    } catch (const NumericalError&) {
        return false;
    }
}

}  // namespace

ImproveOutcome improve_istate_bilinear(const product::ProductPomdp& p,
                                       const controller::Sfsc& c, const Vec& values,
                                       int g, const BpiConfig& cfg) {
    if (!c.steady[g]) return improve_istate_lp(p, c, values, g, cfg);
    if (bilinear_product_count(p, c) > cfg.bilinear_max_products) {
        ImproveOutcome out = improve_istate_lp(p, c, values, g, cfg);
        if (out.improved && !verify_feasible(p, with_row(c, g, out.new_rows), cfg)) {
            out.improved = false;
            out.new_rows.clear();
            out.tangent_beliefs.push_back(tangent_fallback(p));
        }
        return out;
    }

    const int ns = p.n_states(), ng = c.n_istates, no = p.n_observations(),
              na = p.n_actions();
    const product::LtlRewards rewards = rewards_for(p, c, cfg);
    const Mat vmat = value_matrix(values, ns, ng);
    const std::vector<Mat> nv = next_value(p, vmat);
    FeasibilityInfo fi = feasibility_info(p, c, cfg);
    const std::vector<Mat> t_mod = product::modified_transition(p);
    const auto& avoid = p.pairs.at(cfg.rabin_index).avoid;

    std::vector<char> usable(static_cast<size_t>(no) * ng * na, 0);
    for (int o = 0; o < no; ++o)
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                usable[mask_index(o, g2, a, ng, na)] = c.steady[g2];
    const std::vector<char> pinned =
        pinned_states(p, c, values, g, rewards, nv, usable, cfg.beta);
    const bool any_improvable =
        std::find(pinned.begin(), pinned.end(), 0) != pinned.end();

    lp::BilinearProgram bp;
    lp::LinearProgram& prog = bp.lp;
    const int eps_var = prog.add_var("eps", -lp::kInf, any_improvable ? lp::kInf : 0.0);
    std::vector<int> wvar(static_cast<size_t>(no) * ng * na);
    for (int o = 0; o < no; ++o)
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                wvar[mask_index(o, g2, a, ng, na)] = prog.add_var(
                    "w", 0.0, usable[mask_index(o, g2, a, ng, na)] ? 1.0 : 0.0);
    // Average-reward value variables over the full global state space; the
    // transient-successor ones are referenced only through zero-bounded
    // policy entries.
    std::vector<int> gvar(static_cast<size_t>(ns) * ng), vvar(gvar.size());
    for (int s = 0; s < ns; ++s)
        for (int g2 = 0; g2 < ng; ++g2) {
            gvar[s * ng + g2] = prog.add_var("gain", 0.0, 1.0);
            vvar[s * ng + g2] = prog.add_var("bias", -cfg.m1, cfg.m2);
        }

    for (int s = 0; s < ns; ++s) {
        lp::Terms terms;
        if (!pinned[s]) terms.emplace_back(eps_var, -1.0);
        for (int o = 0; o < no; ++o) {
            const double po = p.observation_fn(s, o);
            if (po == 0.0) continue;
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a) {
                    const double coeff = cfg.beta * po * nv[a](s, g2);
                    if (coeff != 0.0)
                        terms.emplace_back(wvar[mask_index(o, g2, a, ng, na)], coeff);
                }
        }
        const double r = rewards.repeat_reward(s) * rewards.istate_reward(g);
        prog.add_constraint(std::move(terms), '>', values(s * ng + g) - r);
    }
    for (int o = 0; o < no; ++o) {
        lp::Terms terms;
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                terms.emplace_back(wvar[mask_index(o, g2, a, ng, na)], 1.0);
        prog.add_constraint(std::move(terms), '=', 1.0);
    }

    // Two Poisson blocks per steady global state. Rows of the I-state being
    // improved carry the policy bilinearly; the others use the current
    // steady-detecting chain.
    for (int s = 0; s < ns; ++s)
        for (int gr = 0; gr < ng; ++gr) {
            if (!c.steady[gr]) continue;
            lp::Terms ga{{gvar[s * ng + gr], 1.0}};
            lp::Terms gb{{gvar[s * ng + gr], 1.0}, {vvar[s * ng + gr], 1.0}};
            if (gr != g) {
                for (int s2 = 0; s2 < ns; ++s2)
                    for (int g2 = 0; g2 < ng; ++g2) {
                        const double t = fi.ssd.T(fi.ssd.idx(s, gr), fi.ssd.idx(s2, g2));
                        if (t != 0.0) {
                            ga.emplace_back(gvar[s2 * ng + g2], -t);
                            gb.emplace_back(vvar[s2 * ng + g2], -t);
                        }
                    }
            }
            const double rhs = avoid[s] ? 1.0 : 0.0;
            const int row_a = prog.add_constraint(std::move(ga), '=', 0.0);
            const int row_b = prog.add_constraint(std::move(gb), '=', rhs);
            if (gr == g)
                for (int o = 0; o < no; ++o) {
                    const double po = p.observation_fn(s, o);
                    for (int g2 = 0; g2 < ng; ++g2)
                        for (int a = 0; a < na; ++a)
                            for (int s2 = 0; s2 < ns; ++s2) {
                                const double coeff = -po * t_mod[a](s, s2);
                                const int w = wvar[mask_index(o, g2, a, ng, na)];
                                bp.add_term(row_a, w, gvar[s2 * ng + g2], coeff);
                                bp.add_term(row_b, w, vvar[s2 * ng + g2], coeff);
                            }
                }
        }
    // Feasibility: the reachable-support seed mass of each steady I-state
    // must stay essentially unabsorbed by Avoid.
    for (int g2 = 0; g2 < ng; ++g2) {
        if (!c.steady[g2]) continue;
        lp::Terms terms;
        double mass = 0.0;
        for (int s = 0; s < ns; ++s) {
            const double w = fi.seed(fi.ssd.idx(s, g2));
            if (w > 0) {
                terms.emplace_back(gvar[s * ng + g2], w);
                mass += w;
            }
        }
        if (mass > 0) prog.add_constraint(std::move(terms), '<', cfg.eps_feas * mass);
    }
    prog.set_objective(true, {{eps_var, 1.0}});

    ImproveOutcome out;
    lp::LpResult res;
    try {
        res = lp::solve_lp(lp::relax_bilinear(bp), cfg.lp_tol);
    } catch (const NumericalError&) {
        out.tangent_beliefs.push_back(tangent_fallback(p));
        return out;
    }
    if (res.status != lp::LpResult::Status::optimal || res.value <= cfg.eps_improve) {
        out.eps = res.status == lp::LpResult::Status::optimal ? res.value : 0.0;
        if (res.status == lp::LpResult::Status::optimal)
            out.tangent_beliefs.push_back(belief_from_duals(p, res.duals, 0, &pinned));
        else
            out.tangent_beliefs.push_back(tangent_fallback(p));
        return out;
    }
    std::vector<Mat> new_rows(no, Mat::Zero(ng, na));
    for (int o = 0; o < no; ++o)
        for (int g2 = 0; g2 < ng; ++g2)
            for (int a = 0; a < na; ++a)
                new_rows[o](g2, a) = res.x(wvar[mask_index(o, g2, a, ng, na)]);
    // The relaxation can certify an infeasible or non-improving row; only an
    // exactly verified row is returned as an improvement.
    if (!verify_feasible(p, with_row(c, g, new_rows), cfg)) {
        out.tangent_beliefs.push_back(belief_from_duals(p, res.duals, 0, &pinned));
        return out;
    }
    out.improved = true;
    out.eps = res.value;
    out.new_rows = std::move(new_rows);
    return out;
}

std::vector<std::pair<int, int>> prune_candidates(
    const product::ProductPomdp& p, const controller::Sfsc& c,
    const std::vector<std::pair<int, int>>& candidates, const BpiConfig& cfg) {
    const int ns = p.n_states(), ng = c.n_istates;
    const auto& repeat = p.pairs.at(cfg.rabin_index).repeat;
    std::vector<std::pair<int, int>> kept;
    for (auto [g2, a] : candidates) {
        controller::Sfsc aug = grow_sfsc(c, true);
        const int phantom = ng;
        for (int o = 0; o < aug.n_observations; ++o) aug.w(phantom, o)(g2, a) = 1.0;
        chain::GlobalChain gc;
        try {
            gc = chain::build_global_chain(p, aug, chain::GlobalChain::Kind::ssd);
        } catch (const DomainError&) {
            continue;
        }
        // Entry beliefs are unknown, so the phantom is probed from every
        // product state; every Repeat state in the closure must keep a
        // vanishing absorption gain.
        Vec probe = Vec::Zero(gc.n());
        for (int s = 0; s < ns; ++s) probe(gc.idx(s, phantom)) = 1.0 / ns;
        std::vector<char> reach = chain::reachable_states(gc.T, probe);

        std::vector<int> block;
        std::vector<int> block_of(gc.n(), -1);
        for (int s = 0; s < ns; ++s)
            for (int gg = 0; gg < aug.n_istates; ++gg)
                if (aug.steady[gg]) {
                    block_of[gc.idx(s, gg)] = static_cast<int>(block.size());
                    block.push_back(gc.idx(s, gg));
                }
        const int k = static_cast<int>(block.size());
        Mat tb(k, k);
        Vec charge(k);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) tb(i, j) = gc.T(block[i], block[j]);
            charge(i) = p.pairs[cfg.rabin_index].avoid[block[i] / aug.n_istates] ? 1.0
                                                                                 : 0.0;
        }
        bool ok = true;
        try {
            chain::PoissonSolution sol = chain::poisson_solve(tb, charge);
            for (int i = 0; i < k; ++i)
                if (reach[block[i]] && repeat[block[i] / aug.n_istates] &&
                    sol.gain(i) > cfg.eps_feas) {
                    ok = false;
                    break;
                }
        } catch (const NumericalError&) {
            ok = false;
        }
        if (ok) kept.emplace_back(g2, a);
    }
    return kept;
}

AddResult add_istates(const product::ProductPomdp& p, const controller::Sfsc& c,
                      const Vec& values,
                      const std::vector<std::pair<int, Vec>>& tangent,
                      const BpiConfig& cfg) {
    AddResult result{c, 0};
    int budget = std::min(cfg.n_new, cfg.n_max - c.n_istates);
    if (budget <= 0 || tangent.empty()) return result;

    const int ns = p.n_states(), ng = c.n_istates, no = p.n_observations(),
              na = p.n_actions();
    const product::LtlRewards rewards = rewards_for(p, c, cfg);
    const Mat vmat = value_matrix(values, ns, ng);
    const std::vector<Mat> nv = next_value(p, vmat);

    std::vector<std::pair<int, int>> steady_all;
    for (int g2 = 0; g2 < ng; ++g2)
        if (c.steady[g2])
            for (int a = 0; a < na; ++a) steady_all.emplace_back(g2, a);
    const std::vector<std::pair<int, int>> steady_ok =
        prune_candidates(p, c, steady_all, cfg);

    // Forward each tangent belief one step per (action, observation) and
    // keep the distinct results.
    std::vector<std::pair<int, Vec>> forwarded;
    for (const auto& [g_src, b] : tangent) {
        for (int a = 0; a < na; ++a)
            for (int o = 0; o < no; ++o) {
                double pr = 0.0;
                for (int s = 0; s < ns; ++s) pr += b(s) * p.observation_fn(s, o);
                if (pr <= 1e-12) continue;
                Vec cond(ns);
                for (int s = 0; s < ns; ++s)
                    cond(s) = b(s) * p.observation_fn(s, o) / pr;
                Vec fwd = p.transition[a].transpose() * cond;
                bool dup = false;
                for (const auto& [_, other] : forwarded)
                    if ((fwd - other).cwiseAbs().maxCoeff() <= cfg.belief_merge_tol) {
                        dup = true;
                        break;
                    }
                if (!dup) forwarded.emplace_back(g_src, std::move(fwd));
            }
    }

    for (const auto& [g_src, b] : forwarded) {
        if (budget <= 0) break;
        double v_cur = controller::value_at_belief(values, ng, 0, b);
        for (int g2 = 1; g2 < ng; ++g2)
            v_cur = std::max(v_cur, controller::value_at_belief(values, ng, g2, b));

        std::vector<std::pair<int, int>> candidates = steady_ok;
        if (!c.steady[g_src])
            for (int g2 = 0; g2 < ng; ++g2)
                if (!c.steady[g2])
                    for (int a = 0; a < na; ++a) candidates.emplace_back(g2, a);
        std::sort(candidates.begin(), candidates.end());

        const double r_here = c.steady[g_src] ? b.dot(rewards.repeat_reward) : 0.0;
        double best_q = -lp::kInf;
        int best_g2 = -1, best_a = -1;
        for (auto [g2, a] : candidates) {
            double q = r_here;
            for (int s = 0; s < ns; ++s) q += cfg.beta * b(s) * nv[a](s, g2);
            if (q > best_q + 1e-12) {
                best_q = q;
                best_g2 = g2;
                best_a = a;
            }
        }
        if (best_g2 < 0 || best_q <= v_cur + 1e-9) continue;
        result.sfsc = grow_sfsc(result.sfsc, c.steady[g_src]);
        const int g_new = result.sfsc.n_istates - 1;
        for (int o = 0; o < no; ++o) result.sfsc.w(g_new, o)(best_g2, best_a) = 1.0;
        --budget;
        ++result.added;
    }
    return result;
}

namespace {

// ---------------------------------------------------------------------------
// Initial-controller search.

struct SafetyGame {
    std::vector<char> safe;                  // per product state
    std::vector<std::vector<char>> safe_act; // per state, per action
};

// Greatest fixpoint of "some action keeps all mass inside": the states from
// which the Avoid set can be kept at probability zero forever.
SafetyGame solve_safety(const product::ProductPomdp& p, const std::vector<char>& avoid) {
    const int ns = p.n_states(), na = p.n_actions();
    SafetyGame sg;
    sg.safe.assign(ns, 1);
    for (int s = 0; s < ns; ++s)
        if (avoid[s]) sg.safe[s] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < ns; ++s) {
            if (!sg.safe[s]) continue;
            bool has_action = false;
            for (int a = 0; a < na && !has_action; ++a) {
                double leak = 0.0;
                for (int s2 = 0; s2 < ns; ++s2)
                    if (!sg.safe[s2]) leak += p.transition[a](s, s2);
                if (leak == 0.0) has_action = true;
            }
            if (!has_action) {
                sg.safe[s] = 0;
                changed = true;
            }
        }
    }
    sg.safe_act.assign(ns, std::vector<char>(na, 0));
    for (int s = 0; s < ns; ++s) {
        if (!sg.safe[s]) continue;
        for (int a = 0; a < na; ++a) {
            double leak = 0.0;
            for (int s2 = 0; s2 < ns; ++s2)
                if (!sg.safe[s2]) leak += p.transition[a](s, s2);
            sg.safe_act[s][a] = leak == 0.0 ? 1 : 0;
        }
    }
    return sg;
}

// Fully observed discounted Repeat-visit values restricted to safe actions.
Mat safe_q_values(const product::ProductPomdp& p, const SafetyGame& sg,
                  const std::vector<char>& repeat, double beta) {
    const int ns = p.n_states(), na = p.n_actions();
    Vec v = Vec::Zero(ns);
    for (int it = 0; it < 4000; ++it) {
        Vec next = Vec::Zero(ns);
        for (int s = 0; s < ns; ++s) {
            if (!sg.safe[s]) continue;
            double best = -lp::kInf;
            for (int a = 0; a < na; ++a) {
                if (!sg.safe_act[s][a]) continue;
                best = std::max(best, p.transition[a].row(s).dot(v));
            }
            if (best > -lp::kInf) next(s) = (repeat[s] ? 1.0 : 0.0) + beta * best;
        }
        const double diff = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        if (diff < 1e-12) break;
    }
    Mat q = Mat::Zero(ns, na);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a)
            q(s, a) = (repeat[s] ? 1.0 : 0.0) + beta * p.transition[a].row(s).dot(v);
    return q;
}

// Deterministic automaton-state successor per product state, read off the
// product's positive transitions.
std::vector<int> dra_successor(const product::ProductPomdp& p) {
    const int ns = p.n_states();
    std::vector<int> succ(ns, -1);
    for (int s = 0; s < ns; ++s)
        for (const Mat& t : p.transition) {
            for (int s2 = 0; s2 < ns; ++s2)
                if (t(s, s2) > 0) {
                    succ[s] = p.dra_of[s2];
                    break;
                }
            if (succ[s] >= 0) break;
        }
    return succ;
}

// Groups the automaton states that induce the same successor map over the
// model states (and agree on Avoid membership), so the controller tracks
// only behaviorally distinct phases.
std::vector<int> phase_classes(const product::ProductPomdp& p,
                               const std::vector<char>& avoid,
                               const std::vector<int>& succ, int* n_classes) {
    const int nq = p.n_dra, nm = p.n_model, ns = p.n_states();
    // signature(q)(m) = automaton successor when leaving model state m, or -1
    // if <m, q> is not a product state.
    std::vector<std::vector<int>> sig(nq, std::vector<int>(nm, -1));
    std::vector<char> q_avoid(nq, 0), q_present(nq, 0);
    for (int s = 0; s < ns; ++s) {
        sig[p.dra_of[s]][p.model_of[s]] = succ[s];
        q_present[p.dra_of[s]] = 1;
        if (avoid[s]) q_avoid[p.dra_of[s]] = 1;
    }
    std::vector<int> cls(nq, -1);
    std::vector<std::vector<int>> members;
    for (int q = 0; q < nq; ++q) {
        if (!q_present[q] || q_avoid[q]) continue;
        bool placed = false;
        for (size_t cidx = 0; cidx < members.size() && !placed; ++cidx) {
            bool compatible = true;
            for (int q2 : members[cidx]) {
                for (int m = 0; m < nm && compatible; ++m)
                    if (sig[q][m] >= 0 && sig[q2][m] >= 0 && sig[q][m] != sig[q2][m])
                        compatible = false;
                if (!compatible) break;
            }
            if (compatible) {
                cls[q] = static_cast<int>(cidx);
                members[cidx].push_back(q);
                placed = true;
            }
        }
        if (!placed) {
            cls[q] = static_cast<int>(members.size());
            members.push_back({q});
        }
    }
    *n_classes = static_cast<int>(members.size());
    return cls;
}

struct SeedVerdict {
    bool ok = false;
    double residual = 0.0;
    double objective = 0.0;
};

// Exact acceptance test: valid structure, vanishing feasibility residual,
// and positive long-run Repeat frequency seen from the initial distribution.
SeedVerdict verify_seed(const product::ProductPomdp& p, const controller::Sfsc& c,
                        const BpiConfig& cfg) {
    SeedVerdict v;
    if (!controller::check_sfsc(c).empty()) return v;
    FeasibilityInfo fi;
    try {
        fi = feasibility_info(p, c, cfg);
    } catch (const NumericalError&) {
        return v;
    }
    v.residual = fi.residual;
    if (fi.residual > cfg.eps_feas) return v;
    const int ns = p.n_states(), ng = c.n_istates;
    Vec charge(fi.ssd.n());
    const auto& repeat = p.pairs.at(cfg.rabin_index).repeat;
    for (int s = 0; s < ns; ++s)
        for (int g = 0; g < ng; ++g)
            charge(fi.ssd.idx(s, g)) = repeat[s] && c.steady[g] ? 1.0 : 0.0;
    chain::PoissonSolution sol;
    try {
        sol = chain::poisson_solve(fi.ssd.T, charge);
    } catch (const NumericalError&) {
        return v;
    }
    for (int g = 0; g < ng; ++g) {
        if (!c.steady[g]) continue;
        double obj = 0.0;
        for (int s = 0; s < ns; ++s) obj += p.initial(s) * sol.gain(fi.ssd.idx(s, g));
        v.objective = std::max(v.objective, obj);
    }
    v.ok = v.objective > 1e-12;
    return v;
}

// Dual-Poisson program maximizing the initial-distribution Repeat gain
// subject to zero Avoid absorption, McCormick relaxed; only used on small
// instances and always followed by exact verification.
bool seed_bilinear(const product::ProductPomdp& p, int n_tr, int n_ss,
                   const BpiConfig& cfg, controller::Sfsc* out) {
    const int ns = p.n_states(), no = p.n_observations(), na = p.n_actions();
    const int ng = n_tr + n_ss;
    std::vector<char> steady(ng, 0);
    for (int g = n_tr; g < ng; ++g) steady[g] = 1;
    const auto& avoid = p.pairs.at(cfg.rabin_index).avoid;
    const auto& repeat = p.pairs.at(cfg.rabin_index).repeat;
    const std::vector<Mat> t_mod = product::modified_transition(p);

    lp::BilinearProgram bp;
    lp::LinearProgram& prog = bp.lp;
    auto widx = [&](int g, int o, int g2, int a) {
        return ((g * no + o) * ng + g2) * na + a;
    };
    std::vector<int> wvar(static_cast<size_t>(ng) * no * ng * na);
    for (int g = 0; g < ng; ++g)
        for (int o = 0; o < no; ++o)
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a)
                    wvar[widx(g, o, g2, a)] =
                        prog.add_var("w", 0.0, steady[g] && !steady[g2] ? 0.0 : 1.0);
    // Two Poisson systems over the full global space: Avoid absorption and
    // Repeat frequency.
    std::vector<int> g_av(static_cast<size_t>(ns) * ng), v_av(g_av.size()),
        g_rep(g_av.size()), v_rep(g_av.size());
    for (size_t i = 0; i < g_av.size(); ++i) {
        g_av[i] = prog.add_var("gain_av", 0.0, 1.0);
        v_av[i] = prog.add_var("bias_av", -cfg.m1, cfg.m2);
        g_rep[i] = prog.add_var("gain_rep", 0.0, 1.0);
        v_rep[i] = prog.add_var("bias_rep", -cfg.m1, cfg.m2);
    }
    for (int g = 0; g < ng; ++g)
        for (int o = 0; o < no; ++o) {
            lp::Terms terms;
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a)
                    terms.emplace_back(wvar[widx(g, o, g2, a)], 1.0);
            prog.add_constraint(std::move(terms), '=', 1.0);
        }
    for (int s = 0; s < ns; ++s)
        for (int g = 0; g < ng; ++g) {
            const int i = s * ng + g;
            const double c_av = steady[g] && avoid[s] ? 1.0 : 0.0;
            const double c_rep = steady[g] && repeat[s] ? 1.0 : 0.0;
            const int ra = prog.add_constraint({{g_av[i], 1.0}}, '=', 0.0);
            const int rb =
                prog.add_constraint({{g_av[i], 1.0}, {v_av[i], 1.0}}, '=', c_av);
            const int rc = prog.add_constraint({{g_rep[i], 1.0}}, '=', 0.0);
            const int rd =
                prog.add_constraint({{g_rep[i], 1.0}, {v_rep[i], 1.0}}, '=', c_rep);
            const std::vector<Mat>& trans = steady[g] ? t_mod : p.transition;
            for (int o = 0; o < no; ++o) {
                const double po = p.observation_fn(s, o);
                if (po == 0.0) continue;
                for (int g2 = 0; g2 < ng; ++g2)
                    for (int a = 0; a < na; ++a) {
                        const int w = wvar[widx(g, o, g2, a)];
                        for (int s2 = 0; s2 < ns; ++s2) {
                            const double coeff = -po * trans[a](s, s2);
                            if (coeff == 0.0) continue;
                            const int j = s2 * ng + g2;
                            bp.add_term(ra, w, g_av[j], coeff);
                            bp.add_term(rb, w, v_av[j], coeff);
                            bp.add_term(rc, w, g_rep[j], coeff);
                            bp.add_term(rd, w, v_rep[j], coeff);
                        }
                    }
            }
        }
    for (int g = n_tr; g < ng; ++g) {
        Vec slice = product::steady_seed_slice(p, steady, g);
        lp::Terms terms;
        for (int s = 0; s < ns; ++s)
            if (slice(s) > 0) terms.emplace_back(g_av[s * ng + g], slice(s));
        if (!terms.empty()) prog.add_constraint(std::move(terms), '<', cfg.eps_feas);
    }
    lp::Terms obj;
    for (int g = n_tr; g < ng; ++g)
        for (int s = 0; s < ns; ++s)
            if (p.initial(s) > 0) obj.emplace_back(g_rep[s * ng + g], p.initial(s));
    prog.set_objective(true, std::move(obj));

    lp::LpResult res;
    try {
        res = lp::solve_lp(lp::relax_bilinear(bp), cfg.lp_tol);
    } catch (const NumericalError&) {
        return false;
    }
    if (res.status != lp::LpResult::Status::optimal || res.value <= 1e-9) return false;
    controller::Sfsc c;
    c.n_istates = ng;
    c.n_actions = na;
    c.n_observations = no;
    c.steady = steady;
    c.initial_istate = 0;
    c.omega.assign(static_cast<size_t>(ng) * no, Mat::Zero(ng, na));
    for (int g = 0; g < ng; ++g)
        for (int o = 0; o < no; ++o)
            for (int g2 = 0; g2 < ng; ++g2)
                for (int a = 0; a < na; ++a)
                    c.w(g, o)(g2, a) = res.x(wvar[widx(g, o, g2, a)]);
    normalize_rows(c);
    *out = std::move(c);
    return true;
}

// Deterministic construction from the safety game: steady I-states track
// automaton phases, observations are decoded to their most likely safe
// state, and actions follow the safe Q-values.
bool seed_heuristic(const product::ProductPomdp& p, int n_tr, int n_ss,
                    const BpiConfig& cfg, controller::Sfsc* out) {
    const int ns = p.n_states(), no = p.n_observations(), na = p.n_actions();
    const auto& avoid = p.pairs.at(cfg.rabin_index).avoid;
    const auto& repeat = p.pairs.at(cfg.rabin_index).repeat;
    SafetyGame sg = solve_safety(p, avoid);
    bool any_safe = false;
    for (char f : sg.safe)
        if (f) any_safe = true;
    if (!any_safe) return false;
    const Mat q_values = safe_q_values(p, sg, repeat, cfg.beta);
    // Probability of ever reaching the safe set, for the transient rows that
    // cannot yet decode a safe state from their observation.
    Vec reach = Vec::Zero(ns);
    for (int s = 0; s < ns; ++s)
        if (sg.safe[s]) reach(s) = 1.0;
    for (int it = 0; it < 4000; ++it) {
        Vec next = reach;
        for (int s = 0; s < ns; ++s) {
            if (sg.safe[s]) continue;
            double best = 0.0;
            for (int a = 0; a < na; ++a)
                best = std::max(best, p.transition[a].row(s).dot(reach));
            next(s) = best;
        }
        const double diff = (next - reach).cwiseAbs().maxCoeff();
        reach = std::move(next);
        if (diff < 1e-12) break;
    }
    const std::vector<int> succ = dra_successor(p);
    int n_classes = 0;
    std::vector<int> cls = phase_classes(p, avoid, succ, &n_classes);
    if (n_classes == 0) return false;
    if (n_classes > n_ss) {
        // Fold the surplus phases into the last tracked one.
        for (int q = 0; q < p.n_dra; ++q)
            if (cls[q] >= n_ss) cls[q] = n_ss - 1;
        n_classes = n_ss;
    }

    const int ng = n_tr + n_ss;
    std::vector<char> steady(ng, 0);
    for (int g = n_tr; g < ng; ++g) steady[g] = 1;
    controller::Sfsc c;
    c.n_istates = ng;
    c.n_actions = na;
    c.n_observations = no;
    c.steady = steady;
    c.initial_istate = 0;
    c.omega.assign(static_cast<size_t>(ng) * no, Mat::Zero(ng, na));

    auto istate_of_class = [&](int cidx) {
        return n_tr + std::min(cidx, n_ss - 1);
    };
    // Safety is quantified over every safe observation-compatible state,
    // independent of the tracked phase, because tracking can drift.
    auto allowed_actions = [&](int o) {
        std::vector<char> ok(na, 1);
        for (int s = 0; s < ns; ++s) {
            if (!sg.safe[s] || p.observation_fn(s, o) == 0.0) continue;
            for (int a = 0; a < na; ++a)
                if (!sg.safe_act[s][a]) ok[a] = 0;
        }
        return ok;
    };
    auto decode = [&](int o, int want_class) {
        int best = -1;
        double best_p = 0.0;
        for (int s = 0; s < ns; ++s) {
            if (!sg.safe[s] || p.observation_fn(s, o) == 0.0) continue;
            if (want_class >= 0 &&
                (cls[p.dra_of[s]] < 0 || cls[p.dra_of[s]] != want_class))
                continue;
            if (p.observation_fn(s, o) > best_p) {
                best_p = p.observation_fn(s, o);
                best = s;
            }
        }
        return best;
    };
    auto fill_row = [&](int g, int want_class) {
        for (int o = 0; o < no; ++o) {
            int shat = decode(o, want_class);
            if (shat < 0) shat = decode(o, -1);
            std::vector<char> ok = allowed_actions(o);
            int alpha = -1;
            double best_q = -lp::kInf;
            if (shat >= 0)
                for (int a = 0; a < na; ++a) {
                    if (!ok[a] || !sg.safe_act[shat][a]) continue;
                    if (q_values(shat, a) > best_q + 1e-12) {
                        best_q = q_values(shat, a);
                        alpha = a;
                    }
                }
            if (alpha < 0 && !steady[g]) {
                // No safe state matches this observation: decode over all
                // states and chase the safe set.
                int sbar = -1;
                double best_p = 0.0;
                for (int s = 0; s < ns; ++s)
                    if (p.observation_fn(s, o) > best_p) {
                        best_p = p.observation_fn(s, o);
                        sbar = s;
                    }
                if (sbar >= 0) {
                    double best_r = -1.0;
                    for (int a = 0; a < na; ++a) {
                        const double r = p.transition[a].row(sbar).dot(reach);
                        if (r > best_r + 1e-12) {
                            best_r = r;
                            alpha = a;
                        }
                    }
                }
            }
            if (alpha < 0)
                for (int a = 0; a < na; ++a)
                    if (ok[a]) {
                        alpha = a;
                        break;
                    }
            if (alpha < 0) alpha = 0;
            int g2 = g;
            if (shat >= 0 && succ[shat] >= 0 && cls[succ[shat]] >= 0)
                g2 = istate_of_class(cls[succ[shat]]);
            if (!steady[g2] || (steady[g] && !steady[g2])) g2 = std::max(g, n_tr);
            c.w(g, o)(g2, alpha) = 1.0;
        }
    };
    for (int g = n_tr; g < ng; ++g) fill_row(g, g - n_tr < n_classes ? g - n_tr : -1);
    for (int g = 0; g < n_tr; ++g) fill_row(g, -1);
    if (n_tr == 0) c.initial_istate = n_tr;
    *out = std::move(c);
    return true;
}

}  // namespace

SeedResult find_initial_controller(const product::ProductPomdp& p, int n_tr, int n_ss,
                                   const BpiConfig& cfg) {
    SeedResult result;
    for (int k = n_ss; n_tr + k <= cfg.n_max; ++k) {
        const long bilinear_size = 4L * (n_tr + k) * p.n_observations() * (n_tr + k) *
                                   p.n_actions() * p.n_states();
        controller::Sfsc candidate;
        std::vector<controller::Sfsc> trials;
        if (bilinear_size <= cfg.bilinear_max_products &&
            seed_bilinear(p, n_tr, k, cfg, &candidate))
            trials.push_back(candidate);
        if (seed_heuristic(p, n_tr, k, cfg, &candidate)) trials.push_back(candidate);
        SeedAttempt attempt{n_tr, k, 0.0, 0.0, false};
        for (const controller::Sfsc& trial : trials) {
            SeedVerdict verdict = verify_seed(p, trial, cfg);
            attempt.residual = verdict.residual;
            attempt.objective = verdict.objective;
            if (verdict.ok) {
                attempt.feasible = true;
                result.found = true;
                result.sfsc = trial;
                break;
            }
        }
        result.attempts.push_back(attempt);
        if (result.found) break;
    }
    return result;
}

BpiReport run_bpi(const product::ProductPomdp& p, const controller::Sfsc& seed,
                  const BpiConfig& cfg) {
    BpiReport report;
    controller::Sfsc c = seed;
    {
        auto problems = controller::check_sfsc(c);
        if (!problems.empty()) throw Infeasible("seed controller: " + problems.front());
        double residual = 0.0;
        if (!verify_feasible(p, c, cfg, &residual))
            throw Infeasible("seed controller: feasibility residual " +
                             format_double(residual) + " exceeds bound");
    }

    // Re-anchors to the best I-state at the initial belief whose reachable
    // steady support keeps the feasibility residual within bounds; the
    // residual is seeded from the states reachable from the anchor, so the
    // anchor choice is part of the feasibility contract.
    auto evaluate = [&](controller::Sfsc& cc) {
        Vec v = controller::evaluate_discounted(p, cc, rewards_for(p, cc, cfg),
                                                controller::EvalMethod::direct,
                                                cfg.eps_beta);
        std::vector<int> order(cc.n_istates);
        for (int g = 0; g < cc.n_istates; ++g) order[g] = g;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return controller::value_at_belief(v, cc.n_istates, a, p.initial) >
                   controller::value_at_belief(v, cc.n_istates, b, p.initial);
        });
        const int old_anchor = cc.initial_istate;
        for (int g : order) {
            cc.initial_istate = g;
            if (verify_feasible(p, cc, cfg)) return v;
        }
        cc.initial_istate = old_anchor;
        return v;
    };
    Vec values = evaluate(c);
    auto initial_value = [&]() {
        return controller::value_at_belief(values, c.n_istates, c.initial_istate,
                                           p.initial);
    };

    bool improved = true;
    int iter = 0;
    while (improved && iter < cfg.max_iterations && c.n_istates <= cfg.n_max) {
        improved = false;
        ++iter;
        IterationRecord rec;
        rec.iteration = iter;
        std::vector<std::pair<int, Vec>> tangent;

        // Steady targets certified safe this sweep; transient rows are
        // restricted to them so accepted rows rarely need rolling back.
        std::vector<std::pair<int, int>> steady_all;
        for (int g2 = 0; g2 < c.n_istates; ++g2)
            if (c.steady[g2])
                for (int a = 0; a < p.n_actions(); ++a) steady_all.emplace_back(g2, a);
        const auto steady_ok = prune_candidates(p, c, steady_all, cfg);
        std::vector<char> mask(static_cast<size_t>(p.n_observations()) * c.n_istates *
                                   p.n_actions(),
                               0);
        for (int o = 0; o < p.n_observations(); ++o) {
            for (int g2 = 0; g2 < c.n_istates; ++g2)
                if (!c.steady[g2])
                    for (int a = 0; a < p.n_actions(); ++a)
                        mask[mask_index(o, g2, a, c.n_istates, p.n_actions())] = 1;
            for (auto [g2, a] : steady_ok)
                mask[mask_index(o, g2, a, c.n_istates, p.n_actions())] = 1;
        }

        for (int g = 0; g < c.n_istates; ++g) {
            ImproveOutcome out;
            if (bilinear_product_count(p, c) <= cfg.bilinear_max_products)
                out = improve_istate_bilinear(p, c, values, g, cfg);
            else
                out = improve_istate_lp(p, c, values, g, cfg, &mask);
            rec.eps_per_istate.push_back(out.improved ? out.eps : 0.0);
            if (!out.improved) {
                for (Vec& b : out.tangent_beliefs) tangent.emplace_back(g, std::move(b));
                continue;
            }
            controller::Sfsc candidate = with_row(c, g, out.new_rows);
            candidate.initial_istate = c.initial_istate;
            const double old_value = initial_value();
            Vec cand_values = evaluate(candidate);
            if (!verify_feasible(p, candidate, cfg)) {
                tangent.emplace_back(g, tangent_fallback(p));
                continue;
            }
            const double cand_value = controller::value_at_belief(
                cand_values, candidate.n_istates, candidate.initial_istate, p.initial);
            if (cand_value < old_value - 1e-9) {
                tangent.emplace_back(g, tangent_fallback(p));
                continue;
            }
            c = std::move(candidate);
            values = std::move(cand_values);
            improved = true;
        }

        rec.added = 0;
        if (!improved && c.n_istates < cfg.n_max) {
            AddResult add = add_istates(p, c, values, tangent, cfg);
            if (add.added > 0) {
                Vec add_values = evaluate(add.sfsc);
                if (verify_feasible(p, add.sfsc, cfg)) {
                    c = std::move(add.sfsc);
                    values = std::move(add_values);
                    rec.added = add.added;
                    improved = true;
                }
            }
        }

        rec.n_istates = c.n_istates;
        rec.n_steady = c.n_steady();
        rec.value = initial_value();
        rec.residual = feasibility_info(p, c, cfg).residual;
        report.iterations.push_back(std::move(rec));
        report.iterates.push_back(c);
    }

    report.controller = c;
    chain::GlobalChain plain =
        chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    report.satisfaction = chain::phi_feasible_sets(plain, p).satisfaction;
    return report;
}

std::string report_csv(const BpiReport& report) {
    std::ostringstream os;
    os << "iteration,istates,steady,value,residual,added\n";
    for (const IterationRecord& rec : report.iterations)
        os << rec.iteration << ',' << rec.n_istates << ',' << rec.n_steady << ','
           << format_double(rec.value) << ',' << format_double(rec.residual) << ','
           << rec.added << '\n';
    return os.str();
}

}  // namespace pomdp_ltl::bpi
