#include "pomdp_ltl/chain.hpp"

#include <algorithm>
#include <deque>

namespace pomdp_ltl::chain {

GlobalChain build_global_chain(const product::ProductPomdp& p,
                               const controller::Sfsc& c, GlobalChain::Kind kind) {
    const int ns = p.n_states(), ng = c.n_istates, no = p.n_observations(),
              na = p.n_actions();
    if (kind == GlobalChain::Kind::ssd) {
        for (int g = 0; g < ng; ++g) {
            if (!c.steady[g]) continue;
            for (int o = 0; o < no; ++o)
                for (int g2 = 0; g2 < ng; ++g2)
                    if (!c.steady[g2] && c.w(g, o).row(g2).sum() > 0)
                        throw controller::StructureViolation(
                            "ssd chain: steady I-state " + std::to_string(g) +
                            " transitions to transient I-state " + std::to_string(g2));
        }
    }
    const std::vector<Mat> t_mod =
        kind == GlobalChain::Kind::ssd ? product::modified_transition(p) : p.transition;

    GlobalChain gc;
    gc.kind = kind;
    gc.n_product = ns;
    gc.n_istates = ng;
    gc.T = Mat::Zero(ns * ng, ns * ng);
    // Per (g, g2): weight(s, a) = sum_o O(o|s) omega(g2, a | g, o), so the
    // chain block is sum_a diag(weight(., a)) T_a without an inner loop over
    // observations.
    Mat weight(ns, na);
    for (int g = 0; g < ng; ++g) {
        const bool use_mod = kind == GlobalChain::Kind::ssd && c.steady[g];
        const std::vector<Mat>& trans = use_mod ? t_mod : p.transition;
        for (int g2 = 0; g2 < ng; ++g2) {
            weight.setZero();
            for (int o = 0; o < no; ++o) {
                const Mat& w = c.w(g, o);
                for (int a = 0; a < na; ++a) {
                    const double pw = w(g2, a);
                    if (pw == 0.0) continue;
                    for (int s = 0; s < ns; ++s)
                        weight(s, a) += p.observation_fn(s, o) * pw;
                }
            }
            for (int a = 0; a < na; ++a)
                for (int s = 0; s < ns; ++s) {
                    const double ws = weight(s, a);
                    if (ws == 0.0) continue;
                    for (int s2 = 0; s2 < ns; ++s2) {
                        const double t = trans[a](s, s2);
                        if (t != 0.0) gc.T(gc.idx(s, g), gc.idx(s2, g2)) += ws * t;
                    }
                }
        }
    }
    gc.initial = Vec::Zero(ns * ng);
    for (int s = 0; s < ns; ++s) gc.initial(gc.idx(s, c.initial_istate)) = p.initial(s);
    return gc;
}

namespace {

// Iterative Tarjan strongly-connected components on the positive digraph.
struct Tarjan {
    const Mat& T;
    int n;
    std::vector<int> index, low, comp;
    std::vector<char> on_stack;
    std::vector<int> stack;
    int next_index = 0, n_comp = 0;

    explicit Tarjan(const Mat& t)
        : T(t), n(static_cast<int>(t.rows())), index(n, -1), low(n, 0), comp(n, -1),
          on_stack(n, 0) {}

    void run() {
        for (int v = 0; v < n; ++v)
            if (index[v] < 0) visit(v);
    }

    void visit(int root) {
        // frames: (vertex, next successor to try)
        std::vector<std::pair<int, int>> frames{{root, 0}};
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next == 0) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (next < n) {
                int w = next++;
                if (T(v, w) <= 0.0) continue;
                if (index[w] < 0) {
                    frames.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = n_comp;
                    if (w == v) break;
                }
                ++n_comp;
            }
            int finished = v;
            frames.pop_back();
            if (!frames.empty())
                low[frames.back().first] =
                    std::min(low[frames.back().first], low[finished]);
        }
    }
};

}  // namespace

ClassDecomposition decompose_classes(const Mat& T) {
    Tarjan tarjan(T);
    tarjan.run();
    const int n = tarjan.n, nc = tarjan.n_comp;
    ClassDecomposition d;
    d.classes.resize(nc);
    d.class_of = tarjan.comp;
    for (int v = 0; v < n; ++v) d.classes[tarjan.comp[v]].push_back(v);
    d.recurrent.assign(nc, 1);
    for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w)
            if (T(v, w) > 0.0 && tarjan.comp[v] != tarjan.comp[w])
                d.recurrent[tarjan.comp[v]] = 0;
    return d;
}

namespace {

// Unique invariant probability measure of an irreducible closed block:
// nu T|_C = nu, sum nu = 1. The stacked system [(T' - I); 1'] has full
// column rank (the kernel of T' - I is spanned by nu and 1'nu = 1), so the
// consistent least-squares solve recovers nu exactly.
Vec invariant_measure(const Mat& T, const std::vector<int>& cls) {
    const int k = static_cast<int>(cls.size());
    Mat A(k + 1, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) A(i, j) = T(cls[j], cls[i]) - (i == j ? 1.0 : 0.0);
    A.row(k).setOnes();
    Vec b = Vec::Zero(k + 1);
    b(k) = 1.0;
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    if (qr.rank() < k) throw SingularSystem("invariant measure system is rank deficient");
    return qr.solve(b);
}

}  // namespace

Mat limiting_matrix(const Mat& T) {
    const int n = static_cast<int>(T.rows());
    ClassDecomposition d = decompose_classes(T);
    const int nc = static_cast<int>(d.classes.size());

    Mat pi = Mat::Zero(n, n);
    std::vector<Vec> nu(nc);
    std::vector<int> transient;
    for (int c = 0; c < nc; ++c)
        if (d.recurrent[c]) nu[c] = invariant_measure(T, d.classes[c]);
    for (int v = 0; v < n; ++v)
        if (!d.recurrent[d.class_of[v]]) transient.push_back(v);

    for (int c = 0; c < nc; ++c) {
        if (!d.recurrent[c]) continue;
        for (int v : d.classes[c])
            for (size_t j = 0; j < d.classes[c].size(); ++j)
                pi(v, d.classes[c][j]) = nu[c](static_cast<int>(j));
    }
    if (!transient.empty()) {
        const int k = static_cast<int>(transient.size());
        std::vector<int> tr_index(n, -1);
        for (int i = 0; i < k; ++i) tr_index[transient[i]] = i;
        Mat A(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                A(i, j) = (i == j ? 1.0 : 0.0) - T(transient[i], transient[j]);
        Eigen::PartialPivLU<Mat> lu(A);
        // Absorption probabilities into each recurrent class, one rhs per class.
        for (int c = 0; c < nc; ++c) {
            if (!d.recurrent[c]) continue;
            Vec rhs = Vec::Zero(k);
            for (int i = 0; i < k; ++i)
                for (int v : d.classes[c]) rhs(i) += T(transient[i], v);
            Vec absorb = lu.solve(rhs);
            for (int i = 0; i < k; ++i)
                for (size_t j = 0; j < d.classes[c].size(); ++j)
                    pi(transient[i], d.classes[c][j]) =
                        absorb(i) * nu[c](static_cast<int>(j));
        }
    }
    return pi;
}

PoissonSolution poisson_solve(const Mat& T, const Vec& charge) {
    const int n = static_cast<int>(T.rows());
    if (charge.size() != n) throw DomainError("poisson_solve: charge dimension mismatch");
    PoissonSolution sol;
    sol.charge = charge;
    sol.limiting = limiting_matrix(T);
    Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) - T + sol.limiting);
    sol.fundamental = lu.solve(Mat::Identity(n, n));
    sol.deviation = sol.fundamental * (Mat::Identity(n, n) - sol.limiting);
    sol.gain = sol.limiting * charge;
    sol.bias = sol.deviation * charge;

    const double res_a = (sol.gain - T * sol.gain).cwiseAbs().maxCoeff();
    const double res_b =
        (sol.gain + sol.bias - T * sol.bias - charge).cwiseAbs().maxCoeff();
    if (res_a > 1e-8 || res_b > 1e-8)
        throw ResidualTooLarge("poisson_solve: residuals " + format_double(res_a) +
                               ", " + format_double(res_b) + " exceed 1e-8");
    return sol;
}

double absorption_probability(const GlobalChain& ssd, const Vec& initial,
                              const Vec& avoid_charge) {
    if (ssd.kind != GlobalChain::Kind::ssd)
        throw DomainError("absorption_probability: ssd chain required");
    PoissonSolution sol = poisson_solve(ssd.T, avoid_charge);
    return initial.dot(sol.gain);
}

FeasibleSetsReport phi_feasible_sets(const GlobalChain& plain,
                                     const product::ProductPomdp& p) {
    FeasibleSetsReport rep;
    rep.decomposition = decompose_classes(plain.T);
    const int nc = static_cast<int>(rep.decomposition.classes.size());
    rep.feasible.assign(nc, 0);
    for (int c = 0; c < nc; ++c) {
        if (!rep.decomposition.recurrent[c]) continue;
        for (const auto& pair : p.pairs) {
            bool hits_repeat = false, hits_avoid = false;
            for (int v : rep.decomposition.classes[c]) {
                const int s = v / plain.n_istates;
                if (pair.repeat[s]) hits_repeat = true;
                if (pair.avoid[s]) hits_avoid = true;
            }
            if (hits_repeat && !hits_avoid) {
                rep.feasible[c] = 1;
                break;
            }
        }
    }
    Mat pi = limiting_matrix(plain.T);
    Vec mass = pi.transpose() * plain.initial;
    rep.class_reach = Vec::Zero(nc);
    rep.satisfaction = 0.0;
    for (int c = 0; c < nc; ++c) {
        if (!rep.decomposition.recurrent[c]) continue;
        for (int v : rep.decomposition.classes[c]) rep.class_reach(c) += mass(v);
        if (rep.feasible[c]) rep.satisfaction += rep.class_reach(c);
    }
    return rep;
}

std::vector<char> reachable_states(const Mat& T, const Vec& initial) {
    const int n = static_cast<int>(T.rows());
    std::vector<char> reach(n, 0);
    std::deque<int> queue;
    for (int i = 0; i < n; ++i)
        if (initial(i) > 0) {
            reach[i] = 1;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        int i = queue.front();
        queue.pop_front();
        for (int j = 0; j < n; ++j)
            if (T(i, j) > 0 && !reach[j]) {
                reach[j] = 1;
                queue.push_back(j);
            }
    }
    return reach;
}

}  // namespace pomdp_ltl::chain
