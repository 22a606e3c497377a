#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pomdp_ltl/chain.hpp"
#include "pomdp_ltl/controller.hpp"
#include "pomdp_ltl/product.hpp"

using namespace pomdp_ltl;

namespace {

Mat random_chain(std::mt19937& rng, int n, double sparsity = 0.5) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat t = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (u(rng) > sparsity) t(i, j) = u(rng) + 0.01;
        if (t.row(i).sum() == 0.0) t(i, static_cast<int>(rng() % n)) = 1.0;
        t.row(i) /= t.row(i).sum();
    }
    return t;
}

// Cesaro average of the matrix powers, the defining limit of Pi.
Mat cesaro_limit(const Mat& t, int steps) {
    Mat power = Mat::Identity(t.rows(), t.cols());
    Mat acc = Mat::Zero(t.rows(), t.cols());
    for (int k = 0; k < steps; ++k) {
        power = power * t;
        acc += power;
    }
    return acc / steps;
}

// First-passage probability of ever hitting `target`, by the standard
// linear solve restricted to the states that can reach it.
Vec reach_probability(const Mat& t, const std::vector<char>& target) {
    const int n = static_cast<int>(t.rows());
    std::vector<char> can_reach = target;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            if (can_reach[i]) continue;
            for (int j = 0; j < n; ++j)
                if (t(i, j) > 0 && can_reach[j]) {
                    can_reach[i] = 1;
                    changed = true;
                    break;
                }
        }
    }
    std::vector<int> free_states;
    for (int i = 0; i < n; ++i)
        if (can_reach[i] && !target[i]) free_states.push_back(i);
    const int k = static_cast<int>(free_states.size());
    Mat a = Mat::Zero(k, k);
    Vec b = Vec::Zero(k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
            a(i, j) = (i == j ? 1.0 : 0.0) - t(free_states[i], free_states[j]);
        for (int j = 0; j < n; ++j)
            if (target[j]) b(i) += t(free_states[i], j);
    }
    Vec x = a.partialPivLu().solve(b);
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
        if (target[i]) out(i) = 1.0;
    for (int i = 0; i < k; ++i) out(free_states[i]) = x(i);
    return out;
}

model::LabeledPomdp random_model(std::mt19937& rng, int ns, int na, int no) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    model::LabeledPomdp m;
    for (int i = 0; i < ns; ++i) m.states.push_back("s" + std::to_string(i));
    for (int i = 0; i < na; ++i) m.actions.push_back("a" + std::to_string(i));
    for (int i = 0; i < no; ++i) m.observations.push_back("o" + std::to_string(i));
    m.atomic_props = {"p"};
    m.transition.assign(na, Mat(ns, ns));
    for (int a = 0; a < na; ++a)
        for (int i = 0; i < ns; ++i) {
            for (int j = 0; j < ns; ++j) m.transition[a](i, j) = u(rng);
            m.transition[a].row(i) /= m.transition[a].row(i).sum();
        }
    m.observation_fn = Mat(ns, no);
    for (int i = 0; i < ns; ++i) {
        for (int o = 0; o < no; ++o) m.observation_fn(i, o) = u(rng);
        m.observation_fn.row(i) /= m.observation_fn.row(i).sum();
    }
    m.initial = Vec(ns);
    for (int i = 0; i < ns; ++i) m.initial(i) = u(rng);
    m.initial /= m.initial.sum();
    m.labeling.assign(ns, 0);
    for (int i = 0; i < ns; ++i) m.labeling[i] = rng() % 2;
    m.state_reward = Vec::Zero(ns);
    return m;
}

product::ProductPomdp random_product(std::mt19937& rng, int ns = 3, int na = 2,
                                     int no = 2, int nq = 2) {
    auto m = random_model(rng, ns, na, no);
    rabin::Dra dra;
    for (int q = 0; q < nq; ++q) dra.states.push_back("q" + std::to_string(q));
    dra.atomic_props = m.atomic_props;
    dra.delta.assign(nq, std::vector<int>(2));
    for (int q = 0; q < nq; ++q)
        for (int l = 0; l < 2; ++l) dra.delta[q][l] = static_cast<int>(rng() % nq);
    rabin::RabinPair pair;
    pair.repeat.push_back(static_cast<int>(rng() % nq));
    pair.avoid.push_back(static_cast<int>(rng() % nq));
    dra.pairs.push_back(pair);
    return product::build_product(m, dra);
}

controller::Sfsc random_sfsc(std::mt19937& rng, int ng, int na, int no,
                             std::vector<char> steady) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    controller::Sfsc c;
    c.n_istates = ng;
    c.n_actions = na;
    c.n_observations = no;
    c.steady = std::move(steady);
    c.omega.assign(static_cast<size_t>(ng) * no, Mat::Zero(ng, na));
    for (int g = 0; g < ng; ++g)
        for (int o = 0; o < no; ++o) {
            for (int g2 = 0; g2 < ng; ++g2) {
                if (c.steady[g] && !c.steady[g2]) continue;
                for (int a = 0; a < na; ++a) c.w(g, o)(g2, a) = u(rng);
            }
            c.w(g, o) /= c.w(g, o).sum();
        }
    return c;
}

}  // namespace

TEST_CASE("a single-I-state deterministic controller reproduces the action chain") {
    std::mt19937 rng(1);
    auto p = random_product(rng, 3, 2, 2, 1);
    controller::Sfsc c;
    c.n_istates = 1;
    c.n_actions = p.n_actions();
    c.n_observations = p.n_observations();
    c.steady = {1};
    c.omega.assign(p.n_observations(), Mat::Zero(1, p.n_actions()));
    for (int o = 0; o < p.n_observations(); ++o) c.w(0, o)(0, 1) = 1.0;
    auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    CHECK((gc.T - p.transition[1]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("global chain entries match the naive double summation") {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_product(rng, 3, 2, 2, 2);
        auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
        auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
        const int ns = p.n_states(), ng = 2;
        for (int s = 0; s < ns; ++s)
            for (int g = 0; g < ng; ++g) {
                CHECK(gc.T.row(gc.idx(s, g)).sum() == doctest::Approx(1.0));
                for (int s2 = 0; s2 < ns; ++s2)
                    for (int g2 = 0; g2 < ng; ++g2) {
                        double want = 0.0;
                        for (int o = 0; o < p.n_observations(); ++o)
                            for (int a = 0; a < p.n_actions(); ++a)
                                want += p.observation_fn(s, o) * c.w(g, o)(g2, a) *
                                        p.transition[a](s, s2);
                        CHECK(gc.T(gc.idx(s, g), gc.idx(s2, g2)) ==
                              doctest::Approx(want).epsilon(1e-12));
                    }
            }
    }
}

TEST_CASE("steady-detecting chain makes Avoid a sink for steady I-states") {
    std::mt19937 rng(3);
    auto p = random_product(rng, 3, 2, 2, 2);
    auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
    auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::ssd);
    for (int s = 0; s < p.n_states(); ++s) {
        if (!p.pairs[0].avoid[s]) continue;
        const int i = gc.idx(s, 1);  // steady I-state
        CHECK(gc.T.row(i).sum() == doctest::Approx(1.0));
        // Self-loop on the product state; the I-state may still evolve.
        for (int s2 = 0; s2 < p.n_states(); ++s2)
            if (s2 != s)
                for (int g2 = 0; g2 < 2; ++g2)
                    CHECK(gc.T(i, gc.idx(s2, g2)) == 0.0);
    }
    // Steady-to-transient block is identically zero everywhere.
    for (int s = 0; s < p.n_states(); ++s)
        for (int s2 = 0; s2 < p.n_states(); ++s2)
            CHECK(gc.T(gc.idx(s, 1), gc.idx(s2, 0)) == 0.0);
}

TEST_CASE("requesting the steady-detecting chain on a leaking controller throws") {
    std::mt19937 rng(4);
    auto p = random_product(rng, 3, 2, 2, 2);
    auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 0});
    c.steady[1] = 1;  // flip after filling: rows now leak to I-state 0
    CHECK_THROWS_AS(chain::build_global_chain(p, c, chain::GlobalChain::Kind::ssd),
                    controller::StructureViolation);
}

TEST_CASE("identity chain: every state is its own recurrent class") {
    auto d = chain::decompose_classes(Mat::Identity(4, 4));
    CHECK(d.classes.size() == 4);
    for (char r : d.recurrent) CHECK(r == 1);
}

TEST_CASE("two-state chain with one sink decomposes into sink + transient") {
    Mat t(2, 2);
    t << 0.5, 0.5, 0.0, 1.0;
    auto d = chain::decompose_classes(t);
    REQUIRE(d.classes.size() == 2);
    CHECK(d.recurrent[d.class_of[1]] == 1);
    CHECK(d.recurrent[d.class_of[0]] == 0);
}

TEST_CASE("recurrence flags match the reachability-closure oracle") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 9);  // up to 12 states
        Mat t = random_chain(rng, n, 0.7);
        auto d = chain::decompose_classes(t);
        // Boolean transitive closure of the positive transition digraph.
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) reach[i][j] = i == j || t(i, j) > 0;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
        for (int s = 0; s < n; ++s) {
            // A state is recurrent iff everything it can reach reaches back.
            bool recurrent = true;
            for (int j = 0; j < n; ++j)
                if (reach[s][j] && !reach[j][s]) recurrent = false;
            const bool flagged = d.recurrent[d.class_of[s]] == 1;
            CHECK(flagged == recurrent);
            // States in one communicating class reach each other both ways.
            for (int j = 0; j < n; ++j)
                CHECK((d.class_of[j] == d.class_of[s]) ==
                      (reach[s][j] && reach[j][s]));
        }
    }
}

TEST_CASE("occupation frequencies from simulation identify recurrent states") {
    std::mt19937 rng(6);
    Mat t = random_chain(rng, 8, 0.6);
    auto d = chain::decompose_classes(t);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s0 = 0; s0 < 8; ++s0) {
        int returns = 0;
        const int steps = 20000;
        int s = s0;
        for (int k = 0; k < steps; ++k) {
            double x = u(rng), acc = 0.0;
            int next = 7;
            for (int j = 0; j < 8; ++j) {
                acc += t(s, j);
                if (x < acc) {
                    next = j;
                    break;
                }
            }
            s = next;
            if (s == s0) ++returns;
        }
        const double freq = static_cast<double>(returns) / steps;
        if (d.recurrent[d.class_of[s0]])
            CHECK(freq > 1e-3);  // positive long-run frequency
        else
            CHECK(freq < 0.05);  // visits die out
    }
}

TEST_CASE("limiting matrix of the identity is the identity") {
    Mat pi = chain::limiting_matrix(Mat::Identity(3, 3));
    CHECK((pi - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("limiting matrix of the period-2 swap is the half-half average") {
    Mat t(2, 2);
    t << 0, 1, 1, 0;
    Mat pi = chain::limiting_matrix(t);
    CHECK(pi(0, 0) == doctest::Approx(0.5));
    CHECK(pi(0, 1) == doctest::Approx(0.5));
    CHECK(pi(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("limiting matrix matches the Cesaro oracle and its algebra") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        Mat t = random_chain(rng, n, 0.6);
        Mat pi = chain::limiting_matrix(t);
        // Cesaro averages converge like C/n; extrapolating two horizons
        // cancels the leading term.
        Mat a1 = cesaro_limit(t, 50000);
        Mat a2 = cesaro_limit(t, 100000);
        Mat oracle = 2.0 * a2 - a1;
        CHECK((pi - oracle).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((pi * t - pi).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((t * pi - pi).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((pi * pi - pi).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 0; i < n; ++i) CHECK(pi.row(i).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("identity dynamics solve trivially: gain is the charge, bias zero") {
    Vec r(3);
    r << 0.2, 0.7, 0.1;
    auto sol = chain::poisson_solve(Mat::Identity(3, 3), r);
    CHECK((sol.gain - r).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.bias.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("absorption into a rewarded sink gives unit gain everywhere") {
    Mat t(2, 2);
    t << 0.5, 0.5, 0.0, 1.0;
    Vec r(2);
    r << 0.0, 1.0;
    auto sol = chain::poisson_solve(t, r);
    CHECK(sol.gain(0) == doctest::Approx(1.0));
    CHECK(sol.gain(1) == doctest::Approx(1.0));
}

TEST_CASE("Poisson solutions verify on random chains against the Cesaro gain") {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        Mat t = random_chain(rng, n, 0.6);
        Vec r(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < n; ++i) r(i) = u(rng) < 0.5 ? 0.0 : 1.0;
        auto sol = chain::poisson_solve(t, r);  // residuals checked internally
        Vec oracle = (2.0 * cesaro_limit(t, 100000) - cesaro_limit(t, 50000)) * r;
        CHECK((sol.gain - oracle).cwiseAbs().maxCoeff() < 1e-4);
        CHECK(sol.gain.minCoeff() >= -1e-12);
        CHECK(sol.gain.maxCoeff() <= 1.0 + 1e-12);
        // Fundamental and deviation matrices obey their definitions.
        Mat z_inv = Mat::Identity(n, n) - t + sol.limiting;
        CHECK((z_inv * sol.fundamental - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <
              1e-8);
        CHECK((sol.deviation -
               sol.fundamental * (Mat::Identity(n, n) - sol.limiting))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }
}

TEST_CASE("unichain gains collapse to the scalar long-run average") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        Mat t = random_chain(rng, n, 0.0);  // dense, hence irreducible
        Vec r(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < n; ++i) r(i) = u(rng);
        auto sol = chain::poisson_solve(t, r);
        // All states share one gain, equal to the invariant measure average.
        const double eta = sol.limiting.row(0).dot(r);
        for (int i = 0; i < n; ++i) CHECK(sol.gain(i) == doctest::Approx(eta));
        // Scalar form: eta + h = r + T h, with the same bias vector.
        Vec lhs = Vec::Constant(n, eta) + sol.bias;
        Vec rhs = r + t * sol.bias;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("hitting probabilities of designated sinks follow first-step analysis") {
    // s0 branches 0.3 to an absorbing target, 0.7 to a safe sink.
    Mat t(3, 3);
    t << 0.0, 0.3, 0.7, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
    Vec r(3);
    r << 0.0, 1.0, 0.0;
    auto sol = chain::poisson_solve(t, r);
    CHECK(sol.gain(0) == doctest::Approx(0.3));
    CHECK(sol.gain(1) == doctest::Approx(1.0));
    CHECK(sol.gain(2) == doctest::Approx(0.0));
}

TEST_CASE("absorption probability on steady-detecting chains") {
    std::mt19937 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_product(rng, 3, 2, 2, 2);
        auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
        auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::ssd);
        Vec charge = Vec::Zero(gc.n());
        std::vector<char> target(gc.n(), 0);
        for (int s = 0; s < p.n_states(); ++s)
            if (p.pairs[0].avoid[s]) {
                charge(gc.idx(s, 1)) = 1.0;
                target[gc.idx(s, 1)] = 1;
            }
        const double got = chain::absorption_probability(gc, gc.initial, charge);
        // First-passage oracle on the same chain.
        const double want = reach_probability(gc.T, target).dot(gc.initial);
        CHECK(got == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("absorption probability requires the steady-detecting kind") {
    std::mt19937 rng(11);
    auto p = random_product(rng, 3, 2, 2, 2);
    auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
    auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    CHECK_THROWS_AS(chain::absorption_probability(gc, gc.initial,
                                                  Vec::Zero(gc.n())),
                    DomainError);
}

TEST_CASE("avoid-reach on the plain chain equals the sink-modified gain") {
    // The closed loop may enter Avoid x steady states; making them sinks
    // does not change the probability of ever getting there.
    std::mt19937 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_product(rng, 3, 2, 2, 2);
        auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
        auto ssd = chain::build_global_chain(p, c, chain::GlobalChain::Kind::ssd);
        Vec charge = Vec::Zero(ssd.n());
        std::vector<char> target(ssd.n(), 0);
        for (int s = 0; s < p.n_states(); ++s)
            if (p.pairs[0].avoid[s]) {
                charge(ssd.idx(s, 1)) = 1.0;
                target[ssd.idx(s, 1)] = 1;
            }
        const double modified =
            chain::absorption_probability(ssd, ssd.initial, charge);

        // Unmodified dynamics with the same I-state structure: steady rows
        // use the raw transitions.
        controller::Sfsc c2 = c;
        auto plain_struct =
            chain::build_global_chain(p, c2, chain::GlobalChain::Kind::plain);
        const double unmodified =
            reach_probability(plain_struct.T, target).dot(plain_struct.initial);
        CHECK(modified == doctest::Approx(unmodified).epsilon(1e-8));
    }
}

TEST_CASE("cylinder probabilities up to the first Avoid hit are unchanged") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 2);  // up to 5 states
        Mat t = random_chain(rng, n, 0.3);
        std::vector<char> avoid(n, 0);
        avoid[n - 1] = 1;
        Mat t_mod = t;
        t_mod.row(n - 1).setZero();
        t_mod(n - 1, n - 1) = 1.0;

        // Exhaustive enumeration of paths that first hit Avoid at step k.
        for (int k = 1; k <= 6; ++k) {
            double mass = 0.0, mass_mod = 0.0;
            std::vector<int> path(k + 1, 0);
            // Odometer over the k free positions (the last is the hit).
            std::vector<int> idx(k, 0);
            for (;;) {
                bool valid = true;
                for (int i = 0; i < k && valid; ++i)
                    if (avoid[idx[i]]) valid = false;
                if (valid) {
                    double pr = 1.0, pr_mod = 1.0;
                    for (int i = 0; i + 1 < k; ++i) {
                        pr *= t(idx[i], idx[i + 1]);
                        pr_mod *= t_mod(idx[i], idx[i + 1]);
                    }
                    pr *= t(idx[k - 1], n - 1);
                    pr_mod *= t_mod(idx[k - 1], n - 1);
                    if (idx[0] == 0) {  // fixed start state
                        mass += pr;
                        mass_mod += pr_mod;
                    }
                }
                int pos = k - 1;
                while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
                if (pos < 0) break;
            }
            CHECK(mass == doctest::Approx(mass_mod).epsilon(1e-12));
        }
    }
}

TEST_CASE("hand-built chain: satisfaction equals mass of the flagged class") {
    // Product with 3 model states x 2 automaton states; a 1-I-state
    // controller is wired so the global chain splits 0.4 / 0.6 between a
    // feasible and an infeasible recurrent class.
    product::ProductPomdp p;
    p.actions = {"a"};
    p.observations = {"o"};
    p.atomic_props = {"p"};
    p.n_model = 3;
    p.n_dra = 2;
    for (int s = 0; s < 3; ++s)
        for (int q = 0; q < 2; ++q) {
            p.state_names.push_back("s" + std::to_string(s) + "@q" +
                                    std::to_string(q));
            p.model_of.push_back(s);
            p.dra_of.push_back(q);
        }
    Mat t = Mat::Zero(6, 6);
    t(0, 2) = 0.4;  // s0@q0 -> s1@q0 (feasible loop)
    t(0, 4) = 0.6;  // s0@q0 -> s2@q0 (infeasible loop)
    t(2, 2) = 1.0;
    t(4, 4) = 1.0;
    t(1, 1) = t(3, 3) = t(5, 5) = 1.0;  // q1 column never entered
    p.transition = {t};
    p.observation_fn = Mat::Ones(6, 1);
    p.initial = Vec::Zero(6);
    p.initial(0) = 1.0;
    product::ProductPomdp::RabinPair pair;
    pair.avoid.assign(6, 0);
    pair.repeat.assign(6, 0);
    pair.repeat[2] = 1;  // the 0.4 sink is Repeat
    pair.avoid[4] = 1;   // the 0.6 sink is Avoid
    p.pairs.push_back(pair);

    controller::Sfsc c;
    c.n_istates = 1;
    c.n_actions = 1;
    c.n_observations = 1;
    c.steady = {1};
    c.omega = {Mat::Ones(1, 1)};
    auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    auto rep = chain::phi_feasible_sets(gc, p);
    CHECK(rep.satisfaction == doctest::Approx(0.4));
    // Class-reach masses over recurrent classes always add to one.
    double total = 0.0;
    for (size_t i = 0; i < rep.decomposition.classes.size(); ++i)
        if (rep.decomposition.recurrent[i]) total += rep.class_reach(i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("class-reach masses sum to one on random closed loops") {
    std::mt19937 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_product(rng, 3, 2, 2, 2);
        auto c = random_sfsc(rng, 2, p.n_actions(), p.n_observations(), {0, 1});
        auto gc = chain::build_global_chain(p, c, chain::GlobalChain::Kind::plain);
        auto rep = chain::phi_feasible_sets(gc, p);
        double total = 0.0;
        for (size_t i = 0; i < rep.decomposition.classes.size(); ++i)
            if (rep.decomposition.recurrent[i]) total += rep.class_reach(i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(rep.satisfaction >= -1e-12);
        CHECK(rep.satisfaction <= 1.0 + 1e-12);
    }
}

TEST_CASE("reachable set is the support closure of the initial distribution") {
    Mat t(3, 3);
    t << 1, 0, 0, 0.5, 0.5, 0, 0, 0, 1;
    Vec init(3);
    init << 0, 1, 0;
    auto reach = chain::reachable_states(t, init);
    CHECK(reach[0] == 1);
    CHECK(reach[1] == 1);
    CHECK(reach[2] == 0);
}
