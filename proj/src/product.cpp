#include "pomdp_ltl/product.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace pomdp_ltl::product {

ProductPomdp build_product(const model::LabeledPomdp& m, const rabin::Dra& dra,
                           bool prune) {
    if (m.atomic_props != dra.atomic_props)
        throw AlphabetMismatch("product: POMDP and automaton AP sets differ");

    const int ns = m.n_states(), nq = dra.n_states();
    ProductPomdp p;
    p.actions = m.actions;
    p.observations = m.observations;
    p.atomic_props = m.atomic_props;
    p.n_model = ns;
    p.n_dra = nq;

    const int n = ns * nq;
    std::vector<int> succ_q(n);  // delta(q, h(s)) per product state s*nq+q
    for (int s = 0; s < ns; ++s)
        for (int q = 0; q < nq; ++q)
            succ_q[s * nq + q] = dra.delta[q][m.labeling[s]];

    std::vector<Mat> trans(m.n_actions(), Mat::Zero(n, n));
    for (int a = 0; a < m.n_actions(); ++a)
        for (int s = 0; s < ns; ++s)
            for (int q = 0; q < nq; ++q) {
                const int i = s * nq + q, ql = succ_q[i];
                for (int s2 = 0; s2 < ns; ++s2)
                    trans[a](i, s2 * nq + ql) = m.transition[a](s, s2);
            }
    Vec init = Vec::Zero(n);
    for (int s = 0; s < ns; ++s)
        init(s * nq + dra.delta[dra.initial][m.labeling[s]]) += m.initial(s);

    std::vector<int> keep(n);
    if (prune) {
        std::vector<char> reach(n, 0);
        std::deque<int> queue;
        for (int i = 0; i < n; ++i)
            if (init(i) > 0) {
                reach[i] = 1;
                queue.push_back(i);
            }
        while (!queue.empty()) {
            int i = queue.front();
            queue.pop_front();
            for (int a = 0; a < m.n_actions(); ++a)
                for (int j = 0; j < n; ++j)
                    if (trans[a](i, j) > 0 && !reach[j]) {
                        reach[j] = 1;
                        queue.push_back(j);
                    }
        }
        keep.clear();
        for (int i = 0; i < n; ++i)
            if (reach[i]) keep.push_back(i);
    } else {
        for (int i = 0; i < n; ++i) keep[i] = i;
    }

    const int nk = static_cast<int>(keep.size());
    p.state_names.resize(nk);
    p.model_of.resize(nk);
    p.dra_of.resize(nk);
    for (int k = 0; k < nk; ++k) {
        int s = keep[k] / nq, q = keep[k] % nq;
        p.model_of[k] = s;
        p.dra_of[k] = q;
        p.state_names[k] = m.states[s] + "@" + dra.states[q];
    }
    p.transition.assign(m.n_actions(), Mat::Zero(nk, nk));
    for (int a = 0; a < m.n_actions(); ++a)
        for (int i = 0; i < nk; ++i)
            for (int j = 0; j < nk; ++j)
                p.transition[a](i, j) = trans[a](keep[i], keep[j]);
    p.observation_fn = Mat::Zero(nk, m.n_observations());
    p.initial = Vec::Zero(nk);
    for (int k = 0; k < nk; ++k) {
        p.observation_fn.row(k) = m.observation_fn.row(p.model_of[k]);
        p.initial(k) = init(keep[k]);
    }
    for (const auto& pair : dra.pairs) {
        ProductPomdp::RabinPair lifted;
        lifted.avoid.assign(nk, 0);
        lifted.repeat.assign(nk, 0);
        for (int k = 0; k < nk; ++k) {
            int q = p.dra_of[k];
            if (std::count(pair.avoid.begin(), pair.avoid.end(), q)) lifted.avoid[k] = 1;
            if (std::count(pair.repeat.begin(), pair.repeat.end(), q)) lifted.repeat[k] = 1;
        }
        p.pairs.push_back(std::move(lifted));
    }
    return p;
}

std::vector<Mat> modified_transition(const ProductPomdp& p) {
    std::vector<Mat> out = p.transition;
    const auto& avoid = p.pairs.at(p.rabin_index).avoid;
    for (auto& t : out)
        for (int i = 0; i < p.n_states(); ++i)
            if (avoid[i]) {
                t.row(i).setZero();
                t(i, i) = 1.0;
            }
    return out;
}

LtlRewards make_ltl_rewards(const ProductPomdp& p, const std::vector<char>& steady,
                            double discount) {
    LtlRewards r;
    const auto& pair = p.pairs.at(p.rabin_index);
    r.repeat_reward = Vec::Zero(p.n_states());
    r.avoid_reward = Vec::Zero(p.n_states());
    for (int i = 0; i < p.n_states(); ++i) {
        r.repeat_reward(i) = pair.repeat[i] ? 1.0 : 0.0;
        r.avoid_reward(i) = pair.avoid[i] ? 1.0 : 0.0;
    }
    r.istate_reward = Vec::Zero(static_cast<int>(steady.size()));
    for (size_t g = 0; g < steady.size(); ++g) r.istate_reward(g) = steady[g] ? 1.0 : 0.0;
    r.discount = discount;
    return r;
}

Vec steady_state_seed(const ProductPomdp& p, const std::vector<char>& steady) {
    const int ng = static_cast<int>(steady.size());
    const auto& repeat = p.pairs.at(p.rabin_index).repeat;
    const long n_ss = std::count(steady.begin(), steady.end(), char(1));
    const long n_rep = std::count(repeat.begin(), repeat.end(), char(1));
    if (n_ss == 0) throw EmptySteadyPartition("steady_state_seed: empty steady partition");
    if (n_rep == 0) throw EmptyRepeat("steady_state_seed: empty Repeat set");
    Vec out = Vec::Zero(p.n_states() * ng);
    const double mass = 1.0 / (static_cast<double>(n_ss) * static_cast<double>(n_rep));
    for (int s = 0; s < p.n_states(); ++s)
        if (repeat[s])
            for (int g = 0; g < ng; ++g)
                if (steady[g]) out(s * ng + g) = mass;
    return out;
}

Vec steady_seed_slice(const ProductPomdp& p, const std::vector<char>& steady, int g) {
    const auto& repeat = p.pairs.at(p.rabin_index).repeat;
    if (g < 0 || g >= static_cast<int>(steady.size()) || !steady[g])
        throw EmptySteadyPartition("steady_seed_slice: I-state not in the steady partition");
    const long n_rep = std::count(repeat.begin(), repeat.end(), char(1));
    if (n_rep == 0) throw EmptyRepeat("steady_seed_slice: empty Repeat set");
    Vec out = Vec::Zero(p.n_states());
    for (int s = 0; s < p.n_states(); ++s)
        if (repeat[s]) out(s) = 1.0 / static_cast<double>(n_rep);
    return out;
}

std::string serialize_product(const ProductPomdp& p) {
    std::ostringstream os;
    os << "states\n ";
    for (const auto& s : p.state_names) os << ' ' << s;
    os << "\nactions\n ";
    for (const auto& a : p.actions) os << ' ' << a;
    os << "\nobservations\n ";
    for (const auto& o : p.observations) os << ' ' << o;
    os << "\ntransition\n";
    for (int a = 0; a < p.n_actions(); ++a)
        for (int i = 0; i < p.n_states(); ++i)
            for (int j = 0; j < p.n_states(); ++j)
                if (p.transition[a](i, j) != 0.0)
                    os << "  " << p.state_names[i] << ' ' << p.actions[a] << ' '
                       << p.state_names[j] << ' ' << format_double(p.transition[a](i, j))
                       << "\n";
    os << "observation_fn\n";
    for (int i = 0; i < p.n_states(); ++i)
        for (int o = 0; o < p.n_observations(); ++o)
            if (p.observation_fn(i, o) != 0.0)
                os << "  " << p.state_names[i] << ' ' << p.observations[o] << ' '
                   << format_double(p.observation_fn(i, o)) << "\n";
    os << "initial\n";
    for (int i = 0; i < p.n_states(); ++i)
        if (p.initial(i) != 0.0)
            os << "  " << p.state_names[i] << ' ' << format_double(p.initial(i)) << "\n";
    os << "pairs\n";
    for (size_t r = 0; r < p.pairs.size(); ++r) {
        os << "  avoid " << r;
        for (int i = 0; i < p.n_states(); ++i)
            if (p.pairs[r].avoid[i]) os << ' ' << p.state_names[i];
        os << "\n  repeat " << r;
        for (int i = 0; i < p.n_states(); ++i)
            if (p.pairs[r].repeat[i]) os << ' ' << p.state_names[i];
        os << "\n";
    }
    return os.str();
}

}  // namespace pomdp_ltl::product
