#include "pomdp_ltl/controller.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "pomdp_ltl/chain.hpp"

namespace pomdp_ltl::controller {

int Sfsc::n_steady() const {
    return static_cast<int>(std::count(steady.begin(), steady.end(), char(1)));
}

Sfsc make_uniform_sfsc(int n_istates, int n_actions, int n_observations,
                       const std::vector<char>& steady) {
    Sfsc c;
    c.n_istates = n_istates;
    c.n_actions = n_actions;
    c.n_observations = n_observations;
    c.steady = steady;
    c.omega.assign(static_cast<size_t>(n_istates) * n_observations,
                   Mat::Zero(n_istates, n_actions));
    for (int g = 0; g < n_istates; ++g) {
        int allowed = 0;
        for (int g2 = 0; g2 < n_istates; ++g2)
            if (!steady[g] || steady[g2]) ++allowed;
        const double mass = 1.0 / (static_cast<double>(allowed) * n_actions);
        for (int o = 0; o < n_observations; ++o)
            for (int g2 = 0; g2 < n_istates; ++g2)
                if (!steady[g] || steady[g2]) c.w(g, o).row(g2).setConstant(mass);
    }
    return c;
}

std::vector<std::string> check_sfsc(const Sfsc& c, double tol) {
    std::vector<std::string> out;
    if (static_cast<int>(c.steady.size()) != c.n_istates)
        out.push_back("partition flags must cover every I-state");
    if (static_cast<int>(c.omega.size()) !=
        static_cast<long>(c.n_istates) * c.n_observations)
        out.push_back("omega must have one row per (I-state, observation)");
    for (int g = 0; g < c.n_istates && out.empty(); ++g)
        for (int o = 0; o < c.n_observations; ++o) {
            const Mat& w = c.w(g, o);
            if (w.rows() != c.n_istates || w.cols() != c.n_actions) {
                out.push_back("omega(" + std::to_string(g) + "," + std::to_string(o) +
                              "): wrong shape");
                continue;
            }
            if (w.minCoeff() < 0)
                out.push_back("omega(" + std::to_string(g) + "," + std::to_string(o) +
                              "): negative entry");
            if (std::abs(w.sum() - 1.0) > tol)
                out.push_back("omega(" + std::to_string(g) + "," + std::to_string(o) +
                              "): sums to " + format_double(w.sum()));
            if (c.steady[g])
                for (int g2 = 0; g2 < c.n_istates; ++g2)
                    if (!c.steady[g2] && w.row(g2).sum() > 0)
                        out.push_back("omega(" + std::to_string(g) + "," +
                                      std::to_string(o) + "): steady I-state leaks to " +
                                      "transient I-state " + std::to_string(g2));
        }
    if (c.initial_istate < 0 || c.initial_istate >= c.n_istates)
        out.push_back("initial I-state out of range");
    return out;
}

Sfsc induce_controller(const Sfsc& product_sfsc) { return product_sfsc; }

Vec evaluate_discounted(const product::ProductPomdp& p, const Sfsc& c,
                        const product::LtlRewards& rewards, EvalMethod method,
                        double tol) {
    chain::GlobalChain gc = build_global_chain(p, c, chain::GlobalChain::Kind::plain);
    const int n = gc.n();
    Vec r(n);
    for (int s = 0; s < gc.n_product; ++s)
        for (int g = 0; g < gc.n_istates; ++g)
            r(gc.idx(s, g)) = rewards.repeat_reward(s) * rewards.istate_reward(g);
    const double beta = rewards.discount;
    if (method == EvalMethod::direct) {
        Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) - beta * gc.T);
        return lu.solve(r);
    }
    // Value iteration with geometric-tail extrapolation: successive
    // differences contract by beta, so the remaining tail is close to
    // beta/(1-beta) times the last difference. The same factor bounds the
    // true error, giving an honest stopping rule.
    const double tail = beta / (1.0 - beta);
    Vec v = Vec::Zero(n);
    for (;;) {
        Vec next = r + beta * (gc.T * v);
        Vec delta = next - v;
        const double diff = delta.cwiseAbs().maxCoeff();
        v = std::move(next);
        if (tail * diff < tol) return v + tail * delta;
    }
}

double value_at_belief(const Vec& values, int n_istates, int g, const Vec& belief) {
    double v = 0.0;
    for (int s = 0; s < belief.size(); ++s) v += belief(s) * values(s * n_istates + g);
    return v;
}

int best_istate(const Vec& values, int n_istates, const Vec& belief) {
    int best = 0;
    double best_v = value_at_belief(values, n_istates, 0, belief);
    for (int g = 1; g < n_istates; ++g) {
        const double v = value_at_belief(values, n_istates, g, belief);
        if (v > best_v) {
            best = g;
            best_v = v;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Text format:
//   istates <n>
//   steady <g...>
//   initial <g>
//   omega
//     g,obs -> g',action : p

std::string serialize_sfsc(const Sfsc& c, const std::vector<std::string>& action_names,
                           const std::vector<std::string>& observation_names) {
    std::ostringstream os;
    os << "istates " << c.n_istates << "\nsteady";
    for (int g = 0; g < c.n_istates; ++g)
        if (c.steady[g]) os << ' ' << g;
    os << "\ninitial " << c.initial_istate << "\nomega\n";
    for (int g = 0; g < c.n_istates; ++g)
        for (int o = 0; o < c.n_observations; ++o)
            for (int g2 = 0; g2 < c.n_istates; ++g2)
                for (int a = 0; a < c.n_actions; ++a)
                    if (c.w(g, o)(g2, a) != 0.0)
                        os << "  " << g << ',' << observation_names[o] << " -> " << g2
                           << ',' << action_names[a] << " : "
                           << format_double(c.w(g, o)(g2, a)) << "\n";
    return os.str();
}

namespace {

int name_index(const std::vector<std::string>& names, const std::string& name,
               const char* what) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw ParseError(std::string("unknown ") + what + ": '" + name + "'");
    return static_cast<int>(it - names.begin());
}

std::pair<std::string, std::string> split_comma(const std::string& tok, int lineno) {
    auto comma = tok.find(',');
    if (comma == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) + ": expected 'x,y' in '" +
                         tok + "'");
    return {tok.substr(0, comma), tok.substr(comma + 1)};
}

}  // namespace

Sfsc parse_sfsc(std::istream& in, const std::vector<std::string>& action_names,
                const std::vector<std::string>& observation_names) {
    Sfsc c;
    c.n_actions = static_cast<int>(action_names.size());
    c.n_observations = static_cast<int>(observation_names.size());
    std::string line;
    int lineno = 0;
    bool in_omega = false;
    auto err = [&](const std::string& msg) {
        return ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (!in_omega) {
            if (toks[0] == "istates" && toks.size() == 2) {
                c.n_istates = static_cast<int>(parse_double(toks[1]));
                c.steady.assign(c.n_istates, 0);
                c.omega.assign(static_cast<size_t>(c.n_istates) * c.n_observations,
                               Mat::Zero(c.n_istates, c.n_actions));
            } else if (toks[0] == "steady") {
                for (size_t i = 1; i < toks.size(); ++i)
                    c.steady.at(static_cast<int>(parse_double(toks[i]))) = 1;
            } else if (toks[0] == "initial" && toks.size() == 2) {
                c.initial_istate = static_cast<int>(parse_double(toks[1]));
            } else if (toks[0] == "omega" && toks.size() == 1) {
                in_omega = true;
            } else {
                throw err("unexpected line before omega section");
            }
            continue;
        }
        if (toks.size() != 5 || toks[1] != "->" || toks[3] != ":")
            throw err("expected \"g,obs -> g',action : p\"");
        auto [g_str, o_str] = split_comma(toks[0], lineno);
        auto [g2_str, a_str] = split_comma(toks[2], lineno);
        const int g = static_cast<int>(parse_double(g_str));
        const int g2 = static_cast<int>(parse_double(g2_str));
        const int o = name_index(observation_names, o_str, "observation");
        const int a = name_index(action_names, a_str, "action");
        if (g < 0 || g >= c.n_istates || g2 < 0 || g2 >= c.n_istates)
            throw err("I-state index out of range");
        c.w(g, o)(g2, a) = parse_double(toks[4]);
    }
    auto problems = check_sfsc(c);
    if (!problems.empty()) throw ParseError("sfsc: " + problems.front());
    return c;
}

}  // namespace pomdp_ltl::controller
