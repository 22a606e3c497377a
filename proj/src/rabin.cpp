#include "pomdp_ltl/rabin.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace pomdp_ltl::rabin {

int Dra::state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end()) throw UnknownState("unknown automaton state: '" + name + "'");
    return static_cast<int>(it - states.begin());
}

std::vector<std::string> validate_dra(const Dra& dra) {
    std::vector<std::string> out;
    const int q = dra.n_states(), l = dra.n_letters();
    if (q == 0) out.push_back("automaton has no states");
    if (dra.initial < 0 || dra.initial >= q) out.push_back("initial state out of range");
    if (dra.pairs.empty()) out.push_back("at least one accepting pair required");
    if (static_cast<int>(dra.delta.size()) != q) {
        out.push_back("delta must have one row per state");
        return out;
    }
    for (int i = 0; i < q; ++i) {
        if (static_cast<int>(dra.delta[i].size()) != l) {
            out.push_back("delta(" + dra.states[i] + ") is not total over 2^AP");
            continue;
        }
        for (int a = 0; a < l; ++a)
            if (dra.delta[i][a] < 0 || dra.delta[i][a] >= q)
                out.push_back("delta(" + dra.states[i] + ", letter " + std::to_string(a) +
                              ") out of range");
    }
    for (size_t r = 0; r < dra.pairs.size(); ++r)
        for (const auto& set : {dra.pairs[r].avoid, dra.pairs[r].repeat})
            for (int s : set)
                if (s < 0 || s >= q)
                    out.push_back("pair " + std::to_string(r) + " references state out of range");
    return out;
}

int dra_step(const Dra& dra, int q, Letter letter) {
    if (q < 0 || q >= dra.n_states())
        throw UnknownState("dra_step: state index " + std::to_string(q) + " out of range");
    if (letter >= static_cast<Letter>(dra.n_letters()))
        throw UnknownLetter("dra_step: letter " + std::to_string(letter) + " outside 2^AP");
    return dra.delta[q][letter];
}

bool accepts_lasso(const Dra& dra, const std::vector<Letter>& prefix,
                   const std::vector<Letter>& cycle) {
    if (cycle.empty()) throw DomainError("accepts_lasso: cycle must be nonempty");
    int q = dra.initial;
    for (Letter l : prefix) q = dra_step(dra, q, l);

    // The state reached at the start of each cycle pass is eventually
    // periodic; the states visited infinitely often are exactly those seen
    // during one period of passes.
    std::map<int, int> first_seen;
    int head = q;
    while (first_seen.find(head) == first_seen.end()) {
        first_seen[head] = 1;
        for (Letter l : cycle) head = dra_step(dra, head, l);
    }
    std::set<int> inf;
    int h = head;
    do {
        for (Letter l : cycle) {
            inf.insert(h);
            h = dra_step(dra, h, l);
        }
    } while (h != head);

    for (const auto& pair : dra.pairs) {
        bool hits_avoid = std::any_of(pair.avoid.begin(), pair.avoid.end(),
                                      [&](int s) { return inf.count(s) > 0; });
        bool hits_repeat = std::any_of(pair.repeat.begin(), pair.repeat.end(),
                                       [&](int s) { return inf.count(s) > 0; });
        if (!hits_avoid && hits_repeat) return true;
    }
    return false;
}

namespace {

constexpr Letter kA = 1, kB = 2, kC = 4;

Dra make_case1() {
    // Eventually-always b, never c. q0: last letter was not b; q1: last
    // letter was b; qC: permanent rejection after c.
    Dra d;
    d.states = {"q0", "q1", "qC"};
    d.atomic_props = {"a", "b", "c"};
    d.initial = 0;
    d.delta.assign(3, std::vector<int>(8, 0));
    for (Letter l = 0; l < 8; ++l) {
        int target = (l & kC) ? 2 : ((l & kB) ? 1 : 0);
        d.delta[0][l] = target;
        d.delta[1][l] = target;
        d.delta[2][l] = 2;
    }
    d.pairs = {{{0, 2}, {1}}};
    return d;
}

Dra make_case2() {
    // Infinitely often a, infinitely often b, never c. q0: waiting for a;
    // q1: saw a, waiting for b; q2: completed an a-then-b round (restarts
    // like q0); qC: permanent rejection after c.
    Dra d;
    d.states = {"q0", "q1", "q2", "qC"};
    d.atomic_props = {"a", "b", "c"};
    d.initial = 0;
    d.delta.assign(4, std::vector<int>(8, 0));
    for (Letter l = 0; l < 8; ++l) {
        if (l & kC) {
            for (int q = 0; q < 4; ++q) d.delta[q][l] = 3;
            continue;
        }
        int from_wait_a = ((l & kA) && (l & kB)) ? 2 : ((l & kA) ? 1 : 0);
        d.delta[0][l] = from_wait_a;
        d.delta[1][l] = (l & kB) ? 2 : 1;
        d.delta[2][l] = from_wait_a;
        d.delta[3][l] = 3;
    }
    d.pairs = {{{3}, {2}}};
    return d;
}

}  // namespace

Dra builtin_dra(const std::string& name) {
    if (name == "case1") return make_case1();
    if (name == "case2") return make_case2();
    throw UnknownName("no builtin automaton named '" + name + "'");
}

// ---------------------------------------------------------------------------
// Text format: sections `states`, `ap`, `initial`, `transitions` (one line
// `q -- {props} --> q'` each), and one `pairs:` block per accepting pair
// with `avoid ...` / `repeat ...` lines.

Dra parse_dra(std::istream& in) {
    Dra d;
    struct Trans {
        std::string from, to;
        std::vector<std::string> props;
        int lineno;
    };
    std::vector<Trans> trans;
    std::string initial_name;
    // Pair member names, resolved to indices once the state list is complete.
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pair_names;

    std::string line, section;
    int lineno = 0;
    auto err = [&](const std::string& msg) {
        return ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string spaced;
        for (char c : line) {
            if (c == '{' || c == '}') {
                spaced += ' ';
                spaced += c;
                spaced += ' ';
            } else {
                spaced += c;
            }
        }
        auto toks = split_ws(spaced);
        if (toks.empty()) continue;
        if (toks.size() == 1 && (toks[0] == "states" || toks[0] == "ap" ||
                                 toks[0] == "initial" || toks[0] == "transitions" ||
                                 toks[0] == "pairs:")) {
            section = toks[0];
            if (section == "pairs:") pair_names.push_back({});
            continue;
        }
        if (section == "states") {
            d.states.insert(d.states.end(), toks.begin(), toks.end());
        } else if (section == "ap") {
            d.atomic_props.insert(d.atomic_props.end(), toks.begin(), toks.end());
        } else if (section == "initial") {
            if (toks.size() != 1 || !initial_name.empty())
                throw err("expected a single initial state");
            initial_name = toks[0];
        } else if (section == "transitions") {
            size_t i = 0;
            auto need = [&](const std::string& what) -> std::string {
                if (i >= toks.size()) throw err("truncated transition; expected " + what);
                return toks[i++];
            };
            Trans t;
            t.lineno = lineno;
            t.from = need("source state");
            if (need("'--'") != "--") throw err("expected '--' after source state");
            if (need("'{'") != "{") throw err("expected '{'");
            for (;;) {
                std::string tok = need("'}' or proposition");
                if (tok == "}") break;
                t.props.push_back(tok);
            }
            if (need("'-->'") != "-->") throw err("expected '-->'");
            t.to = need("target state");
            if (i != toks.size()) throw err("trailing tokens after transition");
            trans.push_back(std::move(t));
        } else if (section == "pairs:") {
            if (toks[0] != "avoid" && toks[0] != "repeat")
                throw err("expected 'avoid' or 'repeat' line inside pairs block");
            auto& dst = toks[0] == "avoid" ? pair_names.back().first
                                           : pair_names.back().second;
            dst.insert(dst.end(), toks.begin() + 1, toks.end());
        } else {
            throw err("content before any section header");
        }
    }
    if (d.states.empty()) throw ParseError("dra: empty 'states' section");
    if (initial_name.empty()) throw ParseError("dra: missing 'initial' section");
    d.initial = d.state_index(initial_name);

    const int nl = d.n_letters();
    d.delta.assign(d.states.size(), std::vector<int>(nl, -1));
    auto ap_index = [&](const std::string& p) {
        auto it = std::find(d.atomic_props.begin(), d.atomic_props.end(), p);
        if (it == d.atomic_props.end())
            throw ParseError("unknown atomic proposition '" + p + "'");
        return static_cast<int>(it - d.atomic_props.begin());
    };
    for (const auto& t : trans) {
        Letter l = 0;
        for (const auto& p : t.props) l |= 1u << ap_index(p);
        d.delta[d.state_index(t.from)][l] = d.state_index(t.to);
    }
    for (const auto& [avoid, repeat] : pair_names) {
        RabinPair pair;
        for (const auto& s : avoid) pair.avoid.push_back(d.state_index(s));
        for (const auto& s : repeat) pair.repeat.push_back(d.state_index(s));
        d.pairs.push_back(std::move(pair));
    }

    auto problems = validate_dra(d);
    for (size_t i = 0; i < d.delta.size(); ++i)
        for (int l = 0; l < nl; ++l)
            if (d.delta[i][l] < 0)
                problems.push_back("delta(" + d.states[i] + ") missing letter " +
                                   std::to_string(l));
    if (!problems.empty()) throw ParseError("dra: " + problems.front());
    return d;
}

Dra parse_dra_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return parse_dra(in);
}

std::string serialize_dra(const Dra& d) {
    std::ostringstream os;
    os << "states\n ";
    for (const auto& s : d.states) os << ' ' << s;
    os << "\nap\n ";
    for (const auto& p : d.atomic_props) os << ' ' << p;
    os << "\ninitial\n  " << d.states[d.initial] << "\ntransitions\n";
    for (int q = 0; q < d.n_states(); ++q)
        for (int l = 0; l < d.n_letters(); ++l) {
            os << "  " << d.states[q] << " -- {";
            for (size_t k = 0; k < d.atomic_props.size(); ++k)
                if (l & (1 << k)) os << ' ' << d.atomic_props[k];
            os << " } --> " << d.states[d.delta[q][l]] << "\n";
        }
    for (const auto& pair : d.pairs) {
        os << "pairs:\n  avoid";
        for (int s : pair.avoid) os << ' ' << d.states[s];
        os << "\n  repeat";
        for (int s : pair.repeat) os << ' ' << d.states[s];
        os << "\n";
    }
    return os.str();
}

}  // namespace pomdp_ltl::rabin
