#include "pomdp_ltl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace pomdp_ltl::model {

namespace {

int index_of(const std::vector<std::string>& names, const std::string& name,
             const char* what) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw DomainError(std::string("unknown ") + what + ": '" + name + "'");
    return static_cast<int>(it - names.begin());
}

}  // namespace

int LabeledPomdp::state_index(const std::string& name) const {
    return index_of(states, name, "state");
}
int LabeledPomdp::action_index(const std::string& name) const {
    return index_of(actions, name, "action");
}
int LabeledPomdp::observation_index(const std::string& name) const {
    return index_of(observations, name, "observation");
}

std::vector<Violation> validate_pomdp(const LabeledPomdp& m, double tol) {
    std::vector<Violation> out;
    const int n = m.n_states();

    auto check_row = [&](const Vec& row, const std::string& where) {
        double sum = 0.0;
        for (int j = 0; j < row.size(); ++j) {
            if (row(j) < 0.0 || row(j) > 1.0) {
                out.push_back({where, row(j),
                               where + ": entry " + format_double(row(j)) +
                                   " outside [0,1]"});
            }
            sum += row(j);
        }
        if (std::abs(sum - 1.0) > tol) {
            out.push_back({where, std::abs(sum - 1.0),
                           where + ": row sums to " + format_double(sum) +
                               " (deviation " + format_double(std::abs(sum - 1.0)) +
                               ")"});
        }
    };

    if (static_cast<int>(m.transition.size()) != m.n_actions()) {
        out.push_back({"transition", 0.0, "transition: one matrix per action required"});
        return out;
    }
    for (int a = 0; a < m.n_actions(); ++a) {
        for (int i = 0; i < n; ++i)
            check_row(m.transition[a].row(i),
                      "transition(" + m.states[i] + ", " + m.actions[a] + ")");
    }
    for (int i = 0; i < n; ++i)
        check_row(m.observation_fn.row(i), "observation_fn(" + m.states[i] + ")");
    check_row(m.initial.transpose(), "initial");

    if (static_cast<int>(m.labeling.size()) != n)
        out.push_back({"labeling", 0.0, "labeling: must be total over states"});
    const Letter full = m.atomic_props.empty()
                            ? 0u
                            : ((1u << m.atomic_props.size()) - 1u);
    for (size_t i = 0; i < m.labeling.size(); ++i) {
        if (m.labeling[i] & ~full)
            out.push_back({"labeling(" + m.states[i] + ")", 0.0,
                           "labeling(" + m.states[i] + "): unknown proposition bit"});
    }
    return out;
}

Belief belief_init(const LabeledPomdp& m, int o0) {
    Vec b = m.initial.cwiseProduct(m.observation_fn.col(o0));
    const double z = b.sum();
    if (z <= 0.0)
        throw ZeroLikelihood("belief_init: observation '" + m.observations[o0] +
                             "' has zero probability under the initial distribution");
    return Belief{b / z};
}

Belief belief_update(const LabeledPomdp& m, const Belief& b_prev, int action, int obs) {
    Vec pushed = m.transition[action].transpose() * b_prev.p;
    Vec b = pushed.cwiseProduct(m.observation_fn.col(obs));
    const double z = b.sum();
    if (z <= 0.0)
        throw ZeroLikelihood("belief_update: (action '" + m.actions[action] +
                             "', observation '" + m.observations[obs] +
                             "') has zero probability from the given belief");
    return Belief{b / z};
}

// ---------------------------------------------------------------------------
// Text format. Sections in order: states, actions, observations, transition,
// observation_fn, initial, ap, labeling, reward. Omitted entries are 0.

namespace {

Letter parse_letter(const std::vector<std::string>& aps,
                    const std::vector<std::string>& toks, size_t from) {
    Letter l = 0;
    for (size_t k = from; k < toks.size(); ++k)
        l |= 1u << index_of(aps, toks[k], "atomic proposition");
    return l;
}

}  // namespace

LabeledPomdp parse_pomdp(std::istream& in) {
    LabeledPomdp m;
    std::string line, section;
    struct Entry {
        std::vector<std::string> toks;
        int lineno;
    };
    std::map<std::string, std::vector<Entry>> body;
    static const std::vector<std::string> sections = {
        "states", "actions", "observations", "transition", "observation_fn",
        "initial", "ap", "labeling", "reward"};

    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() == 1 &&
            std::find(sections.begin(), sections.end(), toks[0]) != sections.end()) {
            section = toks[0];
            continue;
        }
        if (section.empty())
            throw ParseError("line " + std::to_string(lineno) + ": content before any section header");
        body[section].push_back({toks, lineno});
    }

    auto names_of = [&](const std::string& sec) {
        std::vector<std::string> out;
        for (auto& e : body[sec])
            for (auto& t : e.toks) out.push_back(t);
        return out;
    };
    m.states = names_of("states");
    m.actions = names_of("actions");
    m.observations = names_of("observations");
    m.atomic_props = names_of("ap");
    if (m.states.empty()) throw ParseError("pomdp: empty 'states' section");
    if (m.actions.empty()) throw ParseError("pomdp: empty 'actions' section");
    if (m.observations.empty()) throw ParseError("pomdp: empty 'observations' section");

    const int n = m.n_states();
    m.transition.assign(m.actions.size(), Mat::Zero(n, n));
    m.observation_fn = Mat::Zero(n, m.n_observations());
    m.initial = Vec::Zero(n);
    m.labeling.assign(n, 0);
    m.state_reward = Vec::Zero(n);

    for (auto& e : body["transition"]) {
        if (e.toks.size() != 4)
            throw ParseError("line " + std::to_string(e.lineno) + ": expected 's a s2 p'");
        m.transition[m.action_index(e.toks[1])](m.state_index(e.toks[0]),
                                                m.state_index(e.toks[2])) =
            parse_double(e.toks[3]);
    }
    for (auto& e : body["observation_fn"]) {
        if (e.toks.size() != 3)
            throw ParseError("line " + std::to_string(e.lineno) + ": expected 's o p'");
        m.observation_fn(m.state_index(e.toks[0]), m.observation_index(e.toks[1])) =
            parse_double(e.toks[2]);
    }
    for (auto& e : body["initial"]) {
        if (e.toks.size() != 2)
            throw ParseError("line " + std::to_string(e.lineno) + ": expected 's p'");
        m.initial(m.state_index(e.toks[0])) = parse_double(e.toks[1]);
    }
    for (auto& e : body["labeling"]) {
        if (e.toks.size() < 2 || e.toks[1] != ":")
            throw ParseError("line " + std::to_string(e.lineno) + ": expected 's : props...'");
        m.labeling[m.state_index(e.toks[0])] = parse_letter(m.atomic_props, e.toks, 2);
    }
    for (auto& e : body["reward"]) {
        if (e.toks.size() != 2)
            throw ParseError("line " + std::to_string(e.lineno) + ": expected 's r'");
        m.state_reward(m.state_index(e.toks[0])) = parse_double(e.toks[1]);
    }
    return m;
}

LabeledPomdp parse_pomdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return parse_pomdp(in);
}

std::string serialize_pomdp(const LabeledPomdp& m) {
    std::ostringstream os;
    auto list_section = [&](const char* name, const std::vector<std::string>& xs) {
        os << name << "\n ";
        for (auto& x : xs) os << ' ' << x;
        os << "\n";
    };
    list_section("states", m.states);
    list_section("actions", m.actions);
    list_section("observations", m.observations);
    os << "transition\n";
    for (int a = 0; a < m.n_actions(); ++a)
        for (int i = 0; i < m.n_states(); ++i)
            for (int j = 0; j < m.n_states(); ++j)
                if (m.transition[a](i, j) != 0.0)
                    os << "  " << m.states[i] << ' ' << m.actions[a] << ' '
                       << m.states[j] << ' ' << format_double(m.transition[a](i, j))
                       << "\n";
    os << "observation_fn\n";
    for (int i = 0; i < m.n_states(); ++i)
        for (int o = 0; o < m.n_observations(); ++o)
            if (m.observation_fn(i, o) != 0.0)
                os << "  " << m.states[i] << ' ' << m.observations[o] << ' '
                   << format_double(m.observation_fn(i, o)) << "\n";
    os << "initial\n";
    for (int i = 0; i < m.n_states(); ++i)
        if (m.initial(i) != 0.0)
            os << "  " << m.states[i] << ' ' << format_double(m.initial(i)) << "\n";
    if (!m.atomic_props.empty()) list_section("ap", m.atomic_props);
    os << "labeling\n";
    for (int i = 0; i < m.n_states(); ++i) {
        if (m.labeling[i] == 0) continue;
        os << "  " << m.states[i] << " :";
        for (size_t k = 0; k < m.atomic_props.size(); ++k)
            if (m.labeling[i] & (1u << k)) os << ' ' << m.atomic_props[k];
        os << "\n";
    }
    if (m.state_reward.size() == m.n_states() && m.state_reward.any()) {
        os << "reward\n";
        for (int i = 0; i < m.n_states(); ++i)
            if (m.state_reward(i) != 0.0)
                os << "  " << m.states[i] << ' ' << format_double(m.state_reward(i))
                   << "\n";
    }
    return os.str();
}

}  // namespace pomdp_ltl::model
