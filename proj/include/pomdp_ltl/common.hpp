#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pomdp_ltl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Error raised when an input file or argument is malformed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Error raised when a model/automaton violates a structural requirement.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Error raised when a numerical routine cannot deliver its contract.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation. All serializers use this so
// that parse(serialize(x)) reproduces x bit-exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("bad number: '" + tok + "'");
    return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace pomdp_ltl
