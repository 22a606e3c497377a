#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pomdp_ltl/common.hpp"

namespace pomdp_ltl::lp {

struct IterationLimit : NumericalError {
    using NumericalError::NumericalError;
};
struct NumericalBreakdown : NumericalError {
    using NumericalError::NumericalError;
};
struct UnboundedBilinearVariable : DomainError {
    using DomainError::DomainError;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

using Terms = std::vector<std::pair<int, double>>;

struct LinearProgram {
    struct Var {
        std::string name;
        double lo = 0.0;
        double hi = kInf;
    };
    struct Row {
        Terms terms;
        char rel = '<';  // '<' | '=' | '>'
        double rhs = 0.0;
    };

    std::vector<Var> vars;
    std::vector<Row> rows;
    bool maximize = true;
    Terms objective;

    int add_var(std::string name, double lo, double hi);
    int add_constraint(Terms terms, char rel, double rhs);
    void set_objective(bool maximize_sense, Terms terms);

    int n_vars() const { return static_cast<int>(vars.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }
};

struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::optimal;
    double value = 0.0;
    Vec x;      // per declared variable
    Vec duals;  // per declared constraint, in declaration order
};

/// Dense two-phase simplex. Dantzig entering rule with a lexicographic
/// ratio test for the leaving row, so results are deterministic and cycling
/// cannot occur; the tableau is periodically rebuilt from the original data
/// to shed accumulated roundoff. Duals follow the convention that for a
/// maximization problem the dual of a binding '<' row is nonnegative.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

struct BilinearProgram {
    LinearProgram lp;
    struct Term {
        int row = -1;  // constraint index, or -1 for the objective
        int xi = 0;
        int xj = 0;
        double coeff = 0.0;
    };
    std::vector<Term> terms;

    void add_term(int row, int xi, int xj, double coeff) {
        terms.push_back({row, xi, xj, coeff});
    }
};

/// Replaces each product x_i * x_j by a fresh variable bounded by the four
/// McCormick envelope inequalities built from the factor bounds; everything
/// linear passes through unchanged. Factor bounds must be finite.
LinearProgram relax_bilinear(const BilinearProgram& bp);

/// Plain-text dump of an LP (variables with bounds, objective, rows), for
/// external cross-checking.
std::string dump_lp(const LinearProgram& lp);

}  // namespace pomdp_ltl::lp
