#include "pomdp_ltl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pomdp_ltl::lp {

int LinearProgram::add_var(std::string name, double lo, double hi) {
    if (lo > hi) throw DomainError("variable '" + name + "': lower bound above upper");
    vars.push_back({std::move(name), lo, hi});
    return n_vars() - 1;
}

int LinearProgram::add_constraint(Terms terms, char rel, double rhs) {
    if (rel != '<' && rel != '=' && rel != '>')
        throw DomainError("constraint relation must be one of '<', '=', '>'");
    for (auto& [v, coef] : terms)
        if (v < 0 || v >= n_vars()) throw DomainError("constraint references unknown variable");
    rows.push_back({std::move(terms), rel, rhs});
    return n_rows() - 1;
}

void LinearProgram::set_objective(bool maximize_sense, Terms terms) {
    for (auto& [v, coef] : terms)
        if (v < 0 || v >= n_vars()) throw DomainError("objective references unknown variable");
    maximize = maximize_sense;
    objective = std::move(terms);
}

namespace {

struct VarMap {
    int col = -1;      // structural column of the shifted variable
    int col_neg = -1;  // second column for free variables
    double offset = 0.0;
    double sign = 1.0;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Simplex {
    RowMat tab;              // current B^-1 A, m x ncols; row-major because
                             // every pivot is a sweep of row operations
    Vec rhs;                 // current B^-1 b
    RowMat tab0;             // initial tableau, kept for reinversion
    Vec rhs0;
    std::vector<int> basis;  // basic column per row
    std::vector<int> init_col;  // unit column that started as row i's basis
    int m = 0, ncols = 0;
    double tol;
    long iterations = 0;
    long last_refresh = 0;
    long hard_limit = 0;

    explicit Simplex(double t) : tol(t) {}

    // Rebuilds the tableau from the original data and the current basis,
    // discarding the roundoff accumulated by the row operations.
    void refresh() {
        Mat B(m, m);
        for (int r = 0; r < m; ++r) B.col(r) = tab0.col(basis[r]);
        Eigen::PartialPivLU<Mat> lu(B);
        tab = lu.solve(Mat(tab0));
        rhs = lu.solve(rhs0);
        for (int r = 0; r < m; ++r)
            if (rhs(r) < 0.0 && rhs(r) > -1e-7) rhs(r) = 0.0;
        last_refresh = iterations;
    }

    void pivot(int row, int col) {
        const double p = tab(row, col);
        if (std::abs(p) < tol * 1e-2)
            throw NumericalBreakdown("simplex pivot element too small");
        tab.row(row) /= p;
        rhs(row) /= p;
        for (int r = 0; r < m; ++r) {
            if (r == row) continue;
            const double f = tab(r, col);
            if (f == 0.0) continue;
            tab.row(r) -= f * tab.row(row);
            rhs(r) -= f * rhs(row);
        }
        basis[row] = col;
    }

    // Lexicographic ratio test: rows are compared by
    // (rhs, B^-1 columns) / pivot, which provably rules out cycling for any
    // entering rule. The B^-1 part is read through the unit columns that
    // formed each row's initial basis.
    int lex_leave(int enter) const {
        int leave = -1;
        for (int r = 0; r < m; ++r) {
            if (tab(r, enter) <= tol) continue;
            if (leave < 0) {
                leave = r;
                continue;
            }
            const double p1 = tab(r, enter), p2 = tab(leave, enter);
            double v1 = rhs(r) / p1, v2 = rhs(leave) / p2;
            bool less = false, decided = false;
            if (v1 < v2 - 1e-12) {
                less = true;
                decided = true;
            } else if (v1 > v2 + 1e-12) {
                decided = true;
            }
            for (int k = 0; k < m && !decided; ++k) {
                v1 = tab(r, init_col[k]) / p1;
                v2 = tab(leave, init_col[k]) / p2;
                if (v1 < v2 - 1e-12) {
                    less = true;
                    decided = true;
                } else if (v1 > v2 + 1e-12) {
                    decided = true;
                }
            }
            if (less) leave = r;
        }
        return leave;
    }

    // Minimizes c over the current feasible basis; `allowed` masks columns
    // permitted to enter. Returns false when unbounded.
    bool minimize(const Vec& c, const std::vector<char>& allowed) {
        for (;;) {
            if (++iterations > hard_limit)
                throw IterationLimit("simplex iteration limit exceeded");
            if (iterations - last_refresh >= 500) refresh();
            Vec cb(m);
            for (int r = 0; r < m; ++r) cb(r) = c(basis[r]);
            Vec reduced = c - tab.transpose() * cb;
            int enter = -1;
            double best = -tol;
            for (int j = 0; j < ncols; ++j) {
                if (!allowed[j]) continue;
                if (reduced(j) < best) {
                    enter = j;
                    best = reduced(j);
                }
            }
            if (enter < 0) return true;
            if ((iterations & 0xFF) == 0 && tab.cwiseAbs().maxCoeff() > 1e40)
                throw NumericalBreakdown("simplex tableau magnitude blow-up");
            const int leave = lex_leave(enter);
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
    const int nv = lp.n_vars();
    std::vector<VarMap> vmap(nv);
    int n_struct = 0;
    struct UbRow {
        int col;
        double bound;
    };
    std::vector<UbRow> ub_rows;
    for (int i = 0; i < nv; ++i) {
        const auto& v = lp.vars[i];
        auto& mp = vmap[i];
        if (std::isfinite(v.lo)) {
            mp.col = n_struct++;
            mp.offset = v.lo;
            mp.sign = 1.0;
            if (std::isfinite(v.hi) && v.hi > v.lo)
                ub_rows.push_back({mp.col, v.hi - v.lo});
            if (std::isfinite(v.hi) && v.hi == v.lo) ub_rows.push_back({mp.col, 0.0});
        } else if (std::isfinite(v.hi)) {
            mp.col = n_struct++;
            mp.offset = v.hi;
            mp.sign = -1.0;
        } else {
            mp.col = n_struct++;
            mp.col_neg = n_struct++;
        }
    }

    const int n_user = lp.n_rows();
    const int m = n_user + static_cast<int>(ub_rows.size());
    Mat A = Mat::Zero(m, n_struct);
    Vec b = Vec::Zero(m);
    std::vector<char> rel(m, '<');
    for (int r = 0; r < n_user; ++r) {
        const auto& row = lp.rows[r];
        rel[r] = row.rel;
        double shift = 0.0;
        for (const auto& [v, coef] : row.terms) {
            const auto& mp = vmap[v];
            A(r, mp.col) += coef * mp.sign;
            if (mp.col_neg >= 0) A(r, mp.col_neg) -= coef;
            shift += coef * mp.offset;
        }
        b(r) = row.rhs - shift;
    }
    for (size_t k = 0; k < ub_rows.size(); ++k) {
        const int r = n_user + static_cast<int>(k);
        A(r, ub_rows[k].col) = 1.0;
        b(r) = ub_rows[k].bound;
        rel[r] = '<';
    }

    // Row equilibration: scaling each row by its largest coefficient keeps
    // pivot elements near unit size on badly mixed-magnitude inputs. The
    // duals are mapped back through the same factors at the end.
    Vec row_scale = Vec::Ones(m);
    for (int r = 0; r < n_user; ++r) {
        const double mx = A.row(r).cwiseAbs().maxCoeff();
        if (mx > 0.0 && (mx > 16.0 || mx < 1.0 / 16.0)) {
            row_scale(r) = 1.0 / mx;
            A.row(r) *= row_scale(r);
            b(r) *= row_scale(r);
        }
    }

    // Slack columns, then row sign normalization, then artificials.
    int n_slack = 0;
    std::vector<int> slack_col(m, -1);
    for (int r = 0; r < m; ++r)
        if (rel[r] != '=') slack_col[r] = n_struct + n_slack++;
    std::vector<double> row_sign(m, 1.0);

    Simplex sx(tol);
    sx.m = m;
    // Artificials allocated pessimistically, one per row.
    sx.ncols = n_struct + n_slack + m;
    sx.tab = Mat::Zero(m, sx.ncols);
    sx.rhs = Vec::Zero(m);
    sx.basis.assign(m, -1);
    sx.init_col.assign(m, -1);
    std::vector<char> artificial(sx.ncols, 0);

    int n_art = 0;
    for (int r = 0; r < m; ++r) {
        double s = b(r) < 0 ? -1.0 : 1.0;
        row_sign[r] = s;
        sx.tab.row(r).head(n_struct) = s * A.row(r);
        sx.rhs(r) = s * b(r);
        if (slack_col[r] >= 0)
            sx.tab(r, slack_col[r]) = s * (rel[r] == '<' ? 1.0 : -1.0);
        if (slack_col[r] >= 0 && sx.tab(r, slack_col[r]) > 0) {
            sx.basis[r] = slack_col[r];
            sx.init_col[r] = slack_col[r];
        } else {
            const int ac = n_struct + n_slack + n_art++;
            sx.tab(r, ac) = 1.0;
            sx.basis[r] = ac;
            sx.init_col[r] = ac;
            artificial[ac] = 1;
        }
    }

    sx.hard_limit = 200L * (m + sx.ncols) + 20000;
    sx.tab0 = sx.tab;
    sx.rhs0 = sx.rhs;

    LpResult res;
    // Phase 1.
    if (n_art > 0) {
        Vec c1 = Vec::Zero(sx.ncols);
        std::vector<char> allowed(sx.ncols, 1);
        for (int j = 0; j < sx.ncols; ++j)
            if (artificial[j]) c1(j) = 1.0;
        if (!sx.minimize(c1, allowed))
            throw NumericalBreakdown("phase-1 objective unbounded");
        if (sx.iterations > sx.last_refresh) sx.refresh();
        double infeas = 0.0;
        for (int r = 0; r < m; ++r)
            if (artificial[sx.basis[r]]) infeas += sx.rhs(r);
        if (infeas > 1e-7) {
            res.status = LpResult::Status::infeasible;
            return res;
        }
        // Drive remaining zero-level artificials out where a pivot exists;
        // rows with none are redundant and stay inert.
        for (int r = 0; r < m; ++r) {
            if (!artificial[sx.basis[r]]) continue;
            for (int j = 0; j < n_struct + n_slack; ++j)
                if (std::abs(sx.tab(r, j)) > tol) {
                    sx.pivot(r, j);
                    break;
                }
        }
    }

    // Phase 2.
    Vec c2 = Vec::Zero(sx.ncols);
    double obj_const = 0.0;
    const double sense = lp.maximize ? -1.0 : 1.0;
    for (const auto& [v, coef] : lp.objective) {
        const auto& mp = vmap[v];
        c2(mp.col) += sense * coef * mp.sign;
        if (mp.col_neg >= 0) c2(mp.col_neg) -= sense * coef;
        obj_const += coef * mp.offset;
    }
    std::vector<char> allowed2(sx.ncols, 1);
    for (int j = 0; j < sx.ncols; ++j)
        if (artificial[j]) allowed2[j] = 0;
    if (!sx.minimize(c2, allowed2)) {
        res.status = LpResult::Status::unbounded;
        return res;
    }
    if (sx.iterations > sx.last_refresh) sx.refresh();

    Vec xs = Vec::Zero(sx.ncols);
    for (int r = 0; r < m; ++r) xs(sx.basis[r]) = sx.rhs(r);
    res.x = Vec::Zero(nv);
    for (int i = 0; i < nv; ++i) {
        const auto& mp = vmap[i];
        res.x(i) = mp.col_neg >= 0 ? xs(mp.col) - xs(mp.col_neg)
                                   : mp.offset + mp.sign * xs(mp.col);
    }
    res.value = 0.0;
    for (const auto& [v, coef] : lp.objective) res.value += coef * res.x(v);
    (void)obj_const;

    // y = c_B' B^-1, read off through the unit columns that formed the
    // initial basis of each row.
    res.duals = Vec::Zero(n_user);
    for (int r = 0; r < n_user; ++r) {
        double y = 0.0;
        for (int rr = 0; rr < m; ++rr)
            y += c2(sx.basis[rr]) * sx.tab(rr, sx.init_col[r]);
        // The stored initial column carried the row sign; undo it, and undo
        // the max-to-min flip.
        y *= row_sign[r];
        if (lp.maximize) y = -y;
        res.duals(r) = y * row_scale(r);
    }
    res.status = LpResult::Status::optimal;
    return res;
}

LinearProgram relax_bilinear(const BilinearProgram& bp) {
    LinearProgram out = bp.lp;
    std::map<std::pair<int, int>, int> product_var;
    for (const auto& t : bp.terms) {
        auto key = std::minmax(t.xi, t.xj);
        auto it = product_var.find(key);
        int pv;
        if (it != product_var.end()) {
            pv = it->second;
        } else {
            const auto& vi = out.vars[key.first];
            const auto& vj = out.vars[key.second];
            if (!std::isfinite(vi.lo) || !std::isfinite(vi.hi) ||
                !std::isfinite(vj.lo) || !std::isfinite(vj.hi))
                throw UnboundedBilinearVariable(
                    "bilinear factors '" + vi.name + "' * '" + vj.name +
                    "' must have finite bounds");
            const double corners[4] = {vi.lo * vj.lo, vi.lo * vj.hi, vi.hi * vj.lo,
                                       vi.hi * vj.hi};
            pv = out.add_var(vi.name + "*" + vj.name,
                             *std::min_element(corners, corners + 4),
                             *std::max_element(corners, corners + 4));
            product_var[key] = pv;
            auto combined = [&](double ci, double cj) {
                Terms terms{{pv, 1.0}};
                if (key.first == key.second) {
                    terms.push_back({key.first, -(ci + cj)});
                } else {
                    terms.push_back({key.first, -cj});
                    terms.push_back({key.second, -ci});
                }
                return terms;
            };
            // X >= lo_i x_j + lo_j x_i - lo_i lo_j, X >= hi_i x_j + hi_j x_i - hi_i hi_j,
            // X <= hi_i x_j + lo_j x_i - hi_i lo_j, X <= lo_i x_j + hi_j x_i - lo_i hi_j.
            out.add_constraint(combined(vi.lo, vj.lo), '>', -vi.lo * vj.lo);
            out.add_constraint(combined(vi.hi, vj.hi), '>', -vi.hi * vj.hi);
            out.add_constraint(combined(vi.hi, vj.lo), '<', -vi.hi * vj.lo);
            out.add_constraint(combined(vi.lo, vj.hi), '<', -vi.lo * vj.hi);
        }
        if (t.row < 0) {
            out.objective.push_back({pv, t.coeff});
        } else {
            out.rows[t.row].terms.push_back({pv, t.coeff});
        }
    }
    return out;
}

std::string dump_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os << (lp.maximize ? "maximize" : "minimize");
    for (const auto& [v, c] : lp.objective)
        os << ' ' << format_double(c) << '*' << lp.vars[v].name;
    os << "\n";
    for (const auto& v : lp.vars)
        os << "var " << v.name << " in [" << format_double(v.lo) << ", "
           << format_double(v.hi) << "]\n";
    for (const auto& r : lp.rows) {
        os << "st";
        for (const auto& [v, c] : r.terms)
            os << ' ' << format_double(c) << '*' << lp.vars[v].name;
        os << ' ' << (r.rel == '<' ? "<=" : r.rel == '>' ? ">=" : "=") << ' '
           << format_double(r.rhs) << "\n";
    }
    return os.str();
}

}  // namespace pomdp_ltl::lp
