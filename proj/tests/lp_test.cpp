#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "pomdp_ltl/lp.hpp"

using namespace pomdp_ltl;

namespace {

// All constraints of an LP in `a . x <= b` form, bounds included.
struct IneqSystem {
    std::vector<Vec> a;
    std::vector<double> b;
};

IneqSystem to_inequalities(const lp::LinearProgram& p) {
    const int n = p.n_vars();
    IneqSystem sys;
    auto push = [&](const Vec& a, double b) {
        sys.a.push_back(a);
        sys.b.push_back(b);
    };
    for (const auto& row : p.rows) {
        Vec a = Vec::Zero(n);
        for (auto [j, c] : row.terms) a(j) += c;
        if (row.rel == '<' || row.rel == '=') push(a, row.rhs);
        if (row.rel == '>' || row.rel == '=') push(-a, -row.rhs);
    }
    for (int j = 0; j < n; ++j) {
        Vec e = Vec::Zero(n);
        e(j) = 1.0;
        push(e, p.vars[j].hi);
        push(-e, -p.vars[j].lo);
    }
    return sys;
}

// Brute-force optimum of a bounded LP: the maximum sits at a vertex, i.e.
// at the intersection of n linearly independent active constraints.
double vertex_enumeration_optimum(const lp::LinearProgram& p) {
    const int n = p.n_vars();
    auto sys = to_inequalities(p);
    const int m = static_cast<int>(sys.a.size());
    Vec c = Vec::Zero(n);
    for (auto [j, w] : p.objective) c(j) += w;
    if (!p.maximize) c = -c;

    double best = -1e100;
    std::vector<int> pick(n);
    std::function<void(int, int)> rec = [&](int from, int depth) {
        if (depth == n) {
            Mat a(n, n);
            Vec b(n);
            for (int i = 0; i < n; ++i) {
                a.row(i) = sys.a[pick[i]].transpose();
                b(i) = sys.b[pick[i]];
            }
            Eigen::FullPivLU<Mat> lu(a);
            if (lu.rank() < n) return;
            Vec x = lu.solve(b);
            for (int i = 0; i < m; ++i)
                if (sys.a[i].dot(x) > sys.b[i] + 1e-7) return;
            best = std::max(best, c.dot(x));
            return;
        }
        for (int i = from; i < m; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return p.maximize ? best : -best;
}

// Optimality certificate from the returned duals: nonnegativity on binding
// direction, complementary slackness, and strong duality with the bound
// contributions of the reduced costs.
void check_duality(const lp::LinearProgram& p, const lp::LpResult& res,
                   double tol = 1e-6) {
    const int n = p.n_vars();
    // Normalize to maximization; duals flip sign with the objective sense.
    const double sgn = p.maximize ? 1.0 : -1.0;
    Vec c = Vec::Zero(n);
    for (auto [j, w] : p.objective) c(j) += sgn * w;
    Vec aty = Vec::Zero(n);
    double ytb = 0.0;
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& row = p.rows[i];
        double ax = 0.0;
        Vec a = Vec::Zero(n);
        for (auto [j, w] : row.terms) {
            a(j) += w;
            ax += w * res.x(j);
        }
        const double y = sgn * res.duals(i);
        if (row.rel == '<') CHECK(y >= -tol);
        if (row.rel == '>') CHECK(y <= tol);
        if (row.rel != '=') CHECK(std::abs(y * (row.rhs - ax)) < tol);
        aty += y * a;
        ytb += y * row.rhs;
    }
    double dual_value = ytb;
    for (int j = 0; j < n; ++j) {
        const double z = c(j) - aty(j);  // reduced cost against the bounds
        if (z > tol) CHECK(res.x(j) == doctest::Approx(p.vars[j].hi).epsilon(tol));
        if (z < -tol) CHECK(res.x(j) == doctest::Approx(p.vars[j].lo).epsilon(tol));
        dual_value += z > 0 ? z * p.vars[j].hi : z * p.vars[j].lo;
    }
    CHECK(sgn * res.value == doctest::Approx(dual_value).epsilon(1e-6));
}

lp::LinearProgram random_bounded_lp(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 1.0);
    lp::LinearProgram p;
    const int n = 2 + static_cast<int>(rng() % 3);
    Vec x0(n);
    for (int j = 0; j < n; ++j) {
        const double lo = -1.0 - pos(rng), hi = 1.0 + pos(rng);
        p.add_var("x" + std::to_string(j), lo, hi);
        x0(j) = lo + (hi - lo) * (u(rng) + 1.0) / 2.0;
    }
    const int m = 3 + static_cast<int>(rng() % 4);
    for (int i = 0; i < m; ++i) {
        lp::Terms t;
        Vec a(n);
        for (int j = 0; j < n; ++j) {
            a(j) = u(rng);
            t.push_back({j, a(j)});
        }
        // Keep x0 strictly feasible so the instance cannot be empty.
        if (rng() % 2)
            p.add_constraint(t, '<', a.dot(x0) + pos(rng));
        else
            p.add_constraint(t, '>', a.dot(x0) - pos(rng));
    }
    lp::Terms obj;
    for (int j = 0; j < n; ++j) obj.push_back({j, u(rng)});
    p.set_objective(rng() % 2 == 0, obj);
    return p;
}

}  // namespace

TEST_CASE("maximizing a single boxed variable returns its upper bound") {
    lp::LinearProgram p;
    p.add_var("x", 0.0, 1.0);
    p.set_objective(true, {{0, 1.0}});
    auto res = lp::solve_lp(p);
    REQUIRE(res.status == lp::LpResult::Status::optimal);
    CHECK(res.value == doctest::Approx(1.0));
    CHECK(res.x(0) == doctest::Approx(1.0));
}

TEST_CASE("binding resource row carries a unit dual price") {
    lp::LinearProgram p;
    p.add_var("x1", 0.0, lp::kInf);
    p.add_var("x2", 0.0, lp::kInf);
    p.add_constraint({{0, 1.0}, {1, 1.0}}, '<', 1.0);
    p.set_objective(true, {{0, 1.0}, {1, 1.0}});
    auto res = lp::solve_lp(p);
    REQUIRE(res.status == lp::LpResult::Status::optimal);
    CHECK(res.value == doctest::Approx(1.0));
    CHECK(res.duals(0) == doctest::Approx(1.0));
}

TEST_CASE("equality rows are honored exactly") {
    lp::LinearProgram p;
    p.add_var("x", 0.0, 2.0);
    p.add_var("y", 0.0, 2.0);
    p.add_constraint({{0, 1.0}, {1, 1.0}}, '=', 1.5);
    p.set_objective(true, {{0, 2.0}, {1, 1.0}});
    auto res = lp::solve_lp(p);
    REQUIRE(res.status == lp::LpResult::Status::optimal);
    CHECK(res.x(0) + res.x(1) == doctest::Approx(1.5));
    // All mass goes to the better-priced variable.
    CHECK(res.x(0) == doctest::Approx(1.5));
    CHECK(res.value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("contradictory rows are reported infeasible") {
    lp::LinearProgram p;
    p.add_var("x", 0.0, 10.0);
    p.add_constraint({{0, 1.0}}, '>', 5.0);
    p.add_constraint({{0, 1.0}}, '<', 4.0);
    auto res = lp::solve_lp(p);
    CHECK(res.status == lp::LpResult::Status::infeasible);
}

TEST_CASE("an unbounded improving ray is reported unbounded") {
    lp::LinearProgram p;
    p.add_var("x", 0.0, lp::kInf);
    p.add_var("y", 0.0, lp::kInf);
    p.add_constraint({{0, 1.0}, {1, -1.0}}, '<', 1.0);
    p.set_objective(true, {{0, 1.0}});
    auto res = lp::solve_lp(p);
    CHECK(res.status == lp::LpResult::Status::unbounded);
}

TEST_CASE("random bounded instances match vertex enumeration") {
    std::mt19937 rng(42);
    int solved = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_bounded_lp(rng);
        auto res = lp::solve_lp(p);
        REQUIRE(res.status == lp::LpResult::Status::optimal);
        const double oracle = vertex_enumeration_optimum(p);
        CHECK(res.value == doctest::Approx(oracle).epsilon(1e-6));
        // The reported point must itself be feasible and attain the value.
        auto sys = to_inequalities(p);
        for (size_t i = 0; i < sys.a.size(); ++i)
            CHECK(sys.a[i].dot(res.x) <= sys.b[i] + 1e-7);
        check_duality(p, res);
        ++solved;
    }
    CHECK(solved == 100);
}

TEST_CASE("resolving the same instance is deterministic") {
    std::mt19937 rng(7);
    auto p = random_bounded_lp(rng);
    auto r1 = lp::solve_lp(p);
    auto r2 = lp::solve_lp(p);
    CHECK(r1.value == r2.value);
    CHECK((r1.x - r2.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r1.duals - r2.duals).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("envelope rows admit every true product point in the box") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    lp::BilinearProgram bp;
    const double lx = -1.5, ux = 2.0, ly = 0.5, uy = 3.0;
    bp.lp.add_var("x", lx, ux);
    bp.lp.add_var("y", ly, uy);
    bp.lp.set_objective(true, {});
    bp.add_term(-1, 0, 1, 1.0);  // objective term x*y
    auto relaxed = lp::relax_bilinear(bp);
    REQUIRE(relaxed.n_vars() == 3);  // one fresh product variable
    const int w = 2;
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        Vec pt(3);
        pt(0) = lx + (ux - lx) * u(rng);
        pt(1) = ly + (uy - ly) * u(rng);
        pt(w) = pt(0) * pt(1);
        for (const auto& row : relaxed.rows) {
            double lhs = 0.0;
            for (auto [j, c] : row.terms) lhs += c * pt(j);
            const bool ok = row.rel == '<'   ? lhs <= row.rhs + 1e-9
                            : row.rel == '>' ? lhs >= row.rhs - 1e-9
                                             : std::abs(lhs - row.rhs) <= 1e-9;
            if (!ok) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("the envelope is tight at the four box corners") {
    const double lx = -1.5, ux = 2.0, ly = 0.5, uy = 3.0;
    for (double x : {lx, ux})
        for (double y : {ly, uy}) {
            const double lo = std::max(lx * y + ly * x - lx * ly,
                                       ux * y + uy * x - ux * uy);
            const double hi = std::min(ux * y + ly * x - ux * ly,
                                       lx * y + uy * x - lx * uy);
            CHECK(lo == doctest::Approx(x * y));
            CHECK(hi == doctest::Approx(x * y));
        }
}

TEST_CASE("relaxed product maximum equals the best corner product") {
    lp::BilinearProgram bp;
    const double lx = -1.5, ux = 2.0, ly = -0.5, uy = 3.0;
    bp.lp.add_var("x", lx, ux);
    bp.lp.add_var("y", ly, uy);
    bp.lp.set_objective(true, {});
    bp.add_term(-1, 0, 1, 1.0);
    auto res = lp::solve_lp(lp::relax_bilinear(bp));
    REQUIRE(res.status == lp::LpResult::Status::optimal);
    const double corner_max =
        std::max({lx * ly, lx * uy, ux * ly, ux * uy});
    CHECK(res.value == doctest::Approx(corner_max).epsilon(1e-9));
}

TEST_CASE("relaxation never cuts off the true bilinear optimum") {
    // max x + y subject to x*y <= 0.25 on the unit box; the true optimum
    // is 1.25 and the relaxation attains exactly that here.
    lp::BilinearProgram bp;
    bp.lp.add_var("x", 0.0, 1.0);
    bp.lp.add_var("y", 0.0, 1.0);
    const int row = bp.lp.add_constraint({}, '<', 0.25);
    bp.lp.set_objective(true, {{0, 1.0}, {1, 1.0}});
    bp.add_term(row, 0, 1, 1.0);
    auto res = lp::solve_lp(lp::relax_bilinear(bp));
    REQUIRE(res.status == lp::LpResult::Status::optimal);
    CHECK(res.value >= 1.25 - 1e-9);
    CHECK(res.value == doctest::Approx(1.25).epsilon(1e-9));
}

TEST_CASE("repeated products share one fresh variable") {
    lp::BilinearProgram bp;
    bp.lp.add_var("x", 0.0, 1.0);
    bp.lp.add_var("y", 0.0, 1.0);
    int r1 = bp.lp.add_constraint({}, '<', 1.0);
    int r2 = bp.lp.add_constraint({}, '<', 1.0);
    bp.add_term(r1, 0, 1, 1.0);
    bp.add_term(r2, 1, 0, 2.0);  // same product, swapped factor order
    auto relaxed = lp::relax_bilinear(bp);
    CHECK(relaxed.n_vars() == 3);
}

TEST_CASE("products over unbounded factors are rejected") {
    lp::BilinearProgram bp;
    bp.lp.add_var("x", 0.0, lp::kInf);
    bp.lp.add_var("y", 0.0, 1.0);
    bp.lp.set_objective(true, {});
    bp.add_term(-1, 0, 1, 1.0);
    CHECK_THROWS_AS(lp::relax_bilinear(bp), lp::UnboundedBilinearVariable);
}

TEST_CASE("text dump names every variable and row") {
    lp::LinearProgram p;
    p.add_var("alpha", 0.0, 1.0);
    p.add_var("beta", -2.0, 3.0);
    p.add_constraint({{0, 1.0}, {1, -1.0}}, '<', 0.5);
    p.set_objective(true, {{0, 1.0}});
    const std::string text = lp::dump_lp(p);
    CHECK(text.find("alpha") != std::string::npos);
    CHECK(text.find("beta") != std::string::npos);
    CHECK(text.find("0.5") != std::string::npos);
}
