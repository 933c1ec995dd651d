#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ehrhard/errors.hpp"
#include "ehrhard/obstacle.hpp"

using namespace ehrhard;

namespace {

GridSurface gaussian_samples(int n, Weights w) {
    GridSurface s(n);
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j)
            s.at(i, j) = normal_cdf(w.a * normal_quantile(s.coord(i)) + w.b * normal_quantile(s.coord(j)));
    return s;
}

}  // namespace

TEST_CASE("softplus start") {
    ObstacleProblem p;
    p.n = 51;
    const double s = 0.02;
    GridSurface h = feasible_init(p, s);
    const int m = p.n - 1;
    CHECK(h.at(m, m) <= 1.0 + 1e-12);
    CHECK(h.at(m, m) >= 1.0 - s * std::log(2.0) - 1e-12);
    for (auto [i, j] : {std::pair{0, 0}, std::pair{0, m}, std::pair{m, 0}}) CHECK(h.at(i, j) <= 1e-12);
    CHECK(std::abs(h.at(0, 0)) <= s * std::log(2.0) + 1e-12);
    CHECK(discrete_pdi_report(h, p.w).min_value >= -1e-9);
    CHECK(dominance_check(h, p.w).ok);
    CHECK_THROWS_AS(feasible_init(p, 0.0), ParameterError);
}

TEST_CASE("dominance check") {
    Weights w{0.5, 0.5};
    GridSurface e = gaussian_samples(41, w);
    DominanceReport self = dominance_check(e, w);
    CHECK(self.ok);
    CHECK(std::abs(self.worst_margin) <= 1e-15);
    std::vector<double> up = e.values();
    for (double& v : up) v += 0.01;
    DominanceReport bad = dominance_check(GridSurface(41, up), w);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_margin == doctest::Approx(0.01));
    CHECK(bad.witness_u > 0.0);
}

TEST_CASE("discrete pdi of gaussian samples is small") {
    Weights w{0.5, 0.5};
    GridSurface e = gaussian_samples(101, w);
    CHECK(std::abs(discrete_pdi(e, w, 50, 50)) < 1e-3);
    CHECK_THROWS_AS(discrete_pdi(e, w, 0, 5), ParameterError);
}

TEST_CASE("tiny grid") {
    ObstacleProblem p;
    p.n = 3;
    SolveResult r = solve(p, feasible_init(p, 0.02));
    CHECK(r.sweeps <= 10);
    CHECK(r.converged);
    CHECK(r.first_violation < 0);
    CHECK(r.dominance.ok);
}

TEST_CASE("moderate grid keeps dominance") {
    ObstacleProblem p;
    p.n = 31;
    int calls = 0;
    SolveResult r = solve(p, feasible_init(p, 0.02), [&](const SweepLog&) { ++calls; });
    CHECK(calls == r.sweeps);
    CHECK(r.converged);
    CHECK(r.first_violation < 0);
    CHECK(r.worst_dominance <= 1e-6);
    CHECK(r.surface.at(p.n - 1, p.n - 1) <= 1.0);
    CHECK(r.surface.at(p.n - 1, p.n - 1) >= 1.0 - 1e-3);
    // raise-only: never below the start
    GridSurface start = feasible_init(p, 0.02);
    for (int i = 1; i < p.n - 1; ++i)
        for (int j = 1; j < p.n - 1; ++j) CHECK(r.surface.at(i, j) >= start.at(i, j));

    ObstacleProblem strict = p;
    strict.strict = true;
    strict.max_sweeps = 50;
    SolveResult rs = solve(strict, feasible_init(strict, 0.02));
    // nodes next to a corner see the corner jump to its obstacle value
    double worst = INFINITY;
    const int m = p.n - 2;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if ((i <= 2 || i >= m - 1) && (j <= 2 || j >= m - 1)) continue;
            worst = std::min(worst, discrete_pdi(rs.surface, p.w, i, j));
        }
    CHECK(worst >= -1e-9);
}

TEST_CASE("solver input checks") {
    ObstacleProblem p;
    p.n = 11;
    GridSurface h = feasible_init(p, 0.05);
    h.at(p.n - 1, p.n - 1) = 1.5;
    CHECK_THROWS_AS(solve(p, h), PreconditionError);
    GridSurface bumpy(11);
    bumpy.at(5, 5) = 1.0;
    CHECK_THROWS_AS(solve(p, bumpy), PreconditionError);
    p.w = {0.2, 0.2};
    CHECK_THROWS_AS(solve(p, feasible_init(ObstacleProblem{}, 0.05)), RegimeError);
}

TEST_CASE("surface and log serialization") {
    ObstacleProblem p;
    p.n = 9;
    SolveResult r = solve(p, feasible_init(p, 0.05));
    std::stringstream ss;
    r.surface.write_csv(ss);
    GridSurface back = GridSurface::read_csv(ss);
    CHECK(back.n() == 9);
    CHECK(back.values() == r.surface.values());
    std::ostringstream lg;
    write_log_jsonl(lg, r.log);
    std::string text = lg.str();
    CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == r.sweeps);
    CHECK(text.find("seconds") == std::string::npos);
}

TEST_CASE("lower bound certificate") {
    Measure mu = Measure::standard(1);
    Grid1D g{-8, 8, 801};
    auto half = GridFunction::sample([](double x) { return 0.01 + 0.98 / (1 + std::exp(-x / 0.05)); }, g);
    CHECK(lower_bound_certificate(make_ehrhard({0.5, 0.5}), half, half, {0.5, 0.5}, mu).ok);
    Surface pl = make_pl_family(0.5, PlCase::classic);
    auto f = GridFunction::sample([](double x) { return std::exp(-x * x / 50); }, g);
    auto gg = GridFunction::sample([](double x) { return 2 * std::exp(-(x - 1) * (x - 1) / 60); }, g);
    CHECK(lower_bound_certificate(pl, f, gg, {0.5, 0.5}, mu).ok);
    CHECK_THROWS_AS(lower_bound_certificate(make_monomial(1, 0.3, 0.3), f, f, {0.5, 0.5}, mu), PreconditionError);
}

TEST_CASE("center value settles with resolution") {
    double centers[3];
    int k = 0;
    for (int n : {51, 101, 201}) {
        ObstacleProblem p;
        p.n = n;
        SolveResult r = solve(p, feasible_init(p, 0.02));
        REQUIRE(r.converged);
        CHECK(r.first_violation == -1);
        centers[k++] = r.surface.nearest(0.5, 0.5);
    }
    bool up = centers[0] <= centers[1] && centers[1] <= centers[2];
    bool down = centers[0] >= centers[1] && centers[1] >= centers[2];
    CHECK((up || down));
    CHECK(std::abs(centers[2] - centers[1]) < 2e-2);
}
