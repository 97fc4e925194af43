#include "support.hpp"

#include "lspart/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace lspart;

TEST_CASE("built-in DGPs") {
    CHECK(builtin_dgps().size() >= 4);
    for (const auto& d : builtin_dgps()) {
        std::mt19937_64 rng(1);
        const Sample s = draw_sample(d, 50, rng);
        CHECK(s.size() == 50);
        CHECK(s.dims() == d.dims);
        CHECK(s.x().minCoeff() >= 0.0);
        CHECK(s.x().maxCoeff() <= 1.0);
    }
    CHECK(find_dgp("sinbump").dims == 1);
    CHECK_THROWS_AS(find_dgp("nope"), InputError);
}

TEST_CASE("zero-mean coverage at n = 200") {
    CoverageOptions o;
    o.n = 200;
    o.reps = 500;
    o.estimation.num_sim = 500;
    o.estimation.seed = 7;
    const CoverageReport r = simulate_coverage(find_dgp("zero"), o);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].pointwise >= 0.92);
    CHECK(r.rows[0].pointwise <= 0.98);
}

TEST_CASE("coverage report is deterministic and well formed at one replication") {
    CoverageOptions o;
    o.n = 200;
    o.reps = 1;
    o.estimation.num_sim = 200;
    o.estimation.seed = 3;
    const CoverageReport a = simulate_coverage(find_dgp("line"), o);
    const CoverageReport b = simulate_coverage(find_dgp("line"), o);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.grid.size() == 49);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK((a.rows[k].median_point == 0.0 || a.rows[k].median_point == 1.0));
        CHECK((*a.rows[k].band == 0.0 || *a.rows[k].band == 1.0));
        CHECK(a.rows[k].pointwise >= 0.0);
        CHECK(a.rows[k].pointwise <= 1.0);
        CHECK(a.rows[k].pointwise == b.rows[k].pointwise);
        CHECK(a.rows[k].band_width == b.rows[k].band_width);
    }
    o.reps = 0;
    CHECK_THROWS_AS(simulate_coverage(find_dgp("line"), o), InputError);
}
