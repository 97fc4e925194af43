#include "support.hpp"

#include "lspart/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lspart;

namespace {

Sample line_sample(std::vector<double> xs) {
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    return Sample(Eigen::VectorXd::Zero(x.size()), x);
}

} // namespace

TEST_CASE("sample validation") {
    CHECK_THROWS_AS(Sample(Eigen::VectorXd(0), Eigen::MatrixXd(0, 1)), InputError);
    CHECK_THROWS_AS(Sample(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(2, 1)), InputError);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
    x(1, 0) = std::nan("");
    CHECK_THROWS_AS(Sample(Eigen::VectorXd::Zero(2), x), InputError);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
    y[0] = INFINITY;
    CHECK_THROWS_AS(Sample(y, Eigen::MatrixXd::Zero(2, 1)), InputError);
}

TEST_CASE("even partition of {0, 0.5, 1} with two intervals") {
    const Sample s = line_sample({0.0, 0.5, 1.0});
    const int kappa[] = {2};
    const Partition p = make_partition(s, kappa, Spacing::even);
    CHECK(p.knots(0) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(p.kappa(0) == 2);
}

TEST_CASE("quantile partition of 1..100 puts interior knots at the quartiles") {
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(i);
    const Sample s = line_sample(xs);
    const int kappa[] = {4};
    const Partition p = make_partition(s, kappa, Spacing::quantile);
    REQUIRE(p.kappa(0) == 4);
    CHECK(p.knots(0).front() == 1.0);
    CHECK(p.knots(0).back() == 100.0);
    for (int j = 1; j < 4; ++j) {
        CHECK(p.knots(0)[j] == doctest::Approx(testkit::empirical_quantile(xs, j / 4.0)).epsilon(1e-14));
    }
}

TEST_CASE("kappa = 1 gives only the boundary knots") {
    const Sample s = support::uniform_sample(
        30, 1, 3, [](const auto&) { return 0.0; }, [](const auto&) { return 1.0; });
    const int kappa[] = {1};
    for (Spacing sp : {Spacing::even, Spacing::quantile}) {
        const Partition p = make_partition(s, kappa, sp);
        REQUIRE(p.knots(0).size() == 2);
        CHECK(p.knots(0)[0] == s.x().col(0).minCoeff());
        CHECK(p.knots(0)[1] == s.x().col(0).maxCoeff());
    }
}

TEST_CASE("partition errors") {
    const Sample s = line_sample({0.0, 1.0, 2.0});
    const int zero[] = {0};
    CHECK_THROWS_AS(make_partition(s, zero, Spacing::even), InputError);
    const int too_many[] = {3};
    CHECK_THROWS_AS(make_partition(s, too_many, Spacing::quantile), InputError);
    const int wrong_dims[] = {1, 1};
    CHECK_THROWS_AS(make_partition(s, wrong_dims, Spacing::even), InputError);
}

TEST_CASE("duplicate quantile knots collapse with a warning") {
    const Sample s = line_sample({0, 0, 0, 0, 0, 0, 0, 0, 1, 2});
    const int kappa[] = {4};
    Diagnostics diag;
    const Partition p = make_partition(s, kappa, Spacing::quantile, &diag);
    CHECK(p.kappa(0) < 4);
    CHECK_FALSE(diag.warnings.empty());
    const auto& k = p.knots(0);
    CHECK(std::adjacent_find(k.begin(), k.end(), [](double a, double b) { return !(a < b); }) == k.end());
}

TEST_CASE("locate_cell conventions") {
    const Partition p({{0.0, 0.5, 1.0}}, Spacing::even);
    const double a[] = {0.25}, b[] = {1.0}, c[] = {0.5}, lo[] = {0.0};
    CHECK(locate_cell(p, a)[0] == 0);
    CHECK(locate_cell(p, b)[0] == 1);
    CHECK(locate_cell(p, c)[0] == 1);
    CHECK(locate_cell(p, lo)[0] == 0);
    const double out[] = {1.0000001};
    CHECK_THROWS_AS(locate_cell(p, out), OutOfSupportError);
    const double below[] = {-1e-9};
    CHECK_THROWS_AS(locate_cell(p, below), OutOfSupportError);
}

TEST_CASE("cells partition the support") {
    const Sample s = support::uniform_sample(
        400, 2, 11, [](const auto&) { return 0.0; }, [](const auto&) { return 1.0; });
    const int kappa[] = {5, 3};
    for (Spacing sp : {Spacing::even, Spacing::quantile}) {
        const Partition p = make_partition(s, kappa, sp);
        for (int l = 0; l < 2; ++l) {
            double total = 0.0;
            for (int j = 0; j < p.kappa(l); ++j) total += p.width(l, j);
            CHECK(std::abs(total - (p.upper(l) - p.lower(l))) <= 1e-12);
        }
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const auto pt = s.point(i);
            const auto cell = locate_cell(p, pt);
            for (int l = 0; l < 2; ++l) {
                const auto& k = p.knots(l);
                const bool last = cell[l] == p.kappa(l) - 1;
                CHECK(pt[l] >= k[cell[l]]);
                CHECK((last ? pt[l] <= k[cell[l] + 1] : pt[l] < k[cell[l] + 1]));
            }
        }
    }
}

TEST_CASE("quantile cell membership is invariant to monotone transforms") {
    const Sample s = support::uniform_sample(
        300, 1, 5, [](const auto&) { return 0.0; }, [](const auto&) { return 1.0; });
    const Eigen::MatrixXd tx = s.x().array().exp().pow(3.0).matrix();
    const Sample t(s.y(), tx);
    const int kappa[] = {7};
    const Partition p = make_partition(s, kappa, Spacing::quantile);
    const Partition q = make_partition(t, kappa, Spacing::quantile);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        CHECK(locate_cell(p, s.point(i)) == locate_cell(q, t.point(i)));
    }
}

TEST_CASE("sorted_quantile agrees with the empirical-quantile oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> v(57);
    for (auto& e : v) e = g(rng);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
        CHECK(sorted_quantile(sorted, p) == doctest::Approx(testkit::empirical_quantile(v, p)).epsilon(1e-14));
    }
}

TEST_CASE("quantile grid") {
    const Sample s = support::uniform_sample(
        200, 2, 8, [](const auto&) { return 0.0; }, [](const auto&) { return 1.0; });
    const Grid g = quantile_grid(s, 4);
    CHECK(g.size() == 16);
    const int kappa[] = {1, 1};
    const Partition p = make_partition(s, kappa, Spacing::even);
    for (const auto& pt : g) CHECK(p.contains(pt));
    CHECK(quantile_grid(support::uniform_sample(
                            50, 1, 8, [](const auto&) { return 0.0; }, [](const auto&) { return 1.0; }),
                        50)
              .size() == 50);
}
