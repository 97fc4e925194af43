#pragma once

#include "lspart/basis.hpp"
#include "lspart/grid.hpp"
#include "testkit/testkit.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace support {

inline lspart::Sample uniform_sample(std::size_t n, int d, std::uint64_t seed,
                                     const std::function<double(const testkit::Point&)>& mean,
                                     const std::function<double(const testkit::Point&)>& sd) {
    std::mt19937_64 rng(seed);
    auto dr = testkit::draw(n, d, mean, sd, rng);
    return lspart::Sample(std::move(dr.y), std::move(dr.x));
}

inline testkit::Knots knots_of(const lspart::Partition& p) {
    testkit::Knots k;
    for (int l = 0; l < p.dims(); ++l) k.push_back(p.knots(l));
    return k;
}

inline testkit::Family oracle_family(lspart::Family f) {
    return f == lspart::Family::bspline ? testkit::Family::bspline : testkit::Family::piecewise;
}

inline double scale(const Eigen::VectorXd& y) { return std::max(1.0, y.cwiseAbs().maxCoeff()); }

} // namespace support
