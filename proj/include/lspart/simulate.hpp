#pragma once

#include "lspart/pipeline.hpp"

#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lspart {

/// Data generating process: covariates uniform on [0, 1]^d,
/// y = mean(x) + sd(x) * N(0, 1).
struct DgpSpec {
    std::string id;
    std::string description;
    int dims = 1;
    std::function<double(std::span<const double>)> mean;
    std::function<double(std::span<const double>)> sd;
};

const std::vector<DgpSpec>& builtin_dgps();
/// Throws InputError for an unknown id.
const DgpSpec& find_dgp(std::string_view id);

Sample draw_sample(const DgpSpec& dgp, Eigen::Index n, std::mt19937_64& rng);

struct CoverageOptions {
    EstimationOptions estimation;  // every correction is evaluated; q must be zero
    Eigen::Index n = 1000;
    std::size_t reps = 500;
    int grid_points = 0;           // per dimension, 0 picks 49 (d = 1) or 15 (d = 2)
};

struct CoverageRow {
    Correction correction = Correction::none;
    HcKind hc = HcKind::hc0;
    double pointwise = 0.0;        // averaged over grid points
    double median_point = 0.0;     // at the grid point nearest the design median
    std::optional<double> band;    // simultaneous coverage
    double ci_width = 0.0;         // average width at the median point
    std::optional<double> band_width;
};

struct CoverageReport {
    std::string dgp;
    Eigen::Index n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    Grid grid;
    std::size_t median_index = 0;
    double mean_kappa = 0.0;
    std::vector<CoverageRow> rows;
};

/// Monte Carlo coverage of pointwise intervals and uniform bands for each
/// correction. Replicate r draws its data from the substream (seed, r), so
/// the report is deterministic for a given seed.
CoverageReport simulate_coverage(const DgpSpec& dgp, const CoverageOptions& options);

} // namespace lspart
