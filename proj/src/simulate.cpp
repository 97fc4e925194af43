#include "lspart/simulate.hpp"

#include "parallel.hpp"

#include <cmath>
#include <numbers>

namespace lspart {

namespace {

constexpr std::uint64_t data_stream = 0x6461746100000000ULL;
constexpr std::uint64_t band_stream = 0x62616e6400000000ULL;

std::vector<DgpSpec> make_dgps() {
    using std::numbers::pi;
    std::vector<DgpSpec> out;
    out.push_back({"zero", "mean 0, unit noise", 1,
                   [](std::span<const double>) { return 0.0; },
                   [](std::span<const double>) { return 1.0; }});
    out.push_back({"line", "mean 1 + 2x, noise sd 0.5", 1,
                   [](std::span<const double> x) { return 1.0 + 2.0 * x[0]; },
                   [](std::span<const double>) { return 0.5; }});
    out.push_back({"sinbump", "sin(2 pi x) plus a Gaussian bump at 0.5, noise sd 0.25 + 0.5x", 1,
                   [](std::span<const double> x) {
                       const double c = x[0] - 0.5;
                       return std::sin(2.0 * pi * x[0]) + 1.0 * std::exp(-25.0 * c * c);
                   },
                   [](std::span<const double> x) { return 0.25 + 0.5 * x[0]; }});
    out.push_back({"wave2d", "sin(pi x1) cos(pi x2), noise sd 0.3 + 0.2 x1", 2,
                   [](std::span<const double> x) { return std::sin(pi * x[0]) * std::cos(pi * x[1]); },
                   [](std::span<const double> x) { return 0.3 + 0.2 * x[0]; }});
    return out;
}

struct RepOutcome {
    double kappa = 0.0;
    // per correction
    std::vector<std::vector<char>> covered;  // grid
    std::vector<char> band_covered;
    std::vector<double> ci_width;
    std::vector<double> band_width;
};

} // namespace

const std::vector<DgpSpec>& builtin_dgps() {
    static const std::vector<DgpSpec> dgps = make_dgps();
    return dgps;
}

const DgpSpec& find_dgp(std::string_view id) {
    for (const auto& d : builtin_dgps())
        if (d.id == id) return d;
    throw InputError("unknown DGP id '" + std::string(id) + "'");
}

Sample draw_sample(const DgpSpec& dgp, Eigen::Index n, std::mt19937_64& rng) {
    if (n < 1) throw InputError("sample size must be positive");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, dgp.dims);
    Eigen::VectorXd y(n);
    std::vector<double> pt(static_cast<std::size_t>(dgp.dims));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int l = 0; l < dgp.dims; ++l) x(i, l) = pt[l] = unif(rng);
        y[i] = dgp.mean(pt) + dgp.sd(pt) * normal(rng);
    }
    return Sample(std::move(y), std::move(x));
}

CoverageReport simulate_coverage(const DgpSpec& dgp, const CoverageOptions& options) {
    if (options.reps < 1) throw InputError("replication count must be positive");
    EstimationOptions est = options.estimation;
    est.all_corrections = true;
    const MultiIndex q = est.deriv_for(dgp.dims);
    if (total_order(q) != 0) throw InputError("coverage harness supports q = 0 only");
    est.validate(dgp.dims);

    const int per_dim = options.grid_points > 0 ? options.grid_points : (dgp.dims == 1 ? 49 : 15);
    // Evenly spaced over [0.1, 0.9] of the unit design support.
    std::vector<double> axis;
    for (int k = 0; k < per_dim; ++k) {
        axis.push_back(per_dim == 1 ? 0.5 : 0.1 + 0.8 * k / (per_dim - 1));
    }
    CoverageReport report;
    report.dgp = dgp.id;
    report.n = options.n;
    report.reps = options.reps;
    report.seed = est.seed;
    report.alpha = est.alpha;
    if (dgp.dims == 1) {
        for (double v : axis) report.grid.push_back({v});
    } else if (dgp.dims == 2) {
        for (double b : axis)
            for (double a : axis) report.grid.push_back({a, b});
    } else {
        throw InputError("coverage harness supports d <= 2");
    }
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < report.grid.size(); ++g) {
        double dist = 0.0;
        for (double v : report.grid[g]) dist += (v - 0.5) * (v - 0.5);
        if (dist < best_dist) {
            best_dist = dist;
            best = g;
        }
    }
    report.median_index = best;

    std::vector<double> truth;
    for (const auto& p : report.grid) truth.push_back(dgp.mean(p));

    const auto corrections = est.reported();
    std::vector<RepOutcome> outcomes(options.reps);
    const std::uint64_t seed = est.seed;
    detail::parallel_for(options.reps, [&](std::size_t r) {
        auto rng = detail::substream(seed, r, data_stream);
        const Sample sample = draw_sample(dgp, options.n, rng);
        EstimationOptions local = est;
        local.seed = detail::substream(seed, r, band_stream)();
        const EstimationResult res = run_estimation(sample, local, report.grid);
        RepOutcome& out = outcomes[r];
        out.kappa = res.groups.front().kappa.front();
        for (const auto& cr : res.results) {
            std::vector<char> cov(truth.size());
            bool all = true;
            for (std::size_t g = 0; g < truth.size(); ++g) {
                cov[g] = cr.ci_lo[g] <= truth[g] && truth[g] <= cr.ci_hi[g];
                if (local.band) all = all && cr.band_lo[g] <= truth[g] && truth[g] <= cr.band_hi[g];
            }
            out.covered.push_back(std::move(cov));
            out.band_covered.push_back(all);
            out.ci_width.push_back(cr.ci_hi[best] - cr.ci_lo[best]);
            out.band_width.push_back(local.band ? cr.band_hi[best] - cr.band_lo[best] : 0.0);
        }
    });

    const auto reps = static_cast<double>(options.reps);
    for (const auto& o : outcomes) report.mean_kappa += o.kappa / reps;
    for (std::size_t k = 0; k < corrections.size(); ++k) {
        CoverageRow row;
        row.correction = corrections[k];
        row.hc = est.hc_for(corrections[k]);
        double point = 0.0, median = 0.0, band = 0.0, ciw = 0.0, bw = 0.0;
        for (const auto& o : outcomes) {
            double c = 0.0;
            for (char v : o.covered[k]) c += v;
            point += c / static_cast<double>(truth.size());
            median += o.covered[k][best];
            band += o.band_covered[k];
            ciw += o.ci_width[k];
            bw += o.band_width[k];
        }
        row.pointwise = point / reps;
        row.median_point = median / reps;
        row.ci_width = ciw / reps;
        if (est.band) {
            row.band = band / reps;
            row.band_width = bw / reps;
        }
        report.rows.push_back(row);
    }
    return report;
}

} // namespace lspart
