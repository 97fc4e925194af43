// Acceptance suite: one PASS/FAIL line per criterion.
#include "support.hpp"

#include "lspart/basis.hpp"
#include "lspart/estimator.hpp"
#include "lspart/inference.hpp"
#include "lspart/simulate.hpp"
#include "lspart/tuning.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace lspart;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail += " (over the time budget)";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Partition unit_partition(int kappa, int d) {
    std::vector<std::vector<double>> k;
    for (int l = 0; l < d; ++l) k.push_back(testkit::even_knots(0.0, 1.0, kappa));
    return Partition(std::move(k), Spacing::even);
}

std::shared_ptr<const Design> design_for(const Sample& s, Family fam, int m, const std::vector<int>& kappa,
                                         Spacing sp = Spacing::even) {
    const Partition p = make_partition(s, kappa, sp);
    return std::make_shared<const Design>(build_design(s, BasisSpec::make(fam, m, MultiIndex(kappa.size(), 0)), p));
}

auto sinbump = [](const testkit::Point& x) {
    return std::sin(2 * M_PI * x[0]) + std::exp(-25 * std::pow(x[0] - 0.5, 2));
};
auto sinbump_sd = [](const testkit::Point& x) { return 0.25 + 0.5 * x[0]; };

Outcome partition_of_unity() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int d : {1, 2})
        for (int m = 1; m <= 4; ++m)
            for (int kappa : {1, 2, 5, 13}) {
                const Partition p = unit_partition(kappa, d);
                const std::vector<int> q(static_cast<std::size_t>(d), 0);
                for (int i = 0; i < 1000; ++i) {
                    std::vector<double> x(static_cast<std::size_t>(d));
                    for (auto& v : x) v = u(rng);
                    worst = std::max(worst, std::abs(eval_bspline(p, m, q, x).sum() - 1.0));
                }
            }
    return {worst <= 1e-12, "max |sum - 1| = " + fmt("%.2e", worst)};
}

Outcome polynomial_exactness() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (Family fam : {Family::bspline, Family::piecewise_poly})
        for (int d : {1, 2})
            for (int m = 1; m <= 4; ++m) {
                // random total-degree-(m-1) polynomial
                std::vector<std::pair<std::vector<int>, double>> terms;
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < (d == 2 ? m - a : 1); ++b) terms.push_back({{a, b}, 3 * g(rng)});
                auto poly = [&](const testkit::Point& x) {
                    double v = 0;
                    for (const auto& [e, c] : terms) v += c * std::pow(x[0], e[0]) * (d == 2 ? std::pow(x[1], e[1]) : 1.0);
                    return v;
                };
                const Sample s = support::uniform_sample(600, d, 10 + m, poly, [](const auto&) { return 0.0; });
                const Fit f = fit_ls(design_for(s, fam, m, std::vector<int>(static_cast<std::size_t>(d), 3)), s.y());
                worst = std::max(worst, f.residuals().cwiseAbs().maxCoeff() / support::scale(s.y()));
            }
    return {worst <= 1e-8, "max |residual| / scale(y) = " + fmt("%.2e", worst)};
}

Outcome normal_equations() {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 1000);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Family fam = inst % 2 ? Family::bspline : Family::piecewise_poly;
        const int d = 1 + pick(rng) % 2;
        const int m = 1 + pick(rng) % 4;
        const int kappa = 1 + pick(rng) % (d == 1 ? 8 : 3);
        const Spacing sp = pick(rng) % 2 ? Spacing::even : Spacing::quantile;
        const double amp = std::pow(10.0, pick(rng) % 5 - 2);
        const Sample s = support::uniform_sample(
            400, d, 100 + inst, [amp](const auto& x) { return amp * std::sin(7 * x[0]) * std::exp(x.back()); },
            [amp](const auto& x) { return amp * (0.1 + x[0]); });
        const auto des = design_for(s, fam, m, std::vector<int>(static_cast<std::size_t>(d), kappa), sp);
        const Fit f = fit_ls(des, s.y());
        worst = std::max(worst, (des->matrix().transpose() * f.residuals()).cwiseAbs().maxCoeff() / support::scale(s.y()));
    }
    return {worst <= 1e-8, "max |B'e| / scale(y) = " + fmt("%.2e", worst)};
}

Outcome derivative_consistency() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int points = 0;
    for (Family fam : {Family::bspline, Family::piecewise_poly})
        for (int d : {1, 2})
            for (int m = 2; m <= 4; ++m) {
                const Partition p({{0.0, 0.2, 0.45, 0.5, 0.8, 1.0}, testkit::even_knots(0, 1, 3)}, Spacing::even);
                const Partition part = d == 1 ? Partition({p.knots(0)}, Spacing::even) : p;
                int done = 0;
                while (done < 200) {
                    std::vector<double> x(static_cast<std::size_t>(d));
                    for (auto& v : x) v = u(rng);
                    bool near = false;
                    for (int l = 0; l < d; ++l)
                        for (double t : part.knots(l)) near = near || std::abs(x[l] - t) < 1e-3;
                    if (near) continue;
                    ++done;
                    ++points;
                    // each derivative level against a central difference of the level below
                    const int dim = done % d;
                    for (int q = 1; q < m; ++q) {
                        std::vector<int> hi(static_cast<std::size_t>(d), 0), lo(static_cast<std::size_t>(d), 0);
                        hi[dim] = q;
                        lo[dim] = q - 1;
                        const Eigen::VectorXd analytic = eval_basis(fam, part, m, hi, x);
                        const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
                        for (Eigen::Index k = 0; k < analytic.size(); ++k) {
                            if (analytic[k] == 0.0 && eval_basis(fam, part, m, lo, x)[k] == 0.0) continue;
                            const double fd = testkit::fd_partial(
                                [&](const testkit::Point& z) { return eval_basis(fam, part, m, lo, z)[k]; }, x, dim, 1e-5);
                            worst = std::max(worst, std::abs(fd - analytic[k]) / scale);
                        }
                    }
                }
            }
    return {worst <= 1e-6, std::to_string(points) + " points, max relative error " + fmt("%.2e", worst)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick(0, 1000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int checked = 0;
    for (int inst = 0; inst < 20; ++inst) {
        const Family fam = inst % 2 ? Family::bspline : Family::piecewise_poly;
        const int d = inst % 4 < 2 ? 1 : 2;
        const int m = 1 + pick(rng) % (d == 1 ? 3 : 2);
        const int kappa = 1 + pick(rng) % (d == 1 ? 4 : 2);
        const int n = 80 + pick(rng) % 121;
        const Spacing sp = pick(rng) % 2 ? Spacing::even : Spacing::quantile;
        const Sample s = support::uniform_sample(
            static_cast<std::size_t>(n), d, 200 + inst,
            [](const auto& x) { return std::cos(4 * x[0]) + x.back() * x.back(); },
            [](const auto& x) { return 0.2 + 0.3 * x[0]; });
        const std::vector<int> kv(static_cast<std::size_t>(d), kappa);
        const auto dm = design_for(s, fam, m, kv, sp);
        const auto da = std::make_shared<const Design>(
            build_design(s, BasisSpec::make(fam, m + 1, MultiIndex(static_cast<std::size_t>(d), 0)), dm->partition()));
        if (da->size() > 40) throw std::logic_error("instance exceeds K <= 40");
        InferenceContext ctx(fit_ls(dm, s.y()), fit_ls(da, s.y()));
        const testkit::Instance oracle{s.x(), s.y(), support::knots_of(dm->partition()),
                                       support::oracle_family(fam), m, m + 1};
        for (int rep = 0; rep < 3; ++rep) {
            testkit::Point x(static_cast<std::size_t>(d));
            for (int l = 0; l < d; ++l) x[l] = dm->partition().lower(l) + u(rng) * (dm->partition().upper(l) - dm->partition().lower(l));
            std::vector<int> q(static_cast<std::size_t>(d), 0);
            q[0] = rep % m;
            for (int j = 0; j < 4; ++j) {
                const double got = ctx.influence_row(x, q, static_cast<Correction>(j)).apply(s.y());
                const double want = testkit::brute_force_estimator(oracle, x, q, j);
                worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
                ++checked;
            }
        }
    }
    return {worst <= 1e-10, std::to_string(checked) + " estimates, max deviation " + fmt("%.2e", worst)};
}

Outcome kappa_one_reduction() {
    double worst_est = 0.0, worst_se = 0.0;
    for (int m = 1; m <= 4; ++m) {
        const Sample s = support::uniform_sample(300, 1, 300 + m, sinbump, sinbump_sd);
        const auto des = design_for(s, Family::bspline, m, {1});
        const Fit f = fit_ls(des, s.y());
        // closed-form OLS on the polynomial of degree m - 1
        const Eigen::VectorXd c = testkit::oracle_ols(s.x().col(0), s.y(), m - 1);
        Eigen::MatrixXd v(s.size(), m);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            for (int k = 0; k < m; ++k) v(i, k) = std::pow(s.x()(i, 0), k);
        const Eigen::VectorXd e = s.y() - v * c;
        const Eigen::MatrixXd bread = (v.transpose() * v).inverse();
        const Eigen::MatrixXd meat = v.transpose() * e.array().square().matrix().asDiagonal() * v;
        for (double x : {0.1, 0.37, 0.5, 0.9}) {
            Eigen::VectorXd vx(m);
            for (int k = 0; k < m; ++k) vx[k] = std::pow(x, k);
            const double est = vx.dot(c);
            const double se = std::sqrt(vx.dot(bread * meat * bread * vx));
            const double pt[] = {x};
            const int q[] = {0};
            const InfluenceRow row = influence_row(f, nullptr, pt, q, Correction::none);
            worst_est = std::max(worst_est, std::abs(row.apply(s.y()) - est));
            worst_se = std::max(worst_se, std::abs(point_se(row, f, HcKind::hc0) - se));
        }
    }
    return {worst_est <= 1e-8 && worst_se <= 1e-8,
            "max estimate error " + fmt("%.2e", worst_est) + ", max hc0 se error " + fmt("%.2e", worst_se)};
}

Outcome selector_rate() {
    std::vector<double> ns, rot, dpi;
    for (int e = 10; e <= 16; ++e) {
        const auto n = static_cast<std::size_t>(1) << e;
        const Sample s = support::uniform_sample(n, 1, 700 + e, sinbump, sinbump_sd);
        const TuningReport r = select_dpi(s, BasisSpec::make(Family::bspline, 2, {0}), Spacing::even);
        ns.push_back(static_cast<double>(n));
        rot.push_back(r.kappa_rot);
        dpi.push_back(r.kappa());
    }
    const double sr = testkit::log_log_slope(ns, rot);
    const double sd = testkit::log_log_slope(ns, dpi);
    std::ostringstream os;
    os << "slope ROT " << fmt("%.3f", sr) << ", DPI " << fmt("%.3f", sd) << " (kappa ROT";
    for (double k : rot) os << ' ' << k;
    os << "; DPI";
    for (double k : dpi) os << ' ' << k;
    os << ')';
    return {std::abs(sr - 0.2) <= 0.05 && std::abs(sd - 0.2) <= 0.05, os.str()};
}

Outcome single_point_band() {
    const Sample s = support::uniform_sample(500, 1, 8, sinbump, sinbump_sd);
    const auto dm = design_for(s, Family::bspline, 2, {6});
    const auto da = std::make_shared<const Design>(build_design(s, BasisSpec::make(Family::bspline, 3, {0}), dm->partition()));
    InferenceContext ctx(fit_ls(dm, s.y()), fit_ls(da, s.y()));
    const double pt[] = {0.5};
    const int q[] = {0};
    const std::vector<InfluenceRow> rows{ctx.influence_row(pt, q, Correction::plug_in)};
    const BandResult b = uniform_band(rows, ctx.main(), HcKind::hc3, 0.05, 5000, 2024);
    return {std::abs(b.critical_value - 1.959964) <= 0.05, "critical value " + fmt("%.4f", b.critical_value)};
}

Outcome coverage() {
    CoverageOptions o;
    o.n = 1000;
    o.reps = 1000;
    o.estimation.selector = Selector::dpi;
    o.estimation.hc = HcKind::hc3;
    o.estimation.num_sim = 2000;
    o.estimation.seed = 20240501;
    const CoverageReport r = simulate_coverage(find_dgp("sinbump"), o);
    const CoverageRow* j0 = nullptr;
    const CoverageRow* j3 = nullptr;
    for (const auto& row : r.rows) {
        if (row.correction == Correction::none) j0 = &row;
        if (row.correction == Correction::plug_in) j3 = &row;
    }
    const bool pass = j3->median_point >= 0.92 && j3->median_point <= 0.975 && *j3->band >= 0.91 &&
                      *j3->band <= 0.98 && j0->median_point < j3->median_point;
    std::ostringstream os;
    os << "bc=3 pointwise at median " << fmt("%.3f", j3->median_point) << ", band " << fmt("%.3f", *j3->band)
       << "; bc=0 pointwise at median " << fmt("%.3f", j0->median_point) << ", band " << fmt("%.3f", *j0->band)
       << "; mean kappa " << fmt("%.2f", r.mean_kappa);
    return {pass, os.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome cli_determinism() {
    const fs::path dir = fs::path(LSPART_TEST_WORKDIR) / "acceptance";
    fs::create_directories(dir);
    {
        std::mt19937_64 rng(10);
        const auto d = testkit::draw(800, 1, sinbump, sinbump_sd, rng);
        std::ofstream out(dir / "data.csv");
        out.precision(17);
        out << "y,x,g\n";
        for (Eigen::Index i = 0; i < d.y.size(); ++i) out << d.y[i] << ',' << d.x(i, 0) << ',' << (i % 3 ? "a" : "b") << '\n';
    }
    const std::string data = (dir / "data.csv").string();
    const std::vector<std::pair<std::string, bool>> commands{
        {"fit --input " + data + " --y y --x x --seed 7", true},
        {"fit --input " + data + " --y y --x x --method pp --m 3 --m-bc 4 --bc 2 --ktype quantile --seed 7", true},
        {"select --input " + data + " --y y --x x --kselect dpi", false},
        {"lincom --input " + data + " --y y --x x --group-col g --weights 1,-1 --seed 3", true},
        {"simulate --dgp sinbump --n 500 --reps 20 --nsim 500 --seed 5", false},
    };
    int identical = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string outputs[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path json = dir / ("out" + std::to_string(k) + ".json");
            const fs::path plot = dir / ("out" + std::to_string(k) + ".csv");
            std::string cmd = std::string(LSPART_CLI_PATH) + " " + commands[c].first + " --out " + json.string();
            if (commands[c].second) cmd += " --plot " + plot.string();
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + commands[c].first};
            outputs[k] = slurp(json) + (commands[c].second ? slurp(plot) : "");
        }
        if (outputs[0] == outputs[1] && !outputs[0].empty()) ++identical;
    }
    return {identical == static_cast<int>(commands.size()),
            std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
}

} // namespace

int main() {
    criterion(1, "partition of unity", 5, partition_of_unity);
    criterion(2, "polynomial exactness", 10, polynomial_exactness);
    criterion(3, "normal equations", 0, normal_equations);
    criterion(4, "derivative consistency", 0, derivative_consistency);
    criterion(5, "oracle equivalence", 0, oracle_equivalence);
    criterion(6, "kappa = 1 reduction", 0, kappa_one_reduction);
    criterion(7, "selector rate", 120, selector_rate);
    criterion(8, "single-point band", 0, single_point_band);
    criterion(9, "coverage", 900, coverage);
    criterion(10, "CLI determinism", 0, cli_determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
