#include "lspart/inference.hpp"

#include "parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lspart {

Eigen::VectorXd hc_weights(const Fit& fit, HcKind kind, double cap, Diagnostics* diag) {
    const Eigen::Index n = fit.n();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    const auto& lev = fit.leverage();
    int capped = 0;
    auto capped_value = [&](double denom, int power) {
        if (denom <= 0.0) {
            ++capped;
            return cap;
        }
        const double v = std::pow(1.0 / denom, power);
        if (v > cap) {
            ++capped;
            return cap;
        }
        return v;
    };
    switch (kind) {
    case HcKind::hc0:
        break;
    case HcKind::hc1: {
        const double k = fit.design().effective_rank();
        const double v = capped_value((static_cast<double>(n) - k) / static_cast<double>(n), 1);
        w.setConstant(v);
        if (capped > 0) capped = static_cast<int>(n);
        break;
    }
    case HcKind::hc2:
        for (Eigen::Index i = 0; i < n; ++i) w[i] = capped_value(1.0 - lev[i], 1);
        break;
    case HcKind::hc3:
        for (Eigen::Index i = 0; i < n; ++i) w[i] = capped_value(1.0 - lev[i], 2);
        break;
    }
    if (capped > 0) {
        std::ostringstream os;
        os << capped << " residual weight(s) capped at " << cap << " (leverage near one)";
        warn(diag, os.str());
    }
    return w;
}

namespace {

void check_pair(const Design& main, const Design& aux) {
    if (!(main.partition() == aux.partition())) {
        throw InputError("main and auxiliary fits must share the partition");
    }
    if (main.spec().family != aux.spec().family) {
        throw InputError("main and auxiliary fits must use the same basis family");
    }
    if (aux.spec().order <= main.spec().order) {
        throw InputError("auxiliary fit order must exceed the main order");
    }
}

double factorial(int m) {
    double f = 1.0;
    for (int k = 2; k <= m; ++k) f *= k;
    return f;
}

} // namespace

Eigen::VectorXd leading_bias_functional(const Design& main, const Design& aux,
                                        std::span<const double> point, std::span<const int> deriv) {
    check_pair(main, aux);
    const Partition& part = main.partition();
    const int d = part.dims();
    const int m = main.spec().order;
    if (static_cast<int>(deriv.size()) != d) throw InputError("derivative index dimension mismatch");
    int total = 0;
    for (int q : deriv) total += q;
    if (total >= m) throw InputError("derivative order must be below the main basis order");

    Eigen::VectorXd out = Eigen::VectorXd::Zero(aux.size());
    MultiIndex pure(static_cast<std::size_t>(d), 0);
    for (int l = 0; l < d; ++l) {
        // Only pure m-th derivatives in direction l survive d^q when q is
        // zero outside l.
        if (deriv[l] != total) continue;
        const int cell = locate_interval(part.knots(l), point[l]);
        const double h = part.width(l, cell);
        const double t = (point[l] - part.knots(l)[cell]) / h;
        const double k = -std::pow(h, m - deriv[l]) * error_kernel(main.spec().family, m, deriv[l], t) /
                         factorial(m);
        pure.assign(static_cast<std::size_t>(d), 0);
        pure[l] = m;
        out += k * aux.basis_row(point, pure);
    }
    return out;
}

double estimate_leading_bias(const Fit& fit_main, const Fit& fit_aux, std::span<const double> point,
                             std::span<const int> deriv) {
    return leading_bias_functional(fit_main.design(), fit_aux.design(), point, deriv)
        .dot(fit_aux.beta());
}

InferenceContext::InferenceContext(Fit main, std::optional<Fit> aux)
    : main_(std::move(main)), aux_(std::move(aux)) {
    if (!aux_) return;
    const Design& md = main_.design();
    const Design& ad = aux_->design();
    check_pair(md, ad);
    if (aux_->n() != main_.n() || aux_->y() != main_.y()) {
        throw InputError("main and auxiliary fits must use the same sample");
    }
    const int d = md.partition().dims();
    const MultiIndex zero(static_cast<std::size_t>(d), 0);
    const Eigen::Index n = main_.n();
    sample_bias_.resize(n, ad.size());
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int l = 0; l < d; ++l) pt[l] = md.covariates()(i, l);
        sample_bias_.row(i) = leading_bias_functional(md, ad, pt, zero).transpose();
    }
}

InfluenceRow InferenceContext::influence_row(std::span<const double> point,
                                             std::span<const int> deriv,
                                             Correction correction) const {
    InfluenceRow row;
    row.correction = correction;
    row.point.assign(point.begin(), point.end());
    row.deriv.assign(deriv.begin(), deriv.end());

    const Design& md = main_.design();
    if (correction != Correction::none && !aux_) {
        throw InputError("bias correction requires an auxiliary fit");
    }
    if (correction == Correction::higher_order) {
        const Design& ad = aux_->design();
        row.a = ad.matrix() * ad.solve(ad.basis_row(point, deriv));
        return row;
    }
    const Eigen::VectorXd v0 = md.solve(md.basis_row(point, deriv));
    const Eigen::VectorXd a0 = md.matrix() * v0;
    if (correction == Correction::none) {
        row.a = a0;
        return row;
    }
    const Design& ad = aux_->design();
    Eigen::VectorXd c = leading_bias_functional(md, ad, point, deriv);
    if (correction == Correction::least_squares) {
        c -= sample_bias_.transpose() * a0 / static_cast<double>(main_.n());
    }
    row.a = a0 - ad.matrix() * ad.solve(c);
    return row;
}

InfluenceRow influence_row(const Fit& fit_main, const Fit* fit_aux, std::span<const double> point,
                           std::span<const int> deriv, Correction correction) {
    std::optional<Fit> aux;
    if (fit_aux != nullptr) aux = *fit_aux;
    return InferenceContext(fit_main, std::move(aux)).influence_row(point, deriv, correction);
}

Eigen::VectorXd score_row(const InfluenceRow& row, const Eigen::VectorXd& residuals,
                          const Eigen::VectorXd& weights) {
    const auto n = static_cast<double>(residuals.size());
    return (row.a.array() * weights.array().sqrt() * residuals.array() / n).matrix();
}

double point_se(const InfluenceRow& row, const Fit& fit_main, HcKind kind, Diagnostics* diag) {
    if (row.a.size() != fit_main.n()) throw InputError("influence row length does not match fit");
    const Eigen::VectorXd w = hc_weights(fit_main, kind, default_weight_cap, diag);
    const auto n = static_cast<double>(fit_main.n());
    const double s = (row.a.array().square() * w.array() * fit_main.residuals().array().square()).sum();
    return std::sqrt(s) / n;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile level must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal(), p);
}

PointInference pointwise_ci(const std::array<double, 4>& estimate, const std::array<double, 4>& se,
                            double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    PointInference out;
    out.estimate = estimate;
    out.se = se;
    out.alpha = alpha;
    const double z = normal_quantile(1.0 - alpha / 2.0);
    for (std::size_t j = 0; j < 4; ++j) {
        out.ci[j] = {estimate[j] - z * se[j], estimate[j] + z * se[j]};
    }
    return out;
}

std::vector<std::vector<double>> simulate_suprema(std::span<const Eigen::MatrixXd> scores,
                                                  std::span<const MultiplierBlock> blocks,
                                                  int num_sim, std::uint64_t seed) {
    if (num_sim < 1) throw InputError("number of simulations must be positive");
    Eigen::Index total = 0;
    for (const auto& b : blocks) total = std::max(total, b.offset + b.size);
    std::vector<Eigen::MatrixXd> standardized;
    standardized.reserve(scores.size());
    for (const auto& s : scores) {
        if (s.cols() != total) throw InputError("score matrix width does not match multiplier blocks");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index g = 0; g < s.rows(); ++g) {
            if (s.row(g).norm() > 0.0) keep.push_back(g);
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(keep.size()), total);
        for (std::size_t r = 0; r < keep.size(); ++r) {
            m.row(static_cast<Eigen::Index>(r)) = s.row(keep[r]) / s.row(keep[r]).norm();
        }
        standardized.push_back(std::move(m));
    }

    std::vector<std::vector<double>> draws(scores.size(), std::vector<double>(num_sim, 0.0));
    constexpr int chunk = 64;
    const std::size_t chunks = (static_cast<std::size_t>(num_sim) + chunk - 1) / chunk;
    detail::parallel_for(chunks, [&](std::size_t c) {
        const int first = static_cast<int>(c) * chunk;
        const int count = std::min(chunk, num_sim - first);
        Eigen::MatrixXd omega(total, count);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int s = 0; s < count; ++s) {
            for (const auto& b : blocks) {
                auto rng = detail::substream(seed, static_cast<std::uint64_t>(first + s), b.key);
                for (Eigen::Index i = 0; i < b.size; ++i) omega(b.offset + i, s) = normal(rng);
                normal.reset();
            }
        }
        for (std::size_t k = 0; k < standardized.size(); ++k) {
            if (standardized[k].rows() == 0) continue;
            const Eigen::MatrixXd z = standardized[k] * omega;
            for (int s = 0; s < count; ++s) draws[k][first + s] = z.col(s).cwiseAbs().maxCoeff();
        }
    });
    return draws;
}

double sup_quantile(std::vector<double> draws, double alpha) {
    if (draws.empty()) throw InputError("no simulation draws");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    std::sort(draws.begin(), draws.end());
    const double pos = std::ceil((1.0 - alpha) * static_cast<double>(draws.size()) - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(draws.size()))) - 1;
    return draws[idx];
}

BandResult uniform_band(std::span<const InfluenceRow> rows, const Fit& fit_main, HcKind kind,
                        double alpha, int num_sim, std::uint64_t seed, Diagnostics* diag) {
    if (rows.empty()) throw InputError("uniform band needs a non-empty grid");
    if (num_sim < 100) throw InputError("uniform band needs at least 100 simulations");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");

    const Eigen::VectorXd w = hc_weights(fit_main, kind, default_weight_cap, diag);
    const Eigen::Index n = fit_main.n();
    Eigen::MatrixXd scores(static_cast<Eigen::Index>(rows.size()), n);
    BandResult out;
    out.num_sim = num_sim;
    out.seed = seed;
    int excluded = 0;
    for (std::size_t g = 0; g < rows.size(); ++g) {
        if (rows[g].a.size() != n) throw InputError("influence row length does not match fit");
        scores.row(static_cast<Eigen::Index>(g)) = score_row(rows[g], fit_main.residuals(), w).transpose();
        const double se = point_se(rows[g], fit_main, kind);
        out.grid.push_back(rows[g].point);
        out.estimates.push_back(rows[g].apply(fit_main.y()));
        out.ses.push_back(se);
        if (se == 0.0) ++excluded;
    }
    if (excluded > 0) {
        std::ostringstream os;
        os << excluded << " grid point(s) with zero standard error excluded from the supremum";
        warn(diag, os.str());
    }
    const Sample sample(fit_main.y(), fit_main.design().covariates());
    const MultiplierBlock block{sample.fingerprint(), 0, n};
    const auto draws = simulate_suprema(std::span<const Eigen::MatrixXd>(&scores, 1),
                                        std::span<const MultiplierBlock>(&block, 1), num_sim, seed);
    out.critical_value = sup_quantile(draws[0], alpha);
    for (std::size_t g = 0; g < rows.size(); ++g) {
        out.band.push_back({out.estimates[g] - out.critical_value * out.ses[g],
                            out.estimates[g] + out.critical_value * out.ses[g]});
    }
    return out;
}

} // namespace lspart
