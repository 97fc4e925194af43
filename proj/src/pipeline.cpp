#include "lspart/lincom.hpp"
#include "lspart/pipeline.hpp"

#include "lspart/estimator.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lspart {

void EstimationOptions::validate(int dims) const {
    BasisSpec::make(family, order, deriv_for(dims)).validate(dims);
    if (!kappa.empty()) {
        if (static_cast<int>(kappa.size()) != dims && kappa.size() != 1) {
            throw InputError("kappa needs one entry or one per covariate");
        }
        for (int k : kappa)
            if (k < 1) throw InputError("kappa must be at least 1");
    }
    const bool needs_aux = correction != Correction::none || all_corrections;
    if (needs_aux && bc_order <= order) {
        throw InputError("bias correction requires m_bc > m");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (band && num_sim < 100) throw InputError("uniform band needs at least 100 simulations");
}

MultiIndex EstimationOptions::deriv_for(int dims) const {
    if (deriv.empty()) return MultiIndex(static_cast<std::size_t>(dims), 0);
    return deriv;
}

HcKind EstimationOptions::hc_for(Correction j) const {
    if (hc) return *hc;
    return j == Correction::none ? HcKind::hc0 : HcKind::hc3;
}

std::vector<Correction> EstimationOptions::reported() const {
    if (all_corrections) {
        return {Correction::none, Correction::higher_order, Correction::least_squares,
                Correction::plug_in};
    }
    if (correction == Correction::none) return {Correction::none};
    return {Correction::none, correction};
}

const CorrectionResult& EstimationResult::result(Correction j) const {
    for (const auto& r : results)
        if (r.correction == j) return r;
    throw InputError("correction not reported");
}

namespace {

struct GroupWork {
    GroupSummary summary;
    Diagnostics diag;
    // per reported correction: estimates, ses, score matrix (grid x n_g)
    std::vector<std::vector<double>> estimate;
    std::vector<std::vector<double>> se;
    std::vector<Eigen::MatrixXd> scores;
};

std::vector<int> expand_kappa(const std::vector<int>& kappa, int dims) {
    if (kappa.size() == 1) return std::vector<int>(static_cast<std::size_t>(dims), kappa[0]);
    return kappa;
}

GroupWork estimate_group(const Sample& sample, const EstimationOptions& options,
                         const std::vector<int>& fixed_kappa, const Grid& grid) {
    GroupWork work;
    const int d = sample.dims();
    const MultiIndex q = options.deriv_for(d);
    const BasisSpec spec = BasisSpec::make(options.family, options.order, q);
    work.summary.n = sample.size();

    std::vector<int> kappa = fixed_kappa;
    if (kappa.empty()) {
        TuningReport report = select_kappa(sample, spec, options.spacing, options.selector);
        work.diag.merge(report.diagnostics);
        kappa.assign(static_cast<std::size_t>(d), report.kappa());
        work.summary.tuning = std::move(report);
    }
    const Partition part = make_partition(sample, kappa, options.spacing, &work.diag);
    work.summary.kappa = part.kappas();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (static_cast<int>(grid[g].size()) != d) throw InputError("grid point dimension mismatch");
        if (!part.contains(grid[g])) {
            std::ostringstream os;
            os << "grid point " << g << " lies outside the support of the sample";
            throw OutOfSupportError(os.str());
        }
    }

    auto main_design = std::make_shared<const Design>(build_design(sample, spec, part, &work.diag));
    Fit main = fit_ls(main_design, sample.y());
    work.summary.basis_dim = static_cast<int>(main_design->size());
    work.summary.effective_rank = main_design->effective_rank();

    const auto reported = options.reported();
    std::optional<Fit> aux;
    if (reported.size() > 1 || reported.front() != Correction::none) {
        auto aux_design = std::make_shared<const Design>(
            build_design(sample, BasisSpec::make(options.family, options.bc_order, q), part, &work.diag));
        work.summary.aux_basis_dim = static_cast<int>(aux_design->size());
        aux = fit_ls(aux_design, sample.y());
    }
    const InferenceContext context(main, std::move(aux));

    const auto n = static_cast<double>(sample.size());
    for (Correction j : reported) {
        const Eigen::VectorXd w = hc_weights(context.main(), options.hc_for(j), default_weight_cap, &work.diag);
        std::vector<double> est, se;
        Eigen::MatrixXd scores(static_cast<Eigen::Index>(grid.size()), sample.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const InfluenceRow row = context.influence_row(grid[g], q, j);
            est.push_back(row.apply(sample.y()));
            const double s = (row.a.array().square() * w.array() *
                              context.main().residuals().array().square()).sum();
            se.push_back(std::sqrt(s) / n);
            scores.row(static_cast<Eigen::Index>(g)) =
                score_row(row, context.main().residuals(), w).transpose();
        }
        work.estimate.push_back(std::move(est));
        work.se.push_back(std::move(se));
        work.scores.push_back(std::move(scores));
    }
    return work;
}

EstimationResult estimate_groups(const std::vector<const Sample*>& groups,
                                 const std::vector<double>& weights, const EstimationOptions& options,
                                 const Grid& grid, bool shared_kappa) {
    if (groups.empty()) throw InputError("no groups");
    if (grid.empty()) throw InputError("evaluation grid is empty");
    const int d = groups.front()->dims();
    for (const Sample* s : groups)
        if (s->dims() != d) throw InputError("groups differ in covariate count");
    options.validate(d);

    // Canonical order by content so that listing order cannot matter.
    const std::size_t count = groups.size();
    std::vector<std::uint64_t> fingerprint(count);
    for (std::size_t g = 0; g < count; ++g) fingerprint[g] = groups[g]->fingerprint();
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fingerprint[a] < fingerprint[b]; });
    std::vector<std::uint64_t> key(count);
    for (std::size_t r = 0; r < count; ++r) {
        std::uint64_t occurrence = 0;
        for (std::size_t s = 0; s < r; ++s)
            if (fingerprint[order[s]] == fingerprint[order[r]]) ++occurrence;
        key[r] = fingerprint[order[r]] + occurrence * 0x9E3779B97F4A7C15ULL;
    }

    std::vector<int> fixed = expand_kappa(options.kappa, d);
    EstimationResult result;
    result.grid = grid;
    if (fixed.empty() && shared_kappa && count > 1) {
        Eigen::Index total = 0;
        for (const Sample* s : groups) total += s->size();
        Eigen::VectorXd y(total);
        Eigen::MatrixXd x(total, d);
        Eigen::Index at = 0;
        for (std::size_t r = 0; r < count; ++r) {
            const Sample& s = *groups[order[r]];
            y.segment(at, s.size()) = s.y();
            x.middleRows(at, s.size()) = s.x();
            at += s.size();
        }
        const TuningReport pooled = select_kappa(Sample(y, x),
                                                 BasisSpec::make(options.family, options.order,
                                                                 options.deriv_for(d)),
                                                 options.spacing, options.selector);
        result.diagnostics.merge(pooled.diagnostics);
        fixed.assign(static_cast<std::size_t>(d), pooled.kappa());
    }

    std::vector<GroupWork> work(count);
    detail::parallel_for(count, [&](std::size_t r) {
        work[r] = estimate_group(*groups[order[r]], options, fixed, grid);
    });

    result.groups.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
        result.groups[order[r]] = work[r].summary;
        result.diagnostics.merge(work[r].diag);
    }

    const auto reported = options.reported();
    const auto points = static_cast<Eigen::Index>(grid.size());
    Eigen::Index total = 0;
    std::vector<MultiplierBlock> blocks;
    for (std::size_t r = 0; r < count; ++r) {
        blocks.push_back({key[r], total, work[r].summary.n});
        total += work[r].summary.n;
    }

    const double z = normal_quantile(1.0 - options.alpha / 2.0);
    std::vector<Eigen::MatrixXd> stacked;
    for (std::size_t k = 0; k < reported.size(); ++k) {
        CorrectionResult cr;
        cr.correction = reported[k];
        cr.hc = options.hc_for(reported[k]);
        cr.estimate.assign(grid.size(), 0.0);
        std::vector<double> variance(grid.size(), 0.0);
        Eigen::MatrixXd scores(points, total);
        for (std::size_t r = 0; r < count; ++r) {
            const double w = weights[order[r]];
            for (std::size_t g = 0; g < grid.size(); ++g) {
                cr.estimate[g] += w * work[r].estimate[k][g];
                variance[g] += w * w * work[r].se[k][g] * work[r].se[k][g];
            }
            scores.middleCols(blocks[r].offset, blocks[r].size) = w * work[r].scores[k];
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double se = std::sqrt(variance[g]);
            cr.se.push_back(se);
            cr.ci_lo.push_back(cr.estimate[g] - z * se);
            cr.ci_hi.push_back(cr.estimate[g] + z * se);
        }
        if (options.band) {
            const auto zero = std::count(cr.se.begin(), cr.se.end(), 0.0);
            if (zero > 0) {
                std::ostringstream os;
                os << "j=" << static_cast<int>(cr.correction) << ": " << zero
                   << " grid point(s) with zero standard error excluded from the supremum";
                result.diagnostics.warn(os.str());
            }
        }
        stacked.push_back(std::move(scores));
        result.results.push_back(std::move(cr));
    }

    if (options.band) {
        const auto draws = simulate_suprema(stacked, blocks, options.num_sim, options.seed);
        for (std::size_t k = 0; k < reported.size(); ++k) {
            CorrectionResult& cr = result.results[k];
            const double cv = sup_quantile(draws[k], options.alpha);
            cr.critical_value = cv;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                cr.band_lo.push_back(cr.estimate[g] - cv * cr.se[g]);
                cr.band_hi.push_back(cr.estimate[g] + cv * cr.se[g]);
            }
        }
    }
    return result;
}

} // namespace

EstimationResult run_estimation(const Sample& sample, const EstimationOptions& options,
                                const Grid& grid) {
    return estimate_groups({&sample}, {1.0}, options, grid, false);
}

void LincomSpec::validate() const {
    if (groups.empty()) throw InputError("linear combination needs at least one group");
    if (weights.size() != groups.size()) throw InputError("need one weight per group");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w)) throw InputError("non-finite group weight");
        total += std::abs(w);
    }
    if (!(total > 0.0)) throw InputError("group weights must not all be zero");
}

EstimationResult lincom_estimate(const LincomSpec& spec, const LincomOptions& options,
                                 const Grid& grid) {
    spec.validate();
    std::vector<const Sample*> groups;
    for (const auto& s : spec.groups) groups.push_back(&s);
    return estimate_groups(groups, spec.weights, options.estimation, grid, options.shared_kappa);
}

Grid lincom_default_grid(const LincomSpec& spec, int per_dim) {
    spec.validate();
    const int d = spec.groups.front().dims();
    if (d > 2) throw InputError("default grid supports d <= 2; supply an explicit grid");
    if (per_dim < 1) throw InputError("grid needs at least one point per dimension");
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (const auto& s : spec.groups) {
            lo = std::max(lo, s.x().col(l).minCoeff());
            hi = std::min(hi, s.x().col(l).maxCoeff());
        }
        if (!(hi > lo)) throw InputError("group supports do not overlap");
        for (int k = 1; k <= per_dim; ++k) axes[l].push_back(lo + (hi - lo) * k / (per_dim + 1));
    }
    Grid grid;
    if (d == 1) {
        for (double v : axes[0]) grid.push_back({v});
    } else {
        for (double b : axes[1])
            for (double a : axes[0]) grid.push_back({a, b});
    }
    return grid;
}

} // namespace lspart
