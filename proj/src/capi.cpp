#include "lspart/lspart.h"

#include "lspart/lincom.hpp"
#include "lspart/pipeline.hpp"
#include "lspart/simulate.hpp"
#include "lspart/tuning.hpp"

#include "parallel.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <string>

struct lspart_sample {
    lspart::Sample sample;
};

struct lspart_tuning {
    lspart::TuningReport report;
};

struct lspart_result {
    lspart::EstimationResult result;
    std::vector<double> grid_flat;
    std::vector<std::unique_ptr<lspart_tuning>> tuning;
};

struct lspart_coverage {
    lspart::CoverageReport report;
};

namespace {

thread_local std::string last_error;

template <class Body>
lspart_status guarded(Body&& body) {
    try {
        body();
        last_error.clear();
        return LSPART_OK;
    } catch (const lspart::Error& e) {
        last_error = e.what();
        return e.kind() == lspart::ErrorKind::input ? LSPART_ERR_INPUT : LSPART_ERR_NUMERIC;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return LSPART_ERR_NUMERIC;
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw lspart::InputError(std::string("null ") + what);
}

lspart::EstimationOptions convert(const lspart_options& o, int dims) {
    lspart::EstimationOptions e;
    if (o.family != LSPART_BSPLINE && o.family != LSPART_PIECEWISE_POLY) {
        throw lspart::InputError("unknown basis family");
    }
    e.family = o.family == LSPART_BSPLINE ? lspart::Family::bspline : lspart::Family::piecewise_poly;
    e.order = o.m;
    e.bc_order = o.m_bc;
    if (o.deriv != nullptr) e.deriv.assign(o.deriv, o.deriv + dims);
    if (o.kappa != nullptr && o.kappa_len > 0) e.kappa.assign(o.kappa, o.kappa + o.kappa_len);
    if (o.selector != LSPART_SELECT_ROT && o.selector != LSPART_SELECT_DPI) {
        throw lspart::InputError("unknown kappa selector");
    }
    e.selector = o.selector == LSPART_SELECT_ROT ? lspart::Selector::rot : lspart::Selector::dpi;
    if (o.spacing != LSPART_SPACING_UNIFORM && o.spacing != LSPART_SPACING_QUANTILE) {
        throw lspart::InputError("unknown knot spacing");
    }
    e.spacing = o.spacing == LSPART_SPACING_UNIFORM ? lspart::Spacing::even : lspart::Spacing::quantile;
    if (o.bc < 0 || o.bc > 3) throw lspart::InputError("bias correction must be 0, 1, 2 or 3");
    e.correction = static_cast<lspart::Correction>(o.bc);
    if (o.hc != LSPART_HC_DEFAULT) {
        if (o.hc < 0 || o.hc > 3) throw lspart::InputError("hc must be 0, 1, 2 or 3");
        e.hc = static_cast<lspart::HcKind>(o.hc);
    }
    e.alpha = o.alpha;
    e.band = o.band != 0;
    e.num_sim = o.nsim;
    e.seed = o.seed;
    e.all_corrections = o.all_corrections != 0;
    return e;
}

lspart::Grid unflatten(const double* grid, size_t n_grid, int dims) {
    lspart::Grid g(n_grid, std::vector<double>(static_cast<std::size_t>(dims)));
    for (size_t i = 0; i < n_grid; ++i)
        for (int l = 0; l < dims; ++l) g[i][l] = grid[i * dims + l];
    return g;
}

lspart_result* wrap(lspart::EstimationResult r) {
    auto out = std::make_unique<lspart_result>(lspart_result{std::move(r), {}, {}});
    for (const auto& p : out->result.grid) out->grid_flat.insert(out->grid_flat.end(), p.begin(), p.end());
    for (const auto& g : out->result.groups) {
        out->tuning.push_back(g.tuning ? std::make_unique<lspart_tuning>(lspart_tuning{*g.tuning}) : nullptr);
    }
    return out.release();
}

const lspart::CorrectionResult& slot(const lspart_result* r, size_t k) { return r->result.results.at(k); }

} // namespace

extern "C" {

void lspart_options_init(lspart_options* o) {
    if (o == nullptr) return;
    *o = lspart_options{};
    o->family = LSPART_BSPLINE;
    o->m = 2;
    o->m_bc = 3;
    o->selector = LSPART_SELECT_DPI;
    o->spacing = LSPART_SPACING_UNIFORM;
    o->bc = 3;
    o->hc = LSPART_HC_DEFAULT;
    o->alpha = 0.05;
    o->band = 1;
    o->nsim = 2000;
    o->seed = 0;
    o->grid_points = 50;
}

const char* lspart_last_error(void) { return last_error.c_str(); }

const char* lspart_version(void) { return "1.0.0"; }

lspart_status lspart_sample_create(const double* y, const double* x, size_t n, size_t d,
                                   lspart_sample** out) {
    return guarded([&] {
        require(out, "output handle");
        if (n == 0) throw lspart::InputError("empty sample");
        if (d == 0) throw lspart::InputError("sample needs at least one covariate");
        require(y, "response array");
        require(x, "covariate array");
        Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y, static_cast<Eigen::Index>(n));
        Eigen::MatrixXd xx = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        *out = new lspart_sample{lspart::Sample(std::move(yy), std::move(xx))};
    });
}

void lspart_sample_free(lspart_sample* sample) { delete sample; }
size_t lspart_sample_size(const lspart_sample* s) { return s ? static_cast<size_t>(s->sample.size()) : 0; }
size_t lspart_sample_dims(const lspart_sample* s) { return s ? static_cast<size_t>(s->sample.dims()) : 0; }

lspart_status lspart_fit(const lspart_sample* sample, const lspart_options* options, const double* grid,
                         size_t n_grid, lspart_result** out) {
    return guarded([&] {
        require(sample, "sample");
        require(options, "options");
        require(out, "output handle");
        const int d = sample->sample.dims();
        const auto opts = convert(*options, d);
        const lspart::Grid g = grid != nullptr ? unflatten(grid, n_grid, d)
                                               : lspart::quantile_grid(sample->sample, options->grid_points);
        *out = wrap(lspart::run_estimation(sample->sample, opts, g));
    });
}

lspart_status lspart_lincom(const lspart_sample* const* groups, const double* weights, size_t n_groups,
                            const lspart_options* options, const double* grid, size_t n_grid,
                            lspart_result** out) {
    return guarded([&] {
        require(groups, "group array");
        require(weights, "weight array");
        require(options, "options");
        require(out, "output handle");
        if (n_groups == 0) throw lspart::InputError("linear combination needs at least one group");
        lspart::LincomSpec spec;
        for (size_t g = 0; g < n_groups; ++g) {
            require(groups[g], "group sample");
            spec.groups.push_back(groups[g]->sample);
            spec.weights.push_back(weights[g]);
        }
        const int d = spec.groups.front().dims();
        lspart::LincomOptions lo;
        lo.estimation = convert(*options, d);
        lo.shared_kappa = options->shared_kappa != 0;
        const lspart::Grid g = grid != nullptr ? unflatten(grid, n_grid, d)
                                               : lspart::lincom_default_grid(spec, options->grid_points);
        *out = wrap(lspart::lincom_estimate(spec, lo, g));
    });
}

void lspart_result_free(lspart_result* result) { delete result; }

size_t lspart_result_num_points(const lspart_result* r) { return r->result.grid.size(); }
size_t lspart_result_dims(const lspart_result* r) {
    return r->result.grid.empty() ? 0 : r->result.grid.front().size();
}
const double* lspart_result_point(const lspart_result* r, size_t i) {
    return r->grid_flat.data() + i * lspart_result_dims(r);
}
size_t lspart_result_num_corrections(const lspart_result* r) { return r->result.results.size(); }
int lspart_result_correction(const lspart_result* r, size_t k) { return static_cast<int>(slot(r, k).correction); }
int lspart_result_hc(const lspart_result* r, size_t k) { return static_cast<int>(slot(r, k).hc); }
const double* lspart_result_estimate(const lspart_result* r, size_t k) { return slot(r, k).estimate.data(); }
const double* lspart_result_se(const lspart_result* r, size_t k) { return slot(r, k).se.data(); }
const double* lspart_result_ci_lo(const lspart_result* r, size_t k) { return slot(r, k).ci_lo.data(); }
const double* lspart_result_ci_hi(const lspart_result* r, size_t k) { return slot(r, k).ci_hi.data(); }
const double* lspart_result_band_lo(const lspart_result* r, size_t k) {
    return slot(r, k).critical_value ? slot(r, k).band_lo.data() : nullptr;
}
const double* lspart_result_band_hi(const lspart_result* r, size_t k) {
    return slot(r, k).critical_value ? slot(r, k).band_hi.data() : nullptr;
}
int lspart_result_has_band(const lspart_result* r) {
    return !r->result.results.empty() && r->result.results.front().critical_value.has_value();
}
double lspart_result_critical_value(const lspart_result* r, size_t k) {
    return slot(r, k).critical_value.value_or(std::numeric_limits<double>::quiet_NaN());
}
size_t lspart_result_num_groups(const lspart_result* r) { return r->result.groups.size(); }
size_t lspart_result_group_n(const lspart_result* r, size_t g) {
    return static_cast<size_t>(r->result.groups.at(g).n);
}
int lspart_result_group_kappa(const lspart_result* r, size_t g, size_t dim) {
    return r->result.groups.at(g).kappa.at(dim);
}
int lspart_result_group_basis_dim(const lspart_result* r, size_t g) { return r->result.groups.at(g).basis_dim; }
int lspart_result_group_aux_basis_dim(const lspart_result* r, size_t g) {
    return r->result.groups.at(g).aux_basis_dim;
}
int lspart_result_group_effective_rank(const lspart_result* r, size_t g) {
    return r->result.groups.at(g).effective_rank;
}
const lspart_tuning* lspart_result_group_tuning(const lspart_result* r, size_t g) { return r->tuning.at(g).get(); }
size_t lspart_result_num_warnings(const lspart_result* r) { return r->result.diagnostics.warnings.size(); }
const char* lspart_result_warning(const lspart_result* r, size_t i) {
    return r->result.diagnostics.warnings.at(i).c_str();
}

lspart_status lspart_select(const lspart_sample* sample, const lspart_options* options, lspart_tuning** out) {
    return guarded([&] {
        require(sample, "sample");
        require(options, "options");
        require(out, "output handle");
        const int d = sample->sample.dims();
        const auto opts = convert(*options, d);
        const auto spec = lspart::BasisSpec::make(opts.family, opts.order, opts.deriv_for(d));
        *out = new lspart_tuning{lspart::select_kappa(sample->sample, spec, opts.spacing, opts.selector)};
    });
}

void lspart_tuning_free(lspart_tuning* t) { delete t; }
int lspart_tuning_kappa(const lspart_tuning* t) { return t->report.kappa(); }
int lspart_tuning_kappa_rot(const lspart_tuning* t) { return t->report.kappa_rot; }
int lspart_tuning_has_dpi(const lspart_tuning* t) { return t->report.kappa_dpi.has_value(); }
int lspart_tuning_kappa_dpi(const lspart_tuning* t) { return t->report.kappa_dpi.value_or(0); }
double lspart_tuning_bias_constant(const lspart_tuning* t) { return t->report.bias_constant; }
double lspart_tuning_variance_constant(const lspart_tuning* t) { return t->report.variance_constant; }
double lspart_tuning_rot_bias_constant(const lspart_tuning* t) { return t->report.rot_bias_constant; }
double lspart_tuning_rot_variance_constant(const lspart_tuning* t) { return t->report.rot_variance_constant; }
double lspart_tuning_rate_exponent(const lspart_tuning* t) { return t->report.rate_exponent; }
int lspart_tuning_kappa_cap(const lspart_tuning* t) { return t->report.kappa_cap; }
int lspart_tuning_fallback(const lspart_tuning* t) { return t->report.fallback; }
size_t lspart_tuning_num_warnings(const lspart_tuning* t) { return t->report.diagnostics.warnings.size(); }
const char* lspart_tuning_warning(const lspart_tuning* t, size_t i) {
    return t->report.diagnostics.warnings.at(i).c_str();
}

size_t lspart_dgp_count(void) { return lspart::builtin_dgps().size(); }
const char* lspart_dgp_id(size_t i) { return lspart::builtin_dgps().at(i).id.c_str(); }
const char* lspart_dgp_description(size_t i) { return lspart::builtin_dgps().at(i).description.c_str(); }
int lspart_dgp_dims(size_t i) { return lspart::builtin_dgps().at(i).dims; }

lspart_status lspart_dgp_sample(const char* dgp_id, size_t n, uint64_t seed, lspart_sample** out) {
    return guarded([&] {
        require(dgp_id, "DGP id");
        require(out, "output handle");
        const auto& dgp = lspart::find_dgp(dgp_id);
        auto rng = lspart::detail::substream(seed, 0, 0);
        *out = new lspart_sample{lspart::draw_sample(dgp, static_cast<Eigen::Index>(n), rng)};
    });
}

lspart_status lspart_simulate(const char* dgp_id, size_t n, size_t reps, const lspart_options* options,
                              lspart_coverage** out) {
    return guarded([&] {
        require(dgp_id, "DGP id");
        require(options, "options");
        require(out, "output handle");
        const auto& dgp = lspart::find_dgp(dgp_id);
        lspart::CoverageOptions co;
        co.estimation = convert(*options, dgp.dims);
        co.n = static_cast<Eigen::Index>(n);
        co.reps = reps;
        co.grid_points = options->grid_points;
        *out = new lspart_coverage{lspart::simulate_coverage(dgp, co)};
    });
}

void lspart_coverage_free(lspart_coverage* c) { delete c; }
double lspart_coverage_mean_kappa(const lspart_coverage* c) { return c->report.mean_kappa; }
size_t lspart_coverage_num_points(const lspart_coverage* c) { return c->report.grid.size(); }
const double* lspart_coverage_median_point(const lspart_coverage* c) {
    return c->report.grid.at(c->report.median_index).data();
}
size_t lspart_coverage_num_rows(const lspart_coverage* c) { return c->report.rows.size(); }
int lspart_coverage_correction(const lspart_coverage* c, size_t k) {
    return static_cast<int>(c->report.rows.at(k).correction);
}
int lspart_coverage_hc(const lspart_coverage* c, size_t k) { return static_cast<int>(c->report.rows.at(k).hc); }
double lspart_coverage_pointwise(const lspart_coverage* c, size_t k) { return c->report.rows.at(k).pointwise; }
double lspart_coverage_median(const lspart_coverage* c, size_t k) { return c->report.rows.at(k).median_point; }
int lspart_coverage_has_band(const lspart_coverage* c) {
    return !c->report.rows.empty() && c->report.rows.front().band.has_value();
}
double lspart_coverage_band(const lspart_coverage* c, size_t k) {
    return c->report.rows.at(k).band.value_or(std::numeric_limits<double>::quiet_NaN());
}
double lspart_coverage_ci_width(const lspart_coverage* c, size_t k) { return c->report.rows.at(k).ci_width; }
double lspart_coverage_band_width(const lspart_coverage* c, size_t k) {
    return c->report.rows.at(k).band_width.value_or(std::numeric_limits<double>::quiet_NaN());
}

} // extern "C"
