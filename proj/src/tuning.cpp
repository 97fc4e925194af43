#include "lspart/tuning.hpp"

#include "lspart/estimator.hpp"
#include "lspart/inference.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lspart {

namespace {

// Constants below this fraction of the response mean square are treated as zero.
constexpr double negligible = 1e-20;

struct Scale {
    double reference = 0.0;  // mean(y^2) in the units of the IMSE constants
};

Scale constant_scale(const Sample& sample, const MultiIndex& q) {
    Scale s;
    s.reference = sample.y().squaredNorm() / static_cast<double>(sample.size());
    for (int l = 0; l < sample.dims(); ++l) {
        const double range = sample.x().col(l).maxCoeff() - sample.x().col(l).minCoeff();
        s.reference *= std::pow(range, -2.0 * q[l]);
    }
    return s;
}

double factorial(int m) {
    double f = 1.0;
    for (int k = 2; k <= m; ++k) f *= k;
    return f;
}

std::vector<MultiIndex> monomials(int dims, int max_degree) {
    std::vector<MultiIndex> out;
    MultiIndex e(static_cast<std::size_t>(dims), 0);
    while (true) {
        if (total_order(e) <= max_degree) out.push_back(e);
        int l = 0;
        for (; l < dims; ++l) {
            if (++e[l] <= max_degree) break;
            e[l] = 0;
        }
        if (l == dims) break;
    }
    return out;
}

// Dimensions l whose pure m-th derivative survives d^q.
bool contributes(const MultiIndex& q, int l) { return q[l] == total_order(q); }

double mean_kappa(const Partition& p) {
    double prod = 1.0;
    for (int l = 0; l < p.dims(); ++l) prod *= p.kappa(l);
    return std::pow(prod, 1.0 / p.dims());
}

double resolve_kappa(TuningReport& report, double bias, double variance, const Scale& scale,
                     int m, int d, int qabs, double n) {
    if (bias <= negligible * scale.reference) {
        report.diagnostics.warn("estimated bias constant is negligible; kappa set to 1");
        return 0.0;
    }
    if (variance <= negligible * scale.reference) {
        report.diagnostics.warn("estimated variance constant is negligible; kappa set to the cap");
        return std::numeric_limits<double>::infinity();
    }
    return imse_kappa(bias, variance, m, d, qabs, n);
}

// Sum over observations of d^q b(x_i) d^q b(x_i)' / n.
Eigen::MatrixXd derivative_gram(const Design& design, const MultiIndex& q,
                                Eigen::MatrixXd* rows_out = nullptr) {
    const Eigen::Index n = design.rows();
    if (total_order(q) == 0) {
        if (rows_out) *rows_out = design.matrix();
        return design.gram();
    }
    const int d = design.partition().dims();
    Eigen::MatrixXd rows(n, design.size());
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int l = 0; l < d; ++l) pt[l] = design.covariates()(i, l);
        rows.row(i) = design.basis_row(pt, q).transpose();
    }
    Eigen::MatrixXd g = rows.transpose() * rows / static_cast<double>(n);
    if (rows_out) *rows_out = std::move(rows);
    return g;
}

std::vector<int> isotropic(int kappa, int dims) { return std::vector<int>(static_cast<std::size_t>(dims), kappa); }

} // namespace

double imse_kappa(double bias, double variance, int order, int dims, int deriv_order, double n) {
    if (!(bias > 0.0)) return 0.0;
    if (!(variance > 0.0)) return std::numeric_limits<double>::infinity();
    const double rate = 1.0 / (2.0 * order + dims);
    const double ratio = 2.0 * (order - deriv_order) * bias / ((dims + 2.0 * deriv_order) * variance);
    return std::pow(ratio * n, rate);
}

int finalize_kappa(double raw, int cap) {
    if (std::isnan(raw)) return 1;
    if (raw >= static_cast<double>(cap)) return cap;
    return std::max(1, static_cast<int>(std::ceil(raw)));
}

int kappa_cap(Family family, int order, int dims, double n) {
    int kappa = 1;
    auto dim_of = [&](int k) {
        const double per = (family == Family::bspline) ? k + order - 1.0 : static_cast<double>(k) * order;
        return std::pow(per, dims);
    };
    while (dim_of(kappa + 1) <= n / 2.0) ++kappa;
    return kappa;
}

TuningReport select_rot(const Sample& sample, const BasisSpec& spec, Spacing spacing) {
    const int d = sample.dims();
    spec.validate(d);
    const int m = spec.order;
    const MultiIndex& q = spec.deriv;
    const int qabs = spec.deriv_order();
    const auto n = static_cast<double>(sample.size());

    TuningReport report;
    report.rate_exponent = 1.0 / (2.0 * m + d);
    report.kappa_cap = kappa_cap(spec.family, m, d, n);
    const int rate_only = finalize_kappa(std::pow(n, report.rate_exponent), report.kappa_cap);

    const int degree = m + 2;
    const auto terms = monomials(d, degree);
    const auto p = static_cast<Eigen::Index>(terms.size());
    if (sample.size() <= p) {
        std::ostringstream os;
        os << "rule-of-thumb pilot of degree " << degree << " needs n > " << p << " observations";
        throw InputError(os.str());
    }

    // Pilot polynomial on covariates rescaled to [0, 1].
    std::vector<double> lo(d), range(d);
    for (int l = 0; l < d; ++l) {
        lo[l] = sample.x().col(l).minCoeff();
        range[l] = sample.x().col(l).maxCoeff() - lo[l];
        if (!(range[l] > 0.0)) throw InputError("covariate with zero range");
    }
    const Eigen::Index rows = sample.size();
    Eigen::MatrixXd u(rows, d);
    for (int l = 0; l < d; ++l) u.col(l) = (sample.x().col(l).array() - lo[l]) / range[l];
    Eigen::MatrixXd vander(rows, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        Eigen::ArrayXd col = Eigen::ArrayXd::Ones(rows);
        for (int l = 0; l < d; ++l) col *= u.col(l).array().pow(terms[k][l]);
        vander.col(k) = col.matrix();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
    if (qr.rank() < p) {
        report.fallback = true;
        report.kappa_rot = rate_only;
        report.diagnostics.warn("rule-of-thumb pilot is rank deficient; using kappa = ceil(n^(1/(2m+d)))");
        return report;
    }
    const Eigen::VectorXd coef = qr.solve(sample.y());
    const Eigen::VectorXd resid = sample.y() - vander * coef;
    const double sigma2 = resid.squaredNorm() / (n - static_cast<double>(p));

    const Partition prelim = make_partition(sample, isotropic(rate_only, d), spacing, &report.diagnostics);

    // Bias constant: averaged squared pilot m-th derivatives times the kernel energy.
    double bias = 0.0;
    bool any = false;
    for (int l = 0; l < d; ++l) {
        if (!contributes(q, l)) continue;
        any = true;
        const double energy = error_kernel_energy(spec.family, m, q[l]);
        for (Eigen::Index i = 0; i < rows; ++i) {
            double deriv = 0.0;
            for (Eigen::Index k = 0; k < p; ++k) {
                const int e = terms[k][l];
                if (e < m) continue;
                double term = coef[k];
                for (int j = 0; j < m; ++j) term *= (e - j);
                for (int l2 = 0; l2 < d; ++l2) {
                    const int power = (l2 == l) ? e - m : terms[k][l2];
                    term *= std::pow(u(i, l2), power);
                }
                deriv += term;
            }
            deriv /= std::pow(range[l], m);
            const int cell = locate_interval(prelim.knots(l), sample.x()(i, l));
            const double scaled_width = prelim.kappa(l) * prelim.width(l, cell);
            const double f = deriv / factorial(m);
            bias += f * f * energy * std::pow(scaled_width, 2.0 * (m - qabs));
        }
    }
    bias /= n;
    if (!any) report.diagnostics.warn("no pure derivative survives the mixed derivative q; bias constant is zero");

    // Variance constant: homoskedastic pilot variance times the basis trace.
    const Design design = build_design(sample, spec, prelim, &report.diagnostics);
    const Eigen::MatrixXd gq = derivative_gram(design, q);
    const double trace = design.solve(gq).trace();
    const double kbar = mean_kappa(prelim);
    const double variance = sigma2 * trace / std::pow(kbar, d + 2.0 * qabs);

    report.rot_bias_constant = report.bias_constant = bias;
    report.rot_variance_constant = report.variance_constant = variance;
    const double raw = resolve_kappa(report, bias, variance, constant_scale(sample, q), m, d, qabs, n);
    report.kappa_rot = finalize_kappa(raw, report.kappa_cap);
    return report;
}

TuningReport select_dpi(const Sample& sample, const BasisSpec& spec, Spacing spacing) {
    TuningReport report = select_rot(sample, spec, spacing);
    if (report.fallback) {
        report.kappa_dpi = report.kappa_rot;
        return report;
    }
    const int d = sample.dims();
    const int m = spec.order;
    const MultiIndex& q = spec.deriv;
    const int qabs = spec.deriv_order();
    const auto n = static_cast<double>(sample.size());
    try {
        const Partition part = make_partition(sample, isotropic(report.kappa_rot, d), spacing,
                                              &report.diagnostics);
        const Design main = build_design(sample, spec, part, &report.diagnostics);
        auto aux_design = std::make_shared<const Design>(
            build_design(sample, BasisSpec::make(spec.family, m + 1, q), part, &report.diagnostics));
        const Fit aux = fit_ls(aux_design, sample.y());

        const Eigen::Index rows = sample.size();
        const MultiIndex zero(static_cast<std::size_t>(d), 0);
        Eigen::VectorXd bias_q(rows), bias_0(rows);
        std::vector<double> pt(static_cast<std::size_t>(d));
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (int l = 0; l < d; ++l) pt[l] = sample.x()(i, l);
            bias_0[i] = leading_bias_functional(main, *aux_design, pt, zero).dot(aux.beta());
            bias_q[i] = (qabs == 0) ? bias_0[i]
                                    : leading_bias_functional(main, *aux_design, pt, q).dot(aux.beta());
        }
        Eigen::MatrixXd deriv_rows;
        const Eigen::MatrixXd gq = derivative_gram(main, q, &deriv_rows);
        const Eigen::VectorXd projection =
            deriv_rows * main.solve(main.matrix().transpose() * bias_0 / n);
        const Eigen::VectorXd total = bias_q - projection;
        const double kbar = std::pow(static_cast<double>(part.num_cells()), 1.0 / d);
        const double bias = std::pow(kbar, 2.0 * (m - qabs)) * total.squaredNorm() / n;

        const Eigen::MatrixXd& b = main.matrix();
        const Eigen::MatrixXd meat =
            b.transpose() * aux.residuals().array().square().matrix().asDiagonal() * b / n;
        const Eigen::MatrixXd left = main.solve(meat);
        const Eigen::MatrixXd right = main.solve(gq);
        const double trace = (left * right).trace();
        const double variance = trace / std::pow(kbar, d + 2.0 * qabs);

        report.bias_constant = bias;
        report.variance_constant = variance;
        const double raw = resolve_kappa(report, bias, variance, constant_scale(sample, q), m, d, qabs, n);
        report.kappa_dpi = finalize_kappa(raw, report.kappa_cap);
    } catch (const InputError& e) {
        report.fallback = true;
        report.kappa_dpi = report.kappa_rot;
        report.diagnostics.warn(std::string("direct plug-in pilot failed (") + e.what() +
                                "); using the rule-of-thumb kappa");
    }
    return report;
}

TuningReport select_kappa(const Sample& sample, const BasisSpec& spec, Spacing spacing,
                          Selector selector) {
    return selector == Selector::rot ? select_rot(sample, spec, spacing)
                                     : select_dpi(sample, spec, spacing);
}

} // namespace lspart
