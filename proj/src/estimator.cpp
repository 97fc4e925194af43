#include "lspart/estimator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lspart {

Eigen::VectorXd Design::basis_row(std::span<const double> point, std::span<const int> deriv) const {
    return eval_basis(spec_.family, partition_, spec_.order, deriv, point);
}

Design build_design(const Sample& sample, const BasisSpec& spec, const Partition& partition,
                    Diagnostics* diag) {
    const int d = sample.dims();
    if (partition.dims() != d) throw InputError("partition dimension does not match sample");
    BasisSpec base = spec;
    base.deriv.assign(static_cast<std::size_t>(d), 0);
    base.validate(d);

    const Eigen::Index n = sample.size();
    const int k = basis_dim(base, partition);
    if (k > n) {
        std::ostringstream os;
        os << "basis dimension K=" << k << " exceeds sample size n=" << n
           << "; reduce kappa or the basis order";
        throw InputError(os.str());
    }

    Design design(base, partition);
    design.x_ = sample.x();
    design.basis_.resize(n, k);
    const MultiIndex zero(static_cast<std::size_t>(d), 0);
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int l = 0; l < d; ++l) pt[l] = sample.x()(i, l);
        design.basis_.row(i) = eval_basis(base.family, partition, base.order, zero, pt).transpose();
    }
    design.gram_ = (design.basis_.transpose() * design.basis_) / static_cast<double>(n);
    if (!design.gram_.allFinite()) throw NumericalError("non-finite gram matrix");

    design.factor_.setThreshold(static_cast<double>(k) * std::numeric_limits<double>::epsilon());
    design.factor_.compute(design.gram_);
    design.rank_ = static_cast<int>(design.factor_.rank());
    if (design.rank_ < k) {
        std::ostringstream os;
        os << "gram matrix is rank deficient (rank " << design.rank_ << " of " << k
           << "); using the minimum-norm solution";
        warn(diag, os.str());
    }
    return design;
}

Fit fit_ls(std::shared_ptr<const Design> design, const Eigen::VectorXd& y) {
    if (!design) throw InputError("missing design");
    if (y.size() != design->rows()) throw InputError("response length does not match design");
    if (!y.allFinite()) throw InputError("non-finite response value");

    const auto n = static_cast<double>(y.size());
    const Eigen::MatrixXd& b = design->matrix();
    Fit fit;
    fit.design_ = design;
    fit.y_ = y;
    fit.beta_ = design->solve(b.transpose() * y / n);
    // One step of iterative refinement on the normal equations.
    fit.beta_ += design->solve(b.transpose() * (y - b * fit.beta_) / n);
    fit.residuals_ = y - b * fit.beta_;
    const Eigen::MatrixXd projected = design->solve(b.transpose());
    fit.leverage_ = ((b.array() * projected.transpose().array()).rowwise().sum() / n).cwiseMax(0.0).cwiseMin(1.0);
    if (!fit.beta_.allFinite()) throw NumericalError("least squares solve produced non-finite coefficients");
    return fit;
}

double predict(const Fit& fit, std::span<const double> point, std::span<const int> deriv) {
    return fit.design().basis_row(point, deriv).dot(fit.beta());
}

} // namespace lspart
