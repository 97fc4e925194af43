#pragma once

#include "lspart/basis.hpp"
#include "lspart/common.hpp"
#include "lspart/grid.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>

namespace lspart {

/// Design matrix B (rows b(x_i)'), gram Q = B'B/n and a rank-revealing
/// factorization of Q. Immutable after construction.
class Design {
public:
    const Eigen::MatrixXd& matrix() const { return basis_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& covariates() const { return x_; }
    const BasisSpec& spec() const { return spec_; }
    const Partition& partition() const { return partition_; }
    Eigen::Index rows() const { return basis_.rows(); }
    Eigen::Index size() const { return basis_.cols(); }
    int effective_rank() const { return rank_; }
    bool rank_deficient() const { return rank_ < size(); }

    /// Minimum-norm solution of Q z = rhs (Q^+ rhs); accepts matrix right-hand sides.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return factor_.solve(rhs); }

    /// d^q b(point) with this design's family and order.
    Eigen::VectorXd basis_row(std::span<const double> point, std::span<const int> deriv) const;

private:
    friend Design build_design(const Sample&, const BasisSpec&, const Partition&, Diagnostics*);
    Design(BasisSpec spec, Partition partition) : spec_(std::move(spec)), partition_(std::move(partition)) {}

    BasisSpec spec_;
    Partition partition_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd gram_;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> factor_;
    int rank_ = 0;
};

/// Rows b(x_i)' (q ignored). Throws InputError when K > n; rank deficiency
/// is reported through `diag` and handled with the pseudo-inverse.
Design build_design(const Sample& sample, const BasisSpec& spec, const Partition& partition,
                    Diagnostics* diag = nullptr);

/// Least squares fit on a design. Shares the design; cheap to copy.
class Fit {
public:
    const Design& design() const { return *design_; }
    std::shared_ptr<const Design> design_ptr() const { return design_; }
    const Eigen::VectorXd& beta() const { return beta_; }
    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::VectorXd& residuals() const { return residuals_; }
    const Eigen::VectorXd& leverage() const { return leverage_; }
    Eigen::VectorXd fitted() const { return y_ - residuals_; }
    const BasisSpec& spec() const { return design_->spec(); }
    const Partition& partition() const { return design_->partition(); }
    Eigen::Index n() const { return y_.size(); }

private:
    friend Fit fit_ls(std::shared_ptr<const Design>, const Eigen::VectorXd&);
    std::shared_ptr<const Design> design_;
    Eigen::VectorXd y_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd residuals_;
    Eigen::VectorXd leverage_;
};

/// beta minimizing ||y - B beta||, minimum norm under rank deficiency.
Fit fit_ls(std::shared_ptr<const Design> design, const Eigen::VectorXd& y);

/// d^q b(point)' beta.
double predict(const Fit& fit, std::span<const double> point, std::span<const int> deriv);

} // namespace lspart
