#pragma once

#include "lspart/common.hpp"
#include "lspart/grid.hpp"

#include <Eigen/Dense>

#include <span>

namespace lspart {

/// Basis families. `wavelet` is reserved and rejected by every evaluator.
enum class Family { bspline, piecewise_poly, wavelet };

/// Family, order m (degree + 1), smoothness s and derivative multi-index q.
struct BasisSpec {
    Family family = Family::bspline;
    int order = 2;
    int smoothness = 0;
    MultiIndex deriv;

    /// Options with the smoothness implied by the family: m - 2 for B-splines,
    /// -1 for piecewise polynomials.
    static BasisSpec make(Family family, int order, MultiIndex deriv);

    int deriv_order() const { return total_order(deriv); }

    /// Throws InputError unless these options are usable with `dims` covariates.
    void validate(int dims) const;
};

int basis_dim(Family family, int order, const Partition& partition);
inline int basis_dim(const BasisSpec& spec, const Partition& partition) {
    return basis_dim(spec.family, spec.order, partition);
}

/// d^q b(point) for tensor-product B-splines of order m on clamped knots.
/// Tensor index runs with dimension 0 fastest.
Eigen::VectorXd eval_bspline(const Partition& partition, int order, std::span<const int> deriv,
                             std::span<const double> point);

/// d^q b(point) for per-cell tensor monomials in cell-scaled local
/// coordinates u = (x - t_j) / h_j. Index = cell * m^d + local exponent index.
Eigen::VectorXd eval_piecewise(const Partition& partition, int order, std::span<const int> deriv,
                               std::span<const double> point);

Eigen::VectorXd eval_basis(Family family, const Partition& partition, int order,
                           std::span<const int> deriv, std::span<const double> point);

/// Nonzero univariate B-spline values (and q-th derivatives) at x in
/// interval `cell`: entries first .. first+m-1 where first == cell.
std::vector<double> univariate_bspline(const std::vector<double>& breaks, int order, int deriv,
                                       int cell, double x);

/// Per-cell leading approximation-error kernel of a family in local
/// coordinate t in [0, 1], differentiated `deriv` times: the Bernoulli
/// polynomial B_m for B-splines, the monic shifted Legendre polynomial for
/// piecewise polynomials.
double error_kernel(Family family, int order, int deriv, double t);

/// Integral over [0, 1] of error_kernel(family, order, deriv, t)^2.
double error_kernel_energy(Family family, int order, int deriv);

} // namespace lspart
