#pragma once
// Independent oracles for the test suites. Nothing here includes or calls
// library code: bases, fits and corrections are rebuilt from their textbook
// definitions with dense matrices.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testkit {

using Knots = std::vector<std::vector<double>>;
using Point = std::vector<double>;

/// Thrown when an oracle is used outside its dense-only regime.
struct OracleLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- polynomial least squares -------------------------------------------

/// Coefficients (c_0..c_degree) of the degree-`degree` polynomial fit of y
/// on x, solved through the normal equations V'V c = V'y.
Eigen::VectorXd oracle_ols(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree);

/// Multivariate OLS on the columns of X plus an intercept; returns (c_0, c_1..c_d).
Eigen::VectorXd oracle_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// ---- finite differences ---------------------------------------------------

/// Central difference of the given order:
/// sum_k (-1)^k C(order, k) f(x + (order/2 - k) step) / step^order.
double fd_derivative(const std::function<double(double)>& f, double x, int order, double step);

/// Partial derivative of a multivariate f along `dim` by a first-order central difference.
double fd_partial(const std::function<double(const Point&)>& f, const Point& x, int dim, double step);

// ---- empirical quantiles ---------------------------------------------------

/// Type-7 sample quantile: the linear interpolant through (k/(n-1), x_(k)), evaluated at p.
double empirical_quantile(std::vector<double> data, double p);

// ---- bases -----------------------------------------------------------------

/// Univariate B-spline basis of order m on the clamped knot vector built
/// from `breaks`, via the recursive Cox-de Boor definition. Derivatives use
/// the order-lowering formula recursively. The right boundary is assigned
/// to the last interval.
Eigen::VectorXd bspline_1d(const std::vector<double>& breaks, int order, int deriv, double x);

/// Per-cell monomials ((x - t_j)/h_j)^k, k < order, differentiated `deriv` times.
Eigen::VectorXd piecewise_1d(const std::vector<double>& breaks, int order, int deriv, double x);

enum class Family { bspline, piecewise };

/// Tensor-product basis with dimension 0 varying fastest; for piecewise
/// polynomials the index is cell * m^d + local with both tensorized the same way.
Eigen::VectorXd basis(Family family, const Knots& knots, int order, const std::vector<int>& deriv,
                      const Point& x);

/// Leading error kernel in local coordinate t, differentiated `deriv` times:
/// Bernoulli polynomial B_m (B-splines) or monic shifted Legendre (piecewise).
double kernel(Family family, int order, int deriv, double t);

// ---- brute-force estimator -------------------------------------------------

struct Instance {
    Eigen::MatrixXd x;  // n x d
    Eigen::VectorXd y;
    Knots knots;
    Family family = Family::bspline;
    int order = 2;
    int bc_order = 3;
};

/// mu_j(point) for j = 0..3 from explicit dense matrices:
/// j=0 main fit, j=1 aux fit, j=3 main minus the plug-in leading bias,
/// j=2 main minus (plug-in bias minus its least squares projection).
/// Limits: n <= 500 and K <= 60.
double brute_force_estimator(const Instance& inst, const Point& point, const std::vector<int>& deriv, int j);

/// The plug-in leading bias estimate B(point) of the order-m fit, from the aux fit.
double brute_force_bias(const Instance& inst, const Point& point, const std::vector<int>& deriv);

// ---- Monte Carlo helpers -----------------------------------------------------

/// Least squares slope of log(y) on log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided normal-approximation interval for a binomial proportion p from
/// `reps` trials at `z` standard errors.
struct Bounds {
    double lo;
    double hi;
};
Bounds binomial_bounds(double p, std::size_t reps, double z);

/// Draw n points uniformly on [0, 1]^d and y = mean(x) + sd(x) * N(0, 1).
struct Draw {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};
Draw draw(std::size_t n, int d, const std::function<double(const Point&)>& mean,
          const std::function<double(const Point&)>& sd, std::mt19937_64& rng);

/// Knots of an even partition of [lo, hi] with kappa intervals.
std::vector<double> even_knots(double lo, double hi, int kappa);

} // namespace testkit
