#pragma once

#include "lspart/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace lspart {

/// Responses y (n) and covariates x (n x d). Validated on construction.
class Sample {
public:
    Sample(Eigen::VectorXd y, Eigen::MatrixXd x);

    Eigen::Index size() const { return y_.size(); }
    int dims() const { return static_cast<int>(x_.cols()); }
    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::MatrixXd& x() const { return x_; }
    std::vector<double> point(Eigen::Index i) const;

    /// Same covariates, different responses.
    Sample with_y(Eigen::VectorXd y) const { return Sample(std::move(y), x_); }

    /// Content hash of (y, x); used to key multiplier substreams.
    std::uint64_t fingerprint() const;

private:
    Eigen::VectorXd y_;
    Eigen::MatrixXd x_;
};

enum class Spacing { even, quantile };

/// Tensor-product mesh: one strictly increasing knot vector per dimension,
/// boundary points included. Cells are half-open [t_j, t_{j+1}) except the
/// last one in each dimension, which is closed.
class Partition {
public:
    Partition(std::vector<std::vector<double>> knots, Spacing spacing);

    int dims() const { return static_cast<int>(knots_.size()); }
    int kappa(int dim) const { return static_cast<int>(knots_[dim].size()) - 1; }
    std::vector<int> kappas() const;
    int num_cells() const;
    const std::vector<double>& knots(int dim) const { return knots_[dim]; }
    Spacing spacing() const { return spacing_; }
    double lower(int dim) const { return knots_[dim].front(); }
    double upper(int dim) const { return knots_[dim].back(); }
    double width(int dim, int cell) const { return knots_[dim][cell + 1] - knots_[dim][cell]; }
    bool contains(std::span<const double> point) const;

    bool operator==(const Partition& other) const { return knots_ == other.knots_; }

private:
    std::vector<std::vector<double>> knots_;
    Spacing spacing_;
};

/// Knots over [min, max] of each covariate. Quantile spacing places interior
/// knots at the empirical j/kappa quantiles; coincident knots are dropped
/// (reducing kappa) and reported through `diag`.
Partition make_partition(const Sample& sample, std::span<const int> kappa, Spacing spacing,
                         Diagnostics* diag = nullptr);

/// Interval index of `value` in a knot vector, last interval right-closed.
int locate_interval(const std::vector<double>& knots, double value);

/// Per-dimension cell index of `point`; throws OutOfSupportError outside the box.
std::vector<int> locate_cell(const Partition& partition, std::span<const double> point);

/// Linear-interpolation sample quantile (R type 7) of already sorted data.
double sorted_quantile(std::span<const double> sorted, double p);

/// Evaluation grid: points stored as rows.
using Grid = std::vector<std::vector<double>>;

/// Tensor grid of `per_dim` sample quantiles at levels k/(per_dim+1) in
/// each dimension. Only d <= 2 is supported; larger d needs a user grid.
Grid quantile_grid(const Sample& sample, int per_dim);

} // namespace lspart
