#pragma once

#include "lspart/common.hpp"
#include "lspart/estimator.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lspart {

enum class HcKind { hc0 = 0, hc1 = 1, hc2 = 2, hc3 = 3 };

/// Bias correction strategies: none, higher-order basis, least squares, plug-in.
enum class Correction { none = 0, higher_order = 1, least_squares = 2, plug_in = 3 };

inline constexpr double default_weight_cap = 1e6;

/// Residual weights w_i for the sandwich meat sum w_i e_i^2. Weights above
/// `cap` (leverage at or near one) are capped and reported.
Eigen::VectorXd hc_weights(const Fit& fit, HcKind kind, double cap = default_weight_cap,
                           Diagnostics* diag = nullptr);

/// Coefficients c over the auxiliary basis with c' beta_aux equal to the
/// estimated leading smoothing bias of the order-m estimator of d^q mu at
/// `point`. Requires both designs on the same partition and aux order > m.
Eigen::VectorXd leading_bias_functional(const Design& main, const Design& aux,
                                        std::span<const double> point, std::span<const int> deriv);

/// Estimated leading bias B_{m,q}(point) (bias of the uncorrected estimator).
double estimate_leading_bias(const Fit& fit_main, const Fit& fit_aux, std::span<const double> point,
                             std::span<const int> deriv);

/// mu_j(x) = (1/n) sum_i a_i y_i + offset.
struct InfluenceRow {
    Eigen::VectorXd a;
    double offset = 0.0;
    Correction correction = Correction::none;
    std::vector<double> point;
    MultiIndex deriv;

    double apply(const Eigen::VectorXd& y) const {
        return a.dot(y) / static_cast<double>(a.size()) + offset;
    }
};

/// Main and auxiliary fits with the per-observation bias rows cached, so
/// many influence rows can be built cheaply.
class InferenceContext {
public:
    InferenceContext(Fit main, std::optional<Fit> aux);

    const Fit& main() const { return main_; }
    const Fit* aux() const { return aux_ ? &*aux_ : nullptr; }

    InfluenceRow influence_row(std::span<const double> point, std::span<const int> deriv,
                               Correction correction) const;

private:
    Fit main_;
    std::optional<Fit> aux_;
    Eigen::MatrixXd sample_bias_;  // row i: leading_bias_functional(x_i, q = 0)
};

InfluenceRow influence_row(const Fit& fit_main, const Fit* fit_aux, std::span<const double> point,
                           std::span<const int> deriv, Correction correction);

/// sqrt((1/n^2) sum_i a_i^2 w_i e_i^2) with residuals from fit_main.
double point_se(const InfluenceRow& row, const Fit& fit_main, HcKind kind,
                Diagnostics* diag = nullptr);

/// Standard normal quantile.
double normal_quantile(double p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Estimates and standard errors for each correction j = 0..3 at one point.
struct PointInference {
    std::array<double, 4> estimate{};
    std::array<double, 4> se{};
    double alpha = 0.05;
    std::array<Interval, 4> ci{};
};

PointInference pointwise_ci(const std::array<double, 4>& estimate, const std::array<double, 4>& se,
                            double alpha);

/// Score row for the multiplier simulation: entry i is a_i sqrt(w_i) e_i / n,
/// so its Euclidean norm is the standard error.
Eigen::VectorXd score_row(const InfluenceRow& row, const Eigen::VectorXd& residuals,
                          const Eigen::VectorXd& weights);

/// A contiguous run of observations whose multipliers come from one
/// substream keyed by (seed, replicate, key).
struct MultiplierBlock {
    std::uint64_t key = 0;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
};

/// For each score matrix (grid points x observations, rows with zero norm
/// skipped), the num_sim draws of max_g |s_g' omega| / ||s_g||. All matrices
/// share the same Gaussian multipliers. Independent of thread count.
std::vector<std::vector<double>> simulate_suprema(std::span<const Eigen::MatrixXd> scores,
                                                  std::span<const MultiplierBlock> blocks,
                                                  int num_sim, std::uint64_t seed);

/// Empirical (1 - alpha) quantile of the draws: order statistic ceil((1-alpha) S).
double sup_quantile(std::vector<double> draws, double alpha);

struct BandResult {
    std::vector<std::vector<double>> grid;
    std::vector<double> estimates;
    std::vector<double> ses;
    double critical_value = 0.0;
    std::vector<Interval> band;
    int num_sim = 0;
    std::uint64_t seed = 0;
};

/// Uniform band over the rows' grid points from the plug-in Gaussian
/// multiplier simulation of the supremum t-statistic.
BandResult uniform_band(std::span<const InfluenceRow> rows, const Fit& fit_main, HcKind kind,
                        double alpha, int num_sim, std::uint64_t seed, Diagnostics* diag = nullptr);

} // namespace lspart
