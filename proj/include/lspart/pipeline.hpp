#pragma once

#include "lspart/basis.hpp"
#include "lspart/common.hpp"
#include "lspart/grid.hpp"
#include "lspart/inference.hpp"
#include "lspart/tuning.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lspart {

/// End-to-end configuration for estimation and inference on a grid.
struct EstimationOptions {
    Family family = Family::bspline;
    int order = 2;
    int bc_order = 3;
    MultiIndex deriv;              // empty means all zeros
    std::vector<int> kappa;        // empty means data-driven selection
    Selector selector = Selector::dpi;
    Spacing spacing = Spacing::even;
    Correction correction = Correction::plug_in;
    std::optional<HcKind> hc;      // default: hc0 for j = 0, hc3 for j >= 1
    double alpha = 0.05;
    bool band = true;
    int num_sim = 2000;
    std::uint64_t seed = 0;
    bool all_corrections = false;  // report every j instead of {0, correction}

    void validate(int dims) const;
    MultiIndex deriv_for(int dims) const;
    HcKind hc_for(Correction j) const;
    std::vector<Correction> reported() const;
};

/// Per-grid-point output for one correction j.
struct CorrectionResult {
    Correction correction = Correction::none;
    HcKind hc = HcKind::hc0;
    std::vector<double> estimate;
    std::vector<double> se;
    std::vector<double> ci_lo, ci_hi;
    std::vector<double> band_lo, band_hi;  // empty when bands are off
    std::optional<double> critical_value;
};

struct GroupSummary {
    Eigen::Index n = 0;
    std::vector<int> kappa;
    int basis_dim = 0;
    int aux_basis_dim = 0;
    int effective_rank = 0;
    std::optional<TuningReport> tuning;
};

struct EstimationResult {
    Grid grid;
    std::vector<GroupSummary> groups;   // in input order
    std::vector<CorrectionResult> results;
    Diagnostics diagnostics;

    const CorrectionResult& result(Correction j) const;
};

/// Fit, optionally select kappa, and report estimates, standard errors,
/// pointwise intervals and (optionally) a uniform band on `grid`.
EstimationResult run_estimation(const Sample& sample, const EstimationOptions& options,
                                const Grid& grid);

} // namespace lspart
