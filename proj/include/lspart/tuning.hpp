#pragma once

#include "lspart/basis.hpp"
#include "lspart/common.hpp"
#include "lspart/grid.hpp"

#include <optional>

namespace lspart {

enum class Selector { rot, dpi };

/// Outcome of IMSE-optimal kappa selection. The constants are those of the
/// selector that produced the final kappa (DPI when it ran).
struct TuningReport {
    int kappa_rot = 1;
    std::optional<int> kappa_dpi;
    double bias_constant = 0.0;
    double variance_constant = 0.0;
    double rot_bias_constant = 0.0;
    double rot_variance_constant = 0.0;
    double rate_exponent = 0.0;
    int kappa_cap = 1;
    bool fallback = false;
    Diagnostics diagnostics;

    int kappa() const { return kappa_dpi.value_or(kappa_rot); }
};

/// Unrounded minimizer of V kappa^(d+2|q|) / n + B kappa^(-2(m-|q|)).
/// Returns +inf when variance is zero and bias positive, 0 when bias is zero.
double imse_kappa(double bias, double variance, int order, int dims, int deriv_order, double n);

/// ceil(raw) clamped to [1, cap].
int finalize_kappa(double raw, int cap);

/// Largest isotropic kappa whose basis dimension stays within n/2 (at least 1).
int kappa_cap(Family family, int order, int dims, double n);

TuningReport select_rot(const Sample& sample, const BasisSpec& spec, Spacing spacing);
TuningReport select_dpi(const Sample& sample, const BasisSpec& spec, Spacing spacing);
TuningReport select_kappa(const Sample& sample, const BasisSpec& spec, Spacing spacing,
                          Selector selector);

} // namespace lspart
