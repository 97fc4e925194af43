#pragma once

#include "lspart/pipeline.hpp"

namespace lspart {

/// theta(x) = sum_g w_g mu_g(x) over independent groups.
struct LincomSpec {
    std::vector<Sample> groups;
    std::vector<double> weights;

    void validate() const;
};

struct LincomOptions {
    EstimationOptions estimation;
    bool shared_kappa = false;  // select one kappa on the pooled sample
};

/// Linear combination of group estimates with se = sqrt(sum w_g^2 se_g^2)
/// and a band simulated with independent multipliers per group. Results do
/// not depend on the order in which groups are listed.
EstimationResult lincom_estimate(const LincomSpec& spec, const LincomOptions& options,
                                 const Grid& grid);

/// `per_dim` evenly spaced interior points of the intersection of the group
/// supports, tensorized for d <= 2.
Grid lincom_default_grid(const LincomSpec& spec, int per_dim);

} // namespace lspart
