#include "lspart/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace lspart {

Sample::Sample(Eigen::VectorXd y, Eigen::MatrixXd x) : y_(std::move(y)), x_(std::move(x)) {
    if (y_.size() == 0) throw InputError("empty sample");
    if (x_.cols() < 1) throw InputError("sample needs at least one covariate");
    if (x_.rows() != y_.size()) {
        std::ostringstream os;
        os << "response length " << y_.size() << " does not match covariate rows " << x_.rows();
        throw InputError(os.str());
    }
    if (!y_.allFinite()) throw InputError("non-finite response value");
    if (!x_.allFinite()) throw InputError("non-finite covariate value");
}

std::vector<double> Sample::point(Eigen::Index i) const {
    std::vector<double> p(static_cast<std::size_t>(x_.cols()));
    for (Eigen::Index l = 0; l < x_.cols(); ++l) p[l] = x_(i, l);
    return p;
}

std::uint64_t Sample::fingerprint() const {
    // FNV-1a over the raw bytes of y then x (column-major).
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const double* data, Eigen::Index count) {
        for (Eigen::Index k = 0; k < count; ++k) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, data + k, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ULL;
            }
        }
    };
    mix(y_.data(), y_.size());
    mix(x_.data(), x_.size());
    return h;
}

Partition::Partition(std::vector<std::vector<double>> knots, Spacing spacing)
    : knots_(std::move(knots)), spacing_(spacing) {
    if (knots_.empty()) throw InputError("partition needs at least one dimension");
    for (const auto& k : knots_) {
        if (k.size() < 2) throw InputError("knot vector needs both boundary points");
        for (std::size_t j = 0; j < k.size(); ++j) {
            if (!std::isfinite(k[j])) throw InputError("non-finite knot");
            if (j > 0 && !(k[j] > k[j - 1])) throw InputError("knots must be strictly increasing");
        }
    }
}

std::vector<int> Partition::kappas() const {
    std::vector<int> out(knots_.size());
    for (std::size_t l = 0; l < knots_.size(); ++l) out[l] = kappa(static_cast<int>(l));
    return out;
}

int Partition::num_cells() const {
    int c = 1;
    for (int l = 0; l < dims(); ++l) c *= kappa(l);
    return c;
}

bool Partition::contains(std::span<const double> point) const {
    if (point.size() != knots_.size()) return false;
    for (std::size_t l = 0; l < knots_.size(); ++l) {
        if (!(point[l] >= knots_[l].front() && point[l] <= knots_[l].back())) return false;
    }
    return true;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InputError("quantile of empty data");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Partition make_partition(const Sample& sample, std::span<const int> kappa, Spacing spacing,
                         Diagnostics* diag) {
    const int d = sample.dims();
    if (static_cast<int>(kappa.size()) != d) {
        throw InputError("kappa must have one entry per covariate");
    }
    const auto n = static_cast<std::size_t>(sample.size());
    std::vector<std::vector<double>> knots(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
        const int k = kappa[l];
        if (k < 1) throw InputError("kappa must be at least 1");
        std::vector<double> col(sample.x().col(l).data(), sample.x().col(l).data() + n);
        std::sort(col.begin(), col.end());
        const double lo = col.front();
        const double hi = col.back();
        if (!(hi > lo)) {
            std::ostringstream os;
            os << "covariate " << l << " is constant; its support has zero width";
            throw InputError(os.str());
        }
        auto& kn = knots[l];
        kn.reserve(static_cast<std::size_t>(k) + 1);
        kn.push_back(lo);
        if (spacing == Spacing::even) {
            for (int j = 1; j < k; ++j) kn.push_back(lo + (hi - lo) * j / k);
            kn.push_back(hi);
        } else {
            if (n < static_cast<std::size_t>(k) + 1) {
                throw InputError("quantile spacing needs n >= kappa + 1");
            }
            int dropped = 0;
            for (int j = 1; j <= k; ++j) {
                const double t = (j == k) ? hi : sorted_quantile(col, static_cast<double>(j) / k);
                if (t > kn.back()) {
                    kn.push_back(t);
                } else {
                    ++dropped;
                }
            }
            if (dropped > 0) {
                std::ostringstream os;
                os << "dimension " << l << ": " << dropped
                   << " duplicate quantile knot(s) collapsed; kappa reduced to " << kn.size() - 1;
                warn(diag, os.str());
            }
        }
    }
    return Partition(std::move(knots), spacing);
}

int locate_interval(const std::vector<double>& knots, double value) {
    if (!(value >= knots.front() && value <= knots.back())) {
        std::ostringstream os;
        os.precision(17);
        os << "point " << value << " outside support [" << knots.front() << ", " << knots.back()
           << "]";
        throw OutOfSupportError(os.str());
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), value);
    const int last = static_cast<int>(knots.size()) - 2;
    return std::min(static_cast<int>(it - knots.begin()) - 1, last);
}

std::vector<int> locate_cell(const Partition& partition, std::span<const double> point) {
    if (static_cast<int>(point.size()) != partition.dims()) {
        throw InputError("point dimension does not match partition");
    }
    std::vector<int> idx(point.size());
    for (int l = 0; l < partition.dims(); ++l) idx[l] = locate_interval(partition.knots(l), point[l]);
    return idx;
}

Grid quantile_grid(const Sample& sample, int per_dim) {
    const int d = sample.dims();
    if (d > 2) throw InputError("default grid supports d <= 2; supply an explicit grid");
    if (per_dim < 1) throw InputError("grid needs at least one point per dimension");
    const auto n = static_cast<std::size_t>(sample.size());
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
        std::vector<double> col(sample.x().col(l).data(), sample.x().col(l).data() + n);
        std::sort(col.begin(), col.end());
        for (int k = 1; k <= per_dim; ++k) {
            axes[l].push_back(sorted_quantile(col, static_cast<double>(k) / (per_dim + 1)));
        }
    }
    Grid grid;
    if (d == 1) {
        for (double v : axes[0]) grid.push_back({v});
    } else {
        for (double b : axes[1])
            for (double a : axes[0]) grid.push_back({a, b});
    }
    return grid;
}

} // namespace lspart
