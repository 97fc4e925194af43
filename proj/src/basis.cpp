#include "lspart/basis.hpp"

#include <cmath>
#include <sstream>

namespace lspart {

namespace {

void check_family(Family family) {
    if (family == Family::wavelet) {
        throw InputError("wavelet basis family is reserved and not implemented");
    }
}

void check_point_and_deriv(const Partition& partition, int order, std::span<const int> deriv,
                           std::span<const double> point) {
    if (order < 1) throw InputError("basis order must be positive");
    if (static_cast<int>(deriv.size()) != partition.dims()) {
        throw InputError("derivative multi-index must have one entry per dimension");
    }
    int total = 0;
    for (int q : deriv) {
        if (q < 0) throw InputError("derivative orders must be non-negative");
        total += q;
    }
    if (total >= order) {
        std::ostringstream os;
        os << "derivative order |q|=" << total << " must be below basis order m=" << order;
        throw InputError(os.str());
    }
    if (static_cast<int>(point.size()) != partition.dims()) {
        throw InputError("point dimension does not match partition");
    }
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Coefficients (ascending powers) of the family's error kernel.
std::vector<double> kernel_coefficients(Family family, int m) {
    std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
    if (family == Family::bspline) {
        std::vector<double> b(static_cast<std::size_t>(m) + 1, 0.0);
        b[0] = 1.0;
        for (int n = 1; n <= m; ++n) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += binomial(n + 1, k) * b[k];
            b[n] = -s / (n + 1);
        }
        for (int k = 0; k <= m; ++k) c[m - k] = binomial(m, k) * b[k];
    } else {
        const double lead = binomial(2 * m, m);
        for (int k = 0; k <= m; ++k) {
            const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
            c[k] = sign * binomial(m, k) * binomial(m + k, k) / lead;
        }
    }
    return c;
}

std::vector<double> differentiate(std::vector<double> c, int times) {
    for (int t = 0; t < times; ++t) {
        if (c.size() <= 1) return {0.0};
        std::vector<double> d(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
        c = std::move(d);
    }
    return c;
}

} // namespace

BasisSpec BasisSpec::make(Family family, int order, MultiIndex deriv) {
    BasisSpec s;
    s.family = family;
    s.order = order;
    s.smoothness = (family == Family::bspline) ? order - 2 : -1;
    s.deriv = std::move(deriv);
    return s;
}

void BasisSpec::validate(int dims) const {
    check_family(family);
    if (order < 1) throw InputError("basis order must be positive");
    if (family == Family::bspline && smoothness != order - 2) {
        throw InputError("B-spline basis requires maximal smoothness s = m - 2");
    }
    if (family == Family::piecewise_poly && smoothness != -1) {
        throw InputError("piecewise polynomial basis requires smoothness s = -1");
    }
    if (static_cast<int>(deriv.size()) != dims) {
        throw InputError("derivative multi-index must have one entry per covariate");
    }
    for (int q : deriv) {
        if (q < 0) throw InputError("derivative orders must be non-negative");
    }
    if (deriv_order() >= order) {
        std::ostringstream os;
        os << "derivative order |q|=" << deriv_order() << " must be below basis order m=" << order;
        throw InputError(os.str());
    }
}

int basis_dim(Family family, int order, const Partition& partition) {
    check_family(family);
    int k = 1;
    for (int l = 0; l < partition.dims(); ++l) {
        k *= (family == Family::bspline) ? partition.kappa(l) + order - 1
                                         : partition.kappa(l) * order;
    }
    return k;
}

std::vector<double> univariate_bspline(const std::vector<double>& breaks, int order, int deriv,
                                       int cell, double x) {
    const int p = order - 1;
    const int kappa = static_cast<int>(breaks.size()) - 1;
    // Clamped knot vector: boundary knots repeated `order` times.
    auto knot = [&](int i) {
        const int interior = i - p;
        if (interior <= 0) return breaks.front();
        if (interior >= kappa) return breaks.back();
        return breaks[interior];
    };
    const int span = cell + p;

    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1, 0.0), right(p + 1, 0.0);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knot(span + 1 - j);
        right[j] = knot(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    std::vector<double> out(static_cast<std::size_t>(order));
    if (deriv == 0) {
        for (int j = 0; j <= p; ++j) out[j] = ndu[j][p];
        return out;
    }

    // Derivatives by differencing lower-order functions.
    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        double d = 0.0;
        for (int k = 1; k <= deriv; ++k) {
            d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            std::swap(s1, s2);
        }
        out[r] = d;
    }
    double factor = p;
    for (int k = 1; k < deriv; ++k) factor *= (p - k);
    for (double& v : out) v *= factor;
    return out;
}

Eigen::VectorXd eval_bspline(const Partition& partition, int order, std::span<const int> deriv,
                             std::span<const double> point) {
    check_point_and_deriv(partition, order, deriv, point);
    const int d = partition.dims();
    const auto cell = locate_cell(partition, point);

    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_dim(Family::bspline, order, partition));
    std::vector<std::vector<double>> uni(d);
    std::vector<int> stride(d);
    int st = 1;
    for (int l = 0; l < d; ++l) {
        uni[l] = univariate_bspline(partition.knots(l), order, deriv[l], cell[l], point[l]);
        stride[l] = st;
        st *= partition.kappa(l) + order - 1;
    }
    // Walk the m^d nonzero tensor entries.
    std::vector<int> local(d, 0);
    const int count = static_cast<int>(std::pow(order, d));
    for (int c = 0; c < count; ++c) {
        double v = 1.0;
        int idx = 0;
        for (int l = 0; l < d; ++l) {
            v *= uni[l][local[l]];
            idx += (cell[l] + local[l]) * stride[l];
        }
        out[idx] = v;
        for (int l = 0; l < d; ++l) {
            if (++local[l] < order) break;
            local[l] = 0;
        }
    }
    return out;
}

Eigen::VectorXd eval_piecewise(const Partition& partition, int order, std::span<const int> deriv,
                               std::span<const double> point) {
    check_point_and_deriv(partition, order, deriv, point);
    const int d = partition.dims();
    const auto cell = locate_cell(partition, point);

    std::vector<std::vector<double>> uni(d, std::vector<double>(order, 0.0));
    int cell_index = 0;
    int cell_stride = 1;
    for (int l = 0; l < d; ++l) {
        const double h = partition.width(l, cell[l]);
        const double u = (point[l] - partition.knots(l)[cell[l]]) / h;
        const int q = deriv[l];
        for (int e = q; e < order; ++e) {
            double coef = 1.0;
            for (int k = 0; k < q; ++k) coef *= (e - k);
            uni[l][e] = coef * std::pow(u, e - q) / std::pow(h, q);
        }
        cell_index += cell[l] * cell_stride;
        cell_stride *= partition.kappa(l);
    }
    const int block = static_cast<int>(std::pow(order, d));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_dim(Family::piecewise_poly, order, partition));
    std::vector<int> local(d, 0);
    for (int c = 0; c < block; ++c) {
        double v = 1.0;
        for (int l = 0; l < d; ++l) v *= uni[l][local[l]];
        out[cell_index * block + c] = v;
        for (int l = 0; l < d; ++l) {
            if (++local[l] < order) break;
            local[l] = 0;
        }
    }
    return out;
}

Eigen::VectorXd eval_basis(Family family, const Partition& partition, int order,
                           std::span<const int> deriv, std::span<const double> point) {
    switch (family) {
    case Family::bspline:
        return eval_bspline(partition, order, deriv, point);
    case Family::piecewise_poly:
        return eval_piecewise(partition, order, deriv, point);
    case Family::wavelet:
        break;
    }
    check_family(family);
    return {};
}

double error_kernel(Family family, int order, int deriv, double t) {
    check_family(family);
    const auto c = differentiate(kernel_coefficients(family, order), deriv);
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
}

double error_kernel_energy(Family family, int order, int deriv) {
    check_family(family);
    const auto c = differentiate(kernel_coefficients(family, order), deriv);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) s += c[i] * c[j] / static_cast<double>(i + j + 1);
    return s;
}

} // namespace lspart
