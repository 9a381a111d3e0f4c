#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "textshape/error.hpp"

namespace textshape {

/// Volume of the unit ball in R^d: pi^{d/2} / Gamma(d/2 + 1).
inline double unit_ball_volume(int d) {
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Ellipsoid {y : (y - c)^T A (y - c) <= 1} with A symmetric positive
/// definite.
struct Ellipsoid {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;  // the matrix A

    double mahalanobis(const Eigen::VectorXd& p) const {
        Eigen::VectorXd diff = p - center;
        return diff.dot(shape * diff);
    }

    /// Lebesgue volume: V_d / sqrt(det A).
    double volume() const {
        const int d = static_cast<int>(center.size());
        return unit_ball_volume(d) / std::sqrt(shape.determinant());
    }
};

namespace detail {

inline int affine_rank(const std::vector<Eigen::VectorXd>& points, double rel_cutoff = 1e-10) {
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    const Eigen::Index d = points.empty() ? 0 : points[0].size();
    Eigen::MatrixXd centered(n, d);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) centered.row(i) = (points[i] - mean).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_cutoff * sv(0)) ++rank;
    }
    return rank;
}

}  // namespace detail

/// Minimum-volume enclosing ellipsoid via Khachiyan's weight-update
/// iteration, with Wolfe-Atwood away steps (drop steps) for fast convergence.
///
/// Points must affinely span their space; otherwise Degenerate is thrown
/// (project to a full-rank subspace first). On return every input point
/// satisfies (p - c)^T A (p - c) <= 1 + 2 * tol.
inline Ellipsoid mvee(const std::vector<Eigen::VectorXd>& points, double tol = 1e-7,
                      std::size_t max_iter = 10000) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(errc::degenerate, "mvee needs at least 2 points");
    const Eigen::Index d = points[0].size();
    if (detail::affine_rank(points) < static_cast<int>(d)) {
        throw Error(errc::degenerate, "points do not affinely span their space");
    }

    // Lifted points q_i = [p_i; 1].
    Eigen::MatrixXd Q(d + 1, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Q.block(0, static_cast<Eigen::Index>(i), d, 1) = points[i];
        Q(d, static_cast<Eigen::Index>(i)) = 1.0;
    }

    Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n);
    const double dim1 = static_cast<double>(d) + 1.0;

    bool converged = false;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        Eigen::MatrixXd X = Q * u.asDiagonal() * Q.transpose();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(X);
        if (ldlt.info() != Eigen::Success) {
            throw Error(errc::degenerate, "singular moment matrix in mvee iteration");
        }
        // M_i = q_i^T X^{-1} q_i; the u-weighted mean of M is exactly d+1.
        Eigen::VectorXd m = (Q.array() * ldlt.solve(Q).array()).colwise().sum().transpose();

        Eigen::Index j_plus = 0;
        double m_plus = m.maxCoeff(&j_plus);
        Eigen::Index j_minus = -1;
        double m_minus = m_plus;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            if (u(i) > 0.0 && m(i) < m_minus) {
                m_minus = m(i);
                j_minus = i;
            }
        }

        const double eps_plus = m_plus / dim1 - 1.0;
        const double eps_minus = j_minus >= 0 ? 1.0 - m_minus / dim1 : 0.0;
        if (eps_plus <= tol && eps_minus <= tol) {
            converged = true;
            break;
        }

        Eigen::Index j;
        double alpha;
        if (eps_plus >= eps_minus || j_minus < 0) {
            j = j_plus;
            alpha = (m_plus - dim1) / (dim1 * (m_plus - 1.0));
        } else {
            // Away step: shrink the weight of the most interior support point.
            j = j_minus;
            alpha = (m_minus - dim1) / (dim1 * (m_minus - 1.0));
            alpha = std::max(alpha, -u(j) / (1.0 - u(j)));
        }
        u *= (1.0 - alpha);
        u(j) += alpha;
        if (u(j) < 0.0) u(j) = 0.0;
    }
    if (!converged) {
        throw Error(errc::no_convergence, "mvee did not reach tolerance within iteration budget");
    }

    Eigen::MatrixXd P(d, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) P.col(static_cast<Eigen::Index>(i)) = points[i];
    Eigen::VectorXd center = P * u;
    Eigen::MatrixXd sigma = P * u.asDiagonal() * P.transpose() - center * center.transpose();
    Eigen::MatrixXd A = sigma.inverse() / static_cast<double>(d);
    A = 0.5 * (A + A.transpose());
    return Ellipsoid{std::move(center), std::move(A)};
}

}  // namespace textshape
