#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "textshape/error.hpp"

namespace textshape {

enum class PathSolver { exact, heuristic, auto_select };

namespace detail {

inline std::vector<std::vector<double>> distance_matrix(const std::vector<Eigen::VectorXd>& pts) {
    const std::size_t n = pts.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = (pts[i] - pts[j]).norm();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    return dist;
}

/// Held-Karp over the interior points (endpoints fixed at 0 and n-1).
inline double held_karp_path(const std::vector<std::vector<double>>& dist) {
    const std::size_t n = dist.size();
    if (n == 2) return dist[0][1];
    const std::size_t m = n - 2;  // interior points 1..n-2
    if (m > 24) {
        throw Error(errc::config_error, "exact path solver limited to 26 points");
    }
    const std::size_t full = std::size_t{1} << m;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(full * m, inf);
    auto at = [&](std::size_t set, std::size_t j) -> double& { return dp[set * m + j]; };

    for (std::size_t j = 0; j < m; ++j) {
        at(std::size_t{1} << j, j) = dist[0][j + 1];
    }
    for (std::size_t set = 1; set < full; ++set) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!(set >> j & 1)) continue;
            const double cur = at(set, j);
            if (cur == inf) continue;
            for (std::size_t k = 0; k < m; ++k) {
                if (set >> k & 1) continue;
                const std::size_t next = set | (std::size_t{1} << k);
                double cand = cur + dist[j + 1][k + 1];
                if (cand < at(next, k)) at(next, k) = cand;
            }
        }
    }
    double best = inf;
    for (std::size_t j = 0; j < m; ++j) {
        best = std::min(best, at(full - 1, j) + dist[j + 1][n - 1]);
    }
    return best;
}

/// 2-opt on the interior ordering, seeded from the identity (reading order),
/// accepting only improving reversals. The result can therefore never exceed
/// the identity path length. Deterministic: fixed scan order, first
/// improvement, repeat until a full pass makes no move.
inline double two_opt_path(const std::vector<std::vector<double>>& dist) {
    const std::size_t n = dist.size();
    if (n == 2) return dist[0][1];
    const std::size_t m = n - 2;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{1});

    auto node_before = [&](std::size_t i) { return i == 0 ? std::size_t{0} : order[i - 1]; };
    auto node_after = [&](std::size_t j) { return j == m - 1 ? n - 1 : order[j + 1]; };

    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                const std::size_t a = node_before(i);
                const std::size_t b = order[i];
                const std::size_t c = order[j];
                const std::size_t d = node_after(j);
                const double delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d];
                if (delta < -1e-12) {
                    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                                 order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    improved = true;
                }
            }
        }
    }

    double total = dist[0][order[0]];
    for (std::size_t i = 0; i + 1 < m; ++i) total += dist[order[i]][order[i + 1]];
    total += dist[order[m - 1]][n - 1];
    return total;
}

}  // namespace detail

/// Length of the shortest Hamiltonian path with fixed endpoints (first and
/// last point) over all orderings of the interior points. `auto_select`
/// runs Held-Karp up to 13 points and identity-seeded 2-opt beyond.
inline double shortest_path_length(const std::vector<Eigen::VectorXd>& points,
                                   PathSolver solver = PathSolver::auto_select) {
    if (points.size() < 2) {
        throw Error(errc::too_few_windows, "shortest path needs at least 2 points");
    }
    auto dist = detail::distance_matrix(points);
    switch (solver) {
        case PathSolver::exact: return detail::held_karp_path(dist);
        case PathSolver::heuristic: return detail::two_opt_path(dist);
        case PathSolver::auto_select:
            return points.size() <= 13 ? detail::held_karp_path(dist) : detail::two_opt_path(dist);
    }
    return detail::two_opt_path(dist);
}

}  // namespace textshape
