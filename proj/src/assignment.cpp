#include "torusma/assignment.hpp"

#include <algorithm>
#include <limits>

#include "torusma/error.hpp"

namespace torusma {

Assignment solve_assignment(const std::vector<double>& cost, int n) {
    if (n < 0 || cost.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw Error(Errc::InvalidInput, "cost matrix is not n x n");
    const double INF = std::numeric_limits<double>::infinity();
    const std::size_t N = static_cast<std::size_t>(n);
    // 1-based arrays; column 0 is the virtual source
    std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0), minv(N + 1);
    std::vector<std::size_t> p(N + 1, 0), way(N + 1, 0);
    std::vector<char> used(N + 1);
    for (std::size_t i = 1; i <= N; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), INF);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = INF;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= N; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * N + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= N; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment a;
    a.row_to_col.assign(N, -1);
    for (std::size_t j = 1; j <= N; ++j) a.row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    // sum the original entries rather than the dual value to avoid drift
    for (std::size_t i = 0; i < N; ++i) a.total_cost += cost[i * N + static_cast<std::size_t>(a.row_to_col[i])];
    return a;
}

}  // namespace torusma
