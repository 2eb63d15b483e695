#pragma once

#include <vector>

namespace torusma {

struct Assignment {
    std::vector<int> row_to_col;
    double total_cost = 0.0;
};

// Minimum-cost perfect matching on a dense n x n cost matrix (row-major),
// shortest augmenting paths with potentials, O(n^3).
Assignment solve_assignment(const std::vector<double>& cost, int n);

}  // namespace torusma
