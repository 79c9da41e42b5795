#pragma once
#include <vector>

namespace bjj {

// Lowest eigenpairs of a real symmetric tridiagonal matrix (diag d, off-diag
// e), via Sturm-sequence bisection plus inverse iteration.  Cost is O(n) per
// eigenpair, which keeps fine finite-difference grids cheap where a full QL
// sweep would not be.  Vectors come back unit-norm in the Euclidean sense and
// mutually orthogonalized.
struct TridiagPairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};

TridiagPairs tridiag_lowest_eigenpairs(const std::vector<double>& diag,
                                       const std::vector<double>& off,
                                       int n_pairs);

} // namespace bjj
