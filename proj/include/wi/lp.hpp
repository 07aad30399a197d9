#pragma once

// Dense two-phase simplex for small equality-form programs:
//   optimize c.x  subject to  A x = b,  x >= 0.
// Pivoting uses Bland's rule, so the solver terminates on degenerate
// problems.

#include <string>
#include <vector>

namespace wi::lp {

inline constexpr double kTolerance = 1e-9;

struct Program {
    std::size_t variables = 0;
    std::vector<std::vector<double>> rows;  // each of length `variables`
    std::vector<double> rhs;
    std::vector<std::string> row_names;
    std::vector<double> objective;  // length `variables`

    void add_row(std::vector<double> coeffs, double b, std::string name);
};

enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// For Infeasible: Farkas multipliers from phase I, one per row; rows
    /// with a non-zero multiplier form the conflicting combination.
    std::vector<double> farkas;
    std::size_t pivots = 0;
};

Solution solve(const Program& p, Sense sense);

/// Largest absolute residual |A x - b| over all rows.
double max_residual(const Program& p, const std::vector<double>& x);

}  // namespace wi::lp
