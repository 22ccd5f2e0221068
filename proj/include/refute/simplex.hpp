#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace refute {

enum class LpSense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };
std::string lp_status_name(LpStatus s);

// min/max c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= 0
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_le;
    Eigen::VectorXd b_le;
    LpSense sense = LpSense::Minimize;

    explicit LinearProgram(int vars = 0);
    int vars() const { return static_cast<int>(c.size()); }
    void add_eq(const Eigen::RowVectorXd& row, double rhs);
    void add_le(const Eigen::RowVectorXd& row, double rhs);
    // largest violation of any constraint (including x >= 0) at x
    double residual(const Eigen::VectorXd& x) const;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
    int pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-11);

}  // namespace refute
