#include "refute/simplex.hpp"

#include <cmath>

#include "refute/errors.hpp"

namespace refute {

std::string lp_status_name(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

LinearProgram::LinearProgram(int vars)
    : c(Eigen::VectorXd::Zero(vars)), A_eq(0, vars), b_eq(0), A_le(0, vars), b_le(0) {}

namespace {

void append_row(Eigen::MatrixXd& A, Eigen::VectorXd& b, const Eigen::RowVectorXd& row, double rhs) {
    if (row.size() != A.cols()) throw ConfigError("constraint row has the wrong number of variables");
    A.conservativeResize(A.rows() + 1, Eigen::NoChange);
    b.conservativeResize(b.size() + 1);
    A.row(A.rows() - 1) = row;
    b(b.size() - 1) = rhs;
}

class Tableau {
public:
    Tableau(Eigen::MatrixXd t, std::vector<int> basis) : T_(std::move(t)), basis_(std::move(basis)) {}

    int rows() const { return static_cast<int>(T_.rows()) - 1; }
    int cols() const { return static_cast<int>(T_.cols()) - 1; }
    double rhs(int i) const { return T_(i, cols()); }
    double& at(int i, int j) { return T_(i, j); }
    double objective() const { return -T_(rows(), cols()); }
    const std::vector<int>& basis() const { return basis_; }

    void set_costs(const Eigen::VectorXd& cost) {
        const int m = rows(), N = cols();
        for (int j = 0; j <= N; ++j) T_(m, j) = j < N ? cost(j) : 0.0;
        for (int i = 0; i < m; ++i) {
            double cb = cost(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) T_.row(m) -= cb * T_.row(i);
        }
    }

    void pivot(int r, int col) {
        T_.row(r) /= T_(r, col);
        for (int i = 0; i <= rows(); ++i)
            if (i != r && T_(i, col) != 0.0) T_.row(i) -= T_(i, col) * T_.row(r);
        basis_[static_cast<std::size_t>(r)] = col;
        ++pivots;
    }

    // Bland's rule over columns [0, allowed)
    LpStatus optimize(int allowed, double tol) {
        const int m = rows();
        for (;;) {
            int enter = -1;
            for (int j = 0; j < allowed; ++j)
                if (T_(m, j) < -tol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m; ++i) {
                double a = T_(i, enter);
                if (a <= tol) continue;
                double ratio = rhs(i) / a;
                if (leave < 0 || ratio < best - tol ||
                    (std::abs(ratio - best) <= tol && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
    }

    int pivots = 0;

private:
    Eigen::MatrixXd T_;
    std::vector<int> basis_;
};

}  // namespace

void LinearProgram::add_eq(const Eigen::RowVectorXd& row, double rhs) { append_row(A_eq, b_eq, row, rhs); }
void LinearProgram::add_le(const Eigen::RowVectorXd& row, double rhs) { append_row(A_le, b_le, row, rhs); }

double LinearProgram::residual(const Eigen::VectorXd& x) const {
    double r = 0.0;
    for (int j = 0; j < x.size(); ++j) r = std::max(r, -x(j));
    if (A_eq.rows() > 0) r = std::max(r, (A_eq * x - b_eq).cwiseAbs().maxCoeff());
    if (A_le.rows() > 0) r = std::max(r, (A_le * x - b_le).maxCoeff());
    return r;
}

LpResult solve_lp(const LinearProgram& lp, double tol) {
    const int n = lp.vars();
    const int me = static_cast<int>(lp.A_eq.rows());
    const int ml = static_cast<int>(lp.A_le.rows());
    const int m = me + ml;
    const int N = n + ml + m;  // originals, slacks, artificials
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, N + 1);
    for (int i = 0; i < me; ++i) {
        T.row(i).head(n) = lp.A_eq.row(i);
        T(i, N) = lp.b_eq(i);
    }
    for (int i = 0; i < ml; ++i) {
        T.row(me + i).head(n) = lp.A_le.row(i);
        T(me + i, n + i) = 1.0;
        T(me + i, N) = lp.b_le(i);
    }
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        if (T(i, N) < 0.0) T.row(i) *= -1.0;
        T(i, n + ml + i) = 1.0;
        basis[static_cast<std::size_t>(i)] = n + ml + i;
    }

    Tableau tab(std::move(T), std::move(basis));
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(N);
    phase1.tail(m).setOnes();
    tab.set_costs(phase1);
    tab.optimize(N, tol);

    LpResult out;
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(tab.rhs(i)));
    if (tab.objective() > 1e3 * tol * scale) {
        out.status = LpStatus::Infeasible;
        out.pivots = tab.pivots;
        return out;
    }
    // move remaining artificials out of the basis; rows with no candidate are redundant
    for (int i = 0; i < m; ++i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < n + ml) continue;
        for (int j = 0; j < n + ml; ++j)
            if (std::abs(tab.at(i, j)) > tol) {
                tab.pivot(i, j);
                break;
            }
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(N);
    cost.head(n) = lp.sense == LpSense::Minimize ? lp.c : Eigen::VectorXd(-lp.c);
    tab.set_costs(cost);
    out.status = tab.optimize(n + ml, tol);
    out.pivots = tab.pivots;
    if (out.status != LpStatus::Optimal) return out;
    out.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
        int b = tab.basis()[static_cast<std::size_t>(i)];
        if (b < n) out.x(b) = tab.rhs(i);
    }
    out.value = lp.c.dot(out.x);
    return out;
}

}  // namespace refute
