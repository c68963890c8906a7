#include "sfattack/box_qp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sfattack/errors.hpp"

namespace sfattack {

namespace {

// Constraint i reads normal_i^T u >= rhs_i. Indices [0, n) are lower bounds,
// [n, 2n) upper bounds, 2n the halfspace.
struct ConstraintSet {
    int n;
    const BoxHalfspaceQp& qp;

    int count() const { return 2 * n + 1; }

    Eigen::VectorXd normal(int i) const
    {
        if (i < n)
            return Eigen::VectorXd::Unit(n, i);
        if (i < 2 * n)
            return -Eigen::VectorXd::Unit(n, i - n);
        return qp.normal;
    }

    double rhs(int i) const
    {
        if (i < n)
            return qp.lower[i];
        if (i < 2 * n)
            return -qp.upper[i - n];
        return -qp.offset;
    }

    double slack(int i, const Eigen::VectorXd& u) const { return normal(i).dot(u) - rhs(i); }

    // Puts u exactly on a bound constraint so later slacks are not polluted by roundoff.
    void snap(int i, Eigen::VectorXd& u) const
    {
        if (i < n)
            u[i] = qp.lower[i];
        else if (i < 2 * n)
            u[i - n] = qp.upper[i - n];
    }
};

Eigen::VectorXd box_maximizer(const BoxHalfspaceQp& qp)
{
    Eigen::VectorXd u = qp.target.cwiseMax(qp.lower).cwiseMin(qp.upper);
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (qp.normal[j] > 0.0)
            u[j] = qp.upper[j];
        else if (qp.normal[j] < 0.0)
            u[j] = qp.lower[j];
    }
    return u;
}

}  // namespace

QpSolution solve_box_halfspace_qp(const BoxHalfspaceQp& qp)
{
    const int n = static_cast<int>(qp.target.size());
    if (qp.lower.size() != n || qp.upper.size() != n || qp.normal.size() != n)
        throw DimensionError("solve_box_halfspace_qp: inconsistent problem dimensions");

    QpSolution sol;
    Eigen::VectorXd u = qp.target.cwiseMax(qp.lower).cwiseMin(qp.upper);
    if (qp.normal.dot(u) + qp.offset >= 0.0) {
        // The box projection is feasible, hence optimal.
        sol.u = u;
        return sol;
    }

    u = box_maximizer(qp);
    if (qp.normal.dot(u) + qp.offset < 0.0) {
        sol.u = u;
        sol.status = QpStatus::Infeasible;
        return sol;
    }

    const ConstraintSet cons{n, qp};
    std::vector<int> working;
    const int max_iter = 50 * cons.count();
    constexpr double kZero = 1e-14;

    for (int iter = 0; iter < max_iter; ++iter) {
        sol.iterations = iter + 1;
        const Eigen::VectorXd grad = u - qp.target;

        Eigen::MatrixXd N(n, static_cast<Eigen::Index>(working.size()));
        for (std::size_t k = 0; k < working.size(); ++k)
            N.col(static_cast<Eigen::Index>(k)) = cons.normal(working[k]);

        Eigen::VectorXd lambda;
        Eigen::VectorXd step = -grad;
        if (!working.empty()) {
            const Eigen::LDLT<Eigen::MatrixXd> gram(N.transpose() * N);
            lambda = gram.solve(N.transpose() * grad);
            step = -(grad - N * lambda);
        }

        if (step.norm() <= kZero * (1.0 + u.norm())) {
            // Stationary on the working face: check multiplier signs.
            Eigen::Index worst = -1;
            double most_negative = -kZero;
            for (Eigen::Index k = 0; k < lambda.size(); ++k) {
                if (lambda[k] < most_negative) {
                    most_negative = lambda[k];
                    worst = k;
                }
            }
            if (worst < 0) {
                sol.u = u;
                return sol;
            }
            working.erase(working.begin() + worst);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < cons.count(); ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end())
                continue;
            const double rate = cons.normal(i).dot(step);
            if (rate >= 0.0)
                continue;
            const double limit = std::max(0.0, cons.slack(i, u) / -rate);
            if (limit < alpha) {
                alpha = limit;
                blocking = i;
            }
        }

        u += alpha * step;
        if (blocking >= 0) {
            cons.snap(blocking, u);
            working.push_back(blocking);
        }
    }
    throw std::runtime_error("solve_box_halfspace_qp: active-set iteration limit reached");
}

}  // namespace sfattack
