#pragma once

#include "sfattack/types.hpp"

namespace sfattack {

/// min |u - target|^2  s.t.  lower <= u <= upper,  normal^T u + offset >= 0.
struct BoxHalfspaceQp {
    Eigen::VectorXd target;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd normal;
    double offset = 0.0;
};

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
    Eigen::VectorXd u;
    QpStatus status = QpStatus::Optimal;
    int iterations = 0;
};

/// Primal active-set method (identity Hessian). When the feasible set is empty
/// the box point maximizing normal^T u is returned with status Infeasible.
QpSolution solve_box_halfspace_qp(const BoxHalfspaceQp& qp);

}  // namespace sfattack
