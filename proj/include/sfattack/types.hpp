#pragma once

#include <Eigen/Dense>

namespace sfattack {

// Dense real vectors; lengths are n_x, n_u and n_y of the owning model.
using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;
using MeasVec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Norm { L2, Linf };

/// Value of |v| in the chosen norm.
double norm_of(const Eigen::VectorXd& v, Norm norm);

/// Dual norm: L2 is self-dual, the dual of Linf is L1.
double dual_norm_of(const Eigen::VectorXd& v, Norm norm);

inline bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace sfattack
