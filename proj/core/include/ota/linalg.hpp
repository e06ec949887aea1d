#pragma once

#include <Eigen/Dense>

namespace ota {

struct ExpmResult {
  Eigen::MatrixXd value;
  int squarings;
};

// Matrix exponential by Pade(13) scaling and squaring. Throws
// StiffnessWarning when more than 60 squarings would be needed
// (||A||_1 > theta13 * 2^60), which signals a badly scaled generator.
ExpmResult expm(const Eigen::MatrixXd& A);

// exp(A) * v without forming exp(A): substepped truncated Taylor series
// with per-term norm control. Intended for large sparse-ish generators
// where only the action is needed.
Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& v);

}  // namespace ota
