#include "ota/linalg.hpp"

#include <cmath>

#include "ota/errors.hpp"

namespace ota {

namespace {

constexpr double kTheta13 = 5.371920351148152;

}  // namespace

ExpmResult expm(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw InvalidArgument("expm: matrix must be square");
  const Eigen::Index n = A.rows();
  if (!A.allFinite()) throw InvalidArgument("expm: non-finite entries");

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > kTheta13) {
    s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    if (s > 60) {
      throw StiffnessWarning("expm: " + std::to_string(s) +
                             " squarings needed (1-norm " +
                             std::to_string(norm1) + ")");
    }
  }
  Eigen::MatrixXd As = A / std::ldexp(1.0, s);

  static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = As * As;
  const Eigen::MatrixXd A4 = A2 * A2;
  const Eigen::MatrixXd A6 = A2 * A4;

  Eigen::MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
            b[5] * A4 + b[3] * A2 + b[1] * I);
  Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                      b[4] * A4 + b[2] * A2 + b[0] * I;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(V - U);
  Eigen::MatrixXd R = lu.solve(V + U);
  if (!R.allFinite()) {
    throw SingularSolve("expm: Pade denominator solve produced non-finite");
  }
  for (int i = 0; i < s; ++i) R = R * R;
  return {std::move(R), s};
}

Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& v) {
  if (A.rows() != A.cols())
    throw InvalidArgument("expm_apply: matrix must be square");
  if (A.cols() != v.size())
    throw InvalidArgument("expm_apply: dimension mismatch");
  if (!A.allFinite() || !v.allFinite())
    throw InvalidArgument("expm_apply: non-finite input");

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return v;

  // Substeps keep ||A/m||_1 <= theta so the Taylor series converges in a
  // few dozen terms with no cancellation blowup.
  const double theta = 3.5;
  const int m = std::max(1, static_cast<int>(std::ceil(norm1 / theta)));
  const Eigen::MatrixXd B = A / static_cast<double>(m);

  Eigen::VectorXd w = v;
  for (int step = 0; step < m; ++step) {
    Eigen::VectorXd term = w;
    Eigen::VectorXd acc = w;
    double acc_norm = acc.cwiseAbs().maxCoeff();
    for (int k = 1; k <= 160; ++k) {
      term = (B * term) / static_cast<double>(k);
      acc += term;
      double tn = term.cwiseAbs().maxCoeff();
      acc_norm = std::max(acc_norm, acc.cwiseAbs().maxCoeff());
      if (tn <= 1e-18 * std::max(1e-300, acc_norm)) break;
    }
    w = std::move(acc);
  }
  if (!w.allFinite())
    throw SingularSolve("expm_apply: series produced non-finite values");
  return w;
}

}  // namespace ota
