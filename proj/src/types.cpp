#include "hkf/types.hpp"

#include <cmath>
#include <cstdio>

namespace hkf {

double rcond(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return 0.0;
  Eigen::PartialPivLU<Mat> lu(m);
  double rc = lu.rcond();
  if (!std::isfinite(rc)) rc = 0.0;
  return rc;
}

Mat invert(const Mat& m, double rcond_min, const std::string& what) {
  Eigen::PartialPivLU<Mat> lu(m);
  double rc = lu.rcond();
  if (!std::isfinite(rc) || rc < rcond_min) {
    throw ScheduleError(what + " is singular or badly conditioned (rcond=" +
                        std::to_string(rc) + ")");
  }
  return lu.inverse();
}

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_psd(const Mat& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()),
                                        Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_pd(const Mat& m, double tol) {
  if (!is_symmetric(m)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > tol;
}

Mat symmetric_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec lambda = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hkf
