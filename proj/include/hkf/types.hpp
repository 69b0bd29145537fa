#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hkf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Invalid model/scenario setup (dimension mismatch, non-PSD covariance, ...).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gain-schedule construction failed (singular prediction covariance or
// singular hypothesis at the initialization step).
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Local estimates combined at different steps/stages.
class FusionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Controller-side ledger is missing data it needs (buffered inputs, steps).
class BookkeepingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reciprocal condition number estimate (1-norm, via LU).
double rcond(const Mat& m);

// LU inverse; throws `err_type` naming `what` when rcond falls below the bound.
Mat invert(const Mat& m, double rcond_min, const std::string& what);

bool is_symmetric(const Mat& m, double tol = 1e-9);
bool is_psd(const Mat& m, double tol = 1e-9);
bool is_pd(const Mat& m, double tol = 1e-12);

// Symmetric PSD square root S with S*S = m (eigendecomposition, negative
// eigenvalues clamped to zero).
Mat symmetric_sqrt(const Mat& m);

// Shortest win: %.17g formatting shared by every writer so traces are
// byte-reproducible.
std::string fmt_double(double v);

}  // namespace hkf
