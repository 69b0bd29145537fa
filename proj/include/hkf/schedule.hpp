#pragma once

#include <optional>
#include <vector>

#include "hkf/model.hpp"
#include "hkf/types.hpp"

namespace hkf {

// Hypothesis about the global measurement model: the assumed global
// measurement information matrix sum_i H_i^T Theta_i^{-1} H_i.
struct Hgmm {
  Mat info;

  static Hgmm create(Mat info);
};

// The hypothesis that exactly matches the configured sensor set (optionally
// scaled).
Hgmm matched_hgmm(const std::vector<SensorModel>& sensors, double scale = 1.0);

// Gain schedule implied by the hypothesis. Identical at every node given the
// same plant, sensors, and hypothesis: it never touches measurement data.
//
// Measurement-initialized schedules start at k = 1 with Cx(1) = hgmm^{-1};
// gains K exist from k = 2. Prior-initialized schedules hold the hypothesized
// prior covariance at k = 0 and have gains from k = 1.
class HypothesizedSchedule {
 public:
  int horizon() const { return horizon_; }
  int first_step() const { return first_step_; }          // 0 (prior) or 1
  int first_gain_step() const { return first_step_ + 1; }
  int num_sensors() const { return static_cast<int>(L_.size()); }

  const Mat& Cx(int k) const { return at(Cx_, k, "Cx"); }
  const Mat& Cx_pred(int k) const { return at(Cx_pred_, k, "Cx_pred"); }
  const Mat& K(int k) const { return at(K_, k, "K"); }
  // Measurement gain of the sensor with the given 1-based id.
  const Mat& L(int sensor_id, int k) const;
  const Mat& hgmm_at(int k) const { return at(hgmm_, k, "hgmm"); }

  // Replaces the hypothesis from step `from_step` on and rebuilds the affected
  // entries. Supports the (heuristic, default-off) hypothesis adaptation; all
  // already-consumed entries stay untouched.
  void replace_hgmm_from(int from_step, const Hgmm& hgmm,
                         const PlantModel& model,
                         const std::vector<SensorModel>& sensors);

 private:
  friend HypothesizedSchedule build_schedule(const PlantModel&,
                                             const std::vector<SensorModel>&,
                                             const Hgmm&, int,
                                             std::optional<Mat>);

  const Mat& at(const std::vector<Mat>& v, int k, const char* what) const;
  void compute_filtered(int k, const std::vector<SensorModel>& sensors);

  int horizon_ = 0;
  int first_step_ = 1;
  // All sequences indexed by time step; index 0 unused under measurement init.
  std::vector<Mat> Cx_, Cx_pred_, K_, hgmm_;
  std::vector<std::vector<Mat>> L_;  // L_[sensor][k]
};

// Builds the schedule for k = first step .. horizon. Without `prior_cov` the
// schedule is measurement-initialized (requires an invertible hypothesis at
// step 1); with it, Cx(0) = prior_cov and a normal predict/filter cycle leads
// into step 1.
HypothesizedSchedule build_schedule(const PlantModel& model,
                                    const std::vector<SensorModel>& sensors,
                                    const Hgmm& hgmm, int horizon,
                                    std::optional<Mat> prior_cov = std::nullopt);

}  // namespace hkf
