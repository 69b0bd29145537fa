#pragma once

#include "hkf/model.hpp"
#include "hkf/schedule.hpp"
#include "hkf/types.hpp"

namespace hkf {

// Predict and filter must strictly alternate; the stage records which half of
// the cycle a state sits in. A `predicted` state at step k is x_{k|k-1}.
enum class Stage { filtered, predicted };

// Sensor-side variables of one node: the information-like vector x_i(k) and
// the correction matrix Delta_i(k) that de-biases it.
struct LocalEstimateState {
  Vec x_info;
  Mat delta;
  int step = 0;
  int sensor_id = 0;
  Stage stage = Stage::filtered;
};

// x_i(1) = L_1 z_1, Delta_i(1) = L_1 H. Delta may be singular here when H has
// fewer rows than the state dimension; fusion across sensors resolves that.
LocalEstimateState init_from_measurement(const HypothesizedSchedule& sched,
                                         const SensorModel& sensor,
                                         const Vec& z1);

// Prior-side initialization at step 0:
//   x_i(0) = Cx(0) prior_cov^{-1} prior_mean, Delta_i(0) = Cx(0) prior_cov^{-1}.
LocalEstimateState init_from_prior(const HypothesizedSchedule& sched,
                                   int sensor_id, const Vec& prior_mean,
                                   const Mat& prior_cov);

// x <- A x, Delta <- A Delta A^{-1}; result is the predicted state for the
// next step.
LocalEstimateState predict(const LocalEstimateState& state,
                           const PlantModel& model);

// x <- K_k x + L_k z, Delta <- K_k Delta + L_k H at the state's step k.
LocalEstimateState filter_step(const LocalEstimateState& state,
                               const HypothesizedSchedule& sched,
                               const SensorModel& sensor, const Vec& z);

// Shared one-step advance of a filtered correction matrix (predict + filter
// without new-measurement bookkeeping differences); sensors and the
// controller-side exact track both call this so they agree bit-for-bit.
Mat advance_delta(const Mat& delta, const Mat& K_next, const PlantModel& model,
                  const Mat& L_next, const Mat& H);

}  // namespace hkf
