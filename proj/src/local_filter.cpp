#include "hkf/local_filter.hpp"

#include <string>

namespace hkf {

LocalEstimateState init_from_measurement(const HypothesizedSchedule& sched,
                                         const SensorModel& sensor,
                                         const Vec& z1) {
  if (z1.size() != sensor.q())
    throw ConfigError("init_from_measurement: measurement dimension mismatch");
  const Mat& L1 = sched.L(sensor.id(), 1);
  LocalEstimateState s;
  s.x_info = L1 * z1;
  s.delta = L1 * sensor.H();
  s.step = 1;
  s.sensor_id = sensor.id();
  s.stage = Stage::filtered;
  return s;
}

LocalEstimateState init_from_prior(const HypothesizedSchedule& sched,
                                   int sensor_id, const Vec& prior_mean,
                                   const Mat& prior_cov) {
  if (sched.first_step() != 0)
    throw ScheduleError("init_from_prior requires a prior-initialized schedule");
  Mat prior_info = invert(prior_cov, 1e-14, "prior covariance");
  LocalEstimateState s;
  s.delta = sched.Cx(0) * prior_info;
  s.x_info = s.delta * prior_mean;
  s.step = 0;
  s.sensor_id = sensor_id;
  s.stage = Stage::filtered;
  return s;
}

LocalEstimateState predict(const LocalEstimateState& state,
                           const PlantModel& model) {
  if (state.stage != Stage::filtered)
    throw FusionError("predict: state is already in the predicted stage");
  LocalEstimateState s = state;
  s.x_info = model.A() * state.x_info;
  s.delta = model.A() * state.delta * model.A_inv();
  s.step = state.step + 1;
  s.stage = Stage::predicted;
  return s;
}

LocalEstimateState filter_step(const LocalEstimateState& state,
                               const HypothesizedSchedule& sched,
                               const SensorModel& sensor, const Vec& z) {
  if (state.stage != Stage::predicted)
    throw FusionError("filter_step: state must be in the predicted stage");
  if (z.size() != sensor.q())
    throw ConfigError("filter_step: measurement dimension mismatch");
  const int k = state.step;
  const Mat& K = sched.K(k);
  const Mat& L = sched.L(sensor.id(), k);
  LocalEstimateState s = state;
  s.x_info = K * state.x_info + L * z;
  s.delta = K * state.delta + L * sensor.H();
  s.stage = Stage::filtered;
  return s;
}

Mat advance_delta(const Mat& delta, const Mat& K_next, const PlantModel& model,
                  const Mat& L_next, const Mat& H) {
  return K_next * (model.A() * delta * model.A_inv()) + L_next * H;
}

}  // namespace hkf
