#include "hkf/schedule.hpp"

#include <string>

namespace hkf {

Hgmm Hgmm::create(Mat info) {
  if (info.rows() != info.cols() || info.rows() == 0)
    throw ConfigError("hgmm must be a square matrix");
  if (!is_psd(info))
    throw ConfigError("hgmm must be symmetric positive semi-definite");
  return Hgmm{std::move(info)};
}

Hgmm matched_hgmm(const std::vector<SensorModel>& sensors, double scale) {
  if (sensors.empty()) throw ConfigError("matched hgmm needs at least one sensor");
  const auto n = sensors.front().H().cols();
  Mat info = Mat::Zero(n, n);
  for (const auto& s : sensors)
    info += s.H().transpose() * s.Theta_inv() * s.H();
  return Hgmm::create(scale * info);
}

const Mat& HypothesizedSchedule::at(const std::vector<Mat>& v, int k,
                                    const char* what) const {
  if (k < 0 || k >= static_cast<int>(v.size()) || v[k].size() == 0)
    throw ScheduleError(std::string("schedule: ") + what + " not defined at step " +
                        std::to_string(k));
  return v[k];
}

const Mat& HypothesizedSchedule::L(int sensor_id, int k) const {
  int idx = sensor_id - 1;
  if (idx < 0 || idx >= static_cast<int>(L_.size()))
    throw ScheduleError("schedule: unknown sensor id " + std::to_string(sensor_id));
  return at(L_[idx], k, "L");
}

void HypothesizedSchedule::compute_filtered(
    int k, const std::vector<SensorModel>& sensors) {
  const Mat info_pred =
      invert(Cx_pred_[k], 1e-14, "Cx_pred at step " + std::to_string(k));
  Cx_[k] = invert(info_pred + hgmm_[k], 1e-14,
                  "Cx information sum at step " + std::to_string(k));
  K_[k] = Cx_[k] * info_pred;
  for (std::size_t i = 0; i < sensors.size(); ++i)
    L_[i][k] = Cx_[k] * sensors[i].H().transpose() * sensors[i].Theta_inv();
}

void HypothesizedSchedule::replace_hgmm_from(
    int from_step, const Hgmm& hgmm, const PlantModel& model,
    const std::vector<SensorModel>& sensors) {
  if (hgmm.info.rows() != model.n())
    throw ConfigError("hgmm dimension must match the state dimension");
  if (from_step <= first_step_)
    throw ScheduleError("replace_hgmm_from: cannot rewrite the initialization step");
  for (int k = from_step; k <= horizon_; ++k) {
    hgmm_[k] = hgmm.info;
    Cx_pred_[k] = model.A() * Cx_[k - 1] * model.A().transpose() + model.Xi();
    compute_filtered(k, sensors);
  }
}

HypothesizedSchedule build_schedule(const PlantModel& model,
                                    const std::vector<SensorModel>& sensors,
                                    const Hgmm& hgmm, int horizon,
                                    std::optional<Mat> prior_cov) {
  if (horizon < 1) throw ConfigError("schedule horizon must be >= 1");
  if (hgmm.info.rows() != model.n())
    throw ConfigError("hgmm dimension must match the state dimension");
  for (const auto& s : sensors)
    if (s.H().cols() != model.n())
      throw ConfigError("sensor.H column count must match the state dimension");

  HypothesizedSchedule sched;
  sched.horizon_ = horizon;
  sched.first_step_ = prior_cov ? 0 : 1;
  sched.Cx_.assign(horizon + 1, Mat());
  sched.Cx_pred_.assign(horizon + 1, Mat());
  sched.K_.assign(horizon + 1, Mat());
  sched.hgmm_.assign(horizon + 1, Mat());
  sched.L_.assign(sensors.size(), std::vector<Mat>(horizon + 1, Mat()));
  for (int k = sched.first_step_; k <= horizon; ++k) sched.hgmm_[k] = hgmm.info;

  int start;
  if (prior_cov) {
    if (prior_cov->rows() != model.n() || prior_cov->cols() != model.n())
      throw ConfigError("prior covariance must be n x n");
    if (!is_psd(*prior_cov))
      throw ConfigError("prior covariance must be symmetric positive semi-definite");
    sched.Cx_[0] = *prior_cov;
    start = 1;
  } else {
    // Initialized by help of the first measurement: Cx(1) = hgmm^{-1}.
    try {
      sched.Cx_[1] = invert(hgmm.info, 1e-14, "hgmm");
    } catch (const ScheduleError&) {
      throw ScheduleError("schedule: singular hypothesis at initialization step 1");
    }
    for (std::size_t i = 0; i < sensors.size(); ++i)
      sched.L_[i][1] =
          sched.Cx_[1] * sensors[i].H().transpose() * sensors[i].Theta_inv();
    start = 2;
  }

  for (int k = start; k <= horizon; ++k) {
    sched.Cx_pred_[k] =
        model.A() * sched.Cx_[k - 1] * model.A().transpose() + model.Xi();
    sched.compute_filtered(k, sensors);
  }
  return sched;
}

}  // namespace hkf
