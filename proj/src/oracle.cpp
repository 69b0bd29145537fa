#include "hkf/oracle.hpp"

#include <string>

namespace hkf::oracle {

Mat gain_product(const HypothesizedSchedule& sched, const PlantModel& model,
                 int l, int k) {
  if (l > k || l < sched.first_gain_step() - 1 || k > sched.horizon())
    throw ScheduleError("gain_product: index range [" + std::to_string(l) + "," +
                        std::to_string(k) + "] out of schedule bounds");
  Mat g = Mat::Identity(model.n(), model.n());
  for (int t = k; t > l; --t) g = g * sched.K(t) * model.A();
  return g;
}

Mat transition_product(const PlantModel& model, int l, int k) {
  Mat phi = Mat::Identity(model.n(), model.n());
  for (int t = l; t < k; ++t) phi = model.A() * phi;
  return phi;
}

Mat transition_product_inv(const PlantModel& model, int l, int k) {
  Mat inv = Mat::Identity(model.n(), model.n());
  for (int t = l; t < k; ++t) inv = inv * model.A_inv();
  return inv;
}

Vec x_sum_node(const HypothesizedSchedule& sched, const PlantModel& model,
               const SensorModel& sensor, std::span<const Vec> z, int cutoff,
               int k) {
  Vec acc = Vec::Zero(model.n());
  for (int t = 1; t <= cutoff; ++t) {
    if (t >= static_cast<int>(z.size()))
      throw BookkeepingError("x_sum_node: missing measurement at step " +
                             std::to_string(t));
    acc += gain_product(sched, model, t, k) * sched.L(sensor.id(), t) * z[t];
  }
  return acc;
}

Mat delta_sum_node(const HypothesizedSchedule& sched, const PlantModel& model,
                   const SensorModel& sensor, int cutoff, int k) {
  Mat acc = Mat::Zero(model.n(), model.n());
  for (int t = 1; t <= cutoff; ++t) {
    acc += gain_product(sched, model, t, k) * sched.L(sensor.id(), t) *
           sensor.H() * transition_product_inv(model, t, k);
  }
  return acc;
}

Vec xu_sum(const HypothesizedSchedule& sched, const PlantModel& model,
           std::span<const Mat> deltas, std::span<const Vec> inputs, int k) {
  Vec acc = Vec::Zero(model.n());
  for (int t = 0; t < k; ++t) {
    if (t >= static_cast<int>(deltas.size()) ||
        t >= static_cast<int>(inputs.size()))
      throw BookkeepingError("xu_sum: missing delta or input at step " +
                             std::to_string(t));
    if (deltas[t].size() == 0 || deltas[t].isZero(0.0)) continue;
    acc += gain_product(sched, model, t, k) * deltas[t] * model.A_inv() *
           model.B() * inputs[t];
  }
  return acc;
}

Mat input_transfer_sum(const HypothesizedSchedule& sched,
                       const PlantModel& model, std::span<const Mat> deltas,
                       int k) {
  Mat acc = Mat::Zero(model.n(), model.n());
  for (int t = 0; t < k; ++t) {
    if (t >= static_cast<int>(deltas.size()))
      throw BookkeepingError("input_transfer_sum: missing delta at step " +
                             std::to_string(t));
    if (deltas[t].size() == 0 || deltas[t].isZero(0.0)) continue;
    acc += gain_product(sched, model, t, k) * deltas[t] * model.A_inv();
  }
  return acc;
}

Vec x_sum_fused(const HypothesizedSchedule& sched, const PlantModel& model,
                std::span<const NodeMeasurements> group, int k) {
  Vec acc = Vec::Zero(model.n());
  for (const auto& node : group)
    acc += x_sum_node(sched, model, *node.sensor, node.z, node.cutoff, k);
  return acc;
}

Mat delta_sum_fused(const HypothesizedSchedule& sched, const PlantModel& model,
                    std::span<const NodeMeasurements> group, int k) {
  Mat acc = Mat::Zero(model.n(), model.n());
  for (const auto& node : group)
    acc += delta_sum_node(sched, model, *node.sensor, node.cutoff, k);
  return acc;
}

Vec measurement_mean(const PlantModel& model, const SensorModel& sensor,
                     std::span<const Vec> inputs, int k) {
  Vec mean = transition_product(model, 0, k) * model.x0_mean();
  for (int l = 0; l < k; ++l) {
    if (l >= static_cast<int>(inputs.size()))
      throw BookkeepingError("measurement_mean: missing input at step " +
                             std::to_string(l));
    mean += transition_product(model, l + 1, k) * model.B() * inputs[l];
  }
  return sensor.H() * mean;
}

namespace {

struct Stacked {
  Mat H;
  Mat Theta;
  Vec z;
  bool any = false;
};

Stacked stack_measurements(const std::vector<std::optional<Vec>>& z,
                           const std::vector<SensorModel>& sensors, int n) {
  if (z.size() != sensors.size())
    throw ConfigError("central_kf: one optional measurement per sensor required");
  int q_total = 0;
  for (std::size_t i = 0; i < sensors.size(); ++i)
    if (z[i]) q_total += sensors[i].q();
  Stacked s;
  s.any = q_total > 0;
  s.H = Mat::Zero(q_total, n);
  s.Theta = Mat::Zero(q_total, q_total);
  s.z = Vec::Zero(q_total);
  int row = 0;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (!z[i]) continue;
    const int q = sensors[i].q();
    if (z[i]->size() != q)
      throw ConfigError("central_kf: measurement dimension mismatch for sensor " +
                        std::to_string(sensors[i].id()));
    s.H.middleRows(row, q) = sensors[i].H();
    s.Theta.block(row, row, q, q) = sensors[i].Theta();
    s.z.segment(row, q) = *z[i];
    row += q;
  }
  return s;
}

}  // namespace

std::pair<Vec, Mat> central_kf_step(const Vec& prior_mean, const Mat& prior_cov,
                                    const std::vector<std::optional<Vec>>& z,
                                    const Vec& u_prev, const PlantModel& model,
                                    const std::vector<SensorModel>& sensors,
                                    UpdateForm form) {
  const int n = model.n();
  const Vec mean_pred = model.A() * prior_mean + model.B() * u_prev;
  const Mat cov_pred =
      model.A() * prior_cov * model.A().transpose() + model.Xi();

  Stacked s = stack_measurements(z, sensors, n);
  if (!s.any) return {mean_pred, cov_pred};

  switch (form) {
    case UpdateForm::information: {
      const Mat info_pred = invert(cov_pred, 1e-15, "central_kf prediction covariance");
      Mat info = info_pred;
      Vec info_vec = info_pred * mean_pred;
      for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (!z[i]) continue;
        info += sensors[i].H().transpose() * sensors[i].Theta_inv() * sensors[i].H();
        info_vec += sensors[i].H().transpose() * sensors[i].Theta_inv() * *z[i];
      }
      const Mat cov = invert(info, 1e-15, "central_kf innovation information");
      return {cov * info_vec, cov};
    }
    case UpdateForm::covariance_stacked: {
      const Mat S = s.H * cov_pred * s.H.transpose() + s.Theta;
      const Mat K = cov_pred * s.H.transpose() *
                    invert(S, 1e-15, "central_kf innovation covariance");
      const Vec mean = mean_pred + K * (s.z - s.H * mean_pred);
      const Mat I = Mat::Identity(n, n);
      // Joseph form keeps the covariance symmetric.
      const Mat cov = (I - K * s.H) * cov_pred * (I - K * s.H).transpose() +
                      K * s.Theta * K.transpose();
      return {mean, cov};
    }
    case UpdateForm::covariance_sequential: {
      Vec mean = mean_pred;
      Mat cov = cov_pred;
      const Mat I = Mat::Identity(n, n);
      for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (!z[i]) continue;
        const Mat& H = sensors[i].H();
        const Mat S = H * cov * H.transpose() + sensors[i].Theta();
        const Mat K = cov * H.transpose() *
                      invert(S, 1e-15, "central_kf innovation covariance");
        mean += K * (*z[i] - H * mean);
        cov = (I - K * H) * cov * (I - K * H).transpose() +
              K * sensors[i].Theta() * K.transpose();
      }
      return {mean, cov};
    }
  }
  throw ConfigError("central_kf_step: unknown update form");
}

CentralKf CentralKf::from_prior(const PlantModel& model,
                                const std::vector<SensorModel>& sensors,
                                Vec mean0, Mat cov0) {
  CentralKf kf(model, sensors);
  kf.mean_ = std::move(mean0);
  kf.cov_ = std::move(cov0);
  kf.step_ = 0;
  return kf;
}

CentralKf CentralKf::from_first_measurements(
    const PlantModel& model, const std::vector<SensorModel>& sensors,
    const std::vector<Vec>& z1) {
  if (z1.size() != sensors.size())
    throw ConfigError("central_kf: first-measurement init needs every sensor");
  const int n = model.n();
  Mat info = Mat::Zero(n, n);
  Vec info_vec = Vec::Zero(n);
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    info += sensors[i].H().transpose() * sensors[i].Theta_inv() * sensors[i].H();
    info_vec += sensors[i].H().transpose() * sensors[i].Theta_inv() * z1[i];
  }
  CentralKf kf(model, sensors);
  kf.cov_ = invert(info, 1e-14, "central_kf initial measurement information");
  kf.mean_ = kf.cov_ * info_vec;
  kf.step_ = 1;
  return kf;
}

void CentralKf::step(const std::vector<std::optional<Vec>>& z,
                     const Vec& u_prev) {
  auto [mean, cov] =
      central_kf_step(mean_, cov_, z, u_prev, *model_, *sensors_, form_);
  mean_ = std::move(mean);
  cov_ = std::move(cov);
  ++step_;
}

}  // namespace hkf::oracle
