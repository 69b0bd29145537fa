#include "hkf/model.hpp"

#include <string>

namespace hkf {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

PlantModel::PlantModel(Mat A, Mat B, Mat Xi, Vec x0_mean, Mat P0)
    : A_(std::move(A)),
      B_(std::move(B)),
      Xi_(std::move(Xi)),
      x0_mean_(std::move(x0_mean)),
      P0_(std::move(P0)) {
  require(A_.rows() > 0 && A_.rows() == A_.cols(), "plant.A must be square and non-empty");
  const auto nn = A_.rows();
  require(B_.rows() == nn, "plant.B row count must match the state dimension");
  require(B_.cols() > 0, "plant.B must have at least one input column");
  require(Xi_.rows() == nn && Xi_.cols() == nn, "plant.Xi must be n x n");
  require(x0_mean_.size() == nn, "plant.x0_mean must have length n");
  require(P0_.rows() == nn && P0_.cols() == nn, "plant.P0 must be n x n");
  require(is_psd(Xi_), "plant.Xi must be symmetric positive semi-definite");
  require(is_psd(P0_), "plant.P0 must be symmetric positive semi-definite");

  Eigen::PartialPivLU<Mat> lu(A_);
  double rc = lu.rcond();
  require(std::isfinite(rc) && rc >= kAConditionMin,
          "plant.A must be regular (reciprocal condition number >= 1e-12)");
  A_inv_ = lu.inverse();

  process_noise_ = GaussianSampler(Xi_);
  initial_spread_ = GaussianSampler(P0_);
}

SensorModel::SensorModel(int id, Mat H, Mat Theta)
    : id_(id), H_(std::move(H)), Theta_(std::move(Theta)) {
  require(id_ >= 1, "sensor.id must be >= 1");
  require(H_.rows() > 0 && H_.cols() > 0, "sensor.H must be non-empty");
  require(Theta_.rows() == H_.rows() && Theta_.cols() == H_.rows(),
          "sensor.Theta must be q x q for a q x n measurement matrix");
  require(is_pd(Theta_), "sensor.Theta must be symmetric positive definite");
  Theta_inv_ = invert(Theta_, 1e-14, "sensor.Theta");
  noise_ = GaussianSampler(Theta_);
}

Vec step_plant(const PlantModel& model, const Vec& x, const Vec& u,
               RandomStream& rng) {
  if (x.size() != model.n()) throw ConfigError("step_plant: state dimension mismatch");
  if (u.size() != model.m()) throw ConfigError("step_plant: input dimension mismatch");
  return model.A() * x + model.B() * u + model.process_noise().sample(rng);
}

Vec measure(const SensorModel& sensor, const Vec& x, RandomStream& rng) {
  if (x.size() != sensor.H().cols()) throw ConfigError("measure: state dimension mismatch");
  return sensor.H() * x + sensor.noise().sample(rng);
}

Vec rollout_true_state(const PlantModel& model, std::span<const Vec> inputs,
                       int k, std::optional<Vec> x0,
                       std::span<const Vec> noise) {
  if (k < 0 || k > static_cast<int>(inputs.size()))
    throw ConfigError("rollout_true_state: k exceeds supplied input sequence");
  Vec x = x0 ? *x0 : model.x0_mean();
  // Accumulate Phi(0,k) x_0 + sum_t Phi(t+1,k)(B u_t + w_t) Horner-style.
  for (int t = 0; t < k; ++t) {
    x = model.A() * x + model.B() * inputs[t];
    if (t < static_cast<int>(noise.size())) x += noise[t];
  }
  return x;
}

TrueTrajectory simulate_trajectory(const PlantModel& model,
                                   std::span<const Vec> inputs,
                                   RandomStream& x0_rng,
                                   RandomStream& plant_rng) {
  TrueTrajectory traj;
  traj.states.reserve(inputs.size() + 1);
  traj.inputs_applied.assign(inputs.begin(), inputs.end());
  Vec x = model.x0_mean() + model.initial_spread().sample(x0_rng);
  traj.states.push_back(x);
  for (const Vec& u : inputs) {
    x = step_plant(model, x, u, plant_rng);
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace hkf
