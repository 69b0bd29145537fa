#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hkf/rng.hpp"
#include "hkf/types.hpp"

namespace hkf {

// Linear time-invariant plant
//   x_{k+1} = A x_k + B u_k + w_k,  w_k ~ N(0, Xi),  x_0 ~ N(x0_mean, P0).
// A must be regular: the correction-matrix prediction is a similarity
// transform by A and needs A^{-1}.
class PlantModel {
 public:
  PlantModel(Mat A, Mat B, Mat Xi, Vec x0_mean, Mat P0);

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }

  const Mat& A() const { return A_; }
  const Mat& B() const { return B_; }
  const Mat& Xi() const { return Xi_; }
  const Vec& x0_mean() const { return x0_mean_; }
  const Mat& P0() const { return P0_; }
  const Mat& A_inv() const { return A_inv_; }

  const GaussianSampler& process_noise() const { return process_noise_; }
  const GaussianSampler& initial_spread() const { return initial_spread_; }

  static constexpr double kAConditionMin = 1e-12;

 private:
  Mat A_, B_, Xi_;
  Vec x0_mean_;
  Mat P0_;
  Mat A_inv_;
  GaussianSampler process_noise_;
  GaussianSampler initial_spread_;
};

// Sensor i measuring y = H x + v, v ~ N(0, Theta). Theta must be positive
// definite (its inverse enters every measurement gain).
class SensorModel {
 public:
  SensorModel(int id, Mat H, Mat Theta);

  int id() const { return id_; }
  int q() const { return static_cast<int>(H_.rows()); }
  const Mat& H() const { return H_; }
  const Mat& Theta() const { return Theta_; }
  const Mat& Theta_inv() const { return Theta_inv_; }
  const GaussianSampler& noise() const { return noise_; }

 private:
  int id_;
  Mat H_, Theta_, Theta_inv_;
  GaussianSampler noise_;
};

struct TrueTrajectory {
  std::vector<Vec> states;          // x_0 .. x_K
  std::vector<Vec> inputs_applied;  // u_0 .. u_{K-1}
};

// One step of the plant; noise drawn from rng (n normals per call).
Vec step_plant(const PlantModel& model, const Vec& x, const Vec& u,
               RandomStream& rng);

// One measurement; noise drawn from rng (q_i normals per call).
Vec measure(const SensorModel& sensor, const Vec& x, RandomStream& rng);

// Non-recursive expansion of the state at step k:
//   x_k = sum_{t=0}^{k-1} Phi(t+1,k) (B u_t + w_t) + Phi(0,k) x_0,
// with Phi(a,k) = A^{k-a}. x0 defaults to the model's mean; `noise` (when
// supplied) provides w_0..w_{k-1}, otherwise the rollout is noise-free.
Vec rollout_true_state(const PlantModel& model, std::span<const Vec> inputs,
                       int k, std::optional<Vec> x0 = std::nullopt,
                       std::span<const Vec> noise = {});

// Iterated step_plant from a drawn x_0; replayable from the rng seeds.
TrueTrajectory simulate_trajectory(const PlantModel& model,
                                   std::span<const Vec> inputs,
                                   RandomStream& x0_rng,
                                   RandomStream& plant_rng);

}  // namespace hkf
