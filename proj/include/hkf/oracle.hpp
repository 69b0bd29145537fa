#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hkf/model.hpp"
#include "hkf/schedule.hpp"
#include "hkf/types.hpp"

namespace hkf::oracle {

// Brute-force reference implementations used as ground truth by the
// equivalence tests. Deliberately O(k^2); only run at test scale.
//
// Index convention, fixed once for every sum below:
//   G(l,k)   = K_k A K_{k-1} A ... K_{l+1} A   (gains at steps l+1..k,
//              dynamics at steps l..k-1), G(k,k) = I.
//   Phi(l,k) = A^{k-l} (dynamics at steps l..k-1), Phi(k,k) = I.
// Everything time-varying in the write-ups maps onto these two products; the
// recursion-equivalence tests pin the convention.

// Ordered gain/dynamics product G(l,k). Requires first_gain_step-1 <= l <= k.
Mat gain_product(const HypothesizedSchedule& sched, const PlantModel& model,
                 int l, int k);

// Phi(l,k) and its inverse.
Mat transition_product(const PlantModel& model, int l, int k);
Mat transition_product_inv(const PlantModel& model, int l, int k);

// Per-node sums. `z` holds z_t at index t (index 0 unused); `cutoff` is the
// last measurement step included (cutoff = k reproduces the full recursion,
// smaller cutoffs reproduce a node whose transmissions stopped at `cutoff`).
//   x:     sum_{t=1}^{cutoff} G(t,k) L_t z_t
//   delta: sum_{t=1}^{cutoff} G(t,k) L_t H Phi(t,k)^{-1}
Vec x_sum_node(const HypothesizedSchedule& sched, const PlantModel& model,
               const SensorModel& sensor, std::span<const Vec> z, int cutoff,
               int k);
Mat delta_sum_node(const HypothesizedSchedule& sched, const PlantModel& model,
                   const SensorModel& sensor, int cutoff, int k);

// Input-correction sum: sum_{t=0}^{k-1} G(t,k) deltas[t] A^{-1} B u[t].
// deltas[t] is the correction matrix the node carried at step t (zero at
// t = 0 under measurement initialization); a zero matrix skips the term, so
// the t = 0 term never evaluates G(0,k).
Vec xu_sum(const HypothesizedSchedule& sched, const PlantModel& model,
           std::span<const Mat> deltas, std::span<const Vec> inputs, int k);

// Constant-input transfer sum: sum_{t=0}^{k-1} G(t,k) deltas[t] A^{-1}.
Mat input_transfer_sum(const HypothesizedSchedule& sched,
                       const PlantModel& model, std::span<const Mat> deltas,
                       int k);

// Fused variants over a sensor group with per-sensor cutoffs.
struct NodeMeasurements {
  const SensorModel* sensor = nullptr;
  std::span<const Vec> z;  // z[t], index 0 unused
  int cutoff = 0;          // last measurement step included for this node
};
Vec x_sum_fused(const HypothesizedSchedule& sched, const PlantModel& model,
                std::span<const NodeMeasurements> group, int k);
Mat delta_sum_fused(const HypothesizedSchedule& sched, const PlantModel& model,
                    std::span<const NodeMeasurements> group, int k);

// Noise-free measurement mean
//   H ( sum_{l=0}^{k-1} Phi(l+1,k) B u_l + Phi(0,k) x0_mean ).
Vec measurement_mean(const PlantModel& model, const SensorModel& sensor,
                     std::span<const Vec> inputs, int k);

// ---------------------------------------------------------------------------
// Centralized Kalman filter over the stacked measurement model.

enum class UpdateForm { information, covariance_stacked, covariance_sequential };

// One predict-then-update cycle from (prior_mean, prior_cov) at step k-1 to
// step k. `z` carries one optional measurement per sensor (absent entries are
// skipped; an all-absent step is a pure prediction).
std::pair<Vec, Mat> central_kf_step(const Vec& prior_mean, const Mat& prior_cov,
                                    const std::vector<std::optional<Vec>>& z,
                                    const Vec& u_prev, const PlantModel& model,
                                    const std::vector<SensorModel>& sensors,
                                    UpdateForm form = UpdateForm::information);

// Recursive wrapper holding the mean/covariance pair.
class CentralKf {
 public:
  // State at step 0 given a prior.
  static CentralKf from_prior(const PlantModel& model,
                              const std::vector<SensorModel>& sensors,
                              Vec mean0, Mat cov0);
  // State at step 1 built from the first measurements with no prior
  // information; requires the stacked measurement information to be regular.
  static CentralKf from_first_measurements(const PlantModel& model,
                                           const std::vector<SensorModel>& sensors,
                                           const std::vector<Vec>& z1);

  void step(const std::vector<std::optional<Vec>>& z, const Vec& u_prev);

  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  int step_index() const { return step_; }
  void set_update_form(UpdateForm form) { form_ = form; }

 private:
  CentralKf(const PlantModel& model, const std::vector<SensorModel>& sensors)
      : model_(&model), sensors_(&sensors) {}

  const PlantModel* model_;
  const std::vector<SensorModel>* sensors_;
  Vec mean_;
  Mat cov_;
  int step_ = 0;
  UpdateForm form_ = UpdateForm::information;
};

}  // namespace hkf::oracle
