#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "hkf/local_filter.hpp"
#include "hkf/model.hpp"
#include "hkf/schedule.hpp"
#include "hkf/types.hpp"

namespace hkf {

// Sensors whose (possibly caught-up) variables enter fusion at a step.
struct FusionGroup {
  std::vector<int> member_ids;
};

// Fused variables at one step: x_f = sum x_i, Delta_f = sum Delta_i,
// xu_f = sum xu_i over the fusion group.
struct FusedVariables {
  Vec x_f;
  Mat delta_f;
  Vec xu_f;
  int step = 0;
};

// Plain summation fusion; all states must share step and stage.
std::pair<Vec, Mat> fuse(const std::vector<LocalEstimateState>& states);

// One step of the controller-side input-correction recursion:
//   xu(k) = K_k A ( xu(k-1) + Delta(k-1) A^{-1} B u_{k-1} ).
Vec advance_input_correction(const Vec& xu_prev, const Mat& delta_prev,
                             const Mat& K_k, const PlantModel& model,
                             const Vec& u_prev);

// Constant-input transfer matrix M with x^u(k) = M(k) B b for u = const b:
//   M(k) = K_k A ( M(k-1) + Delta(k-1) A^{-1} ),  M(first step) = 0 under
// measurement initialization.
Mat advance_input_transfer(const Mat& M_prev, const Mat& delta_prev,
                           const Mat& K_k, const PlantModel& model);

// Everything the controller stores about one sensor's last received estimate.
struct NodeRecord {
  int step = -1;   // origin step t of the stored variables, -1 when nothing yet
  Vec x_info;      // x_i(t) as received
  Mat delta;       // Delta_i(t), controller-computed
  Vec xu;          // x^u_i(t), controller-computed
};

struct CaughtUp {
  Vec x_info;
  Mat delta;
  Vec xu;
};

// Forward-maps a stored record from its origin step t to step k:
//   x  <- G(t,k) x_i(t)
//   D  <- G(t,k) Delta_i(t) Phi(t,k)^{-1}
//   xu <- G(t,k) ( xu_i(t) + Delta_i(t) sum_{l=t}^{k-1} Phi(t,l+1)^{-1} B u_l )
// `inputs_from_t` must hold u_t .. u_{k-1}.
CaughtUp catch_up(const HypothesizedSchedule& sched, const PlantModel& model,
                  const NodeRecord& stored, std::span<const Vec> inputs_from_t,
                  int k);

// De-biased estimate Delta_f^{-1} (x_f + xu_f); empty when Delta_f is not
// invertible at the configured reciprocal-condition threshold (the caller is
// expected to fall back to the propagated prior mean).
std::optional<Vec> debias(const Vec& x_f, const Mat& delta_f, const Vec& xu_f,
                          double cond_threshold = 1e-10);

// Heuristic hypothesis adaptation: shrink the hypothesis along eigendirections
// where the window-averaged symmetrized Delta_f sits below identity by more
// than `margin`, grow it where above. Returns a PSD matrix; identity-like
// windows leave the hypothesis unchanged. Off by default.
Hgmm adapt_hgmm(const std::vector<Mat>& delta_f_window, const Hgmm& current,
                double margin = 0.05);

// ---------------------------------------------------------------------------
// Controller-side estimator: exact per-node Delta/x^u tracks (these depend
// only on the schedule and the applied inputs, both known at the controller),
// a ledger of last received x_i, catch-up, fusion, and de-biasing.
class ControllerEstimator {
 public:
  struct Options {
    double cond_threshold = 1e-10;
    bool adapt_hgmm = false;
    int adapt_window = 10;
    double adapt_margin = 0.25;
  };

  // Measurement-initialized variant.
  ControllerEstimator(const PlantModel& model,
                      const std::vector<SensorModel>& sensors,
                      HypothesizedSchedule& sched, Options opts);

  // Prior-initialized variant: the shared prior (mean0, cov0) is split evenly
  // across the sensors, matching the combined-prior hypothesis Cx(0).
  void init_prior(const Vec& mean0, const Mat& cov0);

  // Advances the exact tracks and the fallback mean from step k-1 to k using
  // the input applied at k-1. Must be called once per step, in order.
  void begin_step(int k, const Vec& u_prev);

  // Ledger reconciliation: keep only the packet with the largest origin step
  // per sensor. Returns true when the packet was fresh (retained).
  bool ingest(int sensor_id, int origin_step, const Vec& payload);

  struct StepResult {
    std::optional<Vec> estimate;  // de-biased estimate, when available
    Vec used_estimate;            // estimate or propagated-prior fallback
    FusedVariables fused;
    FusionGroup group;
    bool fused_valid = false;     // any node contributed
  };

  // Catch-up + fuse + debias at step k (after all of step k's packets were
  // ingested).
  StepResult finish_step(int k);

  // Exact controller-side tracks (per sensor id, per step).
  const Mat& delta_at(int sensor_id, int step) const;
  const Vec& xu_at(int sensor_id, int step) const;
  const NodeRecord& record(int sensor_id) const;
  const std::vector<Vec>& input_history() const { return inputs_; }
  const Vec& fallback_mean() const { return fallback_mean_; }
  int current_step() const { return step_; }

 private:
  void advance_exact_tracks(int k);

  const PlantModel* model_;
  const std::vector<SensorModel>* sensors_;
  HypothesizedSchedule* sched_;
  Options opts_;
  int step_ = -1;
  int first_step_;

  std::vector<std::vector<Mat>> delta_hist_;  // [sensor][step]
  std::vector<std::vector<Vec>> xu_hist_;     // [sensor][step]
  std::vector<NodeRecord> records_;           // last received per sensor
  std::vector<Vec> inputs_;                   // u_0 .. u_{step-1}
  Vec fallback_mean_;                         // prior mean propagated with inputs
  std::deque<Mat> delta_f_window_;            // for hypothesis adaptation
};

}  // namespace hkf
