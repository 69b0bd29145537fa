#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "hkf/model.hpp"
#include "hkf/rng.hpp"
#include "hkf/types.hpp"

namespace hkf {

// Sequence of N_A+1 inputs [u_{k|k}, u_{k+1|k}, ..., u_{k+N_A|k}] computed at
// origin_step k.
struct ControlPacket {
  int origin_step = 0;
  std::vector<Vec> sequence;
};

// Minimal sensor-to-controller payload: the local information vector only.
struct MeasurementPacket {
  int sensor_id = 0;
  int origin_step = 0;
  Vec payload;
};

enum class AckMode { none, tcp_like };

// Lossy, delaying channel. Packets are independently lost with `loss_prob`,
// otherwise delayed by a draw from `delay_pmf` (delays 0..D_max). Entries in
// `scripted` override the random draw for packets sent at that step
// (delay < 0 encodes a scripted drop).
struct Channel {
  double loss_prob = 0.0;
  std::vector<double> delay_pmf = {1.0};
  AckMode ack_mode = AckMode::none;
  std::map<int, int> scripted;

  void validate(const std::string& where) const;

  struct Outcome {
    bool delivered = false;
    int delay = 0;  // meaningful only when delivered
    int arrival_step(int send_step) const { return send_step + delay; }
  };

  // Draws the fate of one packet sent at `step`. In tcp_like mode the outcome
  // is visible to the sender within the same step (the acknowledgment);
  // otherwise the sender learns nothing.
  Outcome send(int step, RandomStream& rng) const;
};

// Delivery queue keyed by arrival step.
template <typename PacketT>
class DeliveryQueue {
 public:
  void schedule(int arrival_step, PacketT packet) {
    pending_.emplace(arrival_step, std::move(packet));
  }
  std::vector<PacketT> collect(int step) {
    std::vector<PacketT> out;
    auto [lo, hi] = pending_.equal_range(step);
    for (auto it = lo; it != hi; ++it) out.push_back(std::move(it->second));
    pending_.erase(lo, hi);
    return out;
  }

 private:
  std::multimap<int, PacketT> pending_;
};

// Actuator-side buffer: keeps the control sequence with the most recent
// origin step among all received; applies its entry for the current step when
// one exists, the default input otherwise.
class ActuatorBuffer {
 public:
  ActuatorBuffer(Vec u_default, int n_a);

  // Ingests this step's arrivals, then returns the input applied at step k.
  Vec step(const std::vector<ControlPacket>& arriving, int k);

  const std::optional<ControlPacket>& stored() const { return stored_; }
  const Vec& u_default() const { return u_default_; }

 private:
  std::optional<ControlPacket> stored_;
  Vec u_default_;
  int n_a_;
};

// Augmented state xi_k = [ x_k ; pending inputs of the sequences sent at
// steps k-1 .. k-N_A that are still applicable ; u_default ]. The pending
// block for the sequence of age j holds the N_A+1-j entries u_{k|k-j} ..
// u_{k+N_A-j|k-j}.
struct AugmentedStateLayout {
  int n = 0;
  int m = 0;
  int n_a = 0;

  int pending_entries() const { return n_a * (n_a + 1) / 2; }
  int dim() const { return n + m * pending_entries() + m; }
};

// Assembles the conditional-expectation estimate of xi_k: the plant-state
// estimate plus the (exactly known) pending inputs and default input.
// `sent_history` holds the most recently sent packets, newest last.
Vec assemble_augmented_estimate(const AugmentedStateLayout& layout,
                                const Vec& x_hat,
                                const std::deque<ControlPacket>& sent_history,
                                const Vec& u_default, int k);

// Maps the augmented-state estimate to the control sequence U_k.
class FeedbackLaw {
 public:
  virtual ~FeedbackLaw() = default;
  // Returns N_A+1 stacked inputs.
  virtual std::vector<Vec> control_sequence(const AugmentedStateLayout& layout,
                                            const Vec& xi_hat) const = 0;
};

// Stationary discrete-time LQR gain for (A, B, Q, R); iterates the backward
// Riccati recursion until the gain stabilizes.
Mat solve_lqr_gain(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

// Certainty-equivalent receding-horizon LQR: u_{k+j|k} = -L (A - B L)^j x_hat.
class LqrFeedbackLaw final : public FeedbackLaw {
 public:
  LqrFeedbackLaw(const PlantModel& model, const Mat& Q, const Mat& R, int n_a);
  std::vector<Vec> control_sequence(const AugmentedStateLayout& layout,
                                    const Vec& xi_hat) const override;
  const Mat& gain() const { return gain_; }

 private:
  Mat gain_;
  Mat closed_loop_;
  int n_a_;
};

// Emits a fixed sequence regardless of the estimate.
class ConstantFeedbackLaw final : public FeedbackLaw {
 public:
  ConstantFeedbackLaw(Vec value, int n_a) : value_(std::move(value)), n_a_(n_a) {}
  std::vector<Vec> control_sequence(const AugmentedStateLayout&,
                                    const Vec&) const override {
    return std::vector<Vec>(n_a_ + 1, value_);
  }

 private:
  Vec value_;
  int n_a_;
};

std::unique_ptr<FeedbackLaw> default_feedback_law(const PlantModel& model,
                                                  const Mat& Q, const Mat& R,
                                                  int n_a);

// Builds this step's control packet from the feedback law and maintains the
// sent-sequence bookkeeping (keeps the N_A most recent packets).
ControlPacket controller_step(const AugmentedStateLayout& layout,
                              const FeedbackLaw& law, const Vec& x_hat,
                              std::deque<ControlPacket>& sent_history,
                              const Vec& u_default, int k);

// Quadratic cost accumulator: sum of x^T Q x + u^T R u plus a terminal
// x_K^T Q x_K.
class CostAccumulator {
 public:
  CostAccumulator(Mat Q, Mat R);
  void add_stage(const Vec& x, const Vec& u);
  void add_terminal(const Vec& x);
  double total() const { return total_; }

 private:
  Mat Q_, R_;
  double total_ = 0.0;
};

}  // namespace hkf
