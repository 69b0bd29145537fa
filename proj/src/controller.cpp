#include "hkf/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hkf {

std::pair<Vec, Mat> fuse(const std::vector<LocalEstimateState>& states) {
  if (states.empty()) throw FusionError("fuse: empty fusion group");
  const auto& first = states.front();
  Vec x_f = Vec::Zero(first.x_info.size());
  Mat delta_f = Mat::Zero(first.delta.rows(), first.delta.cols());
  for (const auto& s : states) {
    if (s.step != first.step || s.stage != first.stage)
      throw FusionError("fuse: estimates at mismatched steps or stages (sensor " +
                        std::to_string(s.sensor_id) + ")");
    x_f += s.x_info;
    delta_f += s.delta;
  }
  return {x_f, delta_f};
}

Vec advance_input_correction(const Vec& xu_prev, const Mat& delta_prev,
                             const Mat& K_k, const PlantModel& model,
                             const Vec& u_prev) {
  return K_k * model.A() *
         (xu_prev + delta_prev * model.A_inv() * model.B() * u_prev);
}

Mat advance_input_transfer(const Mat& M_prev, const Mat& delta_prev,
                           const Mat& K_k, const PlantModel& model) {
  return K_k * model.A() * (M_prev + delta_prev * model.A_inv());
}

CaughtUp catch_up(const HypothesizedSchedule& sched, const PlantModel& model,
                  const NodeRecord& stored, std::span<const Vec> inputs_from_t,
                  int k) {
  if (stored.step < 0)
    throw BookkeepingError("catch_up: no stored estimate for this sensor");
  if (k < stored.step)
    throw BookkeepingError("catch_up: target step precedes the stored step");
  if (k == stored.step) return {stored.x_info, stored.delta, stored.xu};

  const int t = stored.step;
  const int gap = k - t;
  if (static_cast<int>(inputs_from_t.size()) < gap)
    throw BookkeepingError("catch_up: inputs u_" + std::to_string(t) + "..u_" +
                           std::to_string(k - 1) + " not fully buffered");

  const int n = model.n();
  Mat g = Mat::Identity(n, n);  // G(t,k), accumulated forward
  for (int j = t + 1; j <= k; ++j) g = sched.K(j) * model.A() * g;

  Mat phi_inv = Mat::Identity(n, n);  // Phi(t, l+1)^{-1}, advanced per term
  Vec input_part = Vec::Zero(n);
  for (int l = 0; l < gap; ++l) {
    phi_inv = phi_inv * model.A_inv();
    input_part += phi_inv * model.B() * inputs_from_t[l];
  }
  // phi_inv now equals Phi(t,k)^{-1}.

  CaughtUp out;
  out.x_info = g * stored.x_info;
  out.delta = g * stored.delta * phi_inv;
  out.xu = g * (stored.xu + stored.delta * input_part);
  return out;
}

std::optional<Vec> debias(const Vec& x_f, const Mat& delta_f, const Vec& xu_f,
                          double cond_threshold) {
  Eigen::PartialPivLU<Mat> lu(delta_f);
  const double rc = lu.rcond();
  if (!std::isfinite(rc) || rc < cond_threshold) return std::nullopt;
  return lu.solve(x_f + xu_f);
}

Hgmm adapt_hgmm(const std::vector<Mat>& delta_f_window, const Hgmm& current,
                double margin) {
  if (delta_f_window.empty()) return current;
  const auto n = current.info.rows();
  Mat avg = Mat::Zero(n, n);
  for (const Mat& d : delta_f_window) avg += d;
  avg /= static_cast<double>(delta_f_window.size());
  const Mat sym = 0.5 * (avg + avg.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  Vec scale(n);
  for (int j = 0; j < n; ++j) {
    const double lambda = es.eigenvalues()[j];
    scale[j] = (std::abs(lambda - 1.0) > margin)
                   ? std::clamp(lambda, 0.1, 10.0)
                   : 1.0;
  }
  const Mat T = es.eigenvectors() * scale.cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  Mat adapted = T * current.info * T;
  return Hgmm::create(0.5 * (adapted + adapted.transpose()));
}

ControllerEstimator::ControllerEstimator(const PlantModel& model,
                                         const std::vector<SensorModel>& sensors,
                                         HypothesizedSchedule& sched,
                                         Options opts)
    : model_(&model),
      sensors_(&sensors),
      sched_(&sched),
      opts_(opts),
      first_step_(sched.first_step()) {
  const auto M = sensors.size();
  delta_hist_.assign(M, std::vector<Mat>(sched.horizon() + 1, Mat()));
  xu_hist_.assign(M, std::vector<Vec>(sched.horizon() + 1, Vec()));
  records_.assign(M, NodeRecord{});
  fallback_mean_ = model.x0_mean();
  step_ = 0;
}

void ControllerEstimator::init_prior(const Vec& mean0, const Mat& cov0) {
  if (first_step_ != 0)
    throw ScheduleError("init_prior requires a prior-initialized schedule");
  const Mat prior_info = invert(cov0, 1e-14, "prior covariance");
  const Mat delta0 = sched_->Cx(0) * prior_info;
  for (std::size_t i = 0; i < sensors_->size(); ++i) {
    delta_hist_[i][0] = delta0;
    xu_hist_[i][0] = Vec::Zero(model_->n());
    records_[i] = NodeRecord{0, delta0 * mean0, delta0, Vec::Zero(model_->n())};
  }
  fallback_mean_ = mean0;
}

void ControllerEstimator::advance_exact_tracks(int k) {
  for (std::size_t i = 0; i < sensors_->size(); ++i) {
    const auto& sensor = (*sensors_)[i];
    if (k == 1 && first_step_ == 1) {
      delta_hist_[i][1] = sched_->L(sensor.id(), 1) * sensor.H();
      xu_hist_[i][1] = Vec::Zero(model_->n());
      continue;
    }
    delta_hist_[i][k] = advance_delta(delta_hist_[i][k - 1], sched_->K(k),
                                      *model_, sched_->L(sensor.id(), k),
                                      sensor.H());
    xu_hist_[i][k] =
        advance_input_correction(xu_hist_[i][k - 1], delta_hist_[i][k - 1],
                                 sched_->K(k), *model_, inputs_[k - 1]);
  }
}

void ControllerEstimator::begin_step(int k, const Vec& u_prev) {
  if (k != step_ + 1)
    throw BookkeepingError("begin_step: steps must advance one at a time");
  if (k > sched_->horizon())
    throw BookkeepingError("begin_step: step exceeds the schedule horizon");
  if (u_prev.size() != model_->m())
    throw ConfigError("begin_step: input dimension mismatch");
  if (first_step_ == 0 && records_[0].step < 0)
    throw BookkeepingError("begin_step: init_prior was not called");
  inputs_.push_back(u_prev);
  fallback_mean_ = model_->A() * fallback_mean_ + model_->B() * u_prev;
  advance_exact_tracks(k);
  step_ = k;
}

bool ControllerEstimator::ingest(int sensor_id, int origin_step,
                                 const Vec& payload) {
  const int idx = sensor_id - 1;
  if (idx < 0 || idx >= static_cast<int>(records_.size()))
    throw ConfigError("ingest: unknown sensor id " + std::to_string(sensor_id));
  if (origin_step < std::max(first_step_, 1) || origin_step > step_)
    throw BookkeepingError("ingest: packet origin step " +
                           std::to_string(origin_step) + " out of range");
  if (origin_step <= records_[idx].step) return false;  // stale, discard
  records_[idx] = NodeRecord{origin_step, payload, delta_hist_[idx][origin_step],
                             xu_hist_[idx][origin_step]};
  return true;
}

ControllerEstimator::StepResult ControllerEstimator::finish_step(int k) {
  if (k != step_)
    throw BookkeepingError("finish_step: begin_step(k) must run first");
  StepResult res;
  res.fused.step = k;
  res.fused.x_f = Vec::Zero(model_->n());
  res.fused.delta_f = Mat::Zero(model_->n(), model_->n());
  res.fused.xu_f = Vec::Zero(model_->n());

  for (std::size_t i = 0; i < records_.size(); ++i) {
    const NodeRecord& rec = records_[i];
    if (rec.step < 0) continue;
    const std::span<const Vec> gap_inputs(inputs_.data() + rec.step,
                                          inputs_.size() - rec.step);
    CaughtUp cu = catch_up(*sched_, *model_, rec, gap_inputs, k);
    res.fused.x_f += cu.x_info;
    res.fused.delta_f += cu.delta;
    res.fused.xu_f += cu.xu;
    res.group.member_ids.push_back((*sensors_)[i].id());
    res.fused_valid = true;
  }

  if (res.fused_valid) {
    res.estimate = debias(res.fused.x_f, res.fused.delta_f, res.fused.xu_f,
                          opts_.cond_threshold);
  }
  res.used_estimate = res.estimate ? *res.estimate : fallback_mean_;

  if (opts_.adapt_hgmm && res.fused_valid) {
    delta_f_window_.push_back(res.fused.delta_f);
    if (static_cast<int>(delta_f_window_.size()) >= opts_.adapt_window &&
        k + 1 <= sched_->horizon()) {
      const std::vector<Mat> window(delta_f_window_.begin(),
                                    delta_f_window_.end());
      const Hgmm adapted =
          adapt_hgmm(window, Hgmm{sched_->hgmm_at(k)}, opts_.adapt_margin);
      sched_->replace_hgmm_from(k + 1, adapted, *model_, *sensors_);
      delta_f_window_.clear();
    }
  }
  return res;
}

const Mat& ControllerEstimator::delta_at(int sensor_id, int step) const {
  const int idx = sensor_id - 1;
  if (idx < 0 || idx >= static_cast<int>(delta_hist_.size()) || step < 0 ||
      step > step_ || delta_hist_[idx][step].size() == 0)
    throw BookkeepingError("delta_at: not available");
  return delta_hist_[idx][step];
}

const Vec& ControllerEstimator::xu_at(int sensor_id, int step) const {
  const int idx = sensor_id - 1;
  if (idx < 0 || idx >= static_cast<int>(xu_hist_.size()) || step < 0 ||
      step > step_ || xu_hist_[idx][step].size() == 0)
    throw BookkeepingError("xu_at: not available");
  return xu_hist_[idx][step];
}

const NodeRecord& ControllerEstimator::record(int sensor_id) const {
  const int idx = sensor_id - 1;
  if (idx < 0 || idx >= static_cast<int>(records_.size()))
    throw ConfigError("record: unknown sensor id");
  return records_[idx];
}

}  // namespace hkf
