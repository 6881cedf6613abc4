#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apt/corpus.hpp"
#include "apt/prefloss.hpp"
#include "apt/tinylm/model.hpp"

namespace apt::tinylm {

enum class Scheduler { Cosine, Plateau };

Scheduler parse_scheduler(std::string_view name);
std::string_view to_string(Scheduler s);

struct TrainConfig {
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  double beta = 0.2;
  double max_grad_norm = 1.0;
  Scheduler scheduler = Scheduler::Cosine;
  double warmup_ratio = 0.0;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t patience = 3;  // plateau only

  // Throws InvalidArgument.
  void validate() const;
};

// Returns the norm before clipping. Gradients are rescaled in place when the
// norm exceeds max_norm.
double clip_grad_norm(Parameters& grads, double max_norm);

// Adam with decoupled weight decay. Decay skips bias vectors.
class AdamW {
 public:
  explicit AdamW(const Parameters& like, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Parameters& params, const Parameters& grads, double lr, double weight_decay);
  std::size_t steps() const noexcept { return t_; }

 private:
  Parameters m_, v_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

// Linear warmup over the first ceil(warmup_ratio * total_steps) steps, then
// either cosine decay to zero over the remaining steps or a constant rate
// that halves whenever the epoch loss fails to improve by 1e-4 for
// `patience` consecutive epochs.
class LrSchedule {
 public:
  LrSchedule(Scheduler kind, double base_lr, double warmup_ratio, std::size_t total_steps, std::size_t patience = 3);

  double lr_at(std::size_t step) const;
  void end_epoch(double loss);

  std::size_t warmup_steps() const noexcept { return warmup_; }
  double plateau_scale() const noexcept { return scale_; }

 private:
  Scheduler kind_;
  double base_;
  std::size_t total_;
  std::size_t warmup_;
  std::size_t patience_;
  double scale_ = 1.0;
  std::optional<double> best_;
  std::size_t bad_epochs_ = 0;
};

using SftExample = std::pair<std::string, std::string>;  // (prompt, target)

struct SftResult {
  TinyModel model;
  std::vector<double> loss_curve;  // mean nats per target token, one per epoch
};

// Cross-entropy on target tokens (and EOS); prompt tokens are context only.
// Throws EmptyCorpus.
SftResult train_sft(TinyModel model, std::span<const SftExample> corpus, const TrainConfig& config);

struct PrefExample {
  std::string prompt;
  std::string chosen;
  std::string rejected;
};

// Prompt rendered with corpus::render_prompt for the record's target type.
PrefExample to_example(const corpus::PreferenceRecord& r);

struct PrefResult {
  TinyModel model;
  std::vector<prefloss::PrefStats> curve;  // one per epoch, accumulated over that epoch's batches
};

// `reference` stays frozen: its logprobs are computed once up front.
// Throws EmptyPairs.
PrefResult train_pref(TinyModel model, const TinyModel& reference, std::span<const PrefExample> pairs,
                      prefloss::Method method, const TrainConfig& config);
PrefResult train_pref(TinyModel model, const TinyModel& reference, std::span<const corpus::PreferenceRecord> pairs,
                      prefloss::Method method, const TrainConfig& config);

prefloss::ScoredSequence score_sequence(const TinyModel& policy, const TinyModel& reference,
                                        std::string_view prompt, std::string_view continuation);
prefloss::PrefBatchItem score_pair(const TinyModel& policy, const TinyModel& reference, const PrefExample& ex);

// Throws EmptyPairs.
prefloss::PrefStats evaluate_pref(const TinyModel& policy, const TinyModel& reference,
                                  std::span<const PrefExample> pairs, prefloss::Method method, double beta);

enum class LossKind { Sft, Dpo, Ipo };

struct GradCheckBatch {
  std::vector<SftExample> sft;
  std::vector<PrefExample> pref;
  double beta = 0.2;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
};

// Mean loss of the batch (per target token for sft, per pair otherwise) and
// optionally its analytic gradient.
double batch_loss(const TinyModel& model, const TinyModel& reference, const GradCheckBatch& batch, LossKind kind,
                  Parameters* grads = nullptr);

// Central differences carry roughly 1e-16 * |loss| / eps of roundoff, about
// 3e-11 at eps = 1e-5, so gradients below 1e-7 cannot be resolved in relative
// terms. The denominator is floored to keep those entries meaningful.
inline constexpr double kGradCheckFloor = 1e-6;

// Central differences on max(1, ceil(1%)) randomly chosen entries of every
// tensor. Relative error |a - n| / max(|a|, |n|, floor), 0 when all are 0.
// The reference defaults to the model itself. eps must lie in [1e-7, 1e-3].
GradCheckResult grad_check(const TinyModel& model, const GradCheckBatch& batch, LossKind kind, double eps,
                           std::uint64_t seed = 0, const TinyModel* reference = nullptr,
                           double abs_floor = kGradCheckFloor);

}  // namespace apt::tinylm
