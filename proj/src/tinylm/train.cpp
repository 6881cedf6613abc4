#include "apt/tinylm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apt/error.hpp"
#include "apt/rng.hpp"

namespace apt::tinylm {
namespace {

constexpr double kPlateauThreshold = 1e-4;

bool is_bias(std::size_t index) { return param_name(index).starts_with("b_"); }

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(derive_seed(seed, epoch));
  shuffle(std::span<std::size_t>(order), rng);
  return order;
}

std::size_t total_steps(std::size_t n, const TrainConfig& c) {
  return c.epochs * ((n + c.batch_size - 1) / c.batch_size);
}

double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

prefloss::ScoredSequence as_scored(const Sequence& seq, std::vector<double> policy, std::vector<double> reference) {
  prefloss::ScoredSequence s;
  s.token_ids.assign(seq.tokens.begin() + static_cast<long>(seq.target_from), seq.tokens.end());
  s.policy_logprobs = std::move(policy);
  s.reference_logprobs = std::move(reference);
  return s;
}

struct PreparedPair {
  Sequence chosen, rejected;
  double ref_chosen = 0.0, ref_rejected = 0.0;
};

PreparedPair prepare(const TinyModel& policy, const TinyModel& reference, const PrefExample& ex) {
  PreparedPair p;
  p.chosen = make_sequence(policy, ex.prompt, ex.chosen);
  p.rejected = make_sequence(policy, ex.prompt, ex.rejected);
  p.ref_chosen = sum(score(reference, p.chosen));
  p.ref_rejected = sum(score(reference, p.rejected));
  return p;
}

void check_compatible(const TinyModel& a, const TinyModel& b) {
  if (!(a.vocab() == b.vocab())) throw Error(ErrorKind::InvalidArgument, "policy and reference vocabularies differ");
}

// Loss of one pair; accumulates `scale * dloss` into grads when given.
struct PairOutcome {
  double loss, h;
};

PairOutcome pair_step(const TinyModel& model, const PreparedPair& p, prefloss::Method method, double beta,
                      double scale, Parameters* grads) {
  ForwardTrace tc, tr;
  const auto lc = score(model, p.chosen, grads ? &tc : nullptr);
  const auto lr = score(model, p.rejected, grads ? &tr : nullptr);
  const double h = (sum(lc) - p.ref_chosen) - (sum(lr) - p.ref_rejected);
  const double loss = prefloss::loss_from_gap(method, h, beta);
  if (grads) {
    const double g = prefloss::grad_from_gap(method, h, beta) * scale;
    const std::vector<double> dc(lc.size(), g), dr(lr.size(), -g);
    backward(model, tc, dc, *grads);
    backward(model, tr, dr, *grads);
  }
  return {loss, h};
}

}  // namespace

Scheduler parse_scheduler(std::string_view name) {
  if (name == "cosine") return Scheduler::Cosine;
  if (name == "plateau") return Scheduler::Plateau;
  throw Error(ErrorKind::InvalidArgument, "unknown scheduler: " + std::string(name));
}

std::string_view to_string(Scheduler s) { return s == Scheduler::Cosine ? "cosine" : "plateau"; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
  }
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warmup_ratio must lie in [0, 1)");
  }
  if (weight_decay < 0.0) throw Error(ErrorKind::InvalidArgument, "weight_decay must be >= 0");
  if (!(max_grad_norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_grad_norm must be > 0");
  if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  if (patience == 0) throw Error(ErrorKind::InvalidArgument, "patience must be >= 1");
}

double clip_grad_norm(Parameters& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& t : grads)
      for (auto& v : t.data) v *= s;
  }
  return norm;
}

AdamW::AdamW(const Parameters& like, double beta1, double beta2, double eps)
    : m_(zeros_like(like)), v_(zeros_like(like)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamW::step(Parameters& params, const Parameters& grads, double lr, double weight_decay) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < kNumParams; ++k) {
    auto& p = params[k].data;
    const auto& g = grads[k].data;
    auto& m = m_[k].data;
    auto& v = v_[k].data;
    const double decay = is_bias(k) ? 0.0 : lr * weight_decay;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= decay * p[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

LrSchedule::LrSchedule(Scheduler kind, double base_lr, double warmup_ratio, std::size_t total_steps,
                       std::size_t patience)
    : kind_(kind),
      base_(base_lr),
      total_(total_steps),
      warmup_(static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)))),
      patience_(patience) {}

double LrSchedule::lr_at(std::size_t step) const {
  if (step < warmup_) return base_ * scale_ * static_cast<double>(step) / static_cast<double>(warmup_);
  if (kind_ == Scheduler::Plateau) return base_ * scale_;
  if (total_ <= warmup_) return 0.0;
  const double progress = static_cast<double>(step - warmup_) / static_cast<double>(total_ - warmup_);
  return base_ * 0.5 * (1.0 + std::cos(M_PI * std::min(progress, 1.0)));
}

void LrSchedule::end_epoch(double loss) {
  if (kind_ != Scheduler::Plateau) return;
  if (!best_ || loss < *best_ - kPlateauThreshold) {
    best_ = loss;
    bad_epochs_ = 0;
    return;
  }
  if (++bad_epochs_ >= patience_) {
    scale_ *= 0.5;
    bad_epochs_ = 0;
  }
}

SftResult train_sft(TinyModel model, std::span<const SftExample> corpus, const TrainConfig& config) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "SFT corpus is empty");
  config.validate();
  std::vector<Sequence> seqs;
  seqs.reserve(corpus.size());
  for (const auto& [prompt, target] : corpus) seqs.push_back(make_sequence(model, prompt, target));

  SftResult result{std::move(model), {}};
  auto& m = result.model;
  AdamW opt(m.params());
  LrSchedule sched(config.scheduler, config.learning_rate, config.warmup_ratio, total_steps(seqs.size(), config),
                   config.patience);
  std::size_t step = 0;
  ForwardTrace trace;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(seqs.size(), config.seed, epoch);
    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::size_t batch_tokens = 0;
      for (std::size_t i = start; i < end; ++i) batch_tokens += seqs[order[i]].scored();
      Parameters grads = zeros_like(m.params());
      for (std::size_t i = start; i < end; ++i) {
        const auto& seq = seqs[order[i]];
        const auto lp = score(m, seq, &trace);
        epoch_nll -= sum(lp);
        const std::vector<double> dlogp(lp.size(), -1.0 / static_cast<double>(batch_tokens));
        backward(m, trace, dlogp, grads);
      }
      epoch_tokens += batch_tokens;
      clip_grad_norm(grads, config.max_grad_norm);
      opt.step(m.params(), grads, sched.lr_at(step), config.weight_decay);
      ++step;
    }
    const double mean = epoch_nll / static_cast<double>(epoch_tokens);
    result.loss_curve.push_back(mean);
    sched.end_epoch(mean);
  }
  return result;
}

PrefExample to_example(const corpus::PreferenceRecord& r) {
  const std::array<taxonomy::ParaphraseType, 1> types{r.target_type};
  return {corpus::render_prompt(r.original, types), r.chosen, r.rejected};
}

PrefResult train_pref(TinyModel model, const TinyModel& reference, std::span<const PrefExample> pairs,
                      prefloss::Method method, const TrainConfig& config) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyPairs, "no preference pairs");
  config.validate();
  if (!(config.beta > 0.0)) throw Error(ErrorKind::NonPositiveBeta, "beta must be > 0");
  check_compatible(model, reference);
  std::vector<PreparedPair> prepared;
  prepared.reserve(pairs.size());
  for (const auto& ex : pairs) prepared.push_back(prepare(model, reference, ex));

  PrefResult result{std::move(model), {}};
  auto& m = result.model;
  AdamW opt(m.params());
  LrSchedule sched(config.scheduler, config.learning_rate, config.warmup_ratio,
                   total_steps(prepared.size(), config), config.patience);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(prepared.size(), config.seed, epoch);
    prefloss::PrefStats stats;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      Parameters grads = zeros_like(m.params());
      for (std::size_t i = start; i < end; ++i) {
        const auto out = pair_step(m, prepared[order[i]], method, config.beta, scale, &grads);
        stats.mean_loss += out.loss;
        stats.reward_margin += config.beta * out.h;
        stats.reward_accuracy += out.h > 0.0 ? 1.0 : 0.0;
      }
      clip_grad_norm(grads, config.max_grad_norm);
      opt.step(m.params(), grads, sched.lr_at(step), config.weight_decay);
      ++step;
    }
    const double n = static_cast<double>(prepared.size());
    stats.mean_loss /= n;
    stats.reward_margin /= n;
    stats.reward_accuracy /= n;
    result.curve.push_back(stats);
    sched.end_epoch(stats.mean_loss);
  }
  return result;
}

PrefResult train_pref(TinyModel model, const TinyModel& reference, std::span<const corpus::PreferenceRecord> pairs,
                      prefloss::Method method, const TrainConfig& config) {
  std::vector<PrefExample> examples;
  examples.reserve(pairs.size());
  for (const auto& r : pairs) examples.push_back(to_example(r));
  return train_pref(std::move(model), reference, examples, method, config);
}

prefloss::ScoredSequence score_sequence(const TinyModel& policy, const TinyModel& reference,
                                        std::string_view prompt, std::string_view continuation) {
  check_compatible(policy, reference);
  const auto seq = make_sequence(policy, prompt, continuation);
  return as_scored(seq, score(policy, seq), score(reference, seq));
}

prefloss::PrefBatchItem score_pair(const TinyModel& policy, const TinyModel& reference, const PrefExample& ex) {
  return {score_sequence(policy, reference, ex.prompt, ex.chosen),
          score_sequence(policy, reference, ex.prompt, ex.rejected)};
}

prefloss::PrefStats evaluate_pref(const TinyModel& policy, const TinyModel& reference,
                                  std::span<const PrefExample> pairs, prefloss::Method method, double beta) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyPairs, "no preference pairs");
  std::vector<prefloss::PrefBatchItem> items;
  items.reserve(pairs.size());
  for (const auto& ex : pairs) items.push_back(score_pair(policy, reference, ex));
  return prefloss::batch_stats(items, method, beta);
}

double batch_loss(const TinyModel& model, const TinyModel& reference, const GradCheckBatch& batch, LossKind kind,
                  Parameters* grads) {
  if (kind == LossKind::Sft) {
    if (batch.sft.empty()) throw Error(ErrorKind::EmptyCorpus, "grad-check batch has no SFT examples");
    std::vector<Sequence> seqs;
    std::size_t tokens = 0;
    for (const auto& [p, t] : batch.sft) {
      seqs.push_back(make_sequence(model, p, t));
      tokens += seqs.back().scored();
    }
    const double w = 1.0 / static_cast<double>(tokens);
    double loss = 0.0;
    ForwardTrace trace;
    for (const auto& seq : seqs) {
      const auto lp = score(model, seq, grads ? &trace : nullptr);
      loss -= sum(lp) * w;
      if (grads) {
        const std::vector<double> d(lp.size(), -w);
        backward(model, trace, d, *grads);
      }
    }
    return loss;
  }
  if (batch.pref.empty()) throw Error(ErrorKind::EmptyPairs, "grad-check batch has no preference pairs");
  const auto method = kind == LossKind::Dpo ? prefloss::Method::Dpo : prefloss::Method::Ipo;
  const double scale = 1.0 / static_cast<double>(batch.pref.size());
  double loss = 0.0;
  for (const auto& ex : batch.pref) {
    const auto p = prepare(model, reference, ex);
    loss += pair_step(model, p, method, batch.beta, scale, grads).loss * scale;
  }
  return loss;
}

GradCheckResult grad_check(const TinyModel& model, const GradCheckBatch& batch, LossKind kind, double eps,
                           std::uint64_t seed, const TinyModel* reference, double abs_floor) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error(ErrorKind::InvalidArgument, "eps must lie in [1e-7, 1e-3]");
  const TinyModel& ref = reference ? *reference : model;
  check_compatible(model, ref);
  // The reference is held fixed while the policy copy is perturbed.
  const TinyModel frozen = ref;
  Parameters analytic = zeros_like(model.params());
  batch_loss(model, frozen, batch, kind, &analytic);

  TinyModel probe = model;
  SplitMix64 rng(seed);
  GradCheckResult result;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    auto& data = probe.params()[k].data;
    const std::size_t n = data.size();
    const std::size_t take = std::max<std::size_t>(1, (n + 99) / 100);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(idx), rng);
    for (std::size_t s = 0; s < take; ++s) {
      const std::size_t i = idx[s];
      const double saved = data[i];
      data[i] = saved + eps;
      const double up = batch_loss(probe, frozen, batch, kind);
      data[i] = saved - eps;
      const double down = batch_loss(probe, frozen, batch, kind);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k].data[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
      const double err = denom == 0.0 ? 0.0 : std::abs(a - numeric) / denom;
      ++result.checked;
      if (result.worst_param.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_param = std::string(param_name(k)) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace apt::tinylm
