#pragma once

// Preference-optimization losses over a model-agnostic scoring contract.
//
// For a pair (chosen y_w, rejected y_l) scored by a policy and a frozen
// reference model, the log-ratio gap is
//   h = [log pi(y_w) - log ref(y_w)] - [log pi(y_l) - log ref(y_l)].
// DPO minimizes -log sigmoid(beta * h); IPO regresses h onto 1 / (2 beta).
// All logs are natural.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "apt/corpus.hpp"

namespace apt::prefloss {

struct ScoredSequence {
  std::vector<std::int64_t> token_ids;
  std::vector<double> policy_logprobs;     // per token, <= 0
  std::vector<double> reference_logprobs;  // per token, <= 0

  // Throws Error(InvalidArgument) on unequal/empty lists or positive logprobs.
  void validate() const;
};

struct PrefBatchItem {
  ScoredSequence chosen;
  ScoredSequence rejected;
};

enum class Which { Policy, Reference };
enum class Method { Dpo, Ipo };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

struct PrefStats {
  double mean_loss = 0.0;
  double reward_margin = 0.0;    // mean beta * h
  double reward_accuracy = 0.0;  // fraction of items with h > 0
};

struct DpoResult {
  double loss = 0.0;
  double margin = 0.0;  // beta * h
  bool correct = false;  // h > 0
};

// log(1 + e^x) without overflow.
double softplus(double x) noexcept;
double log_sigmoid(double x) noexcept;
double sigmoid(double x) noexcept;

double sequence_logprob(const ScoredSequence& s, Which which);
double log_ratio_gap(const PrefBatchItem& item);

// Loss and derivative as functions of the gap h. beta must be > 0
// (NonPositiveBeta otherwise).
double dpo_loss_from_gap(double h, double beta);
double dpo_grad_from_gap(double h, double beta);
double ipo_loss_from_gap(double h, double beta);
double ipo_grad_from_gap(double h, double beta);

double loss_from_gap(Method m, double h, double beta);
double grad_from_gap(Method m, double h, double beta);

DpoResult dpo_loss(const PrefBatchItem& item, double beta);
double ipo_loss(const PrefBatchItem& item, double beta);

// Pairwise Bradley-Terry loss for a scalar reward model.
double reward_bt_loss(double r_chosen, double r_rejected) noexcept;

// Mean over items, reduced left to right. Throws EmptyInput.
PrefStats batch_stats(std::span<const PrefBatchItem> items, Method method, double beta);

// Gradient of the per-item loss with respect to each per-token policy
// logprob. Every token of a sequence shares the same derivative.
struct TokenGrads {
  std::vector<double> chosen;
  std::vector<double> rejected;
};
TokenGrads loss_grad_tokens(const PrefBatchItem& item, Method method, double beta);

// scored.jsonl: {"id","role":"chosen"|"rejected","token_ids","policy_logprobs","reference_logprobs"}.
// Chosen and rejected lines sharing an id form one item, in order of first
// appearance. Malformed lines and unmatched ids land in `errors`.
struct ScoredLoad {
  std::vector<std::string> ids;
  std::vector<PrefBatchItem> items;
  std::vector<corpus::LoadError> errors;
};
ScoredLoad load_scored(const std::filesystem::path& path);

nlohmann::json to_json(const std::string& id, std::string_view role, const ScoredSequence& s);

}  // namespace apt::prefloss
