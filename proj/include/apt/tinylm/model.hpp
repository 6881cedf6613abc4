#pragma once

// A single-layer GRU language model small enough that every gradient can be
// checked against finite differences:
//
//   x_t = E[token_t]
//   z   = sigmoid(W_z x + U_z h + b_z)
//   r   = sigmoid(W_r x + U_r h + b_r)
//   n   = tanh(W_n x + b_n + r * (U_n h + b_hn))
//   h'  = (1 - z) * n + z * h
//   p(token_{t+1}) = softmax(W_out h' + b_out)

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apt/tinylm/vocab.hpp"

namespace apt::tinylm {

struct ModelConfig {
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;
  std::size_t context_len = 128;  // longest sequence scored, BOS and EOS included
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxParameters = 1'000'000;

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t rows() const { return shape.front(); }
  std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }
};

enum class Param : std::size_t { Embed, Wz, Uz, Bz, Wr, Ur, Br, Wn, Un, Bn, Bhn, Wout, Bout };
inline constexpr std::size_t kNumParams = 13;

std::string_view param_name(std::size_t index);

using Parameters = std::array<Tensor, kNumParams>;

// Same shapes, all zero.
Parameters zeros_like(const Parameters& p);
double global_norm(const Parameters& p);
std::size_t parameter_count(const Parameters& p);

class TinyModel {
 public:
  TinyModel(Vocab vocab, ModelConfig config, Parameters params);

  const Vocab& vocab() const noexcept { return vocab_; }
  const ModelConfig& config() const noexcept { return config_; }
  const Parameters& params() const noexcept { return params_; }
  Parameters& params() noexcept { return params_; }

  const Tensor& operator[](Param p) const { return params_[static_cast<std::size_t>(p)]; }
  Tensor& operator[](Param p) { return params_[static_cast<std::size_t>(p)]; }

  std::size_t parameter_count() const { return tinylm::parameter_count(params_); }
  bool all_finite() const;

 private:
  Vocab vocab_;
  ModelConfig config_;
  Parameters params_;
};

// Deterministic given seed: weights uniform in +-1/sqrt(hidden_dim),
// embeddings uniform in +-0.5. Throws VocabTooSmall (< 4 tokens) or
// ModelTooLarge (> 1M parameters).
TinyModel init_model(Vocab vocab, ModelConfig config, std::uint64_t seed);

// A token sequence whose positions >= target_from are scored.
struct Sequence {
  std::vector<int> tokens;  // tokens[0] is BOS
  std::size_t target_from = 1;

  std::size_t scored() const { return tokens.size() - target_from; }
};

// BOS + prompt + continuation + EOS. The prompt is truncated from the left
// when the whole sequence would exceed context_len; throws InvalidArgument
// when the continuation alone does not fit.
Sequence make_sequence(const TinyModel& model, std::string_view prompt, std::string_view continuation);

// Cached activations of one forward pass, consumed by backward().
struct ForwardTrace {
  std::vector<int> tokens;
  std::size_t target_from = 1;
  std::vector<std::vector<double>> h;      // h[t + 1] is the state after token t; h[0] = 0
  std::vector<std::vector<double>> z, r, n, q;  // q = U_n h + b_hn
  std::vector<std::vector<double>> probs;  // softmax at step t, empty when not scored
};

// Natural-log probability of every scored token. Fills trace when given.
std::vector<double> score(const TinyModel& model, const Sequence& seq, ForwardTrace* trace = nullptr);

// Accumulates d(sum_i dlogp[i] * logp[i]) / d(params) into grads.
void backward(const TinyModel& model, const ForwardTrace& trace, std::span<const double> dlogp, Parameters& grads);

// Next-token distribution after each prefix tokens[0..t].
std::vector<std::vector<double>> next_token_distributions(const TinyModel& model, std::span<const int> tokens);

// Token ids of a continuation. Greedy picks the most probable token (lowest id
// on ties); sampling draws from SplitMix64(seed). <pad>, <bos> are never
// produced. Stops after EOS (included) or max_len tokens. max_len must be >= 1.
std::vector<int> generate_tokens(const TinyModel& model, std::string_view prompt, std::size_t max_len,
                                 std::uint64_t seed, bool greedy);

// Decoded text of generate_tokens without the EOS marker.
std::string generate(const TinyModel& model, std::string_view prompt, std::size_t max_len, std::uint64_t seed,
                     bool greedy);

}  // namespace apt::tinylm
