#include "apt/tinylm/model.hpp"

#include <algorithm>
#include <cmath>

#include "apt/error.hpp"
#include "apt/rng.hpp"

namespace apt::tinylm {
namespace {

constexpr std::array<std::string_view, kNumParams> kNames{
    "embed", "W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_n", "U_n", "b_n", "b_hn", "W_out", "b_out"};

Parameters shaped(std::size_t V, std::size_t D, std::size_t H) {
  const std::array<std::vector<std::size_t>, kNumParams> shapes{{
      {V, D}, {H, D}, {H, H}, {H}, {H, D}, {H, H}, {H}, {H, D}, {H, H}, {H}, {H}, {V, H}, {V}}};
  Parameters p;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    p[i].shape = shapes[i];
    std::size_t n = 1;
    for (auto d : shapes[i]) n *= d;
    p[i].data.assign(n, 0.0);
  }
  return p;
}

std::size_t count_for(std::size_t V, std::size_t D, std::size_t H) {
  return V * D + 3 * (H * D + H * H + H) + H + V * H + V;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// y += M x for M of shape [rows, cols].
void matvec_add(const Tensor& m, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = m.cols();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.data.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y += M^T g.
void matvec_t_add(const Tensor& m, std::span<const double> g, std::span<double> y) {
  const std::size_t cols = m.cols();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    const double* row = m.data.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * gi;
  }
}

// dM += g x^T.
void outer_add(Tensor& dm, std::span<const double> g, std::span<const double> x) {
  const std::size_t cols = dm.cols();
  for (std::size_t i = 0; i < dm.rows(); ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    double* row = dm.data.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

void add_to(std::span<double> y, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

std::span<const double> embedding(const TinyModel& m, int token) {
  const auto& e = m[Param::Embed];
  const std::size_t D = e.cols();
  return {e.data.data() + static_cast<std::size_t>(token) * D, D};
}

struct StepCache {
  std::vector<double> z, r, n, q, h;
};

StepCache gru_step(const TinyModel& m, int token, std::span<const double> h_prev) {
  const std::size_t H = m.config().hidden_dim;
  const auto x = embedding(m, token);
  StepCache c;
  c.z = m[Param::Bz].data;
  matvec_add(m[Param::Wz], x, c.z);
  matvec_add(m[Param::Uz], h_prev, c.z);
  c.r = m[Param::Br].data;
  matvec_add(m[Param::Wr], x, c.r);
  matvec_add(m[Param::Ur], h_prev, c.r);
  c.q = m[Param::Bhn].data;
  matvec_add(m[Param::Un], h_prev, c.q);
  c.n = m[Param::Bn].data;
  matvec_add(m[Param::Wn], x, c.n);
  c.h.resize(H);
  for (std::size_t i = 0; i < H; ++i) {
    c.z[i] = sigmoid(c.z[i]);
    c.r[i] = sigmoid(c.r[i]);
    c.n[i] = std::tanh(c.n[i] + c.r[i] * c.q[i]);
    c.h[i] = (1.0 - c.z[i]) * c.n[i] + c.z[i] * h_prev[i];
  }
  return c;
}

std::vector<double> softmax_out(const TinyModel& m, std::span<const double> h) {
  std::vector<double> logits = m[Param::Bout].data;
  matvec_add(m[Param::Wout], h, logits);
  const double mx = *std::ranges::max_element(logits);
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
  return logits;
}

void check_tokens(const TinyModel& m, std::span<const int> tokens) {
  for (int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= m.vocab().size()) {
      throw Error(ErrorKind::InvalidArgument, "token id out of range: " + std::to_string(t));
    }
  }
}

}  // namespace

std::string_view param_name(std::size_t index) { return kNames.at(index); }

Parameters zeros_like(const Parameters& p) {
  Parameters out = p;
  for (auto& t : out) std::ranges::fill(t.data, 0.0);
  return out;
}

double global_norm(const Parameters& p) {
  double s = 0.0;
  for (const auto& t : p)
    for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

std::size_t parameter_count(const Parameters& p) {
  std::size_t n = 0;
  for (const auto& t : p) n += t.data.size();
  return n;
}

TinyModel::TinyModel(Vocab vocab, ModelConfig config, Parameters params)
    : vocab_(std::move(vocab)), config_(config), params_(std::move(params)) {
  const auto expected = shaped(vocab_.size(), config_.embed_dim, config_.hidden_dim);
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (params_[i].shape != expected[i].shape || params_[i].data.size() != expected[i].data.size()) {
      throw Error(ErrorKind::Schema, "parameter " + std::string(kNames[i]) + " has the wrong shape");
    }
  }
}

bool TinyModel::all_finite() const {
  for (const auto& t : params_)
    for (double v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

TinyModel init_model(Vocab vocab, ModelConfig config, std::uint64_t seed) {
  if (vocab.size() < Vocab::kNumSpecial) {
    throw Error(ErrorKind::VocabTooSmall, "vocabulary needs at least 4 tokens");
  }
  if (config.embed_dim == 0 || config.hidden_dim == 0 || config.context_len < 2) {
    throw Error(ErrorKind::InvalidArgument, "model dimensions must be positive and context_len >= 2");
  }
  const std::size_t V = vocab.size(), D = config.embed_dim, H = config.hidden_dim;
  if (count_for(V, D, H) > kMaxParameters) {
    throw Error(ErrorKind::ModelTooLarge, "model would have " + std::to_string(count_for(V, D, H)) +
                                              " parameters (limit 1000000)");
  }
  config.seed = seed;
  Parameters p = shaped(V, D, H);
  SplitMix64 rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(H));
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const double scale = i == static_cast<std::size_t>(Param::Embed) ? 0.5 : k;
    for (auto& v : p[i].data) v = (2.0 * rng.uniform() - 1.0) * scale;
  }
  return TinyModel(std::move(vocab), config, std::move(p));
}

Sequence make_sequence(const TinyModel& model, std::string_view prompt, std::string_view continuation) {
  auto prompt_ids = model.vocab().encode(prompt);
  const auto cont_ids = model.vocab().encode(continuation);
  const std::size_t limit = model.config().context_len;
  if (cont_ids.size() + 2 > limit) {
    throw Error(ErrorKind::InvalidArgument, "continuation longer than the context window");
  }
  const std::size_t room = limit - cont_ids.size() - 2;
  if (prompt_ids.size() > room) prompt_ids.erase(prompt_ids.begin(), prompt_ids.end() - static_cast<long>(room));
  Sequence s;
  s.tokens.reserve(prompt_ids.size() + cont_ids.size() + 2);
  s.tokens.push_back(Vocab::kBos);
  s.tokens.insert(s.tokens.end(), prompt_ids.begin(), prompt_ids.end());
  s.target_from = s.tokens.size();
  s.tokens.insert(s.tokens.end(), cont_ids.begin(), cont_ids.end());
  s.tokens.push_back(Vocab::kEos);
  return s;
}

std::vector<double> score(const TinyModel& model, const Sequence& seq, ForwardTrace* trace) {
  if (seq.tokens.size() < 2 || seq.target_from < 1 || seq.target_from >= seq.tokens.size()) {
    throw Error(ErrorKind::InvalidArgument, "sequence must score at least one token after a prefix");
  }
  check_tokens(model, seq.tokens);
  const std::size_t H = model.config().hidden_dim;
  const std::size_t steps = seq.tokens.size() - 1;
  std::vector<double> h(H, 0.0);
  std::vector<double> logps;
  logps.reserve(seq.scored());
  if (trace) {
    trace->tokens = seq.tokens;
    trace->target_from = seq.target_from;
    trace->h.assign(1, h);
    trace->z.clear();
    trace->r.clear();
    trace->n.clear();
    trace->q.clear();
    trace->probs.clear();
  }
  for (std::size_t t = 0; t < steps; ++t) {
    auto c = gru_step(model, seq.tokens[t], h);
    h = c.h;
    std::vector<double> p;
    if (t + 1 >= seq.target_from) {
      p = softmax_out(model, h);
      logps.push_back(std::log(p[static_cast<std::size_t>(seq.tokens[t + 1])]));
    }
    if (trace) {
      trace->h.push_back(std::move(c.h));
      trace->z.push_back(std::move(c.z));
      trace->r.push_back(std::move(c.r));
      trace->n.push_back(std::move(c.n));
      trace->q.push_back(std::move(c.q));
      trace->probs.push_back(std::move(p));
    }
  }
  return logps;
}

void backward(const TinyModel& model, const ForwardTrace& trace, std::span<const double> dlogp, Parameters& grads) {
  const std::size_t steps = trace.tokens.size() - 1;
  if (dlogp.size() != trace.tokens.size() - trace.target_from || trace.z.size() != steps) {
    throw Error(ErrorKind::LengthMismatch, "dlogp does not match the traced sequence");
  }
  const std::size_t H = model.config().hidden_dim;
  const std::size_t D = model.config().embed_dim;
  const std::size_t V = model.vocab().size();
  auto G = [&](Param p) -> Tensor& { return grads[static_cast<std::size_t>(p)]; };

  std::vector<double> dh(H, 0.0), dh_prev(H), dan(H), daz(H), dar(H), dq(H), dx(D), dlogits(V);
  for (std::size_t t = steps; t-- > 0;) {
    const auto& h_new = trace.h[t + 1];
    const auto& h_prev = trace.h[t];
    const auto& z = trace.z[t];
    const auto& r = trace.r[t];
    const auto& n = trace.n[t];
    const auto& q = trace.q[t];
    if (t + 1 >= trace.target_from) {
      const double g = dlogp[t + 1 - trace.target_from];
      if (g != 0.0) {
        const auto& p = trace.probs[t];
        for (std::size_t v = 0; v < V; ++v) dlogits[v] = -g * p[v];
        dlogits[static_cast<std::size_t>(trace.tokens[t + 1])] += g;
        outer_add(G(Param::Wout), dlogits, h_new);
        add_to(G(Param::Bout).data, dlogits);
        matvec_t_add(model[Param::Wout], dlogits, dh);
      }
    }
    for (std::size_t i = 0; i < H; ++i) {
      const double dn = dh[i] * (1.0 - z[i]);
      const double dz = dh[i] * (h_prev[i] - n[i]);
      dh_prev[i] = dh[i] * z[i];
      dan[i] = dn * (1.0 - n[i] * n[i]);
      dq[i] = dan[i] * r[i];
      dar[i] = dan[i] * q[i] * r[i] * (1.0 - r[i]);
      daz[i] = dz * z[i] * (1.0 - z[i]);
    }
    const auto x = embedding(model, trace.tokens[t]);
    std::ranges::fill(dx, 0.0);

    add_to(G(Param::Bn).data, dan);
    outer_add(G(Param::Wn), dan, x);
    matvec_t_add(model[Param::Wn], dan, dx);
    add_to(G(Param::Bhn).data, dq);
    outer_add(G(Param::Un), dq, h_prev);
    matvec_t_add(model[Param::Un], dq, dh_prev);

    add_to(G(Param::Br).data, dar);
    outer_add(G(Param::Wr), dar, x);
    matvec_t_add(model[Param::Wr], dar, dx);
    outer_add(G(Param::Ur), dar, h_prev);
    matvec_t_add(model[Param::Ur], dar, dh_prev);

    add_to(G(Param::Bz).data, daz);
    outer_add(G(Param::Wz), daz, x);
    matvec_t_add(model[Param::Wz], daz, dx);
    outer_add(G(Param::Uz), daz, h_prev);
    matvec_t_add(model[Param::Uz], daz, dh_prev);

    auto& de = G(Param::Embed);
    double* row = de.data.data() + static_cast<std::size_t>(trace.tokens[t]) * D;
    for (std::size_t j = 0; j < D; ++j) row[j] += dx[j];
    dh.swap(dh_prev);
  }
}

std::vector<std::vector<double>> next_token_distributions(const TinyModel& model, std::span<const int> tokens) {
  check_tokens(model, tokens);
  std::vector<double> h(model.config().hidden_dim, 0.0);
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (int tok : tokens) {
    h = gru_step(model, tok, h).h;
    out.push_back(softmax_out(model, h));
  }
  return out;
}

std::vector<int> generate_tokens(const TinyModel& model, std::string_view prompt, std::size_t max_len,
                                 std::uint64_t seed, bool greedy) {
  if (max_len == 0) throw Error(ErrorKind::InvalidArgument, "max_len must be >= 1");
  std::vector<int> context{Vocab::kBos};
  auto prompt_ids = model.vocab().encode(prompt);
  context.insert(context.end(), prompt_ids.begin(), prompt_ids.end());

  SplitMix64 rng(seed);
  std::vector<double> h(model.config().hidden_dim, 0.0);
  for (int tok : context) h = gru_step(model, tok, h).h;

  std::vector<int> out;
  while (out.size() < max_len) {
    auto p = softmax_out(model, h);
    p[Vocab::kPad] = 0.0;
    p[Vocab::kBos] = 0.0;
    int next = 0;
    if (greedy) {
      next = static_cast<int>(std::ranges::max_element(p) - p.begin());
    } else {
      double total = 0.0;
      for (double v : p) total += v;
      double u = rng.uniform() * total;
      next = static_cast<int>(p.size()) - 1;
      for (std::size_t v = 0; v < p.size(); ++v) {
        if (p[v] == 0.0) continue;
        u -= p[v];
        if (u < 0.0) {
          next = static_cast<int>(v);
          break;
        }
      }
      while (p[static_cast<std::size_t>(next)] == 0.0) --next;
    }
    out.push_back(next);
    if (next == Vocab::kEos) break;
    h = gru_step(model, next, h).h;
  }
  return out;
}

std::string generate(const TinyModel& model, std::string_view prompt, std::size_t max_len, std::uint64_t seed,
                     bool greedy) {
  const auto ids = generate_tokens(model, prompt, max_len, seed, greedy);
  return model.vocab().decode(ids);
}

}  // namespace apt::tinylm
