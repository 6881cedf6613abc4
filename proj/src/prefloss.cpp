#include "apt/prefloss.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>

namespace apt::prefloss {
namespace {

void check_beta(double beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::NonPositiveBeta, "beta must be > 0, got " + std::to_string(beta));
}

}  // namespace

void ScoredSequence::validate() const {
  if (token_ids.empty()) throw Error(ErrorKind::InvalidArgument, "scored sequence is empty");
  if (policy_logprobs.size() != token_ids.size() || reference_logprobs.size() != token_ids.size()) {
    throw Error(ErrorKind::InvalidArgument, "token_ids and logprob lists differ in length");
  }
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (!(policy_logprobs[i] <= 0.0) || !(reference_logprobs[i] <= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "logprobs must be finite and <= 0");
    }
  }
}

Method parse_method(std::string_view name) {
  if (name == "dpo") return Method::Dpo;
  if (name == "ipo") return Method::Ipo;
  throw Error(ErrorKind::InvalidArgument, "unknown preference method: " + std::string(name));
}

std::string_view to_string(Method m) { return m == Method::Dpo ? "dpo" : "ipo"; }

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double log_sigmoid(double x) noexcept { return -softplus(-x); }
double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sequence_logprob(const ScoredSequence& s, Which which) {
  const auto& values = which == Which::Policy ? s.policy_logprobs : s.reference_logprobs;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

double log_ratio_gap(const PrefBatchItem& item) {
  const double chosen = sequence_logprob(item.chosen, Which::Policy) - sequence_logprob(item.chosen, Which::Reference);
  const double rejected =
      sequence_logprob(item.rejected, Which::Policy) - sequence_logprob(item.rejected, Which::Reference);
  return chosen - rejected;
}

double dpo_loss_from_gap(double h, double beta) {
  check_beta(beta);
  return softplus(-beta * h);
}

double dpo_grad_from_gap(double h, double beta) {
  check_beta(beta);
  return -beta * sigmoid(-beta * h);
}

double ipo_loss_from_gap(double h, double beta) {
  check_beta(beta);
  const double d = h - 1.0 / (2.0 * beta);
  return d * d;
}

double ipo_grad_from_gap(double h, double beta) {
  check_beta(beta);
  return 2.0 * (h - 1.0 / (2.0 * beta));
}

double loss_from_gap(Method m, double h, double beta) {
  return m == Method::Dpo ? dpo_loss_from_gap(h, beta) : ipo_loss_from_gap(h, beta);
}

double grad_from_gap(Method m, double h, double beta) {
  return m == Method::Dpo ? dpo_grad_from_gap(h, beta) : ipo_grad_from_gap(h, beta);
}

DpoResult dpo_loss(const PrefBatchItem& item, double beta) {
  const double h = log_ratio_gap(item);
  return {dpo_loss_from_gap(h, beta), beta * h, h > 0.0};
}

double ipo_loss(const PrefBatchItem& item, double beta) { return ipo_loss_from_gap(log_ratio_gap(item), beta); }

double reward_bt_loss(double r_chosen, double r_rejected) noexcept { return softplus(-(r_chosen - r_rejected)); }

PrefStats batch_stats(std::span<const PrefBatchItem> items, Method method, double beta) {
  check_beta(beta);
  if (items.empty()) throw Error(ErrorKind::EmptyInput, "batch_stats: no items");
  double loss = 0.0;
  double margin = 0.0;
  std::size_t correct = 0;
  for (const auto& item : items) {
    const double h = log_ratio_gap(item);
    loss += loss_from_gap(method, h, beta);
    margin += beta * h;
    correct += h > 0.0;
  }
  const auto n = static_cast<double>(items.size());
  return {loss / n, margin / n, static_cast<double>(correct) / n};
}

TokenGrads loss_grad_tokens(const PrefBatchItem& item, Method method, double beta) {
  const double g = grad_from_gap(method, log_ratio_gap(item), beta);
  return {std::vector<double>(item.chosen.policy_logprobs.size(), g),
          std::vector<double>(item.rejected.policy_logprobs.size(), -g)};
}

ScoredLoad load_scored(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  struct Partial {
    std::optional<ScoredSequence> chosen, rejected;
    std::size_t first_line = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Partial> partials;
  ScoredLoad out;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      const std::string role = j.at("role").get<std::string>();
      if (role != "chosen" && role != "rejected") throw Error(ErrorKind::Schema, "role must be chosen or rejected");
      ScoredSequence s;
      s.token_ids = j.at("token_ids").get<std::vector<std::int64_t>>();
      s.policy_logprobs = j.at("policy_logprobs").get<std::vector<double>>();
      s.reference_logprobs = j.at("reference_logprobs").get<std::vector<double>>();
      s.validate();
      auto [it, inserted] = partials.try_emplace(id);
      if (inserted) {
        order.push_back(id);
        it->second.first_line = line_no;
      }
      auto& slot = role == "chosen" ? it->second.chosen : it->second.rejected;
      if (slot) throw Error(ErrorKind::Schema, "duplicate " + role + " for id " + id);
      slot = std::move(s);
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({line_no, ErrorKind::Schema, e.what()});
    } catch (const Error& e) {
      out.errors.push_back({line_no, ErrorKind::Schema, e.message()});
    }
  }
  for (const auto& id : order) {
    auto& p = partials.at(id);
    if (!p.chosen || !p.rejected) {
      out.errors.push_back({p.first_line, ErrorKind::Schema, "id " + id + " lacks a chosen or rejected line"});
      continue;
    }
    out.ids.push_back(id);
    out.items.push_back({std::move(*p.chosen), std::move(*p.rejected)});
  }
  return out;
}

nlohmann::json to_json(const std::string& id, std::string_view role, const ScoredSequence& s) {
  return nlohmann::json{{"id", id},
                        {"role", std::string(role)},
                        {"token_ids", s.token_ids},
                        {"policy_logprobs", s.policy_logprobs},
                        {"reference_logprobs", s.reference_logprobs}};
}

}  // namespace apt::prefloss
