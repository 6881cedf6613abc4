#include "apt/tinylm/checkpoint.hpp"

#include <fstream>

#include "apt/error.hpp"

namespace apt::tinylm {
namespace {

constexpr std::string_view kFormat = "apt-tinylm";
constexpr int kVersion = 1;

}  // namespace

nlohmann::json to_json(const TinyModel& model) {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto& t = model.params()[k];
    params[std::string(param_name(k))] = {{"shape", t.shape}, {"data", t.data}};
  }
  const auto& c = model.config();
  return {{"format", kFormat},
          {"version", kVersion},
          {"config",
           {{"embed_dim", c.embed_dim}, {"hidden_dim", c.hidden_dim}, {"context_len", c.context_len}, {"seed", c.seed}}},
          {"vocab", model.vocab().tokens()},
          {"parameters", std::move(params)}};
}

TinyModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw Error(ErrorKind::Schema, "not an apt-tinylm checkpoint");
    if (j.at("version").get<int>() != kVersion) {
      throw Error(ErrorKind::Schema, "unsupported checkpoint version " + j.at("version").dump());
    }
    const auto& jc = j.at("config");
    ModelConfig c;
    c.embed_dim = jc.at("embed_dim").get<std::size_t>();
    c.hidden_dim = jc.at("hidden_dim").get<std::size_t>();
    c.context_len = jc.at("context_len").get<std::size_t>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    Vocab vocab(j.at("vocab").get<std::vector<std::string>>());
    Parameters p;
    const auto& jp = j.at("parameters");
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const auto& e = jp.at(std::string(param_name(k)));
      p[k].shape = e.at("shape").get<std::vector<std::size_t>>();
      p[k].data = e.at("data").get<std::vector<double>>();
    }
    TinyModel model(std::move(vocab), c, std::move(p));
    if (!model.all_finite()) throw Error(ErrorKind::Schema, "checkpoint contains non-finite parameters");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::Schema, e.what());
    throw;
  }
}

void save_checkpoint(const TinyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(model).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

TinyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, "checkpoint is not valid JSON: " + std::string(e.what()));
  }
  return model_from_json(j);
}

}  // namespace apt::tinylm
