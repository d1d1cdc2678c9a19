#include "ams/sampling/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ams/error.hpp"

namespace ams::sampling {

using nlohmann::json;

namespace {

json tensor_json(const nd::Tensor& t) { return json{{"shape", t.shape()}, {"data", t.storage()}}; }

nd::Tensor tensor_from(const json& j) {
  return nd::Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                    j.at("data").get<std::vector<double>>());
}

json config_json(const PolicyConfig& c) {
  return json{{"gamma", c.gamma},
              {"entropy_weight", c.entropy_weight},
              {"entropy_mode", to_string(c.entropy_mode)},
              {"selection", to_string(c.selection)},
              {"input_norm", to_string(c.input_norm)},
              {"surrogate", to_string(c.surrogate)},
              {"baseline", to_string(c.baseline)},
              {"attention_size", c.attention_size},
              {"input_size", c.input_size},
              {"hidden_size", c.hidden_size}};
}

}  // namespace

std::string policy_to_json(const AmsSampler& sampler) {
  const PolicyNetwork& net = sampler.network();
  json j;
  j["format"] = "ams-policy";
  j["version"] = 1;
  j["K"] = net.K();
  j["config"] = config_json(sampler.config());
  j["parameters"] = json::array();
  for (const nd::Parameter* p : net.parameters()) {
    j["parameters"].push_back({{"id", p->id}, {"value", tensor_json(p->value)}});
  }
  const PolicyState& s = sampler.state();
  j["state"] = {{"h", tensor_json(s.h)}, {"c", tensor_json(s.c)}, {"p_prev", s.p_prev},
                {"step", s.step}};
  const nd::AdamState& a = sampler.optimizer_state();
  json m = json::array();
  json v = json::array();
  for (const nd::Tensor& t : a.m) m.push_back(tensor_json(t));
  for (const nd::Tensor& t : a.v) v.push_back(tensor_json(t));
  j["adam"] = {{"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}, {"step", a.step},
               {"m", m}, {"v", v}};
  return j.dump();
}

void policy_from_json(AmsSampler& sampler, const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "ams-policy") throw ConfigError("not a policy checkpoint");
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported policy checkpoint version");
    const std::size_t K = j.at("K").get<std::size_t>();
    if (K != sampler.network().K()) throw ConfigError("policy checkpoint K does not match");

    PolicyNetwork net(K, sampler.config());
    const nd::ParameterList params = net.parameters();
    const json& pj = j.at("parameters");
    if (pj.size() != params.size()) throw ConfigError("policy checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (pj[i].at("id").get<std::string>() != params[i]->id) {
        throw ConfigError("policy checkpoint parameter order mismatch at " + params[i]->id);
      }
      nd::Tensor value = tensor_from(pj[i].at("value"));
      if (!value.same_shape(params[i]->value)) throw ConfigError("shape mismatch for " + params[i]->id);
      params[i]->value = std::move(value);
    }

    PolicyState state;
    state.h = tensor_from(j.at("state").at("h"));
    state.c = tensor_from(j.at("state").at("c"));
    state.p_prev = j.at("state").at("p_prev").get<std::vector<double>>();
    state.step = j.at("state").at("step").get<std::int64_t>();

    nd::AdamState adam;
    const json& aj = j.at("adam");
    adam.beta1 = aj.at("beta1").get<double>();
    adam.beta2 = aj.at("beta2").get<double>();
    adam.eps = aj.at("eps").get<double>();
    adam.step = aj.at("step").get<std::int64_t>();
    for (const json& t : aj.at("m")) adam.m.push_back(tensor_from(t));
    for (const json& t : aj.at("v")) adam.v.push_back(tensor_from(t));
    sampler.restore(std::move(net), std::move(state), std::move(adam));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed policy checkpoint: ") + e.what());
  }
}

void save_policy(const AmsSampler& sampler, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy checkpoint " + path.string());
  out << policy_to_json(sampler) << '\n';
}

void load_policy(AmsSampler& sampler, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read policy checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  policy_from_json(sampler, ss.str());
}

}  // namespace ams::sampling
