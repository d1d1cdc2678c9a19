#include "ams/taskgen/suite_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ams/error.hpp"

namespace ams::taskgen {

using nlohmann::json;

namespace {

json spec_to_json(const DomainSpec& s) {
  return json{{"id", s.id},
              {"name", s.name},
              {"family", to_string(s.family)},
              {"amplitude", s.amplitude},
              {"omega", s.omega},
              {"phase", s.phase},
              {"noise_std", s.noise_std},
              {"class_count", s.class_count},
              {"overlap", s.overlap},
              {"pool_size", s.pool_size},
              {"rng_stream", s.rng_stream},
              {"x_min", s.x_min},
              {"x_max", s.x_max}};
}

DomainSpec spec_from_json(const json& j) {
  DomainSpec s;
  s.id = j.at("id").get<int>();
  s.name = j.at("name").get<std::string>();
  s.family = family_from_string(j.at("family").get<std::string>());
  s.amplitude = j.at("amplitude").get<double>();
  s.omega = j.at("omega").get<double>();
  s.phase = j.at("phase").get<double>();
  s.noise_std = j.at("noise_std").get<double>();
  s.class_count = j.at("class_count").get<int>();
  s.overlap = j.at("overlap").get<double>();
  s.pool_size = j.at("pool_size").get<std::size_t>();
  s.rng_stream = j.at("rng_stream").get<std::uint64_t>();
  s.x_min = j.at("x_min").get<double>();
  s.x_max = j.at("x_max").get<double>();
  return s;
}

}  // namespace

std::string suite_to_json(const DomainSuite& suite) {
  json j;
  j["format"] = "ams-suite";
  j["version"] = 1;
  j["preset"] = suite.preset;
  j["family"] = to_string(suite.family);
  j["w"] = suite.w;
  j["master_seed"] = suite.master_seed;
  j["sources"] = json::array();
  for (const DomainSpec& s : suite.sources) j["sources"].push_back(spec_to_json(s));
  j["targets"] = json::array();
  for (const DomainSpec& s : suite.targets) j["targets"].push_back(spec_to_json(s));
  return j.dump(2);
}

DomainSuite suite_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "ams-suite") throw ConfigError("not a suite file");
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported suite file version");
    DomainSuite suite;
    suite.preset = j.at("preset").get<std::string>();
    suite.family = family_from_string(j.at("family").get<std::string>());
    suite.w = j.at("w").get<std::size_t>();
    suite.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const json& s : j.at("sources")) suite.sources.push_back(spec_from_json(s));
    for (const json& s : j.at("targets")) suite.targets.push_back(spec_from_json(s));
    materialize_pools(suite);
    return suite;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed suite JSON: ") + e.what());
  }
}

void save_suite(const DomainSuite& suite, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write suite file " + path.string());
  out << suite_to_json(suite) << '\n';
}

DomainSuite load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read suite file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return suite_from_json(ss.str());
}

}  // namespace ams::taskgen
