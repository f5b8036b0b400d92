#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"

#include <json.hpp>

#include <set>

namespace alignlab {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

SweepConfig sweep_config_from_json(std::string_view json_text, SweepConfig base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::config, "sweep config must be a JSON object");

  static const std::set<std::string> known = {
      "preset", "name", "d", "k", "alphas", "gammas", "snrs", "ensembles", "n_test", "n_cce",
      "master_seed", "solver", "activation_pair", "sigma_w2", "init_scale", "lr_factor",
      "max_steps", "rel_tol", "patience", "workers", "identical_datasets"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) fail(ErrorKind::config, "unknown config key '" + key + "'");
  if (j.contains("alphas") && j.contains("gammas"))
    fail(ErrorKind::config, "give either 'alphas' or 'gammas', not both");

  SweepConfig c = j.contains("preset") ? sweep_preset(get_as<std::string>(j, "preset")) : std::move(base);
  if (j.contains("name")) c.name = get_as<std::string>(j, "name");
  if (j.contains("activation_pair"))
    c.pair = parse_activation_pair(get_as<std::string>(j, "activation_pair"));
  if (j.contains("solver")) c.solver = parse_solver(get_as<std::string>(j, "solver"));
  if (j.contains("d")) c.d = get_as<Index>(j, "d");
  if (j.contains("k")) c.k = get_as<Index>(j, "k");
  if (j.contains("alphas")) c.axis = get_as<std::vector<double>>(j, "alphas");
  if (j.contains("gammas")) c.axis = get_as<std::vector<double>>(j, "gammas");
  if (j.contains("snrs")) c.snrs = get_as<std::vector<double>>(j, "snrs");
  if (j.contains("ensembles")) c.ensembles = get_as<int>(j, "ensembles");
  if (j.contains("n_test")) c.n_test = get_as<Index>(j, "n_test");
  if (j.contains("n_cce")) c.n_cce = get_as<Index>(j, "n_cce");
  if (j.contains("master_seed")) c.master_seed = get_as<std::uint64_t>(j, "master_seed");
  if (j.contains("sigma_w2")) c.sigma_w2 = get_as<double>(j, "sigma_w2");
  if (j.contains("init_scale")) c.gd.init_scale = get_as<double>(j, "init_scale");
  if (j.contains("lr_factor")) c.gd.lr_factor = get_as<double>(j, "lr_factor");
  if (j.contains("max_steps")) c.gd.max_steps = get_as<long>(j, "max_steps");
  if (j.contains("rel_tol")) c.gd.rel_tol = get_as<double>(j, "rel_tol");
  if (j.contains("patience")) c.gd.patience = get_as<long>(j, "patience");
  if (j.contains("workers")) c.workers = get_as<unsigned>(j, "workers");
  if (j.contains("identical_datasets")) c.identical_datasets = get_as<bool>(j, "identical_datasets");
  return c;
}

std::string sweep_config_to_json(const SweepConfig& c) {
  json j;
  j["name"] = c.name;
  j["activation_pair"] = std::string(to_string(c.pair));
  j["solver"] = std::string(to_string(c.solver));
  j["d"] = c.d;
  j["k"] = c.k;
  j[uses_gamma_axis(c.pair) ? "gammas" : "alphas"] = c.axis;
  j["snrs"] = c.snrs;
  j["ensembles"] = c.ensembles;
  j["n_test"] = c.n_test;
  j["n_cce"] = c.n_cce;
  j["master_seed"] = c.master_seed;
  j["sigma_w2"] = c.sigma_w2;
  j["init_scale"] = c.gd.init_scale;
  j["lr_factor"] = c.gd.lr_factor;
  j["max_steps"] = c.gd.max_steps;
  j["rel_tol"] = c.gd.rel_tol;
  j["patience"] = c.gd.patience;
  j["identical_datasets"] = c.identical_datasets;
  // workers is deliberately omitted: it never changes the output.
  return j.dump();
}

SweepConfig sweep_preset(std::string_view name) {
  SweepConfig c;
  c.name = std::string(name);
  if (name == "fig1") {
    c.pair = ActivationPair::linear_linear;
    c.solver = Solver::oracle;
    c.d = 200;
    c.k = 100;
    c.axis = {0.25, 0.5, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 4.0};
    c.snrs = {0.1, 1.0, 5.0};
    c.ensembles = 20;
  } else if (name == "fig2") {
    c.pair = ActivationPair::relu_relu;
    c.solver = Solver::gd;
    c.d = 200;
    c.k = 20;
    c.axis = {0.25, 0.5, 1.0, 2.0};
    c.snrs = {1.0, 5.0};
    c.ensembles = 4;
    c.gd.max_steps = 20000;
    c.gd.lr_factor = 1.0;
  } else if (name == "fig3") {
    c.pair = ActivationPair::linear_relu;
    c.solver = Solver::oracle;
    c.d = 200;
    c.k = 20;
    c.axis = {0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0};
    c.snrs = {5.0};
    c.ensembles = 10;
    c.gd.max_steps = 20000;
    c.gd.lr_factor = 1.0;
  } else {
    fail(ErrorKind::config, "unknown preset '" + std::string(name) + "' (expected fig1, fig2 or fig3)");
  }
  return c;
}

}  // namespace alignlab
