#include "airfl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace airfl {

using nlohmann::json;

ChannelConfig ExperimentConfig::channel_config(
    int antennas, double server_power_dbw_override) const {
  ChannelConfig cfg;
  cfg.num_antennas = antennas;
  cfg.num_nodes = num_nodes;
  cfg.c0 = c0();
  cfg.gamma0 = 1.0;
  cfg.kappa = kappa;
  cfg.rician_chi = rician_chi;
  cfg.sigma_s_sq = sigma_s_sq();
  cfg.sigma_k_sq = sigma_k_sq();
  cfg.node_power = node_power();
  cfg.server_power = dbw_to_watt(server_power_dbw_override);
  cfg.reciprocal = reciprocal;
  return cfg;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "geometry.server", "geometry.region", "geometry.height",
    "channel.c0_db", "channel.kappa", "channel.rician_chi",
    "channel.reciprocal",
    "noise.sigma_s_dbw", "noise.sigma_k_dbw",
    "power.node_dbw", "power.server_dbw",
    "fl.num_nodes", "fl.num_antennas", "fl.rounds", "fl.eta", "fl.task",
    "fl.shard_size", "fl.noise_scale", "fl.shuffle_within_label",
    "fl.ridge.dim", "fl.ridge.shard_size", "fl.ridge.ridge_weight",
    "seeds",
    "solver.residual_tol", "solver.inner_grad_tol", "solver.max_outer",
    "solver.max_inner", "solver.penalty_init_fraction",
    "solver.penalty_growth", "solver.stall_threshold",
    "data.train_images", "data.train_labels", "data.test_images",
    "data.test_labels",
    "sweep.num_antennas", "sweep.server_power_dbw",
    "output.dir", "output.workers",
};

void flatten(const json& node, const std::string& prefix,
             std::vector<std::pair<std::string, json>>* out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      flatten(value, path, out);
    }
  } else {
    out->emplace_back(prefix, node);
  }
}

json parse_scalar_override(const std::string& text) {
  // Values in --set key=value are parsed as JSON when possible, else as a
  // bare string.
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

void apply_entry(ExperimentConfig* cfg, const std::string& key,
                 const json& value) {
  auto as_u64_list = [&]() {
    std::vector<std::uint64_t> list;
    for (const auto& item : value) list.push_back(item.get<std::uint64_t>());
    return list;
  };

  if (key == "geometry.server") {
    const auto vec = value.get<std::vector<double>>();
    if (vec.size() != 3) throw std::runtime_error("geometry.server needs 3 coordinates");
    cfg->server_position = Eigen::Vector3d(vec[0], vec[1], vec[2]);
  } else if (key == "geometry.region") {
    // [[x_min, x_max], [y_min, y_max]]
    const auto region = value.get<std::vector<std::vector<double>>>();
    if (region.size() != 2 || region[0].size() != 2 || region[1].size() != 2) {
      throw std::runtime_error("geometry.region needs [[x0,x1],[y0,y1]]");
    }
    cfg->region.x_min = region[0][0];
    cfg->region.x_max = region[0][1];
    cfg->region.y_min = region[1][0];
    cfg->region.y_max = region[1][1];
  } else if (key == "geometry.height") {
    cfg->region.height = value.get<double>();
  } else if (key == "channel.c0_db") {
    cfg->c0_db = value.get<double>();
  } else if (key == "channel.kappa") {
    cfg->kappa = value.get<double>();
  } else if (key == "channel.rician_chi") {
    cfg->rician_chi = value.get<double>();
  } else if (key == "channel.reciprocal") {
    cfg->reciprocal = value.get<bool>();
  } else if (key == "noise.sigma_s_dbw") {
    cfg->sigma_s_dbw = value.get<double>();
  } else if (key == "noise.sigma_k_dbw") {
    cfg->sigma_k_dbw = value.get<double>();
  } else if (key == "power.node_dbw") {
    cfg->node_power_dbw = value.get<double>();
  } else if (key == "power.server_dbw") {
    cfg->server_power_dbw = value.get<double>();
  } else if (key == "fl.num_nodes") {
    cfg->num_nodes = value.get<int>();
  } else if (key == "fl.num_antennas") {
    cfg->num_antennas = value.get<int>();
  } else if (key == "fl.rounds") {
    cfg->rounds = value.get<int>();
  } else if (key == "fl.eta") {
    cfg->eta = value.get<double>();
  } else if (key == "fl.task") {
    cfg->task = value.get<std::string>();
  } else if (key == "fl.shard_size") {
    cfg->shard_size = value.get<int>();
  } else if (key == "fl.noise_scale") {
    cfg->noise_scale = value.get<double>();
  } else if (key == "fl.shuffle_within_label") {
    cfg->shuffle_within_label = value.get<bool>();
  } else if (key == "fl.ridge.dim") {
    cfg->ridge.dim = value.get<int>();
  } else if (key == "fl.ridge.shard_size") {
    cfg->ridge.shard_size = value.get<int>();
  } else if (key == "fl.ridge.ridge_weight") {
    cfg->ridge.ridge_weight = value.get<double>();
  } else if (key == "seeds") {
    cfg->seeds = as_u64_list();
  } else if (key == "solver.residual_tol") {
    cfg->solver.residual_tol = value.get<double>();
  } else if (key == "solver.inner_grad_tol") {
    cfg->solver.inner_grad_tol = value.get<double>();
  } else if (key == "solver.max_outer") {
    cfg->solver.max_outer = value.get<int>();
  } else if (key == "solver.max_inner") {
    cfg->solver.max_inner = value.get<int>();
  } else if (key == "solver.penalty_init_fraction") {
    cfg->solver.penalty_init_fraction = value.get<double>();
  } else if (key == "solver.penalty_growth") {
    cfg->solver.penalty_growth = value.get<double>();
  } else if (key == "solver.stall_threshold") {
    cfg->solver.stall_threshold = value.get<double>();
  } else if (key == "data.train_images") {
    cfg->train_images = value.get<std::string>();
  } else if (key == "data.train_labels") {
    cfg->train_labels = value.get<std::string>();
  } else if (key == "data.test_images") {
    cfg->test_images = value.get<std::string>();
  } else if (key == "data.test_labels") {
    cfg->test_labels = value.get<std::string>();
  } else if (key == "sweep.num_antennas") {
    cfg->sweep_num_antennas = value.get<std::vector<int>>();
  } else if (key == "sweep.server_power_dbw") {
    cfg->sweep_server_power_dbw = value.get<std::vector<double>>();
  } else if (key == "output.dir") {
    cfg->output_dir = value.get<std::string>();
  } else if (key == "output.workers") {
    cfg->workers = value.get<int>();
  } else {
    throw std::runtime_error("unknown config key: " + key);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(std::string("config parse error: ") + err.what());
  }

  ExperimentConfig cfg;
  // Objects recurse to dotted keys; arrays stay whole.
  std::vector<std::pair<std::string, json>> entries;
  flatten(root, "", &entries);
  for (const auto& [key, value] : entries) {
    apply_entry(&cfg, key, value);
  }

  for (const std::string& override_text : overrides) {
    const auto eq = override_text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("override must look like key=value, got: " +
                               override_text);
    }
    const std::string key = override_text.substr(0, eq);
    if (kKnownKeys.find(key) == kKnownKeys.end()) {
      throw std::runtime_error("unknown config key: " + key);
    }
    apply_entry(&cfg, key, parse_scalar_override(override_text.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

ValidationReport validate_config(const ExperimentConfig& config) {
  ValidationReport report;
  auto fail = [&](const std::string& msg) { report.errors.push_back(msg); };

  if (config.num_nodes < 1) fail("fl.num_nodes must be >= 1");
  if (config.num_antennas < 1) fail("fl.num_antennas must be >= 1");
  if (config.num_nodes < config.num_antennas) {
    fail("fl.num_antennas (" + std::to_string(config.num_antennas) +
         ") exceeds fl.num_nodes (" + std::to_string(config.num_nodes) +
         "): the rank-one forwarding design requires K >= N");
  }
  for (int n : config.sweep_num_antennas) {
    if (n > config.num_nodes) {
      fail("sweep.num_antennas entry " + std::to_string(n) +
           " exceeds fl.num_nodes: the rank-one forwarding design requires "
           "K >= N");
    }
  }
  if (config.rounds < 1) fail("fl.rounds must be >= 1");
  if (!(config.eta > 0.0)) fail("fl.eta must be positive");
  if (config.seeds.empty()) fail("seeds must contain at least one entry");
  if (!(config.node_power() > 0.0)) fail("power.node_dbw resolves non-positive");
  if (!(config.server_power() > 0.0)) {
    fail("power.server_dbw resolves non-positive");
  }
  if (config.task != "mnist" && config.task != "ridge") {
    fail("fl.task must be \"mnist\" or \"ridge\", got \"" + config.task + "\"");
  }
  if (config.task == "mnist") {
    if (config.train_images.empty()) fail("data.train_images is required for the mnist task");
    if (config.train_labels.empty()) fail("data.train_labels is required for the mnist task");
    if (config.test_images.empty()) fail("data.test_images is required for the mnist task");
    if (config.test_labels.empty()) fail("data.test_labels is required for the mnist task");
    if (config.shard_size < 1) fail("fl.shard_size must be >= 1");
  }
  if (config.region.x_max <= config.region.x_min ||
      config.region.y_max <= config.region.y_min) {
    fail("geometry.region must have positive extent");
  }

  char line[192];
  auto echo = [&](const char* fmt, auto... args) {
    std::snprintf(line, sizeof(line), fmt, args...);
    report.resolved.emplace_back(line);
  };
  echo("channel.c0_db = %g dB -> reference gain %.10g", config.c0_db,
       config.c0());
  echo("noise.sigma_s_dbw = %g dBW -> %.10g W", config.sigma_s_dbw,
       config.sigma_s_sq());
  echo("noise.sigma_k_dbw = %g dBW -> %.10g W", config.sigma_k_dbw,
       config.sigma_k_sq());
  echo("power.node_dbw = %g dBW -> %.10g W", config.node_power_dbw,
       config.node_power());
  echo("power.server_dbw = %g dBW -> %.10g W", config.server_power_dbw,
       config.server_power());
  return report;
}

std::string config_to_json(const ExperimentConfig& config) {
  json root;
  root["geometry"]["server"] = {config.server_position.x(),
                                config.server_position.y(),
                                config.server_position.z()};
  root["geometry"]["region"] = {{config.region.x_min, config.region.x_max},
                                {config.region.y_min, config.region.y_max}};
  root["geometry"]["height"] = config.region.height;
  root["channel"]["c0_db"] = config.c0_db;
  root["channel"]["kappa"] = config.kappa;
  root["channel"]["rician_chi"] = config.rician_chi;
  root["channel"]["reciprocal"] = config.reciprocal;
  root["noise"]["sigma_s_dbw"] = config.sigma_s_dbw;
  root["noise"]["sigma_k_dbw"] = config.sigma_k_dbw;
  root["power"]["node_dbw"] = config.node_power_dbw;
  root["power"]["server_dbw"] = config.server_power_dbw;
  root["fl"]["num_nodes"] = config.num_nodes;
  root["fl"]["num_antennas"] = config.num_antennas;
  root["fl"]["rounds"] = config.rounds;
  root["fl"]["eta"] = config.eta;
  root["fl"]["task"] = config.task;
  root["fl"]["shard_size"] = config.shard_size;
  root["fl"]["noise_scale"] = config.noise_scale;
  root["fl"]["shuffle_within_label"] = config.shuffle_within_label;
  root["fl"]["ridge"]["dim"] = config.ridge.dim;
  root["fl"]["ridge"]["shard_size"] = config.ridge.shard_size;
  root["fl"]["ridge"]["ridge_weight"] = config.ridge.ridge_weight;
  root["seeds"] = config.seeds;
  root["solver"]["residual_tol"] = config.solver.residual_tol;
  root["solver"]["inner_grad_tol"] = config.solver.inner_grad_tol;
  root["solver"]["max_outer"] = config.solver.max_outer;
  root["solver"]["max_inner"] = config.solver.max_inner;
  root["solver"]["penalty_init_fraction"] = config.solver.penalty_init_fraction;
  root["solver"]["penalty_growth"] = config.solver.penalty_growth;
  root["solver"]["stall_threshold"] = config.solver.stall_threshold;
  root["data"]["train_images"] = config.train_images;
  root["data"]["train_labels"] = config.train_labels;
  root["data"]["test_images"] = config.test_images;
  root["data"]["test_labels"] = config.test_labels;
  root["sweep"]["num_antennas"] = config.sweep_num_antennas;
  root["sweep"]["server_power_dbw"] = config.sweep_server_power_dbw;
  root["output"]["dir"] = config.output_dir;
  root["output"]["workers"] = config.workers;
  json resolved;
  resolved["c0"] = config.c0();
  resolved["sigma_s_sq_watt"] = config.sigma_s_sq();
  resolved["sigma_k_sq_watt"] = config.sigma_k_sq();
  resolved["node_power_watt"] = config.node_power();
  resolved["server_power_watt"] = config.server_power();
  root["resolved_linear"] = resolved;
  return root.dump(2) + "\n";
}

}  // namespace airfl
