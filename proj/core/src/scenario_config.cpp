#include "maglocate/scenario_config.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "presets.hpp"

namespace maglocate {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kScenario:
      return "scenario";
    case ExperimentKind::kSensorCount:
      return "sensor_count";
    case ExperimentKind::kGeometry:
      return "geometry";
    case ExperimentKind::kPositions:
      return "positions";
    case ExperimentKind::kFilterComparison:
      return "filter_comparison";
  }
  return "unknown";
}

namespace {

ExperimentKind parse_kind(const std::string& text) {
  for (auto k : {ExperimentKind::kScenario, ExperimentKind::kSensorCount, ExperimentKind::kGeometry,
                 ExperimentKind::kPositions, ExperimentKind::kFilterComparison}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("experiment: unknown kind '" + text + "'");
}

// Missing keys and explicit nulls both count as absent.
bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

// A YAML mapping that rejects keys nobody asked for.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (present(node_) && !node_.IsMap()) throw ConfigError(where() + "expected a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return present(get(key));
  }

  YAML::Node get(const std::string& key) {
    seen_.insert(key);
    const YAML::Node& node = node_;
    return present(node) ? node[key] : YAML::Node(YAML::NodeType::Undefined);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  T scalar(const std::string& key, const T& fallback) {
    const YAML::Node n = get(key);
    if (!present(n)) return fallback;
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  template <typename T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError(key_path(key) + ": required");
    return scalar<T>(key, T{});
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback, double scale = 1.0) {
    const YAML::Node n = get(key);
    if (!present(n)) return fallback;
    if (!n.IsSequence() || n.size() != 3) throw ConfigError(key_path(key) + ": expected [x, y, z]");
    Vec3 v;
    try {
      for (std::size_t i = 0; i < 3; ++i) v[static_cast<Eigen::Index>(i)] = n[i].as<double>() * scale;
    } catch (const YAML::Exception&) {
      throw ConfigError(key_path(key) + ": expected numbers");
    }
    return v;
  }

  Section sub(const std::string& key) { return Section(get(key), key_path(key)); }

  void finish() const {
    if (!present(node_)) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_array(Section sec, ArraySource& array, const std::filesystem::path& base_dir) {
  const int picked = sec.has("family") + sec.has("file") + sec.has("grid");
  if (picked > 1) throw ConfigError("array: give only one of family, file, grid");
  if (sec.has("file")) {
    array.kind = ArraySource::Kind::kFile;
    std::filesystem::path p = sec.scalar<std::string>("file", "");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    array.file = p.string();
  } else if (sec.has("grid")) {
    array.kind = ArraySource::Kind::kGrid;
    Section g = sec.sub("grid");
    array.grid.rows = g.required<int>("rows");
    array.grid.cols = g.required<int>("cols");
    array.grid.pitch_x = g.scalar<double>("pitch_x_mm", 30.0) * kMillimeter;
    array.grid.pitch_y = g.scalar<double>("pitch_y_mm", array.grid.pitch_x / kMillimeter) * kMillimeter;
    array.grid.centered = g.scalar<bool>("centered", true);
    g.finish();
  } else {
    array.kind = ArraySource::Kind::kFamily;
    try {
      array.family = parse_layout_family(sec.scalar<std::string>("family", "four_by_m"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("array.family: ") + e.what());
    }
  }
  array.size = sec.scalar<int>("size", array.size);
  array.layout.permissive = sec.scalar<bool>("permissive", false);
  array.layout.pitch_override = sec.scalar<double>("pitch_mm", 0.0) * kMillimeter;
  array.layout.origin = sec.vec3("origin_mm", Vec3::Zero(), kMillimeter);
  array.grid.origin = array.layout.origin;
  array.grid.plane_z = array.layout.origin.z();
  sec.finish();
}

void parse_magnet(Section sec, MagnetSpec& magnet) {
  magnet.length = sec.scalar<double>("length_mm", magnet.length / kMillimeter) * kMillimeter;
  magnet.radius = sec.scalar<double>("radius_mm", magnet.radius / kMillimeter) * kMillimeter;
  magnet.magnetization = sec.scalar<double>("magnetization_A_per_m", magnet.magnetization);
  magnet.mu_r = sec.scalar<double>("mu_r", magnet.mu_r);
  sec.finish();
}

void parse_sensor(Section sec, SensorModel& model) {
  const YAML::Node sigma = sec.get("noise_sigma_uT");
  if (present(sigma)) {
    if (sigma.IsSequence()) {
      model.noise_sigma = sec.vec3("noise_sigma_uT", Vec3::Zero(), kMicrotesla);
    } else {
      model.noise_sigma = Vec3::Constant(sec.scalar<double>("noise_sigma_uT", 0.0) * kMicrotesla);
    }
  }
  model.quantize = sec.scalar<bool>("quantize", model.quantize);
  model.resolution = sec.scalar<double>("resolution_uT", model.resolution / kMicrotesla) * kMicrotesla;
  model.full_scale = sec.scalar<double>("full_scale_uT", model.full_scale / kMicrotesla) * kMicrotesla;
  sec.finish();
}

std::size_t non_negative(Section& sec, const std::string& key, std::size_t fallback) {
  const long long v = sec.scalar<long long>(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(sec.key_path(key) + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

void parse_filter(Section sec, FilterConfig& filter) {
  filter.enabled = sec.scalar<bool>("enabled", filter.enabled);
  filter.window = non_negative(sec, "window", filter.window);
  filter.groups = non_negative(sec, "groups", filter.groups);
  filter.warmup = non_negative(sec, "warmup", filter.warmup);
  sec.finish();
}

void parse_solver(Section sec, SolverConfig& solver) {
  solver.max_iterations = sec.scalar<int>("max_iterations", solver.max_iterations);
  solver.initial_damping = sec.scalar<double>("initial_damping", solver.initial_damping);
  solver.damping_up = sec.scalar<double>("damping_up", solver.damping_up);
  solver.damping_down = sec.scalar<double>("damping_down", solver.damping_down);
  solver.gradient_tol = sec.scalar<double>("gradient_tol", solver.gradient_tol);
  solver.step_tol = sec.scalar<double>("step_tol", solver.step_tol);
  solver.cost_tol = sec.scalar<double>("cost_tol", solver.cost_tol);
  solver.multistart_count = sec.scalar<int>("multistart_count", solver.multistart_count);
  if (sec.has("strategy")) {
    try {
      solver.strategy = parse_init_strategy(sec.scalar<std::string>("strategy", "centroid"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("solver.strategy: ") + e.what());
    }
  }
  solver.workspace_margin =
      sec.scalar<double>("workspace_margin_mm", solver.workspace_margin / kMillimeter) * kMillimeter;
  solver.workspace_height =
      sec.scalar<double>("workspace_height_mm", solver.workspace_height / kMillimeter) * kMillimeter;
  sec.finish();
}

Vec3 orientation_of(Section& sec, const std::string& key, const Vec3& fallback) {
  const Vec3 v = sec.vec3(key, fallback);
  if (!(v.norm() > 0.0)) throw ConfigError(sec.key_path(key) + ": must be non-zero");
  return v.normalized();
}

std::vector<LabeledPose> parse_poses(const YAML::Node& node) {
  if (!node.IsSequence()) throw ConfigError("poses: expected a list");
  std::vector<LabeledPose> poses;
  for (std::size_t i = 0; i < node.size(); ++i) {
    Section p(node[i], "poses[" + std::to_string(i) + "]");
    LabeledPose lp;
    lp.label = p.scalar<std::string>("label", "P" + std::to_string(i));
    if (!p.has("position_mm")) throw ConfigError(p.key_path("position_mm") + ": required");
    lp.pose.position = p.vec3("position_mm", Vec3::Zero(), kMillimeter);
    lp.pose.orientation = orientation_of(p, "orientation", Vec3::UnitZ());
    p.finish();
    for (const auto& other : poses) {
      if (other.label == lp.label) throw ConfigError(p.key_path("label") + ": duplicate label '" + lp.label + "'");
    }
    poses.push_back(lp);
  }
  return poses;
}

PoseSampler parse_sampler(Section sec) {
  PoseSampler s;
  s.count = sec.required<int>("count");
  s.lower = sec.vec3("lower_mm", Vec3::Zero(), kMillimeter);
  s.upper = sec.vec3("upper_mm", Vec3::Zero(), kMillimeter);
  if (sec.has("orientation")) {
    const YAML::Node o = sec.get("orientation");
    if (o.IsScalar() && o.as<std::string>() == "random") {
      s.random_orientation = true;
    } else {
      s.random_orientation = false;
      s.orientation = orientation_of(sec, "orientation", Vec3::UnitZ());
    }
  }
  sec.finish();
  return s;
}

std::vector<int> int_list(const YAML::Node& node, const std::string& path) {
  if (!present(node) || !node.IsSequence()) throw ConfigError(path + ": expected a list");
  std::vector<int> out;
  try {
    for (const auto& v : node) out.push_back(v.as<int>());
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected integers");
  }
  return out;
}

std::vector<double> mm_list(const YAML::Node& node, const std::string& path) {
  if (!present(node) || !node.IsSequence()) throw ConfigError(path + ": expected a list");
  std::vector<double> out;
  try {
    for (const auto& v : node) out.push_back(v.as<double>() * kMillimeter);
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected numbers");
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config: expected a mapping at the top level");

  ExperimentConfig cfg;
  Scenario& s = cfg.scenario;
  Section top(root, "");
  s.name = top.scalar<std::string>("name", s.name);
  if (s.name.empty()) throw ConfigError("name: must not be empty");
  cfg.kind = parse_kind(top.scalar<std::string>("experiment", "scenario"));
  s.seed = top.scalar<std::uint64_t>("seed", s.seed);
  s.trials = top.scalar<int>("trials", s.trials);
  if (s.trials < 1) throw ConfigError("trials: must be >= 1");

  parse_array(top.sub("array"), s.array, base_dir);
  parse_magnet(top.sub("magnet"), s.magnet);
  parse_sensor(top.sub("sensor"), s.sensor);
  parse_filter(top.sub("filter"), s.filter);
  parse_solver(top.sub("solver"), s.solver);

  if (top.has("poses")) s.poses = parse_poses(top.get("poses"));
  if (top.has("random_poses")) {
    if (!s.poses.empty()) throw ConfigError("give either poses or random_poses, not both");
    s.poses = sample_poses(parse_sampler(top.sub("random_poses")), s.seed);
  }

  Section count = top.sub("sensor_count");
  if (count.has("family")) {
    try {
      cfg.count_family = parse_layout_family(count.scalar<std::string>("family", "four_by_m"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("sensor_count.family: ") + e.what());
    }
  }
  if (count.has("sizes")) cfg.sizes = int_list(count.get("sizes"), "sensor_count.sizes");
  count.finish();

  Section geometry = top.sub("geometry");
  if (geometry.has("axis")) cfg.axis = parse_geometry_axis(geometry.scalar<std::string>("axis", ""));
  if (geometry.has("offsets_mm")) cfg.offsets = mm_list(geometry.get("offsets_mm"), "geometry.offsets_mm");
  cfg.sweep_orientation = orientation_of(geometry, "orientation", Vec3::UnitZ());
  geometry.finish();

  Section positions = top.sub("positions");
  cfg.positions_height = positions.scalar<double>("height_mm", 30.0) * kMillimeter;
  cfg.positions_margin = positions.scalar<double>("margin_mm", 30.0) * kMillimeter;
  cfg.positions_orientation = orientation_of(positions, "orientation", Vec3::UnitZ());
  positions.finish();

  top.finish();

  switch (cfg.kind) {
    case ExperimentKind::kSensorCount:
      if (cfg.sizes.empty()) throw ConfigError("sensor_count.sizes: required for sensor_count experiments");
      if (s.poses.empty()) throw ConfigError("poses: required for sensor_count experiments");
      break;
    case ExperimentKind::kGeometry:
      if (cfg.offsets.empty()) throw ConfigError("geometry.offsets_mm: required for geometry experiments");
      for (double o : cfg.offsets) {
        if (!(o > 0.0)) throw ConfigError("geometry.offsets_mm: offsets must be positive");
      }
      break;
    case ExperimentKind::kPositions:
      break;
    case ExperimentKind::kScenario:
    case ExperimentKind::kFilterComparison:
      if (s.poses.empty()) throw ConfigError("poses: required for " + to_string(cfg.kind) + " experiments");
      break;
  }
  if (cfg.kind == ExperimentKind::kFilterComparison && s.filter.window < 1) {
    throw ConfigError("filter.window: must be >= 1");
  }
  try {
    s.magnet.validate();
    s.sensor.validate();
    s.solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : detail::kPresets) names.emplace_back(p.name);
  return names;
}

std::optional<std::string_view> preset_source(std::string_view name) {
  for (const auto& p : detail::kPresets) {
    if (p.name == name) return p.text;
  }
  return std::nullopt;
}

ExperimentConfig load_preset_or_file(const std::string& name_or_path) {
  if (const auto text = preset_source(name_or_path)) {
    return parse_experiment_config(*text);
  }
  if (std::filesystem::exists(name_or_path)) {
    return load_experiment_config(name_or_path);
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("'" + name_or_path + "' is neither a preset (" + known + ") nor a config file");
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
  if (overrides.seed) config.scenario.seed = *overrides.seed;
  if (overrides.noise_sigma) {
    if (!(*overrides.noise_sigma >= 0.0)) throw ConfigError("--noise-sigma must be non-negative");
    config.scenario.sensor.noise_sigma = Vec3::Constant(*overrides.noise_sigma);
  }
  if (overrides.trials) {
    if (*overrides.trials < 1) throw ConfigError("--trials must be >= 1");
    config.scenario.trials = *overrides.trials;
  }
}

namespace {

nlohmann::json vec_json(const Vec3& v, double scale = 1.0) {
  return nlohmann::json::array({v.x() / scale, v.y() / scale, v.z() / scale});
}

}  // namespace

std::string config_echo_json(const ExperimentConfig& config, int indent) {
  using nlohmann::json;
  const Scenario& s = config.scenario;
  json j;
  j["name"] = s.name;
  j["experiment"] = to_string(config.kind);
  j["seed"] = s.seed;
  j["trials"] = s.trials;

  json array;
  switch (s.array.kind) {
    case ArraySource::Kind::kFamily:
      array["family"] = to_string(s.array.family);
      array["size"] = s.array.size;
      array["permissive"] = s.array.layout.permissive;
      if (s.array.layout.pitch_override > 0) array["pitch_mm"] = s.array.layout.pitch_override / kMillimeter;
      break;
    case ArraySource::Kind::kGrid:
      array["grid"] = {{"rows", s.array.grid.rows},
                       {"cols", s.array.grid.cols},
                       {"pitch_x_mm", s.array.grid.pitch_x / kMillimeter},
                       {"pitch_y_mm", s.array.grid.pitch_y / kMillimeter},
                       {"centered", s.array.grid.centered}};
      break;
    case ArraySource::Kind::kFile:
      array["file"] = s.array.file;
      break;
  }
  array["origin_mm"] = vec_json(s.array.layout.origin, kMillimeter);
  j["array"] = array;

  j["magnet"] = {{"length_mm", s.magnet.length / kMillimeter},
                 {"radius_mm", s.magnet.radius / kMillimeter},
                 {"magnetization_A_per_m", s.magnet.magnetization},
                 {"mu_r", s.magnet.mu_r}};
  j["sensor"] = {{"noise_sigma_uT", vec_json(s.sensor.noise_sigma, kMicrotesla)},
                 {"quantize", s.sensor.quantize},
                 {"resolution_uT", s.sensor.resolution / kMicrotesla},
                 {"full_scale_uT", s.sensor.full_scale / kMicrotesla}};
  j["filter"] = {{"enabled", s.filter.enabled},
                 {"window", s.filter.window},
                 {"groups", s.filter.groups},
                 {"warmup", s.filter.warmup}};
  j["solver"] = {{"max_iterations", s.solver.max_iterations},
                 {"initial_damping", s.solver.initial_damping},
                 {"damping_up", s.solver.damping_up},
                 {"damping_down", s.solver.damping_down},
                 {"gradient_tol", s.solver.gradient_tol},
                 {"step_tol", s.solver.step_tol},
                 {"cost_tol", s.solver.cost_tol},
                 {"multistart_count", s.solver.multistart_count},
                 {"strategy", to_string(s.solver.strategy)},
                 {"workspace_margin_mm", s.solver.workspace_margin / kMillimeter},
                 {"workspace_height_mm", s.solver.workspace_height / kMillimeter}};
  json poses = json::array();
  for (const auto& p : s.poses) {
    poses.push_back({{"label", p.label},
                     {"position_mm", vec_json(p.pose.position, kMillimeter)},
                     {"orientation", vec_json(p.pose.orientation)}});
  }
  j["poses"] = poses;

  switch (config.kind) {
    case ExperimentKind::kSensorCount:
      j["sensor_count"] = {{"family", to_string(config.count_family)}, {"sizes", config.sizes}};
      break;
    case ExperimentKind::kGeometry: {
      json offsets = json::array();
      for (double o : config.offsets) offsets.push_back(o / kMillimeter);
      j["geometry"] = {{"axis", to_string(config.axis)},
                       {"offsets_mm", offsets},
                       {"orientation", vec_json(config.sweep_orientation)}};
      break;
    }
    case ExperimentKind::kPositions:
      j["positions"] = {{"height_mm", config.positions_height / kMillimeter},
                        {"margin_mm", config.positions_margin / kMillimeter},
                        {"orientation", vec_json(config.positions_orientation)}};
      break;
    default:
      break;
  }
  return j.dump(indent);
}

}  // namespace maglocate
