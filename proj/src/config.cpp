#include "panfuse/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace panfuse {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
  bool used = false;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat TOML subset: `key = value` lines, `#` comments, `[section]` headers
/// prefixing the keys that follow, quoted strings, booleans, numbers and
/// integer arrays.
std::map<std::string, RawValue> parse_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::map<std::string, RawValue> raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (raw.count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key \"" + key + "\"");
    raw[key] = RawValue{trim(line.substr(eq + 1)), lineno, false};
  }
  return raw;
}

class Extractor {
 public:
  Extractor(const std::string& path, std::map<std::string, RawValue>& raw)
      : path_(path), raw_(raw) {}

  template <typename T>
  void number(const std::string& key, T& out) {
    const RawValue* v = find(key);
    if (!v) return;
    double parsed = 0.0;
    try {
      std::size_t used = 0;
      parsed = std::stod(v->text, &used);
      if (used != v->text.size()) throw std::invalid_argument("");
    } catch (...) {
      fail(key, *v, "expected a number");
    }
    if constexpr (std::is_integral_v<T>) {
      if (parsed != static_cast<double>(static_cast<long long>(parsed)))
        fail(key, *v, "expected an integer");
      out = static_cast<T>(static_cast<long long>(parsed));
    } else {
      out = static_cast<T>(parsed);
    }
  }

  void boolean(const std::string& key, bool& out) {
    const RawValue* v = find(key);
    if (!v) return;
    if (v->text == "true") out = true;
    else if (v->text == "false") out = false;
    else fail(key, *v, "expected true or false");
  }

  void text(const std::string& key, std::string& out) {
    const RawValue* v = find(key);
    if (!v) return;
    std::string s = v->text;
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    out = s;
  }

  void u16_list(const std::string& key, std::vector<std::uint16_t>& out) {
    const RawValue* v = find(key);
    if (!v) return;
    std::string s = v->text;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
      fail(key, *v, "expected an array like [1, 2, 3]");
    s = s.substr(1, s.size() - 2);
    out.clear();
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t comma = s.find(',', pos);
      if (comma == std::string::npos) comma = s.size();
      const std::string item = trim(s.substr(pos, comma - pos));
      if (!item.empty()) {
        long value = -1;
        try {
          std::size_t used = 0;
          value = std::stol(item, &used);
          if (used != item.size()) throw std::invalid_argument("");
        } catch (...) {
          fail(key, *v, "expected integer array entries");
        }
        if (value < 0 || value > 65535) fail(key, *v, "array entry out of u16 range");
        out.push_back(static_cast<std::uint16_t>(value));
      }
      pos = comma + 1;
    }
  }

  void finish() const {
    for (const auto& [key, v] : raw_)
      if (!v.used)
        throw ConfigError(path_ + ":" + std::to_string(v.line) + ": unknown key \"" + key + "\"");
  }

 private:
  const RawValue* find(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  [[noreturn]] void fail(const std::string& key, const RawValue& v, const std::string& what) {
    throw ConfigError(path_ + ":" + std::to_string(v.line) + ": key \"" + key + "\": " + what);
  }

  std::string path_;
  std::map<std::string, RawValue>& raw_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_config(const std::string& path) {
  auto raw = parse_kv(path);
  Extractor ex(path, raw);
  PipelineConfig cfg;

  ex.number("window_size", cfg.window_size);
  ex.number("occlusion_tol", cfg.occlusion_tol);
  ex.number("stride", cfg.stride);
  ex.number("voxel_size", cfg.voxel_size);
  ex.number("kmeans.k", cfg.kmeans.k);
  ex.number("kmeans.max_iters", cfg.kmeans.max_iters);
  ex.number("kmeans.tol", cfg.kmeans.tol);
  ex.number("kmeans.seed", cfg.kmeans.seed);
  ex.number("tau_new", cfg.match.tau_new);
  ex.number("trim_pct", cfg.match.trim_pct);
  ex.number("point_cap", cfg.match.point_cap);
  ex.number("min_segment_px", cfg.match.min_segment_px);
  ex.number("match.seed", cfg.match.seed);
  std::string iou_mode = "paper", cost_mode = "iou_plus_iom", weight_mode = "sum";
  ex.text("iou_mode", iou_mode);
  ex.text("cost_mode", cost_mode);
  ex.text("instance_weight_mode", weight_mode);
  ex.number("splat_radius", cfg.splat_radius);
  ex.number("depth_gate", cfg.depth_gate);
  ex.number("connectivity", cfg.connectivity);
  ex.number("min_region_px", cfg.min_region_px);
  ex.number("num_classes", cfg.num_classes);
  ex.number("max_instances", cfg.max_instances);
  ex.u16_list("things", cfg.things);
  ex.number("lambda_sem", cfg.loss.lambda_sem);
  ex.number("lambda_ins", cfg.loss.lambda_ins);

  ex.text("scene.preset", cfg.scene_preset);
  ex.number("scene.seed", cfg.scene_seed);
  ex.number("scene.views", cfg.scene_views);
  ex.number("scene.width", cfg.scene_width);
  ex.number("scene.height", cfg.scene_height);
  ex.number("scene.objects", cfg.scene_objects);

  ex.number("noise.seed", cfg.noise_seed);
  ex.number("noise.flip_prob", cfg.noise_flip_prob);
  ex.boolean("noise.permute_instances", cfg.noise_permute_instances);
  ex.number("noise.jitter_px", cfg.noise_jitter_px);
  ex.number("noise.dropout_prob", cfg.noise_dropout_prob);
  ex.finish();

  if (iou_mode == "paper") cfg.match.iou_mode = IouMode::paper;
  else if (iou_mode == "standard") cfg.match.iou_mode = IouMode::standard;
  else check(false, path, "key \"iou_mode\": expected paper or standard");
  if (cost_mode == "iou_plus_iom") cfg.match.cost_mode = CostMode::iou_plus_iom;
  else if (cost_mode == "iou_only") cfg.match.cost_mode = CostMode::iou_only;
  else if (cost_mode == "iom_only") cfg.match.cost_mode = CostMode::iom_only;
  else check(false, path, "key \"cost_mode\": expected iou_plus_iom, iou_only or iom_only");
  if (weight_mode == "sum") cfg.loss.instance_weight_mode = LossConfig::WeightMode::sum;
  else if (weight_mode == "mean") cfg.loss.instance_weight_mode = LossConfig::WeightMode::mean;
  else check(false, path, "key \"instance_weight_mode\": expected sum or mean");

  check(cfg.window_size >= 0, path, "key \"window_size\": must be >= 0");
  check(cfg.occlusion_tol > 0.0, path, "key \"occlusion_tol\": must be > 0");
  check(cfg.stride >= 1, path, "key \"stride\": must be >= 1");
  check(cfg.voxel_size > 0.0, path, "key \"voxel_size\": must be > 0");
  check(cfg.kmeans.max_iters >= 1, path, "key \"kmeans.max_iters\": must be >= 1");
  check(cfg.kmeans.tol > 0.0, path, "key \"kmeans.tol\": must be > 0");
  check(cfg.match.trim_pct >= 0.0 && cfg.match.trim_pct < 0.2, path,
        "key \"trim_pct\": must be in [0, 0.2)");
  check(cfg.match.point_cap >= 100, path, "key \"point_cap\": must be >= 100");
  check(cfg.match.min_segment_px >= 1, path, "key \"min_segment_px\": must be >= 1");
  check(cfg.splat_radius >= 0, path, "key \"splat_radius\": must be >= 0");
  check(cfg.connectivity == 4 || cfg.connectivity == 8, path,
        "key \"connectivity\": must be 4 or 8");
  check(cfg.min_region_px >= 1, path, "key \"min_region_px\": must be >= 1");
  check(cfg.num_classes >= 1, path, "key \"num_classes\": must be >= 1");
  check(cfg.max_instances >= 1, path, "key \"max_instances\": must be >= 1");
  check(cfg.scene_preset == "orbit" || cfg.scene_preset == "corridor", path,
        "key \"scene.preset\": expected orbit or corridor");
  return cfg;
}

}  // namespace panfuse
