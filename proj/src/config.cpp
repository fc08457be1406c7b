#include "config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace mdiqkd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
      return false;
  return true;
}

TomlDoc::Value parse_scalar(const std::string& raw, int line) {
  TomlDoc::Value v;
  v.line = line;
  if (raw.empty()) fail(line, "missing value");
  if (raw.front() == '"') {
    const auto close = raw.find('"', 1);
    if (close == std::string::npos) fail(line, "unterminated string");
    const std::string rest = trim(raw.substr(close + 1));
    if (!rest.empty() && rest.front() != '#')
      fail(line, "unexpected text after string value");
    v.kind = TomlDoc::Value::Kind::Text;
    v.text = raw.substr(1, close - 1);
    return v;
  }
  std::string body = raw;
  const auto hash = body.find('#');
  if (hash != std::string::npos) body = trim(body.substr(0, hash));
  if (body == "true" || body == "false") {
    v.kind = TomlDoc::Value::Kind::Boolean;
    v.boolean = body == "true";
    return v;
  }
  char* end = nullptr;
  v.number = std::strtod(body.c_str(), &end);
  if (end == body.c_str() || *end != '\0')
    fail(line, "'" + body + "' is not a number, boolean or \"string\"");
  v.kind = TomlDoc::Value::Kind::Number;
  return v;
}

}  // namespace

TomlDoc TomlDoc::parse(const std::string& text) {
  TomlDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string prefix;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(line_no, "unterminated section header");
      prefix = trim(body.substr(1, body.size() - 2));
      if (!valid_key(prefix)) fail(line_no, "invalid section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(line_no, "expected 'key = value' or '[section]'");
    const std::string key = trim(body.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (doc.values_.count(full)) fail(line_no, "duplicate key '" + full + "'");
    doc.values_[full] = parse_scalar(trim(body.substr(eq + 1)), line_no);
  }
  return doc;
}

TomlDoc TomlDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const TomlDoc::Value* TomlDoc::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool TomlDoc::has(const std::string& key) const { return find(key) != nullptr; }

double TomlDoc::number(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Number)
    fail(v->line, "'" + key + "' must be a number");
  return v->number;
}

bool TomlDoc::boolean(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Boolean)
    fail(v->line, "'" + key + "' must be true or false");
  return v->boolean;
}

std::string TomlDoc::text(const std::string& key,
                          const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Text)
    fail(v->line, "'" + key + "' must be a \"string\"");
  return v->text;
}

void TomlDoc::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("invalid override key '" + key + "'");
  values_[key] = parse_scalar(trim(value), 0);
}

namespace {

long to_integer(const TomlDoc& doc, const std::string& key, long fallback) {
  const double v = doc.number(key, static_cast<double>(fallback));
  const double rounded = std::nearbyint(v);
  if (std::abs(v - rounded) > 1e-9)
    throw ConfigError("'" + key + "' must be an integer");
  return static_cast<long>(rounded);
}

SourceSide load_side(const TomlDoc& doc, const std::string& section) {
  SourceSide side;
  side.mu_x = doc.number(section + ".mu_x", 0.0);
  side.mu_y = doc.number(section + ".mu_y", 0.0);
  side.mu_z = doc.number(section + ".mu_z", 0.0);
  side.p_x = doc.number(section + ".p_x", 0.0);
  side.p_y = doc.number(section + ".p_y", 0.0);
  side.p_z = doc.number(section + ".p_z", 0.0);
  return side;
}

bool has_side(const TomlDoc& doc, const std::string& section) {
  const char* fields[] = {"mu_x", "mu_y", "mu_z", "p_x", "p_y", "p_z"};
  for (const char* f : fields)
    if (doc.has(section + "." + f)) return true;
  return false;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "channel.alpha_db_per_km", "channel.detector_efficiency",
      "channel.dark_count_prob", "channel.misalignment",
      "channel.error_correction_inefficiency",
      "protocol.pulse_pairs",
      "run.distance_km", "run.offset_km",
      "sweep.start_km", "sweep.stop_km", "sweep.step_km", "sweep.offset_km",
      "analysis.scan", "analysis.optimize", "analysis.three_intensity",
      "analysis.eps_total", "analysis.compare",
      "scan.grid_h", "scan.grid_m", "scan.refine_rounds",
      "scan.search_grid_h", "scan.search_grid_m", "scan.search_refine_rounds",
      "optimizer.step", "optimizer.min_step", "optimizer.max_fails",
      "optimizer.restarts", "optimizer.seed",
      "runtime.threads", "runtime.progress", "runtime.poisson_sampling",
      "runtime.seed",
  };
  return keys;
}

const std::set<std::string>& budget_keys() {
  static const std::set<std::string> keys = {
      "xi_s1p", "xi_s2p", "xi_s3p", "xi_s1m", "xi_s2m", "xi_h1l",
      "xi_h2l", "xi_h3l", "xi_h1u", "xi_h2u", "xi_h3u", "xi_ml",
      "xi_mu",  "xi_s11", "xi_e11", "eps_cor", "eps_prime", "eps_hat",
  };
  return keys;
}

void check_known(const TomlDoc& doc) {
  for (const auto& [key, value] : doc.values()) {
    if (known_keys().count(key)) continue;
    if (key.rfind("protocol.alice.", 0) == 0 ||
        key.rfind("protocol.bob.", 0) == 0) {
      const std::string field = key.substr(key.rfind('.') + 1);
      if (field == "mu_x" || field == "mu_y" || field == "mu_z" ||
          field == "p_x" || field == "p_y" || field == "p_z")
        continue;
    }
    if (key.rfind("budget.", 0) == 0 &&
        budget_keys().count(key.substr(7)))
      continue;
    fail(value.line, "unknown key '" + key + "'");
  }
}

}  // namespace

ExperimentSpec load_experiment_spec(const TomlDoc& doc) {
  check_known(doc);
  ExperimentSpec spec;
  spec.channel.loss_db_per_km = doc.number("channel.alpha_db_per_km", 0.2);
  spec.channel.detector_efficiency =
      doc.number("channel.detector_efficiency", 0.4);
  spec.channel.dark_count_prob = doc.number("channel.dark_count_prob", 1e-7);
  spec.channel.misalignment = doc.number("channel.misalignment", 0.015);
  spec.channel.error_correction_inefficiency =
      doc.number("channel.error_correction_inefficiency", 1.1);

  spec.pulse_pairs = doc.number("protocol.pulse_pairs", 1e10);
  if (has_side(doc, "protocol.alice"))
    spec.alice = load_side(doc, "protocol.alice");
  if (has_side(doc, "protocol.bob")) spec.bob = load_side(doc, "protocol.bob");
  if (spec.alice && !spec.bob) spec.bob = spec.alice;  // symmetric shorthand

  spec.distance_km = doc.number("run.distance_km", 50.0);
  spec.offset_km = doc.number("run.offset_km", 0.0);

  spec.sweep_start_km = doc.number("sweep.start_km", 25.0);
  spec.sweep_stop_km = doc.number("sweep.stop_km", 75.0);
  spec.sweep_step_km = doc.number("sweep.step_km", 25.0);
  spec.sweep_offset_km = doc.number("sweep.offset_km", 0.0);

  const std::string scan = doc.text("analysis.scan", "double");
  if (scan == "single") {
    spec.scan_mode = ScanMode::Single;
  } else if (scan == "double") {
    spec.scan_mode = ScanMode::Double;
  } else {
    throw ConfigError("analysis.scan must be \"single\" or \"double\"");
  }
  const std::string opt = doc.text("analysis.optimize", "spo");
  if (opt == "none") {
    spec.optimize_enabled = false;
  } else if (opt == "spo") {
    spec.opt_mode = OptimizeMode::SourceOnly;
  } else if (opt == "apo") {
    spec.opt_mode = OptimizeMode::AllParams;
  } else {
    throw ConfigError("analysis.optimize must be \"none\", \"spo\" or \"apo\"");
  }
  spec.three_intensity = doc.boolean("analysis.three_intensity", false);
  spec.eps_total = doc.number("analysis.eps_total", 1e-10);
  const std::string compare = doc.text("analysis.compare", "scan");
  if (compare == "scan") {
    spec.compare_kind = CompareKind::ScanMethods;
  } else if (compare == "intensity") {
    spec.compare_kind = CompareKind::IntensityCount;
  } else {
    throw ConfigError("analysis.compare must be \"scan\" or \"intensity\"");
  }

  spec.scan.grid_h = static_cast<int>(to_integer(doc, "scan.grid_h", 101));
  spec.scan.grid_m = static_cast<int>(to_integer(doc, "scan.grid_m", 101));
  spec.scan.refine_rounds =
      static_cast<int>(to_integer(doc, "scan.refine_rounds", 2));
  spec.search_scan.grid_h =
      static_cast<int>(to_integer(doc, "scan.search_grid_h", 21));
  spec.search_scan.grid_m =
      static_cast<int>(to_integer(doc, "scan.search_grid_m", 21));
  spec.search_scan.refine_rounds =
      static_cast<int>(to_integer(doc, "scan.search_refine_rounds", 1));

  spec.optimizer.step = doc.number("optimizer.step", 0.1);
  spec.optimizer.min_step = doc.number("optimizer.min_step", 1e-5);
  spec.optimizer.max_fails =
      static_cast<int>(to_integer(doc, "optimizer.max_fails", 300));
  spec.optimizer.restarts =
      static_cast<int>(to_integer(doc, "optimizer.restarts", 4));
  spec.optimizer.seed =
      static_cast<std::uint64_t>(to_integer(doc, "optimizer.seed", 1));

  if (doc.has("budget.xi_s1p") || doc.has("budget.eps_cor")) {
    FailureBudget b;
    auto get = [&doc](const char* name) {
      const std::string key = std::string("budget.") + name;
      if (!doc.has(key))
        throw ConfigError("[budget] section is missing '" + key + "'");
      return doc.number(key, 0.0);
    };
    b.xi_s1p = get("xi_s1p");
    b.xi_s2p = get("xi_s2p");
    b.xi_s3p = get("xi_s3p");
    b.xi_s1m = get("xi_s1m");
    b.xi_s2m = get("xi_s2m");
    b.xi_h1l = get("xi_h1l");
    b.xi_h2l = get("xi_h2l");
    b.xi_h3l = get("xi_h3l");
    b.xi_h1u = get("xi_h1u");
    b.xi_h2u = get("xi_h2u");
    b.xi_h3u = get("xi_h3u");
    b.xi_ml = get("xi_ml");
    b.xi_mu = get("xi_mu");
    b.xi_s11 = get("xi_s11");
    b.xi_e11 = get("xi_e11");
    b.eps_cor = get("eps_cor");
    b.eps_prime = get("eps_prime");
    b.eps_hat = get("eps_hat");
    spec.explicit_budget = b;  // eps_pa derived from eps_total downstream
  }

  spec.threads = static_cast<int>(to_integer(doc, "runtime.threads", 0));
  spec.progress = doc.boolean("runtime.progress", false);
  spec.poisson_sampling = doc.boolean("runtime.poisson_sampling", false);
  spec.sampling_seed =
      static_cast<std::uint64_t>(to_integer(doc, "runtime.seed", 1));
  return spec;
}

}  // namespace mdiqkd
