#include "aqmsim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "aqmsim/error.hpp"
#include "aqmsim/random.hpp"

namespace aqmsim::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what, key);
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  const json& get(const std::string& key) {
    if (!value_.contains(key)) fail(join(path_, key), "missing required key");
    used_.insert(key);
    return value_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) fail(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(join(path_, key), "expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(join(path_, key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) fail(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) fail(join(path_, key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::string child(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, _] : value_.items()) {
      if (!used_.count(key)) fail(join(path_, key), "unknown key");
    }
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> used_;
};

traffic::GEParams parse_ge(const json& value, const std::string& path) {
  ObjectReader r(value, path);
  const double rate = r.number("rate");
  const double scv = r.number("scv", 1.0);
  r.finish();
  try {
    return traffic::GEParams(rate, scv);
  } catch (const ParameterError& e) {
    fail(path, e.what());
  }
}

sim::Source parse_source(const json& value, const std::string& path) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  const auto priority = static_cast<std::size_t>(r.unsigned_integer("priority", 1));
  if (priority < 1) fail(r.child("priority"), "must be at least 1");
  const auto service = parse_ge(r.get("service"), r.child("service"));
  if (type == "open") {
    sim::OpenSource s;
    s.priority = priority;
    s.service = service;
    const json& arrival = r.get("arrival");
    ObjectReader peek(arrival, r.child("arrival"));
    // A zero arrival rate is a silent source.
    if (arrival.contains("rate") && arrival.at("rate").is_number() && arrival.at("rate").get<double>() == 0.0) {
      peek.number("rate");
      peek.number("scv", 1.0);
      peek.finish();
    } else {
      s.arrival = parse_ge(arrival, r.child("arrival"));
    }
    r.finish();
    return s;
  }
  if (type == "aimd") {
    sim::AimdSource s;
    s.priority = priority;
    s.service = service;
    s.rtt = r.number("rtt");
    s.initial_cwnd = r.number("initial_cwnd", 1.0);
    if (!(s.rtt > 0.0)) fail(r.child("rtt"), "must be positive");
    if (!(s.initial_cwnd >= 1.0)) fail(r.child("initial_cwnd"), "must be at least 1");
    r.finish();
    return s;
  }
  fail(r.child("type"), "unknown source type '" + type + "' (expected open or aimd)");
}

aqm::RedParams parse_red(ObjectReader& r, bool gentle_default) {
  aqm::RedParams p;
  p.weight = r.number("weight", p.weight);
  p.min_th = r.number("min_th");
  p.max_th = r.number("max_th");
  p.max_p = r.number("max_p", p.max_p);
  p.gentle = r.boolean("gentle", gentle_default);
  p.ecn = r.boolean("ecn", false);
  p.idle_packet_time = r.number("idle_packet_time", 0.0);
  if (p.min_th >= p.max_th) {
    fail(r.child("min_th"), "policy.min_th must be below policy.max_th");
  }
  return p;
}

template <class F>
void check_params(const std::string& path, F&& validate) {
  try {
    validate();
  } catch (const ParameterError& e) {
    fail(path, e.what());
  }
}

sim::PolicyConfig parse_policy(const json& value, std::size_t capacity) {
  const std::string path = "policy";
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  sim::PolicyConfig out;
  if (type == "droptail") {
    out = sim::DropTailPolicy{r.boolean("ecn", false)};
  } else if (type == "red" || type == "gred") {
    sim::RedPolicy p{parse_red(r, type == "gred")};
    check_params(path, [&] { p.params.validate(capacity); });
    out = p;
  } else if (type == "ared") {
    sim::AredPolicy p{parse_red(r, false), {}};
    auto& s = p.settings;
    s.interval = r.number("interval", s.interval);
    s.increment = r.number("increment", s.increment);
    s.decrease_factor = r.number("decrease_factor", s.decrease_factor);
    s.max_p_floor = r.number("max_p_floor", s.max_p_floor);
    s.max_p_ceiling = r.number("max_p_ceiling", s.max_p_ceiling);
    s.band_low = r.number("band_low", s.band_low);
    s.band_high = r.number("band_high", s.band_high);
    check_params(path, [&] { p.params.validate(capacity); s.validate(); });
    out = p;
  } else if (type == "blue") {
    sim::BluePolicy p;
    p.params.l_th = r.number("l_th");
    p.params.r1 = r.number("r1", p.params.r1);
    p.params.r2 = r.number("r2", p.params.r2);
    p.params.freeze_time = r.number("freeze_time", p.params.freeze_time);
    p.params.ecn = r.boolean("ecn", false);
    check_params(path, [&] { p.params.validate(capacity); });
    out = p;
  } else if (type == "rem") {
    sim::RemPolicy p;
    p.params.gamma = r.number("gamma", p.params.gamma);
    p.params.phi = r.number("phi", p.params.phi);
    p.params.alpha = r.number("alpha", p.params.alpha);
    p.params.target_backlog = r.number("target_backlog", p.params.target_backlog);
    p.params.ecn = r.boolean("ecn", false);
    p.interval = r.number("interval", p.interval);
    p.link_rate = r.number("link_rate", 0.0);
    check_params(path, [&] { p.params.validate(); });
    if (!(p.interval > 0.0)) fail(r.child("interval"), "must be positive");
    out = p;
  } else if (type == "decbit") {
    out = sim::DecbitPolicy{};
  } else if (type == "pbs") {
    sim::PbsPolicy p;
    const json& t = r.get("thresholds");
    if (!t.is_array() || t.empty()) fail(r.child("thresholds"), "expected a non-empty array");
    for (const auto& v : t) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(r.child("thresholds"), "thresholds must be non-negative integers");
      }
      p.thresholds.push_back(v.get<std::size_t>());
    }
    try {
      pbs::PbsThresholds(capacity, p.thresholds);
    } catch (const ConfigError& e) {
      fail(r.child("thresholds"), e.what());
    }
    out = p;
  } else {
    fail(r.child("type"), "unknown policy '" + type + "'");
  }
  r.finish();
  return out;
}

std::string json_pointer(const std::string& dotted) {
  std::string out;
  std::stringstream in(dotted);
  std::string part;
  while (std::getline(in, part, '.')) {
    if (part.empty()) fail("sweep.parameter", "empty path segment in '" + dotted + "'");
    out += "/" + part;
  }
  return out;
}

json with_value(const json& document, const std::string& dotted, double value) {
  json copy = document;
  copy.erase("sweep");
  json::json_pointer ptr(json_pointer(dotted));
  if (!copy.contains(ptr)) fail("sweep.parameter", "path '" + dotted + "' does not exist");
  json& slot = copy.at(ptr);
  if (!slot.is_number()) fail("sweep.parameter", "path '" + dotted + "' is not numeric");
  if (slot.is_number_integer()) {
    if (value != std::floor(value) || value < 0) {
      fail("sweep.values", "integer parameter '" + dotted + "' needs non-negative integral values");
    }
    slot = static_cast<std::uint64_t>(value);
  } else {
    slot = value;
  }
  return copy;
}

sim::SimConfig parse_sim(const json& doc, ObjectReader& r, std::string& seed_source) {
  sim::SimConfig cfg;
  cfg.capacity = static_cast<std::size_t>(r.unsigned_integer("capacity"));
  if (cfg.capacity < 1) fail("capacity", "must be at least 1");
  cfg.duration = r.number("duration");
  if (!(cfg.duration > 0.0)) fail("duration", "must be positive");
  cfg.warmup = r.number("warmup", 0.1 * cfg.duration);
  if (!(cfg.warmup >= 0.0 && cfg.warmup < cfg.duration)) fail("warmup", "must lie in [0, duration)");
  if (r.has("seed")) {
    cfg.seed = r.unsigned_integer("seed");
    seed_source = "config";
  } else if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    char* end = nullptr;
    cfg.seed = std::strtoull(env, &end, 10);
    if (*end != '\0') fail(kSeedEnvVar, "environment seed must be an unsigned integer");
    seed_source = "env";
  } else {
    cfg.seed = 1;
    seed_source = "default";
  }
  cfg.replications = static_cast<std::size_t>(r.unsigned_integer("replications", 1));
  if (cfg.replications < 1) fail("replications", "must be at least 1");

  const json& sources = r.get("sources");
  if (!sources.is_array() || sources.empty()) fail("sources", "expected a non-empty array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    cfg.sources.push_back(parse_source(sources[i], "sources." + std::to_string(i)));
  }
  cfg.policy = parse_policy(r.get("policy"), cfg.capacity);
  (void)doc;
  cfg.validate();
  return cfg;
}

Scenario parse_document(const json& doc) {
  ObjectReader r(doc, "");
  const auto version = r.unsigned_integer("schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    fail("schema_version", "unsupported schema version " + std::to_string(version));
  }
  Scenario s;
  s.name = r.string("name");
  if (s.name.empty()) fail("name", "must not be empty");
  s.output = r.string("output", "");
  s.sim = parse_sim(doc, r, s.seed_source);
  if (r.has("sweep")) {
    ObjectReader sw(r.get("sweep"), "sweep");
    Sweep sweep;
    sweep.parameter = sw.string("parameter");
    const json& values = sw.get("values");
    if (!values.is_array() || values.empty()) fail("sweep.values", "expected a non-empty array");
    for (const auto& v : values) {
      if (!v.is_number()) fail("sweep.values", "values must be numbers");
      sweep.values.push_back(v.get<double>());
    }
    const bool up = sweep.values.size() < 2 || sweep.values[1] > sweep.values[0];
    for (std::size_t i = 1; i < sweep.values.size(); ++i) {
      if (up ? !(sweep.values[i] > sweep.values[i - 1]) : !(sweep.values[i] < sweep.values[i - 1])) {
        fail("sweep.values", "values must be strictly monotone");
      }
    }
    sw.finish();
    s.sweep = sweep;
  }
  r.finish();
  s.document = doc;
  // Every sweep value must yield a valid scenario.
  if (s.sweep) {
    for (std::size_t i = 0; i < s.sweep->values.size(); ++i) sweep_point(s, i);
  }
  return s;
}

}  // namespace

Scenario parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }
  return parse_document(doc);
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::uint64_t sweep_seed(std::uint64_t master, std::size_t index) noexcept {
  return derive_seed(master ^ 0x5157'EE90'0000'0000ULL, index);
}

sim::SimConfig sweep_point(const Scenario& scenario, std::size_t index) {
  if (!scenario.sweep) throw ConfigError("scenario has no sweep", "sweep");
  if (index >= scenario.sweep->values.size()) throw ConfigError("sweep point out of range", "sweep.values");
  const json doc = with_value(scenario.document, scenario.sweep->parameter, scenario.sweep->values[index]);
  ObjectReader r(doc, "");
  r.unsigned_integer("schema_version");
  r.string("name");
  r.string("output", "");
  std::string seed_source;
  sim::SimConfig cfg = parse_sim(doc, r, seed_source);
  r.finish();
  cfg.seed = sweep_seed(scenario.sim.seed, index);
  cfg.replications = scenario.sim.replications;
  return cfg;
}

}  // namespace aqmsim::cli
