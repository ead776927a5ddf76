#include "vartsp/settings.hpp"

#include <cstdint>
#include <cstdio>
#include <string_view>

#include "vartsp/error.hpp"

namespace vartsp {

namespace {

std::string describe(const Json& v) { return v.dump(); }

template <typename T>
T get(const std::string& key, const Json& v);

template <>
bool get<bool>(const std::string& key, const Json& v) {
  if (!v.is_boolean()) {
    throw ConfigError("\"" + key + "\" expects true or false, got " +
                      describe(v));
  }
  return v.get<bool>();
}

template <>
double get<double>(const std::string& key, const Json& v) {
  if (!v.is_number()) {
    throw ConfigError("\"" + key + "\" expects a number, got " + describe(v));
  }
  return v.get<double>();
}

template <>
std::size_t get<std::size_t>(const std::string& key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }
  throw ConfigError("\"" + key + "\" expects a non-negative integer, got " +
                    describe(v));
}

template <>
std::string get<std::string>(const std::string& key, const Json& v) {
  if (!v.is_string()) {
    throw ConfigError("\"" + key + "\" expects a string, got " + describe(v));
  }
  return v.get<std::string>();
}

double positive(const std::string& key, double x) {
  if (!(x > 0.0)) {
    throw ConfigError("\"" + key + "\" must be positive, got " +
                      std::to_string(x));
  }
  return x;
}

double non_negative(const std::string& key, double x) {
  if (!(x >= 0.0)) {
    throw ConfigError("\"" + key + "\" must be non-negative, got " +
                      std::to_string(x));
  }
  return x;
}

double fraction(const std::string& key, double x) {
  if (!(x > 0.0) || x > 1.0) {
    throw ConfigError("\"" + key + "\" must lie in (0, 1], got " +
                      std::to_string(x));
  }
  return x;
}

GrayScope parse_gray_scope(const std::string& text) {
  if (text == "chunk") return GrayScope::kPerChunk;
  if (text == "word") return GrayScope::kWholeWord;
  throw ConfigError("unknown gray scope \"" + text +
                    "\" (expected chunk or word)");
}

Circuit3Variant parse_circuit3(const std::string& text) {
  if (text == "rz-rzz") return Circuit3Variant::kRzAndRzz;
  if (text == "rz-only") return Circuit3Variant::kRzOnly;
  throw ConfigError("unknown circuit 3 variant \"" + text +
                    "\" (expected rz-rzz or rz-only)");
}

void apply_key(RunSettings& s, const std::string& key, const Json& v) {
  VqaConfig& q = s.vqa;
  MlConfig& m = s.ml;
  if (key == "model") {
    s.model = parse_model_kind(get<std::string>(key, v));
  } else if (key == "codec") {
    s.codec = parse_codec_kind(get<std::string>(key, v));
  } else if (key == "gray") {
    s.gray = get<bool>(key, v);
  } else if (key == "gray-scope") {
    s.gray_scope = parse_gray_scope(get<std::string>(key, v));
  } else if (key == "iterations") {
    q.iterations = m.epochs = get<std::size_t>(key, v);
  } else if (key == "slice") {
    q.slice = m.slice = fraction(key, get<double>(key, v));
  } else if (key == "warm-start") {
    q.warm_start = get<bool>(key, v);
    if (q.warm_start) {
      m.input = InputMode::kWarm;
    } else if (m.input == InputMode::kWarm) {
      m.input = InputMode::kZeros;
    }
  } else if (key == "cache") {
    q.caching = m.caching = get<bool>(key, v);
  } else if (key == "circuit") {
    const auto id = get<std::size_t>(key, v);
    if (id < 1 || id > 5) {
      throw ConfigError("\"circuit\" must be 1-5, got " + std::to_string(id));
    }
    q.circuit = static_cast<int>(id);
  } else if (key == "circuit3") {
    q.circuit3 = parse_circuit3(get<std::string>(key, v));
  } else if (key == "gradient") {
    q.gradient = parse_gradient_method(get<std::string>(key, v));
  } else if (key == "shots") {
    q.shots = get<std::size_t>(key, v);
    if (q.shots == 0) throw ConfigError("\"shots\" must be positive");
  } else if (key == "init-angle") {
    q.init_angle = get<double>(key, v);
  } else if (key == "spsa-A") {
    q.spsa.A = non_negative(key, get<double>(key, v));
  } else if (key == "spsa-c") {
    q.spsa.c = positive(key, get<double>(key, v));
  } else if (key == "spsa-alpha") {
    q.spsa.alpha = positive(key, get<double>(key, v));
  } else if (key == "spsa-gamma") {
    q.spsa.gamma = positive(key, get<double>(key, v));
  } else if (key == "spsa-eta") {
    q.spsa.eta = positive(key, get<double>(key, v));
  } else if (key == "g0-floor") {
    q.spsa.g0_floor = positive(key, get<double>(key, v));
  } else if (key == "shift-s") {
    q.param_shift.s = positive(key, get<double>(key, v));
  } else if (key == "shift-eta") {
    q.param_shift.eta = positive(key, get<double>(key, v));
  } else if (key == "layers") {
    m.layers = get<std::size_t>(key, v);
    if (m.layers == 0) throw ConfigError("\"layers\" must be positive");
  } else if (key == "input-vectors") {
    m.input_vectors = get<std::size_t>(key, v);
    if (m.input_vectors == 0) {
      throw ConfigError("\"input-vectors\" must be positive");
    }
  } else if (key == "input") {
    const InputMode mode = parse_input_mode(get<std::string>(key, v));
    if (mode == InputMode::kWarm) {
      throw ConfigError("use \"warm-start\" to select the warm input");
    }
    if (m.input != InputMode::kWarm) m.input = mode;
  } else if (key == "sigma") {
    m.sigma = non_negative(key, get<double>(key, v));
  } else if (key == "optimizer") {
    // Handled first by apply_settings.
  } else if (key == "lr") {
    m.optim.lr = positive(key, get<double>(key, v));
  } else if (key == "momentum") {
    m.optim.momentum = non_negative(key, get<double>(key, v));
  } else if (key == "weight-decay") {
    m.optim.weight_decay = non_negative(key, get<double>(key, v));
  } else if (key == "beta2") {
    m.optim.beta2 = non_negative(key, get<double>(key, v));
  } else if (key == "eps") {
    m.optim.eps = positive(key, get<double>(key, v));
  } else if (key == "budget") {
    s.budget = get<std::size_t>(key, v);
  } else {
    throw ConfigError("unknown setting \"" + key + "\"");
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kVqa: return "vqa";
    case ModelKind::kMl: return "ml";
    case ModelKind::kMonteCarlo: return "monte_carlo";
    case ModelKind::kGreedy: return "greedy";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "vqa") return ModelKind::kVqa;
  if (text == "ml") return ModelKind::kMl;
  if (text == "monte_carlo" || text == "monte-carlo") {
    return ModelKind::kMonteCarlo;
  }
  if (text == "greedy") return ModelKind::kGreedy;
  throw ConfigError("unknown model \"" + text +
                    "\" (expected vqa, ml, monte_carlo or greedy)");
}

double RunSettings::slice() const {
  return model == ModelKind::kMl ? ml.slice : vqa.slice;
}

std::size_t RunSettings::circuit_or_layers() const {
  switch (model) {
    case ModelKind::kVqa: return static_cast<std::size_t>(vqa.circuit);
    case ModelKind::kMl: return ml.layers;
    default: return 0;
  }
}

std::string RunSettings::optimizer() const {
  switch (model) {
    case ModelKind::kVqa: return to_string(vqa.gradient);
    case ModelKind::kMl: return to_string(ml.optim.kind);
    default: return "-";
  }
}

RunSettings apply_settings(RunSettings base, const Json& j) {
  if (!j.is_object()) throw ConfigError("settings must be a JSON object");
  if (const auto it = j.find("optimizer"); it != j.end()) {
    const OptimKind kind = parse_optim_kind(get<std::string>("optimizer", *it));
    base.ml.optim = kind == OptimKind::kSgd ? OptimConfig::sgd()
                                            : OptimConfig::adam();
  }
  for (const auto& [key, value] : j.items()) apply_key(base, key, value);
  return base;
}

RunSettings settings_from_json(const Json& j) {
  return apply_settings(RunSettings{}, j);
}

Json to_json(const RunSettings& s) {
  Json j;
  j["model"] = to_string(s.model);
  j["codec"] = to_string(s.codec);
  j["gray"] = s.gray;
  j["gray-scope"] = s.gray_scope == GrayScope::kPerChunk ? "chunk" : "word";
  const bool ml = s.model == ModelKind::kMl;
  j["iterations"] = ml ? s.ml.epochs : s.vqa.iterations;
  j["slice"] = s.slice();
  j["warm-start"] = ml ? s.ml.input == InputMode::kWarm : s.vqa.warm_start;
  j["cache"] = ml ? s.ml.caching : s.vqa.caching;
  if (ml) {
    j["layers"] = s.ml.layers;
    j["input-vectors"] = s.ml.input_vectors;
    if (s.ml.input != InputMode::kWarm) j["input"] = to_string(s.ml.input);
    j["sigma"] = s.ml.sigma;
    j["optimizer"] = to_string(s.ml.optim.kind);
    j["lr"] = s.ml.optim.lr;
    j["momentum"] = s.ml.optim.momentum;
    j["weight-decay"] = s.ml.optim.weight_decay;
    j["beta2"] = s.ml.optim.beta2;
    j["eps"] = s.ml.optim.eps;
  } else {
    j["circuit"] = s.vqa.circuit;
    j["circuit3"] =
        s.vqa.circuit3 == Circuit3Variant::kRzAndRzz ? "rz-rzz" : "rz-only";
    j["gradient"] = to_string(s.vqa.gradient);
    j["shots"] = s.vqa.shots;
    j["init-angle"] = s.vqa.init_angle;
    j["spsa-A"] = s.vqa.spsa.A;
    j["spsa-c"] = s.vqa.spsa.c;
    j["spsa-alpha"] = s.vqa.spsa.alpha;
    j["spsa-gamma"] = s.vqa.spsa.gamma;
    j["spsa-eta"] = s.vqa.spsa.eta;
    j["g0-floor"] = s.vqa.spsa.g0_floor;
    j["shift-s"] = s.vqa.param_shift.s;
    j["shift-eta"] = s.vqa.param_shift.eta;
  }
  if (s.model == ModelKind::kMonteCarlo) j["budget"] = s.budget;
  return j;
}

std::string settings_digest(const RunSettings& s) {
  // 64-bit FNV-1a.
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vartsp
