#pragma once

#include <cstddef>
#include <string>

#include "vartsp/codec.hpp"
#include "vartsp/json.hpp"
#include "vartsp/ml.hpp"
#include "vartsp/optimizer.hpp"

namespace vartsp {

enum class ModelKind { kVqa, kMl, kMonteCarlo, kGreedy };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

// Everything needed to run one model on one instance except the instance and
// the seed. Field defaults are the published defaults.
struct RunSettings {
  ModelKind model = ModelKind::kVqa;
  CodecKind codec = CodecKind::kNonFactorial;
  bool gray = false;
  GrayScope gray_scope = GrayScope::kPerChunk;
  VqaConfig vqa;
  MlConfig ml;
  std::size_t budget = 0;  // Monte Carlo draws; 0 means "match"

  CodecSpec codec_for(std::size_t n) const { return {codec, gray, n, gray_scope}; }
  // Slice of the active model.
  double slice() const;
  // Circuit id for VQA, layer count for ML, 0 otherwise.
  std::size_t circuit_or_layers() const;
  // Gradient method for VQA, optimizer for ML, "-" otherwise.
  std::string optimizer() const;
};

// Keys are the long CLI flag names ("iterations", "weight-decay", ...).
// Unknown keys and ill-typed values throw ConfigError. ML optimizer
// hyperparameters start from the chosen optimizer's defaults before explicit
// keys apply. "slice" and "iterations" apply to whichever model is active.
RunSettings settings_from_json(const Json& j);
// Applies `j` on top of `base`.
RunSettings apply_settings(RunSettings base, const Json& j);
// Every key, fully resolved.
Json to_json(const RunSettings& s);

// Short stable digest of to_json(s).
std::string settings_digest(const RunSettings& s);

}  // namespace vartsp
