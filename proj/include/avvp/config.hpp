#pragma once

#include <json.hpp>

#include "avvp/datamodel.hpp"
#include "avvp/model.hpp"
#include "avvp/trainer.hpp"

namespace avvp {

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

// 16 hex digits of FNV-1a over the canonical (sorted-key) JSON dump.
std::string config_digest(const nlohmann::json& j);
std::string config_digest(const ModelConfig& model, const TrainConfig& train);

// Fully resolved settings of a training run, as stored in config.snapshot.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string data_dir;
  std::string val_dir;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  std::string digest() const { return config_digest(to_json()); }
};

}  // namespace avvp
