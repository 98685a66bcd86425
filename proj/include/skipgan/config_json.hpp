#pragma once

#include <json.hpp>

#include "skipgan/generator.hpp"
#include "skipgan/losses.hpp"
#include "skipgan/trainer.hpp"

namespace skipgan {

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Strict key checking for user-supplied documents: every key in j must be
// listed in allowed, otherwise a config error names the offender.
void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                        const std::string& where);

}  // namespace skipgan
