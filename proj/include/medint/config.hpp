#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "medint/experiment.hpp"

namespace medint {

/// Schema violation; what() starts with the dotted field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// One configuration per entry of `models` (or the single `model`); all other
/// fields are shared.
std::vector<ExperimentConfig> parse_experiment_suite(const std::string& yaml_text);
std::vector<ExperimentConfig> load_experiment_suite(const std::string& path);
/// Single-model document.
ExperimentConfig parse_experiment_config(const std::string& yaml_text);

/// Every field with defaults filled in; object keys sorted.
nlohmann::json canonical_json(const ExperimentConfig& config);
nlohmann::json model_json(const ModelConfig& model);

/// FNV-1a 64 of the compact canonical JSON, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

}  // namespace medint
