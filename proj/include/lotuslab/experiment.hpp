#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lotuslab/scenes.hpp"
#include "lotuslab/train.hpp"

namespace lotuslab {

/// Raised for malformed user input (bad schema, missing files); the CLI
/// maps it to exit code 1.
struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Experiment description: dataset pools, resolved protocol, eval knobs.
/// The JSON schema is strict; unknown keys are rejected.
struct ExperimentFile {
    int schema_version = 1;
    std::string output_dir;
    std::vector<std::string> dataset_pools;
    ProtocolConfig protocol;
    int eval_n_seeds = 8;
    uint64_t eval_seed_base = 1000;

    bool operator==(const ExperimentFile&) const = default;
};

ExperimentFile experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentFile& exp);
ExperimentFile load_experiment(const std::filesystem::path& path);
void save_experiment(const std::filesystem::path& path, const ExperimentFile& exp);

/// Dataset generation request: output directory plus a DatasetSpec.
struct DataSpecFile {
    int schema_version = 1;
    std::string output_dir;
    DatasetSpec spec;
};

DataSpecFile load_data_spec(const std::filesystem::path& path);
nlohmann::json data_spec_to_json(const DataSpecFile& f);

}  // namespace lotuslab
