#ifndef DMN_HARNESS_HPP_
#define DMN_HARNESS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmn/config.hpp"
#include "dmn/dataset.hpp"
#include "dmn/trainer.hpp"

namespace dmn::harness {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kInvariantViolation = 2 };

// Raised for bad input files and arguments; maps to kUsageError.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every recognised key with its default; unknown keys are rejected.
KeyValueConfig default_config();
// Defaults overlaid with `overrides`. Throws ConfigError on unknown keys.
KeyValueConfig effective_config(const KeyValueConfig& overrides);

data::DatasetConfig dataset_config(const KeyValueConfig& cfg);
train::TrainConfig train_config(const KeyValueConfig& cfg);

// Per-question reasoning trace: layout, answer, logits, decoder word
// attention, and every node's output (G x G map or logits) in post-order.
nlohmann::json trace_json(const std::vector<std::string>& question,
                          const train::Prediction& prediction, int grid_size);

// Scene file: a dataset record (first line of a JSON-lines file) or a bare
// {grid_size, objects} object.
scene::SceneGraph load_scene_file(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  KeyValueConfig config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> dataset_hashes;
  std::vector<std::string> outputs;
};
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

// Full CLI: gen-data, train, eval, infer, layout validate|exec.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmn::harness

#endif  // DMN_HARNESS_HPP_
