#ifndef DMN_DATASET_HPP_
#define DMN_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmn/scene.hpp"

namespace dmn::data {

// Unreadable, unwritable or malformed dataset files.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  scene::SceneConfig scene;
  int train_questions = 2000;
  int val_questions = 400;
  int test_questions = 400;
  int questions_per_scene = 5;
};

struct Record {
  int id = 0;
  std::string split;
  int scene_id = 0;
  scene::SceneGraph scene;
  scene::QuestionInstance question;
};

struct Dataset {
  std::vector<Record> train;
  std::vector<Record> val;
  std::vector<Record> test;
};

// Pure function of (config, seed). Scene ids are disjoint across splits.
Dataset generate_dataset(const DatasetConfig& config, std::uint64_t seed);

nlohmann::json scene_to_json(const scene::SceneGraph& scene);
scene::SceneGraph scene_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_jsonl(const std::filesystem::path& path);

// FNV-1a over the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace dmn::data

#endif  // DMN_DATASET_HPP_
