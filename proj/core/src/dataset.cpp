#include "dmn/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "dmn/rng.hpp"

namespace dmn::data {
namespace {

using nlohmann::json;

void fill_split(const DatasetConfig& config, std::uint64_t seed, const std::string& split,
                int target, int& next_scene_id, int& next_id, std::vector<Record>& out) {
  const auto templates = static_cast<std::uint64_t>(scene::num_templates());
  while (static_cast<int>(out.size()) < target) {
    const int scene_id = next_scene_id++;
    const std::uint64_t scene_seed = Rng::mix(seed, static_cast<std::uint64_t>(scene_id));
    const scene::SceneGraph sc = scene::generate_scene(config.scene, scene_seed);
    Rng pick(Rng::mix(scene_seed, 0xC0FFEE));
    int made = 0;
    for (int attempt = 0; made < config.questions_per_scene && attempt < 8 * config.questions_per_scene &&
                          static_cast<int>(out.size()) < target;
         ++attempt) {
      const auto tid = static_cast<int>(pick.uniform_index(templates));
      auto q = scene::generate_question(sc, tid, Rng::mix(scene_seed, static_cast<std::uint64_t>(attempt) + 1));
      if (!q) continue;
      Record r;
      r.id = next_id++;
      r.split = split;
      r.scene_id = scene_id;
      r.scene = sc;
      r.question = std::move(*q);
      out.push_back(std::move(r));
      ++made;
    }
  }
}

std::vector<std::string> layout_strings(const layout::Program& p) {
  std::vector<std::string> out;
  for (const auto& t : p) out.push_back(layout::format_token(t));
  return out;
}

}  // namespace

Dataset generate_dataset(const DatasetConfig& config, std::uint64_t seed) {
  if (config.train_questions < 0 || config.val_questions < 0 || config.test_questions < 0 ||
      config.questions_per_scene < 1) {
    throw std::invalid_argument("invalid dataset config");
  }
  Dataset d;
  int scene_id = 0;
  int id = 0;
  fill_split(config, seed, "train", config.train_questions, scene_id, id, d.train);
  fill_split(config, seed, "val", config.val_questions, scene_id, id, d.val);
  fill_split(config, seed, "test", config.test_questions, scene_id, id, d.test);
  return d;
}

json scene_to_json(const scene::SceneGraph& sc) {
  json objects = json::array();
  for (const auto& o : sc.objects) {
    objects.push_back({{"row", o.row},
                       {"col", o.col},
                       {"shape", scene::shape_name(o.shape)},
                       {"color", scene::color_name(o.color)},
                       {"size", scene::size_name(o.size)}});
  }
  return {{"grid_size", sc.grid_size}, {"objects", std::move(objects)}};
}

scene::SceneGraph scene_from_json(const json& j) {
  scene::SceneGraph sc;
  sc.grid_size = j.at("grid_size").get<int>();
  for (const auto& o : j.at("objects")) {
    scene::Object obj;
    obj.row = o.at("row").get<int>();
    obj.col = o.at("col").get<int>();
    const auto shape = scene::parse_shape(o.at("shape").get<std::string>());
    const auto color = scene::parse_color(o.at("color").get<std::string>());
    const auto size = scene::parse_size(o.at("size").get<std::string>());
    if (!shape || !color || !size) throw scene::SceneError("unknown object attribute in scene");
    obj.shape = *shape;
    obj.color = *color;
    obj.size = *size;
    sc.objects.push_back(obj);
  }
  scene::canonicalize(sc);
  scene::check_scene(sc);
  return sc;
}

json record_to_json(const Record& r) {
  return {{"id", r.id},
          {"split", r.split},
          {"scene_id", r.scene_id},
          {"scene", scene_to_json(r.scene)},
          {"question", r.question.question},
          {"layout", layout_strings(r.question.expert_layout)},
          {"answer", scene::answer_text(r.question.answer)},
          {"category", scene::category_name(r.question.category)},
          {"template", r.question.template_id}};
}

Record record_from_json(const json& j) {
  Record r;
  r.id = j.value("id", 0);
  r.split = j.value("split", std::string{});
  r.scene_id = j.value("scene_id", 0);
  r.scene = scene_from_json(j.at("scene"));
  r.question.question = j.at("question").get<std::vector<std::string>>();
  std::string text;
  for (const auto& t : j.at("layout")) text += t.get<std::string>() + " ";
  r.question.expert_layout = layout::parse_layout_text(text);
  r.question.answer = scene::answer_index(j.at("answer").get<std::string>());
  const auto cat = scene::parse_category(j.at("category").get<std::string>());
  if (!cat) throw std::invalid_argument("unknown category in record");
  r.question.category = *cat;
  r.question.template_id = j.value("template", 0);
  return r;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  for (const Record& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw DatasetError("failed writing " + path.string());
}

std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace dmn::data
