#include "dmn/harness.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dmn/modules.hpp"
#include "dmn/ops.hpp"

namespace dmn::harness {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_words(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("cannot create output directory " + dir.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
  if (!f) throw InputError("write failed for " + path.string());
}

KeyValueConfig load_config(const std::string& path) {
  if (path.empty()) return effective_config({});
  return effective_config(KeyValueConfig::load(path));
}

json attention_grid(std::span<const double> values, int g) {
  json rows = json::array();
  for (int r = 0; r < g; ++r) {
    json row = json::array();
    for (int c = 0; c < g; ++c) row.push_back(values[static_cast<std::size_t>(r * g + c)]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string eval_source_name(train::LayoutSource s) {
  return s == train::LayoutSource::kExpert ? "expert" : "predicted";
}

std::vector<data::Record> read_split(const fs::path& dir, const std::string& name,
                                     std::map<std::string, std::string>& hashes) {
  const fs::path p = dir / (name + ".jsonl");
  if (!fs::exists(p)) throw InputError("missing dataset file " + p.string());
  hashes[p.filename().string()] = data::file_hash(p);
  return data::read_jsonl(p);
}

}  // namespace

KeyValueConfig default_config() {
  KeyValueConfig c;
  const data::DatasetConfig d;
  const train::TrainConfig t;
  c.set("seed", "1");
  c.set("scene.grid_size", std::to_string(d.scene.grid_size));
  c.set("scene.min_objects", std::to_string(d.scene.min_objects));
  c.set("scene.max_objects", std::to_string(d.scene.max_objects));
  c.set("data.train_questions", std::to_string(d.train_questions));
  c.set("data.val_questions", std::to_string(d.val_questions));
  c.set("data.test_questions", std::to_string(d.test_questions));
  c.set("data.questions_per_scene", std::to_string(d.questions_per_scene));
  c.set("train.ablation", std::string(ablation_name(t.ablation)));
  c.set("train.cloning_epochs", std::to_string(t.cloning_epochs));
  c.set("train.joint_epochs", std::to_string(t.joint_epochs));
  c.set("train.batch_size", std::to_string(t.batch_size));
  auto dbl = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  c.set("train.learning_rate", dbl(t.adam.learning_rate));
  c.set("train.joint_learning_rate", dbl(t.joint_learning_rate));
  c.set("train.beta1", dbl(t.adam.beta1));
  c.set("train.beta2", dbl(t.adam.beta2));
  c.set("train.epsilon", dbl(t.adam.epsilon));
  c.set("train.rollouts", std::to_string(t.rollouts));
  c.set("train.baseline_decay", dbl(t.baseline_decay));
  c.set("train.grad_clip", dbl(t.grad_clip));
  c.set("train.eval_threads", std::to_string(t.eval_threads));
  c.set("eval.beam", std::to_string(t.eval_beam));
  c.set("model.word_dim", std::to_string(t.model.policy.word_dim));
  c.set("model.token_dim", std::to_string(t.model.policy.token_dim));
  c.set("model.hidden_dim", std::to_string(t.model.policy.hidden_dim));
  c.set("model.attention_dim", std::to_string(t.model.policy.attention_dim));
  c.set("model.max_len", std::to_string(t.model.policy.max_len));
  c.set("model.module_hidden_dim", std::to_string(t.model.module_hidden_dim));
  return c;
}

KeyValueConfig effective_config(const KeyValueConfig& overrides) {
  KeyValueConfig c = default_config();
  for (const auto& [k, v] : overrides.values()) {
    if (!c.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    c.set(k, v);
  }
  return c;
}

data::DatasetConfig dataset_config(const KeyValueConfig& cfg) {
  data::DatasetConfig d;
  d.scene.grid_size = static_cast<int>(cfg.get_int("scene.grid_size", d.scene.grid_size));
  d.scene.min_objects = static_cast<int>(cfg.get_int("scene.min_objects", d.scene.min_objects));
  d.scene.max_objects = static_cast<int>(cfg.get_int("scene.max_objects", d.scene.max_objects));
  d.train_questions = static_cast<int>(cfg.get_int("data.train_questions", d.train_questions));
  d.val_questions = static_cast<int>(cfg.get_int("data.val_questions", d.val_questions));
  d.test_questions = static_cast<int>(cfg.get_int("data.test_questions", d.test_questions));
  d.questions_per_scene =
      static_cast<int>(cfg.get_int("data.questions_per_scene", d.questions_per_scene));
  if (d.scene.grid_size < 2) throw ConfigError("scene.grid_size must be >= 2");
  if (d.scene.min_objects < 1 || d.scene.max_objects < d.scene.min_objects ||
      d.scene.max_objects > d.scene.grid_size * d.scene.grid_size) {
    throw ConfigError("scene object counts must satisfy 1 <= min <= max <= grid_size^2");
  }
  if (d.train_questions < 0 || d.val_questions < 0 || d.test_questions < 0) {
    throw ConfigError("question counts must be >= 0");
  }
  if (d.questions_per_scene < 1) throw ConfigError("data.questions_per_scene must be >= 1");
  return d;
}

namespace {

std::uint64_t config_seed(const KeyValueConfig& cfg) {
  const std::string text = cfg.get_string("seed", "1");
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("seed must be an unsigned integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

train::TrainConfig train_config(const KeyValueConfig& cfg) {
  train::TrainConfig t;
  auto size = [&cfg](const std::string& key, std::size_t fallback) {
    const long long v = cfg.get_int(key, static_cast<long long>(fallback));
    if (v < 1) throw ConfigError("config key '" + key + "' must be >= 1");
    return static_cast<std::size_t>(v);
  };
  t.seed = config_seed(cfg);
  try {
    t.ablation = parse_ablation(cfg.get_string("train.ablation", "full"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  t.cloning_epochs = static_cast<int>(cfg.get_int("train.cloning_epochs", t.cloning_epochs));
  t.joint_epochs = static_cast<int>(cfg.get_int("train.joint_epochs", t.joint_epochs));
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.adam.learning_rate = cfg.get_double("train.learning_rate", t.adam.learning_rate);
  t.joint_learning_rate = cfg.get_double("train.joint_learning_rate", t.joint_learning_rate);
  t.adam.beta1 = cfg.get_double("train.beta1", t.adam.beta1);
  t.adam.beta2 = cfg.get_double("train.beta2", t.adam.beta2);
  t.adam.epsilon = cfg.get_double("train.epsilon", t.adam.epsilon);
  t.rollouts = static_cast<int>(cfg.get_int("train.rollouts", t.rollouts));
  t.baseline_decay = cfg.get_double("train.baseline_decay", t.baseline_decay);
  t.grad_clip = cfg.get_double("train.grad_clip", t.grad_clip);
  t.eval_threads = size("train.eval_threads", t.eval_threads);
  t.eval_beam = size("eval.beam", t.eval_beam);
  t.model.policy.word_dim = size("model.word_dim", t.model.policy.word_dim);
  t.model.policy.token_dim = size("model.token_dim", t.model.policy.token_dim);
  t.model.policy.hidden_dim = size("model.hidden_dim", t.model.policy.hidden_dim);
  t.model.policy.attention_dim = size("model.attention_dim", t.model.policy.attention_dim);
  t.model.policy.max_len = size("model.max_len", t.model.policy.max_len);
  t.model.module_hidden_dim = size("model.module_hidden_dim", t.model.module_hidden_dim);
  t.model.grid_size = static_cast<int>(cfg.get_int("scene.grid_size", t.model.grid_size));
  t.validate();
  return t;
}

json trace_json(const std::vector<std::string>& question, const train::Prediction& p,
                int grid_size) {
  json j;
  j["question"] = join_words(question);
  j["layout"] = layout::format_ids(p.tokens);
  j["answer"] = scene::answer_text(p.answer);
  j["logits"] = p.execution.logits.data();
  j["log_prob"] = p.layout.log_prob();
  json steps = json::array();
  for (std::size_t i = 0; i < p.layout.word_attention.size(); ++i) {
    steps.push_back({{"token", layout::token_name(p.tokens[i])},
                     {"word_attention", p.layout.word_attention[i]}});
  }
  j["decoder"] = std::move(steps);
  json nodes = json::array();
  for (const nn::NodeTrace& n : p.execution.trace) {
    json node{{"path", n.path}, {"module", layout::kind_name(n.kind)}};
    if (layout::signature(n.kind).output == layout::OutputType::kAttention) {
      node["attention"] = attention_grid(n.output.data(), grid_size);
    } else {
      node["logits"] = n.output.data();
    }
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

scene::SceneGraph load_scene_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open scene file " + path.string());
  std::string line;
  while (std::getline(f, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::string rest((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    // Not one record per line; try the whole file as a single document.
    try {
      j = json::parse(line + "\n" + rest);
    } catch (const json::exception& e) {
      throw InputError("malformed scene file " + path.string() + ": " + e.what());
    }
  }
  try {
    return data::scene_from_json(j.contains("scene") ? j.at("scene") : j);
  } catch (const std::exception& e) {
    throw InputError("malformed scene file " + path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = m.config.values();
  j["seed"] = m.seed;
  j["dataset_hash"] = m.dataset_hashes;
  j["version"] = kVersion;
  j["outputs"] = m.outputs;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string ablation;
  std::optional<std::size_t> beam;
  bool trace = false;
  std::string data;
  std::string checkpoint;
  std::string split = "val";
  std::string layouts = "predicted";
  std::string scene;
  std::string question;
  std::string layout_text;
};

KeyValueConfig resolve(const Options& o) {
  KeyValueConfig c = load_config(o.config);
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (!o.ablation.empty()) c.set("train.ablation", o.ablation);
  if (o.beam) c.set("eval.beam", std::to_string(*o.beam));
  return c;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  const KeyValueConfig cfg = resolve(o);
  const data::DatasetConfig dc = dataset_config(cfg);
  const std::uint64_t seed = config_seed(cfg);
  const fs::path dir = o.out;
  ensure_dir(dir);
  const data::Dataset ds = data::generate_dataset(dc, seed);
  Manifest m{"gen-data", cfg, seed, {}, {}};
  const std::pair<const char*, const std::vector<data::Record>*> splits[] = {
      {"train", &ds.train}, {"val", &ds.val}, {"test", &ds.test}};
  for (const auto& [name, records] : splits) {
    const fs::path p = dir / (std::string(name) + ".jsonl");
    data::write_jsonl(p, *records);
    m.dataset_hashes[p.filename().string()] = data::file_hash(p);
    m.outputs.push_back(p.filename().string());
    out << name << ": " << records->size() << " questions -> " << p.string() << "\n";
  }
  write_manifest(dir, m);
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const KeyValueConfig cfg = resolve(o);
  const train::TrainConfig tc = train_config(cfg);
  if (o.data.empty()) throw InputError("train needs --data <dataset dir>");
  std::map<std::string, std::string> hashes;
  const auto train_split = read_split(o.data, "train", hashes);
  const auto val_split = read_split(o.data, "val", hashes);
  const fs::path dir = o.out;
  ensure_dir(dir);

  train::TrainResult result =
      train::train(tc, train_split, val_split, [&out](const train::EpochReport& e) {
        out << "epoch " << e.epoch << " [" << e.phase << "] loss " << e.train_loss << " val "
            << e.val.overall() << " layout " << e.layout_accuracy << " (" << e.seconds << "s)"
            << std::endl;
      });
  const std::string tag(ablation_name(tc.ablation));
  const std::string report_name = "report_" + tag + ".csv";
  const std::string summary_name = "summary_" + tag + ".json";
  const std::string ckpt_name = "checkpoint_" + tag + ".dmn";
  write_text(dir / report_name, train::report_csv(result.report));
  ad::save_checkpoint(dir / ckpt_name, result.best_checkpoint);

  json summary;
  summary["ablation"] = tag;
  summary["seed"] = tc.seed;
  summary["best_epoch"] = result.report.best_epoch;
  summary["best_val_accuracy"] = result.report.best_val_accuracy;
  summary["eval_layouts"] = eval_source_name(train::default_eval_source(tc.ablation));
  if (!result.report.epochs.empty()) {
    const auto& best = result.report.epochs[static_cast<std::size_t>(
        std::max(0, result.report.best_epoch))];
    summary["val"] = {{"overall", best.val.overall()},
                      {"exist", best.val.category(scene::Category::kExist)},
                      {"count", best.val.category(scene::Category::kCount)},
                      {"yes_no", best.val.category(scene::Category::kYesNo)},
                      {"compare", best.val.category(scene::Category::kCompare)},
                      {"layout_exact_match", best.val.layout_exact_match()}};
  }
  write_text(dir / summary_name, summary.dump(2) + "\n");
  write_manifest(dir, Manifest{"train", cfg, tc.seed, hashes, {report_name, summary_name, ckpt_name}});
  out << "best epoch " << result.report.best_epoch << " val accuracy "
      << result.report.best_val_accuracy << " -> " << (dir / ckpt_name).string() << "\n";
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  KeyValueConfig cfg = resolve(o);
  if (o.data.empty()) throw InputError("eval needs --data <dataset dir>");
  std::map<std::string, std::string> hashes;
  const auto records = read_split(o.data, o.split, hashes);
  const fs::path dir = o.out;
  ensure_dir(dir);
  const std::size_t beam = static_cast<std::size_t>(cfg.get_int("eval.beam", 1));
  const std::size_t threads = static_cast<std::size_t>(cfg.get_int("train.eval_threads", 1));

  train::EvalResult result;
  std::vector<std::string> outputs{"eval.csv"};
  if (o.layouts == "symbolic") {
    result = train::evaluate_symbolic(records);
  } else {
    if (o.checkpoint.empty()) throw InputError("eval needs --checkpoint");
    if (o.layouts != "predicted" && o.layouts != "expert") {
      throw InputError("--layouts must be predicted, expert or symbolic");
    }
    const auto model = DmnModel::from_checkpoint(ad::load_checkpoint(o.checkpoint));
    if (model->config().grid_size != (records.empty() ? model->config().grid_size
                                                      : records.front().scene.grid_size)) {
      throw InputError("dataset grid size does not match the checkpoint");
    }
    const auto examples = train::prepare(records);
    const auto source =
        o.layouts == "expert" ? train::LayoutSource::kExpert : train::LayoutSource::kPredicted;
    result = train::evaluate(*model, examples, source, beam, threads);
    if (o.trace) {
      std::ostringstream lines;
      for (const auto& ex : examples) {
        const auto p = train::predict(*model, ex, source, beam);
        json j = trace_json(ex.record->question.question, p, model->config().grid_size);
        j["id"] = ex.record->id;
        j["expected"] = scene::answer_text(ex.record->question.answer);
        lines << j.dump() << "\n";
      }
      write_text(dir / "traces.jsonl", lines.str());
      outputs.push_back("traces.jsonl");
    }
  }
  const std::string csv = train::eval_csv_header() + "\n" + train::eval_csv_row(result) + "\n";
  write_text(dir / "eval.csv", csv);
  cfg.set("seed", cfg.get_string("seed", "1"));
  write_manifest(dir, Manifest{"eval " + o.split + " " + o.layouts, cfg,
                               config_seed(cfg), hashes, outputs});
  out << csv;
  return kOk;
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream& err) {
  const KeyValueConfig cfg = resolve(o);
  if (o.checkpoint.empty()) throw InputError("infer needs --checkpoint");
  if (o.scene.empty()) throw InputError("infer needs --scene");
  const auto words = split_words(o.question);
  if (words.empty()) throw InputError("infer needs a non-empty --question");
  const auto model = DmnModel::from_checkpoint(ad::load_checkpoint(o.checkpoint));
  const scene::SceneGraph sg = load_scene_file(o.scene);
  if (sg.grid_size != model->config().grid_size) {
    throw InputError("scene grid size does not match the checkpoint");
  }
  for (const auto& w : words) {
    if (model->policy().vocabulary().index(w) == policy::WordVocabulary::kUnk) {
      err << "warning: '" << w << "' is not in the vocabulary; using " << policy::WordVocabulary::kUnkWord << "\n";
    }
  }
  data::Record rec;
  rec.scene = sg;
  rec.question.question = words;
  rec.question.expert_layout = layout::parse_layout_text("find exist");
  const auto examples = train::prepare(std::span<const data::Record>(&rec, 1));
  const std::size_t beam = static_cast<std::size_t>(cfg.get_int("eval.beam", 1));
  const auto p = train::predict(*model, examples.front(), train::LayoutSource::kPredicted, beam);
  out << "layout: " << layout::format_ids(p.tokens) << "\n";
  out << "answer: " << scene::answer_text(p.answer) << "\n";
  if (o.trace) out << trace_json(words, p, sg.grid_size).dump() << "\n";
  return kOk;
}

int cmd_layout_validate(const Options& o, std::ostream& out) {
  const layout::Program prog = layout::parse_layout_text(o.layout_text);
  const layout::ValidityReport r = layout::validate(prog);
  for (std::size_t i = 0; i < r.depths.size(); ++i) {
    out << "token " << i + 1 << " " << layout::format_token(prog[i]) << " depth " << r.depths[i]
        << "\n";
  }
  if (r.valid) {
    out << "valid\n";
    return kOk;
  }
  out << "invalid at token " << *r.error_index + 1 << ": " << r.message << "\n";
  return kUsageError;
}

int cmd_layout_exec(const Options& o, std::ostream& out) {
  if (o.scene.empty()) throw InputError("layout exec needs --scene");
  const layout::Program prog = layout::parse_layout_text(o.layout_text);
  const layout::ValidityReport r = layout::validate(prog);
  if (!r.valid) {
    out << "invalid at token " << *r.error_index + 1 << ": " << r.message << "\n";
    return kUsageError;
  }
  const scene::SceneGraph sg = load_scene_file(o.scene);
  out << scene::answer_text(scene::symbolic_execute(prog, sg)) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic modular networks over synthetic grid scenes", "dmn"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* c) {
    c->add_option("--config", o.config, "flat key = value config file");
    c->add_option("--seed", o.seed, "random seed");
  };

  auto* gen = app.add_subcommand("gen-data", "generate train/val/test JSON-lines files");
  common(gen);
  gen->add_option("--out", o.out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "cloning then joint REINFORCE training");
  common(tr);
  tr->add_option("--data", o.data, "dataset directory")->required();
  tr->add_option("--out", o.out, "output directory")->required();
  tr->add_option("--ablation", o.ablation, "full | baseline1 | baseline2")
      ->check(CLI::IsMember({"full", "baseline1", "baseline2"}));

  auto* ev = app.add_subcommand("eval", "accuracy table for one split");
  common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "checkpoint file");
  ev->add_option("--data", o.data, "dataset directory")->required();
  ev->add_option("--split", o.split, "train | val | test")->capture_default_str();
  ev->add_option("--out", o.out, "output directory")->required();
  ev->add_option("--layouts", o.layouts, "predicted | expert | symbolic")->capture_default_str();
  ev->add_option("--beam", o.beam, "beam width for layout decoding");
  ev->add_flag("--trace", o.trace, "also write traces.jsonl");

  auto* inf = app.add_subcommand("infer", "answer one question about one scene");
  common(inf);
  inf->add_option("--checkpoint", o.checkpoint, "checkpoint file")->required();
  inf->add_option("--scene", o.scene, "scene file (dataset record or scene object)")->required();
  inf->add_option("--question", o.question, "question text")->required();
  inf->add_option("--beam", o.beam, "beam width for layout decoding");
  inf->add_flag("--trace", o.trace, "print a JSON reasoning trace");

  auto* lay = app.add_subcommand("layout", "layout utilities");
  lay->require_subcommand(1);
  auto* lv = lay->add_subcommand("validate", "stack-check a layout");
  lv->add_option("layout", o.layout_text, "layout text")->required();
  auto* lx = lay->add_subcommand("exec", "run a layout through the symbolic executor");
  lx->add_option("layout", o.layout_text, "layout text")->required();
  lx->add_option("--scene", o.scene, "scene file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*gen) return cmd_gen_data(o, out);
    if (*tr) return cmd_train(o, out);
    if (*ev) return cmd_eval(o, out);
    if (*inf) return cmd_infer(o, out, err);
    if (*lv) return cmd_layout_validate(o, out);
    if (*lx) return cmd_layout_exec(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const layout::LayoutParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ad::CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "malformed input: " << e.what() << "\n";
    return kUsageError;
  } catch (const data::DatasetError& e) {
    err << "dataset error: " << e.what() << "\n";
    return kUsageError;
  } catch (const scene::SceneError& e) {
    err << "scene error: " << e.what() << "\n";
    return kUsageError;
  } catch (const scene::ExecutionError& e) {
    err << "execution error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kInvariantViolation;
  }
  return kUsageError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace dmn::harness
