#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "dmn/dataset.hpp"
#include "dmn/scene.hpp"

namespace scene = dmn::scene;
namespace layout = dmn::layout;
namespace data = dmn::data;
using scene::Object;

namespace {

scene::SceneGraph make_scene(std::vector<Object> objects, int g = 5) {
  scene::SceneGraph s{g, std::move(objects)};
  scene::canonicalize(s);
  return s;
}

Object obj(int r, int c, scene::Color color, scene::Shape shape,
           scene::Size size = scene::Size::kSmall) {
  return Object{r, c, shape, color, size};
}

int answer(const std::string& program, const scene::SceneGraph& s) {
  return scene::symbolic_execute(layout::parse_layout_text(program), s);
}

int idx(const char* word) { return scene::answer_index(word); }

}  // namespace

TEST(Scene, FullGridIsFullyOccupied) {
  const auto s = scene::generate_scene({2, 4, 4}, 11);
  ASSERT_EQ(s.objects.size(), 4u);
  std::set<std::pair<int, int>> cells;
  for (const Object& o : s.objects) cells.insert({o.row, o.col});
  EXPECT_EQ(cells.size(), 4u);
}

TEST(Scene, SameSeedSameScene) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(scene::generate_scene({}, seed), scene::generate_scene({}, seed));
  }
  EXPECT_NE(scene::generate_scene({}, 1), scene::generate_scene({}, 2));
}

TEST(Scene, MeanObjectCount) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = scene::generate_scene({5, 3, 8}, seed);
    EXPECT_NO_THROW(scene::check_scene(s));
    total += static_cast<double>(s.objects.size());
  }
  EXPECT_NEAR(total / 1000.0, 5.5, 0.2);
}

TEST(Scene, RejectsBadConfig) {
  EXPECT_THROW(scene::generate_scene({2, 1, 5}, 0), scene::SceneError);
  EXPECT_THROW(scene::generate_scene({5, 0, 3}, 0), scene::SceneError);
  EXPECT_THROW(scene::generate_scene({5, 4, 3}, 0), scene::SceneError);
}

TEST(Scene, CheckSceneRejectsInvalid) {
  EXPECT_THROW(scene::check_scene(make_scene({})), scene::SceneError);
  EXPECT_THROW(scene::check_scene(make_scene({obj(5, 0, scene::Color::kRed, scene::Shape::kCircle)})),
               scene::SceneError);
  EXPECT_THROW(scene::check_scene(make_scene({obj(1, 1, scene::Color::kRed, scene::Shape::kCircle),
                                              obj(1, 1, scene::Color::kBlue, scene::Shape::kSquare)})),
               scene::SceneError);
}

TEST(Scene, FeatureLayout) {
  const auto s = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle)});
  const auto fm = scene::scene_features(s);
  ASSERT_EQ(fm.values.size(), 25u * scene::kFeatureDim);
  // Occupied cell: exactly three attribute ones, position (0,0).
  double attr = 0.0;
  for (std::size_t c = 0; c + 2 < scene::kFeatureDim; ++c) attr += fm.at(0, 0, c);
  EXPECT_EQ(attr, 3.0);
  EXPECT_EQ(fm.at(0, 0, scene::kFeatureDim - 2), 0.0);
  EXPECT_EQ(fm.at(0, 0, scene::kFeatureDim - 1), 0.0);
  // Empty cell: attributes zero, position set.
  for (std::size_t c = 0; c + 2 < scene::kFeatureDim; ++c) EXPECT_EQ(fm.at(4, 2, c), 0.0);
  EXPECT_EQ(fm.at(4, 2, scene::kFeatureDim - 2), 1.0);
  EXPECT_EQ(fm.at(4, 2, scene::kFeatureDim - 1), 0.5);
  for (double v : fm.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Scene, FeatureRoundTrip) {
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const auto s = scene::generate_scene({}, seed);
    EXPECT_EQ(scene::decode_features(scene::scene_features(s)), s);
  }
}

TEST(Scene, AnswerVocabulary) {
  const auto& v = scene::answer_vocabulary();
  ASSERT_EQ(v.size(), 22u);
  EXPECT_EQ(v[0], "yes");
  EXPECT_EQ(v[1], "no");
  EXPECT_EQ(v[2], "0");
  EXPECT_EQ(v[11], "9");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(scene::answer_index(v[i]), static_cast<int>(i));
  EXPECT_THROW(scene::answer_index("purple"), std::out_of_range);
}

TEST(Symbolic, WorkedExamples) {
  const auto three_red = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle),
                                     obj(1, 3, scene::Color::kRed, scene::Shape::kSquare),
                                     obj(4, 4, scene::Color::kRed, scene::Shape::kTriangle),
                                     obj(2, 2, scene::Color::kBlue, scene::Shape::kSquare)});
  EXPECT_EQ(answer("find[color=red] count", three_red), idx("3"));
  EXPECT_EQ(answer("find[shape=circle] exist", make_scene({obj(0, 0, scene::Color::kRed,
                                                                  scene::Shape::kSquare)})),
            idx("no"));
  const auto two_two = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle),
                                   obj(0, 1, scene::Color::kRed, scene::Shape::kSquare),
                                   obj(1, 0, scene::Color::kBlue, scene::Shape::kCircle),
                                   obj(1, 1, scene::Color::kBlue, scene::Shape::kTriangle)});
  EXPECT_EQ(answer("find[color=red] find[color=blue] equal_to", two_two), idx("yes"));
  EXPECT_EQ(answer("find[color=red] find[color=blue] greater_than", two_two), idx("no"));
}

TEST(Symbolic, SetOperations) {
  const auto s = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle, scene::Size::kLarge),
                             obj(0, 4, scene::Color::kRed, scene::Shape::kSquare),
                             obj(2, 2, scene::Color::kBlue, scene::Shape::kCircle),
                             obj(4, 1, scene::Color::kGray, scene::Shape::kTriangle)});
  EXPECT_EQ(answer("find[color=red] find[shape=circle] and count", s), idx("1"));
  EXPECT_EQ(answer("find[color=red] find[shape=circle] or count", s), idx("3"));
  EXPECT_EQ(answer("find[color=red] filter[shape=square] count", s), idx("1"));
  // Right of the blue circle at column 2: the red square only.
  EXPECT_EQ(answer("find[color=blue] relocate[rel=right] count", s), idx("1"));
  EXPECT_EQ(answer("find[color=blue] relocate[rel=below] describe[attr=shape]", s), idx("triangle"));
  EXPECT_EQ(answer("find[size=large] describe[attr=color]", s), idx("red"));
  EXPECT_EQ(answer("find[color=blue] find[color=gray] compare[attr=size]", s), idx("yes"));
  EXPECT_EQ(answer("find[color=blue] find[size=large] compare[attr=shape]", s), idx("yes"));
  EXPECT_EQ(answer("find[color=red] find[color=gray] less_than", s), idx("no"));
  EXPECT_EQ(answer("find[shape=square] is_present", s), idx("yes"));
}

TEST(Symbolic, Errors) {
  const auto s = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle),
                             obj(0, 1, scene::Color::kRed, scene::Shape::kSquare)});
  EXPECT_THROW(answer("find[color=red] describe[attr=shape]", s), scene::AmbiguityError);
  EXPECT_THROW(answer("find[color=red] find[color=blue] compare[attr=shape]", s),
               scene::AmbiguityError);
  EXPECT_THROW(answer("find count", s), scene::BindingError);
  EXPECT_THROW(answer("find[color=purple] count", s), scene::BindingError);
  EXPECT_THROW(answer("find[color=red] relocate[rel=behind] count", s), scene::BindingError);
  EXPECT_THROW(answer("find[color=red] find[color=red] count", s), scene::ExecutionError);
}

TEST(Symbolic, CountCapsAtNine) {
  std::vector<Object> many;
  for (int i = 0; i < 12; ++i) many.push_back(obj(i / 5, i % 5, scene::Color::kRed, scene::Shape::kCircle));
  EXPECT_EQ(answer("find[color=red] count", make_scene(many)), idx("9"));
}

TEST(Symbolic, EmptyIntermediates) {
  const auto s = make_scene({obj(0, 0, scene::Color::kRed, scene::Shape::kCircle),
                             obj(2, 2, scene::Color::kBlue, scene::Shape::kSquare)});
  auto prog = [](const char* text) { return layout::parse_layout_text(text); };
  EXPECT_TRUE(scene::has_empty_intermediate(prog("find[color=gray] find[shape=circle] or count"), s));
  EXPECT_FALSE(scene::has_empty_intermediate(prog("find[color=red] find[shape=square] or count"), s));
  EXPECT_TRUE(scene::has_empty_intermediate(prog("find[color=red] relocate[rel=left] exist"), s));
  EXPECT_FALSE(scene::has_empty_intermediate(prog("find[color=red] relocate[rel=right] exist"), s));
  // Empty filter or relocate inputs are rejected; an empty set feeding a readout is allowed.
  EXPECT_TRUE(scene::has_empty_intermediate(prog("find[color=gray] filter[shape=circle] exist"), s));
  EXPECT_FALSE(scene::has_empty_intermediate(prog("find[color=red] filter[shape=square] exist"), s));
  EXPECT_FALSE(scene::has_empty_intermediate(prog("find[color=gray] exist"), s));
}

TEST(Symbolic, MonotoneUnderAddedMatch) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = scene::generate_scene({}, seed);
    if (s.objects.size() >= 25) continue;
    const int before = answer("find[color=green] count", s);
    std::set<std::pair<int, int>> used;
    for (const Object& o : s.objects) used.insert({o.row, o.col});
    for (int c = 0; c < 25; ++c) {
      if (!used.contains({c / 5, c % 5})) {
        s.objects.push_back(obj(c / 5, c % 5, scene::Color::kGreen, scene::Shape::kCircle));
        break;
      }
    }
    scene::canonicalize(s);
    EXPECT_GE(answer("find[color=green] count", s), before);
  }
}

TEST(Symbolic, OrContainsAnd) {
  const char* colors[] = {"red", "green", "blue", "gray", "yellow"};
  const char* shapes[] = {"circle", "square", "triangle"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = scene::generate_scene({}, seed);
    for (const char* c : colors) {
      for (const char* sh : shapes) {
        const std::string a = std::string("find[color=") + c + "] find[shape=" + sh + "] ";
        const int n_or = std::stoi(scene::answer_text(answer(a + "or count", s)));
        const int n_and = std::stoi(scene::answer_text(answer(a + "and count", s)));
        const int n_c = std::stoi(scene::answer_text(answer(std::string("find[color=") + c + "] count", s)));
        const int n_s = std::stoi(scene::answer_text(answer(std::string("find[shape=") + sh + "] count", s)));
        EXPECT_GE(n_or, n_and);
        EXPECT_GE(n_or, std::max(n_c, n_s));
      }
    }
  }
}

TEST(Questions, TemplateCoverage) {
  ASSERT_GE(scene::num_templates(), 8u);
  std::set<scene::Category> categories;
  std::set<layout::ModuleKind> kinds;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto s = scene::generate_scene({}, seed);
    for (std::size_t t = 0; t < scene::num_templates(); ++t) {
      const auto q = scene::generate_question(s, static_cast<int>(t), seed * 31 + t);
      if (!q) continue;
      categories.insert(q->category);
      for (const auto& tok : q->expert_layout) kinds.insert(tok.kind);
    }
  }
  EXPECT_EQ(categories.size(), scene::kNumCategories);
  EXPECT_EQ(kinds.size(), layout::kNumModuleKinds);
}

TEST(Questions, CountTemplateShape) {
  const auto s = scene::generate_scene({}, 3);
  const auto q = scene::generate_question(s, 1, 9);
  ASSERT_TRUE(q);
  EXPECT_EQ(q->category, scene::Category::kCount);
  EXPECT_EQ(q->expert_layout.back().kind, layout::ModuleKind::kCount);
  EXPECT_EQ(q->question.front(), "how");
  const auto e = scene::generate_question(s, 0, 9);
  ASSERT_TRUE(e);
  EXPECT_TRUE(e->answer == idx("yes") || e->answer == idx("no"));
}

TEST(Questions, SelfConsistency) {
  int generated = 0;
  for (std::uint64_t seed = 0; generated < 1000; ++seed) {
    const auto s = scene::generate_scene({}, seed);
    const auto q = scene::generate_question(s, static_cast<int>(seed % scene::num_templates()), seed);
    if (!q) continue;
    ++generated;
    EXPECT_EQ(scene::symbolic_execute(q->expert_layout, s), q->answer);
    EXPECT_EQ(q->category, scene::category_for_root(q->expert_layout.back().kind));
    EXPECT_FALSE(scene::has_empty_intermediate(q->expert_layout, s));
  }
}

TEST(Questions, UnknownTemplateThrows) {
  const auto s = scene::generate_scene({}, 0);
  EXPECT_THROW(scene::generate_question(s, -1, 0), std::out_of_range);
  EXPECT_THROW(scene::generate_question(s, static_cast<int>(scene::num_templates()), 0),
               std::out_of_range);
}

TEST(Dataset, DeterministicAndDisjoint) {
  data::DatasetConfig cfg;
  cfg.train_questions = 60;
  cfg.val_questions = 20;
  cfg.test_questions = 20;
  const auto a = data::generate_dataset(cfg, 5);
  const auto b = data::generate_dataset(cfg, 5);
  ASSERT_EQ(a.train.size(), 60u);
  ASSERT_EQ(a.val.size(), 20u);
  ASSERT_EQ(a.test.size(), 20u);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(data::record_to_json(a.train[i]), data::record_to_json(b.train[i]));
  }
  std::set<int> train_scenes, other_scenes;
  for (const auto& r : a.train) train_scenes.insert(r.scene_id);
  for (const auto& r : a.val) other_scenes.insert(r.scene_id);
  for (const auto& r : a.test) other_scenes.insert(r.scene_id);
  for (int id : other_scenes) EXPECT_FALSE(train_scenes.contains(id));
  for (const auto* split : {&a.train, &a.val, &a.test}) {
    for (const auto& r : *split) {
      EXPECT_EQ(scene::symbolic_execute(r.question.expert_layout, r.scene), r.question.answer);
    }
  }
}

TEST(Dataset, JsonlRoundTrip) {
  data::DatasetConfig cfg;
  cfg.train_questions = 30;
  cfg.val_questions = cfg.test_questions = 0;
  const auto d = data::generate_dataset(cfg, 8);
  const auto dir = std::filesystem::temp_directory_path() / "dmn_test_scene";
  std::filesystem::create_directories(dir);
  const auto path = dir / "train.jsonl";
  data::write_jsonl(path, d.train);
  const auto back = data::read_jsonl(path);
  ASSERT_EQ(back.size(), d.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].scene, d.train[i].scene);
    EXPECT_EQ(back[i].question.expert_layout, d.train[i].question.expert_layout);
    EXPECT_EQ(back[i].question.answer, d.train[i].question.answer);
    EXPECT_EQ(back[i].question.question, d.train[i].question.question);
  }
  const auto hash = data::file_hash(path);
  EXPECT_EQ(hash.size(), 16u);
  data::write_jsonl(dir / "again.jsonl", back);
  EXPECT_EQ(data::file_hash(dir / "again.jsonl"), hash);

  std::ofstream(dir / "bad.jsonl") << "{\"id\": 1}\n";
  EXPECT_THROW(data::read_jsonl(dir / "bad.jsonl"), std::exception);
  EXPECT_THROW(data::read_jsonl(dir / "missing.jsonl"), data::DatasetError);
  std::filesystem::remove_all(dir);
}
