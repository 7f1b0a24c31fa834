#include <array>

#include "dmn/rng.hpp"
#include "dmn/scene.hpp"

namespace dmn::scene {
namespace {

using layout::Binding;
using layout::ModuleKind;
using layout::ModuleToken;
using layout::Program;
using Words = std::vector<std::string>;

constexpr int kMaxRetries = 64;

constexpr std::array<std::string_view, 14> kTemplateNames = {
    "exist_color_shape",      // is there a C S
    "count_color_shape",      // how many C Ss are there
    "count_color_or_shape",   // how many things are C or Ss
    "exist_size_and_color",   // is there a Z C thing
    "present_relation",       // is there a S R the C2 S2
    "count_relation",         // how many C things are R the C2 S2
    "describe_color",         // what color is the Z S
    "describe_shape",         // what shape is the Z C thing
    "compare_attribute",      // does the .. have the same A as the ..
    "more_than",              // are there more C things than Ss
    "fewer_than",             // are there fewer Z things than C things
    "same_number",            // are there the same number of C things and Ss
    "describe_size_relation", // what size is the C thing R the C2 S2
    "count_or_relation",      // how many things that are C or Ss are R the C2 thing
};

ModuleToken tok(ModuleKind k, std::string key = {}, std::string value = {}) {
  ModuleToken t{k, std::nullopt};
  if (!key.empty()) t.binding = Binding{std::move(key), std::move(value)};
  return t;
}

std::string str(std::string_view s) { return std::string(s); }
std::string plural(Shape s) { return str(shape_name(s)) + "s"; }

Words relation_words(std::string_view rel) {
  if (rel == "left") return {"left", "of"};
  if (rel == "right") return {"right", "of"};
  return {str(rel)};
}

void append(Words& w, const Words& more) { w.insert(w.end(), more.begin(), more.end()); }

struct Sampler {
  const SceneGraph& scene;
  Rng& rng;

  Color color() { return static_cast<Color>(rng.uniform_index(kNumColors)); }
  Shape shape() { return static_cast<Shape>(rng.uniform_index(kNumShapes)); }
  Size size() { return static_cast<Size>(rng.uniform_index(kNumSizes)); }
  std::string relation() {
    static constexpr std::array<std::string_view, 4> kRel = {"left", "right", "above", "below"};
    return str(kRel[rng.uniform_index(kRel.size())]);
  }
  const Object& any_object() { return scene.objects[rng.uniform_index(scene.objects.size())]; }
  // Half the time borrow attributes from an existing object so positive
  // answers are common.
  bool from_object() { return rng.uniform01() < 0.5; }

  template <typename Pred>
  int count(Pred p) const {
    int n = 0;
    for (const Object& o : scene.objects) n += p(o) ? 1 : 0;
    return n;
  }
};

struct Draft {
  Words words;
  Program layout;
};

// Referent "the C S": an object whose (color, shape) pair is unique.
std::optional<Object> unique_color_shape(Sampler& s) {
  const Object& o = s.any_object();
  if (s.count([&](const Object& x) { return x.color == o.color && x.shape == o.shape; }) != 1) {
    return std::nullopt;
  }
  return o;
}

std::optional<Draft> draft(int template_id, Sampler& s) {
  using enum ModuleKind;
  Draft d;
  switch (template_id) {
    case 0: {
      Color c = s.color();
      Shape sh = s.shape();
      if (s.from_object()) {
        const Object& o = s.any_object();
        c = o.color;
        sh = o.shape;
      }
      d.words = {"is", "there", "a", str(color_name(c)), str(shape_name(sh))};
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFilter, "shape", str(shape_name(sh))),
                  tok(kExist)};
      return d;
    }
    case 1: {
      Color c = s.color();
      Shape sh = s.shape();
      if (s.from_object()) {
        const Object& o = s.any_object();
        c = o.color;
        sh = o.shape;
      }
      d.words = {"how", "many", str(color_name(c)), plural(sh), "are", "there"};
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFilter, "shape", str(shape_name(sh))),
                  tok(kCount)};
      return d;
    }
    case 2: {
      const Color c = s.color();
      const Shape sh = s.shape();
      d.words = {"how", "many", "things", "are", str(color_name(c)), "or", plural(sh)};
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFind, "shape", str(shape_name(sh))),
                  tok(kOr), tok(kCount)};
      return d;
    }
    case 3: {
      Size z = s.size();
      Color c = s.color();
      if (s.from_object()) {
        const Object& o = s.any_object();
        z = o.size;
        c = o.color;
      }
      d.words = {"is", "there", "a", str(size_name(z)), str(color_name(c)), "thing"};
      d.layout = {tok(kFind, "size", str(size_name(z))), tok(kFind, "color", str(color_name(c))),
                  tok(kAnd), tok(kExist)};
      return d;
    }
    case 4: {
      auto ref = unique_color_shape(s);
      if (!ref) return std::nullopt;
      const std::string rel = s.relation();
      const Shape sh = s.shape();
      d.words = {"is", "there", "a", str(shape_name(sh))};
      append(d.words, relation_words(rel));
      append(d.words, {"the", str(color_name(ref->color)), str(shape_name(ref->shape))});
      d.layout = {tok(kFind, "color", str(color_name(ref->color))),
                  tok(kFilter, "shape", str(shape_name(ref->shape))), tok(kRelocate, "rel", rel),
                  tok(kFilter, "shape", str(shape_name(sh))), tok(kIsPresent)};
      return d;
    }
    case 5: {
      auto ref = unique_color_shape(s);
      if (!ref) return std::nullopt;
      const std::string rel = s.relation();
      const Color c = s.color();
      d.words = {"how", "many", str(color_name(c)), "things", "are"};
      append(d.words, relation_words(rel));
      append(d.words, {"the", str(color_name(ref->color)), str(shape_name(ref->shape))});
      d.layout = {tok(kFind, "color", str(color_name(ref->color))),
                  tok(kFilter, "shape", str(shape_name(ref->shape))), tok(kRelocate, "rel", rel),
                  tok(kFilter, "color", str(color_name(c))), tok(kCount)};
      return d;
    }
    case 6: {
      const Object& o = s.any_object();
      d.words = {"what", "color", "is", "the", str(size_name(o.size)), str(shape_name(o.shape))};
      d.layout = {tok(kFind, "shape", str(shape_name(o.shape))),
                  tok(kFilter, "size", str(size_name(o.size))), tok(kDescribe, "attr", "color")};
      return d;
    }
    case 7: {
      const Object& o = s.any_object();
      d.words = {"what", "shape", "is", "the", str(size_name(o.size)), str(color_name(o.color)),
                 "thing"};
      d.layout = {tok(kFind, "color", str(color_name(o.color))),
                  tok(kFilter, "size", str(size_name(o.size))), tok(kDescribe, "attr", "shape")};
      return d;
    }
    case 8: {
      // Each referent is named by the two attributes that are not compared.
      static constexpr std::array<std::string_view, 3> kAttrs = {"color", "shape", "size"};
      const std::string attr = str(kAttrs[s.rng.uniform_index(3)]);
      const Object& a = s.any_object();
      const Object& b = s.any_object();
      if (a == b) return std::nullopt;
      auto describe = [&](const Object& o) -> std::pair<Words, Program> {
        if (attr == "color") {
          return {{"the", str(size_name(o.size)), str(shape_name(o.shape))},
                  {tok(kFind, "shape", str(shape_name(o.shape))),
                   tok(kFilter, "size", str(size_name(o.size)))}};
        }
        if (attr == "shape") {
          return {{"the", str(size_name(o.size)), str(color_name(o.color)), "thing"},
                  {tok(kFind, "color", str(color_name(o.color))),
                   tok(kFilter, "size", str(size_name(o.size)))}};
        }
        return {{"the", str(color_name(o.color)), str(shape_name(o.shape))},
                {tok(kFind, "color", str(color_name(o.color))),
                 tok(kFilter, "shape", str(shape_name(o.shape)))}};
      };
      auto [wa, pa] = describe(a);
      auto [wb, pb] = describe(b);
      d.words = {"does"};
      append(d.words, wa);
      append(d.words, {"have", "the", "same", attr, "as"});
      append(d.words, wb);
      d.layout = pa;
      d.layout.insert(d.layout.end(), pb.begin(), pb.end());
      d.layout.push_back(tok(kCompare, "attr", attr));
      return d;
    }
    case 9: {
      const Color c = s.color();
      const Shape sh = s.shape();
      d.words = {"are", "there", "more", str(color_name(c)), "things", "than", plural(sh)};
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFind, "shape", str(shape_name(sh))),
                  tok(kGreaterThan)};
      return d;
    }
    case 10: {
      const Size z = s.size();
      const Color c = s.color();
      d.words = {"are", "there", "fewer", str(size_name(z)), "things", "than", str(color_name(c)),
                 "things"};
      d.layout = {tok(kFind, "size", str(size_name(z))), tok(kFind, "color", str(color_name(c))),
                  tok(kLessThan)};
      return d;
    }
    case 11: {
      const Color c = s.color();
      const Shape sh = s.shape();
      d.words = {"are", "there", "the", "same", "number", "of", str(color_name(c)), "things",
                 "and", plural(sh)};
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFind, "shape", str(shape_name(sh))),
                  tok(kEqualTo)};
      return d;
    }
    case 12: {
      auto ref = unique_color_shape(s);
      if (!ref) return std::nullopt;
      const std::string rel = s.relation();
      const Object& target = s.any_object();
      d.words = {"what", "size", "is", "the", str(color_name(target.color)), "thing"};
      append(d.words, relation_words(rel));
      append(d.words, {"the", str(color_name(ref->color)), str(shape_name(ref->shape))});
      d.layout = {tok(kFind, "color", str(color_name(ref->color))),
                  tok(kFilter, "shape", str(shape_name(ref->shape))), tok(kRelocate, "rel", rel),
                  tok(kFilter, "color", str(color_name(target.color))),
                  tok(kDescribe, "attr", "size")};
      return d;
    }
    case 13: {
      const Object& ref = s.any_object();
      if (s.count([&](const Object& x) { return x.color == ref.color; }) != 1) return std::nullopt;
      const std::string rel = s.relation();
      const Color c = s.color();
      const Shape sh = s.shape();
      d.words = {"how", "many", "things", "that", "are", str(color_name(c)), "or", plural(sh), "are"};
      append(d.words, relation_words(rel));
      append(d.words, {"the", str(color_name(ref.color)), "thing"});
      d.layout = {tok(kFind, "color", str(color_name(c))), tok(kFind, "shape", str(shape_name(sh))),
                  tok(kOr), tok(kFind, "color", str(color_name(ref.color))),
                  tok(kRelocate, "rel", rel), tok(kAnd), tok(kCount)};
      return d;
    }
    default:
      throw std::out_of_range("unknown template id " + std::to_string(template_id));
  }
}

}  // namespace

std::size_t num_templates() { return kTemplateNames.size(); }

std::string_view template_name(int template_id) {
  return kTemplateNames.at(static_cast<std::size_t>(template_id));
}

std::optional<QuestionInstance> generate_question(const SceneGraph& scene, int template_id,
                                                  std::uint64_t seed) {
  if (template_id < 0 || static_cast<std::size_t>(template_id) >= num_templates()) {
    throw std::out_of_range("unknown template id " + std::to_string(template_id));
  }
  Rng rng(seed);
  Sampler sampler{scene, rng};
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::optional<Draft> d = draft(template_id, sampler);
    if (!d || has_empty_intermediate(d->layout, scene)) continue;
    int answer = 0;
    try {
      answer = symbolic_execute(d->layout, scene);
    } catch (const AmbiguityError&) {
      continue;
    }
    QuestionInstance q;
    q.question = std::move(d->words);
    q.category = category_for_root(d->layout.back().kind);
    q.expert_layout = std::move(d->layout);
    q.answer = answer;
    q.template_id = template_id;
    return q;
  }
  return std::nullopt;
}

}  // namespace dmn::scene
