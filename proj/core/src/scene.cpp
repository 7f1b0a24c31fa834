#include "dmn/scene.hpp"

#include <algorithm>
#include <numeric>

#include "dmn/rng.hpp"

namespace dmn::scene {
namespace {

constexpr std::array<std::string_view, kNumShapes> kShapeNames = {"circle", "square", "triangle"};
constexpr std::array<std::string_view, kNumColors> kColorNames = {"red", "green", "blue", "gray",
                                                                  "yellow"};
constexpr std::array<std::string_view, kNumSizes> kSizeNames = {"small", "large"};
constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {"exist", "count",
                                                                         "yes_no", "compare"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::size_t kShapeOffset = 0;
constexpr std::size_t kColorOffset = kNumShapes;
constexpr std::size_t kSizeOffset = kNumShapes + kNumColors;
constexpr std::size_t kRowChannel = kSizeOffset + kNumSizes;
constexpr std::size_t kColChannel = kRowChannel + 1;

std::vector<std::string> build_answer_vocabulary() {
  std::vector<std::string> v = {"yes", "no"};
  for (int i = 0; i <= 9; ++i) v.push_back(std::to_string(i));
  for (auto c : kColorNames) v.emplace_back(c);
  for (auto s : kShapeNames) v.emplace_back(s);
  for (auto s : kSizeNames) v.emplace_back(s);
  return v;
}

// Cell membership over the G*G grid; only occupied cells are ever set.
using CellSet = std::vector<char>;

struct Executor {
  const SceneGraph& scene;
  std::vector<int> object_at;  // cell -> object index or -1

  explicit Executor(const SceneGraph& s) : scene(s) {
    object_at.assign(static_cast<std::size_t>(s.grid_size * s.grid_size), -1);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const Object& o = s.objects[i];
      object_at[static_cast<std::size_t>(o.row * s.grid_size + o.col)] = static_cast<int>(i);
    }
  }

  static const layout::Binding& need_binding(const layout::ModuleToken& tok) {
    if (!tok.binding) {
      throw BindingError(std::string(layout::kind_name(tok.kind)) + " token has no binding");
    }
    return *tok.binding;
  }

  bool matches(const Object& o, const layout::Binding& b) const {
    if (b.key == "color") {
      auto c = parse_color(b.value);
      if (!c) throw BindingError("unknown color '" + b.value + "'");
      return o.color == *c;
    }
    if (b.key == "shape") {
      auto s = parse_shape(b.value);
      if (!s) throw BindingError("unknown shape '" + b.value + "'");
      return o.shape == *s;
    }
    if (b.key == "size") {
      auto s = parse_size(b.value);
      if (!s) throw BindingError("unknown size '" + b.value + "'");
      return o.size == *s;
    }
    throw BindingError("attribute predicate expected, got key '" + b.key + "'");
  }

  CellSet find(const layout::Binding& b) const {
    CellSet out(object_at.size(), 0);
    for (const Object& o : scene.objects) {
      if (matches(o, b)) out[static_cast<std::size_t>(o.row * scene.grid_size + o.col)] = 1;
    }
    return out;
  }

  CellSet relocate(const CellSet& in, const layout::Binding& b) const {
    if (b.key != "rel") throw BindingError("relocate expects rel=..., got key '" + b.key + "'");
    auto related = [&](const Object& o, const Object& ref) {
      if (b.value == "left") return o.col < ref.col;
      if (b.value == "right") return o.col > ref.col;
      if (b.value == "above") return o.row < ref.row;
      if (b.value == "below") return o.row > ref.row;
      throw BindingError("unknown relation '" + b.value + "'");
    };
    CellSet out(in.size(), 0);
    for (const Object& o : scene.objects) {
      for (const Object& ref : scene.objects) {
        if (in[static_cast<std::size_t>(ref.row * scene.grid_size + ref.col)] && related(o, ref)) {
          out[static_cast<std::size_t>(o.row * scene.grid_size + o.col)] = 1;
          break;
        }
      }
    }
    return out;
  }

  static int cardinality(const CellSet& s) {
    return static_cast<int>(std::count(s.begin(), s.end(), char{1}));
  }

  const Object& singleton(const CellSet& s, std::string_view who) const {
    if (cardinality(s) != 1) {
      throw AmbiguityError(std::string(who) + " needs exactly one object, set has " +
                           std::to_string(cardinality(s)));
    }
    const auto cell = static_cast<std::size_t>(std::find(s.begin(), s.end(), char{1}) - s.begin());
    return scene.objects[static_cast<std::size_t>(object_at[cell])];
  }

  static std::string attribute_of(const Object& o, const std::string& attr) {
    if (attr == "color") return std::string(color_name(o.color));
    if (attr == "shape") return std::string(shape_name(o.shape));
    if (attr == "size") return std::string(size_name(o.size));
    throw BindingError("unknown attribute '" + attr + "'");
  }

  static const layout::Binding& attr_binding(const layout::ModuleToken& tok) {
    const layout::Binding& b = need_binding(tok);
    if (b.key != "attr") {
      throw BindingError(std::string(layout::kind_name(tok.kind)) + " expects attr=..., got key '" +
                         b.key + "'");
    }
    return b;
  }
};

int yes_no(bool v) { return v ? 0 : 1; }

}  // namespace

std::string_view shape_name(Shape s) { return kShapeNames[static_cast<std::size_t>(s)]; }
std::string_view color_name(Color c) { return kColorNames[static_cast<std::size_t>(c)]; }
std::string_view size_name(Size s) { return kSizeNames[static_cast<std::size_t>(s)]; }
std::optional<Shape> parse_shape(std::string_view s) { return lookup<Shape>(kShapeNames, s); }
std::optional<Color> parse_color(std::string_view s) { return lookup<Color>(kColorNames, s); }
std::optional<Size> parse_size(std::string_view s) { return lookup<Size>(kSizeNames, s); }

std::string_view category_name(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::optional<Category> parse_category(std::string_view s) {
  return lookup<Category>(kCategoryNames, s);
}

Category category_for_root(layout::ModuleKind root) {
  using enum layout::ModuleKind;
  switch (root) {
    case kExist:
      return Category::kExist;
    case kCount:
      return Category::kCount;
    case kIsPresent:
    case kGreaterThan:
    case kLessThan:
    case kEqualTo:
      return Category::kYesNo;
    case kDescribe:
    case kCompare:
      return Category::kCompare;
    default:
      throw std::invalid_argument(std::string(layout::kind_name(root)) +
                                  " does not produce a Prediction");
  }
}

void check_scene(const SceneGraph& scene) {
  if (scene.grid_size <= 0) throw SceneError("grid size must be positive");
  if (scene.objects.empty()) throw SceneError("scene has no objects");
  std::vector<char> used(static_cast<std::size_t>(scene.grid_size * scene.grid_size), 0);
  for (const Object& o : scene.objects) {
    if (o.row < 0 || o.col < 0 || o.row >= scene.grid_size || o.col >= scene.grid_size) {
      throw SceneError("object at (" + std::to_string(o.row) + "," + std::to_string(o.col) +
                       ") lies outside the grid");
    }
    char& u = used[static_cast<std::size_t>(o.row * scene.grid_size + o.col)];
    if (u) {
      throw SceneError("two objects share cell (" + std::to_string(o.row) + "," +
                       std::to_string(o.col) + ")");
    }
    u = 1;
  }
}

void canonicalize(SceneGraph& scene) {
  std::sort(scene.objects.begin(), scene.objects.end(), [](const Object& a, const Object& b) {
    return std::pair{a.row, a.col} < std::pair{b.row, b.col};
  });
}

SceneGraph generate_scene(const SceneConfig& config, std::uint64_t seed) {
  const int cells = config.grid_size * config.grid_size;
  if (config.grid_size <= 0 || config.min_objects < 1 || config.min_objects > config.max_objects ||
      config.max_objects > cells) {
    throw SceneError("invalid scene config: need 1 <= min_objects <= max_objects <= grid_size^2");
  }
  Rng rng(seed);
  const auto count = static_cast<int>(rng.uniform_int(config.min_objects, config.max_objects));
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  SceneGraph scene;
  scene.grid_size = config.grid_size;
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(cells - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    Object o;
    o.row = order[static_cast<std::size_t>(i)] / config.grid_size;
    o.col = order[static_cast<std::size_t>(i)] % config.grid_size;
    o.shape = static_cast<Shape>(rng.uniform_index(kNumShapes));
    o.color = static_cast<Color>(rng.uniform_index(kNumColors));
    o.size = static_cast<Size>(rng.uniform_index(kNumSizes));
    scene.objects.push_back(o);
  }
  canonicalize(scene);
  return scene;
}

FeatureMap scene_features(const SceneGraph& scene) {
  FeatureMap fm;
  fm.grid_size = scene.grid_size;
  const int g = scene.grid_size;
  fm.values.assign(static_cast<std::size_t>(g * g) * kFeatureDim, 0.0);
  const double denom = g > 1 ? static_cast<double>(g - 1) : 1.0;
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      double* cell = &fm.values[static_cast<std::size_t>(r * g + c) * kFeatureDim];
      cell[kRowChannel] = static_cast<double>(r) / denom;
      cell[kColChannel] = static_cast<double>(c) / denom;
    }
  }
  for (const Object& o : scene.objects) {
    double* cell = &fm.values[static_cast<std::size_t>(o.row * g + o.col) * kFeatureDim];
    cell[kShapeOffset + static_cast<std::size_t>(o.shape)] = 1.0;
    cell[kColorOffset + static_cast<std::size_t>(o.color)] = 1.0;
    cell[kSizeOffset + static_cast<std::size_t>(o.size)] = 1.0;
  }
  return fm;
}

SceneGraph decode_features(const FeatureMap& fm) {
  SceneGraph scene;
  scene.grid_size = fm.grid_size;
  auto argmax_block = [&](int r, int c, std::size_t off, std::size_t n) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < n; ++k) {
      if (fm.at(r, c, off + k) == 1.0) return k;
    }
    return std::nullopt;
  };
  for (int r = 0; r < fm.grid_size; ++r) {
    for (int c = 0; c < fm.grid_size; ++c) {
      auto s = argmax_block(r, c, kShapeOffset, kNumShapes);
      if (!s) continue;
      auto col = argmax_block(r, c, kColorOffset, kNumColors);
      auto sz = argmax_block(r, c, kSizeOffset, kNumSizes);
      if (!col || !sz) throw SceneError("inconsistent one-hot blocks in feature map");
      scene.objects.push_back(Object{r, c, static_cast<Shape>(*s), static_cast<Color>(*col),
                                     static_cast<Size>(*sz)});
    }
  }
  return scene;
}

const std::vector<std::string>& answer_vocabulary() {
  static const std::vector<std::string> vocab = build_answer_vocabulary();
  return vocab;
}

std::size_t answer_vocab_size() { return answer_vocabulary().size(); }

int answer_index(std::string_view answer) {
  const auto& v = answer_vocabulary();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == answer) return static_cast<int>(i);
  }
  throw std::out_of_range("answer '" + std::string(answer) + "' is not in the vocabulary");
}

const std::string& answer_text(int index) {
  return answer_vocabulary().at(static_cast<std::size_t>(index));
}

int symbolic_execute(const layout::Program& program, const SceneGraph& scene) {
  const layout::ValidityReport report = layout::validate(program);
  if (!report.valid) throw ExecutionError("invalid layout: " + report.message);
  Executor ex(scene);
  std::vector<CellSet> stack;
  auto pop = [&stack] {
    CellSet s = std::move(stack.back());
    stack.pop_back();
    return s;
  };
  using enum layout::ModuleKind;
  for (const layout::ModuleToken& tok : program) {
    switch (tok.kind) {
      case kFind:
        stack.push_back(ex.find(Executor::need_binding(tok)));
        break;
      case kFilter: {
        CellSet in = pop();
        if (Executor::cardinality(in) == 0) return true;
        const CellSet f = ex.find(Executor::need_binding(tok));
        for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<char>(in[i] && f[i]);
        stack.push_back(std::move(in));
        break;
      }
      case kRelocate: {
        const CellSet in = pop();
        stack.push_back(ex.relocate(in, Executor::need_binding(tok)));
        break;
      }
      case kAnd:
      case kOr: {
        const CellSet b = pop();
        CellSet a = pop();
        for (std::size_t i = 0; i < a.size(); ++i) {
          a[i] = static_cast<char>(tok.kind == kAnd ? (a[i] && b[i]) : (a[i] || b[i]));
        }
        stack.push_back(std::move(a));
        break;
      }
      case kCount:
        return answer_index(std::to_string(std::min(Executor::cardinality(pop()), 9)));
      case kExist:
      case kIsPresent:
        return yes_no(Executor::cardinality(pop()) > 0);
      case kDescribe: {
        const layout::Binding& b = Executor::attr_binding(tok);
        const Object& o = ex.singleton(pop(), "describe");
        return answer_index(Executor::attribute_of(o, b.value));
      }
      case kCompare: {
        const layout::Binding& b = Executor::attr_binding(tok);
        const CellSet second = pop();
        const CellSet first = pop();
        const Object& o1 = ex.singleton(first, "compare");
        const Object& o2 = ex.singleton(second, "compare");
        return yes_no(Executor::attribute_of(o1, b.value) == Executor::attribute_of(o2, b.value));
      }
      case kGreaterThan:
      case kLessThan:
      case kEqualTo: {
        const int n2 = Executor::cardinality(pop());
        const int n1 = Executor::cardinality(pop());
        if (tok.kind == kGreaterThan) return yes_no(n1 > n2);
        if (tok.kind == kLessThan) return yes_no(n1 < n2);
        return yes_no(n1 == n2);
      }
    }
  }
  throw ExecutionError("layout produced no answer");
}

bool has_empty_intermediate(const layout::Program& program, const SceneGraph& scene) {
  const layout::ValidityReport report = layout::validate(program);
  if (!report.valid) throw ExecutionError("invalid layout: " + report.message);
  Executor ex(scene);
  std::vector<CellSet> stack;
  auto pop = [&stack] {
    CellSet s = std::move(stack.back());
    stack.pop_back();
    return s;
  };
  using enum layout::ModuleKind;
  for (const layout::ModuleToken& tok : program) {
    switch (tok.kind) {
      case kFind:
        stack.push_back(ex.find(Executor::need_binding(tok)));
        break;
      case kFilter: {
        CellSet in = pop();
        if (Executor::cardinality(in) == 0) return true;
        const CellSet f = ex.find(Executor::need_binding(tok));
        for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<char>(in[i] && f[i]);
        stack.push_back(std::move(in));
        break;
      }
      case kRelocate: {
        const CellSet in = pop();
        if (Executor::cardinality(in) == 0) return true;
        CellSet out = ex.relocate(in, Executor::need_binding(tok));
        if (Executor::cardinality(out) == 0) return true;
        stack.push_back(std::move(out));
        break;
      }
      case kAnd:
      case kOr: {
        const CellSet b = pop();
        CellSet a = pop();
        if (Executor::cardinality(a) == 0 || Executor::cardinality(b) == 0) return true;
        for (std::size_t i = 0; i < a.size(); ++i) {
          a[i] = static_cast<char>(tok.kind == kAnd ? (a[i] && b[i]) : (a[i] || b[i]));
        }
        stack.push_back(std::move(a));
        break;
      }
      default:
        return false;
    }
  }
  return false;
}

}  // namespace dmn::scene
