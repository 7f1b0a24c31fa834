#ifndef DMN_SCENE_HPP_
#define DMN_SCENE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmn/layout.hpp"

// Synthetic grid-world scenes, their feature maps, and the symbolic oracle.
namespace dmn::scene {

enum class Shape : std::uint8_t { kCircle, kSquare, kTriangle };
enum class Color : std::uint8_t { kRed, kGreen, kBlue, kGray, kYellow };
enum class Size : std::uint8_t { kSmall, kLarge };

inline constexpr std::size_t kNumShapes = 3;
inline constexpr std::size_t kNumColors = 5;
inline constexpr std::size_t kNumSizes = 2;
// One-hot attribute blocks plus normalized row and column.
inline constexpr std::size_t kFeatureDim = kNumShapes + kNumColors + kNumSizes + 2;

std::string_view shape_name(Shape s);
std::string_view color_name(Color c);
std::string_view size_name(Size s);
std::optional<Shape> parse_shape(std::string_view s);
std::optional<Color> parse_color(std::string_view s);
std::optional<Size> parse_size(std::string_view s);

struct Object {
  int row = 0;
  int col = 0;
  Shape shape = Shape::kCircle;
  Color color = Color::kRed;
  Size size = Size::kSmall;
  bool operator==(const Object&) const = default;
};

struct SceneGraph {
  int grid_size = 0;
  // Sorted by (row, col).
  std::vector<Object> objects;
  bool operator==(const SceneGraph&) const = default;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws SceneError on out-of-grid cells, shared cells, or an empty scene.
void check_scene(const SceneGraph& scene);
// Sorts objects into canonical (row, col) order.
void canonicalize(SceneGraph& scene);

struct SceneConfig {
  int grid_size = 5;
  int min_objects = 3;
  int max_objects = 8;
};

SceneGraph generate_scene(const SceneConfig& config, std::uint64_t seed);

// G*G cells in row-major order, kFeatureDim values per cell.
struct FeatureMap {
  int grid_size = 0;
  std::vector<double> values;

  std::size_t cells() const { return static_cast<std::size_t>(grid_size * grid_size); }
  double at(int row, int col, std::size_t channel) const {
    return values[(static_cast<std::size_t>(row * grid_size + col)) * kFeatureDim + channel];
  }
};

FeatureMap scene_features(const SceneGraph& scene);
// Inverse one-hot lookup over occupied cells.
SceneGraph decode_features(const FeatureMap& features);

// Closed answer vocabulary: yes, no, 0..9, colors, shapes, sizes.
const std::vector<std::string>& answer_vocabulary();
std::size_t answer_vocab_size();
// Throws std::out_of_range for words outside the vocabulary.
int answer_index(std::string_view answer);
const std::string& answer_text(int index);

enum class Category : std::uint8_t { kExist, kCount, kYesNo, kCompare };
inline constexpr std::size_t kNumCategories = 4;
std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view s);
Category category_for_root(layout::ModuleKind root);

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AmbiguityError : public ExecutionError {
 public:
  using ExecutionError::ExecutionError;
};
class BindingError : public ExecutionError {
 public:
  using ExecutionError::ExecutionError;
};

// Set-based evaluation of a bound layout. Returns an answer index.
int symbolic_execute(const layout::Program& program, const SceneGraph& scene);

// True when some and/or operand or relocate result is the empty set. A
// normalized attention map cannot express an empty set, so generated
// questions avoid these.
bool has_empty_intermediate(const layout::Program& program, const SceneGraph& scene);

struct QuestionInstance {
  std::vector<std::string> question;
  layout::Program expert_layout;
  int answer = 0;
  Category category = Category::kExist;
  int template_id = 0;
};

std::size_t num_templates();
std::string_view template_name(int template_id);

// Samples bindings for a template until its preconditions hold. Returns
// nullopt when no satisfying binding was found within the retry budget.
std::optional<QuestionInstance> generate_question(const SceneGraph& scene, int template_id,
                                                  std::uint64_t seed);

}  // namespace dmn::scene

#endif  // DMN_SCENE_HPP_
