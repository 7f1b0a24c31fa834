#ifndef DMN_CHECKPOINT_HPP_
#define DMN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmn/params.hpp"

namespace dmn::ad {

// Binary archive layout (all integers little-endian):
//   magic "DMNCKPT\0" (8 bytes), u32 format version
//   u32 metadata count, then per entry: str key, str value
//   u32 tensor count, then per entry: str name, u32 rank, u64 extents...,
//     f64 data (IEEE-754 binary64, little-endian), product(extents) values
// where str is u32 byte length followed by the bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoredTensor {
  Shape shape;
  std::vector<double> data;
};

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  // Insertion order is preserved for reproducible files.
  std::vector<std::pair<std::string, StoredTensor>> tensors;

  const StoredTensor* find(const std::string& name) const;
};

Checkpoint snapshot(const ParameterStore& params, std::map<std::string, std::string> metadata = {});
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies stored values into an existing store; every parameter must be
// present with a matching shape.
void restore(ParameterStore& params, const Checkpoint& ckpt);

}  // namespace dmn::ad

#endif  // DMN_CHECKPOINT_HPP_
