#pragma once

#include <filesystem>
#include <fstream>
#include <limits>

#include "pyrflow/io/binary.hpp"
#include "pyrflow/model/local_field.hpp"
#include "pyrflow/model/mlp.hpp"

namespace pyrflow::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::MlpNet net;
  model::LocalFieldSpec spec;
};

/// The field layout follows from the output width: 2 outputs is the point
/// model, 1 the image model. The stage count is what remains of the input
/// width after features and time features.
inline model::LocalFieldSpec infer_field_spec(std::size_t output_dims) {
  if (output_dims == model::kPointSpec.channels) return model::kPointSpec;
  if (output_dims == model::kImageSpec.channels) return model::kImageSpec;
  throw IoError("checkpoint output width " + std::to_string(output_dims) + " matches no known field layout");
}

// "PYRM", u32 version, u32 layer count n, n x u32 layer dims, then parameters
// as f64 in declaration order; all little-endian.
inline void write_checkpoint(std::ostream& os, const model::MlpNet& net) {
  os.write("PYRM", 4);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(net.dims().size()));
  for (std::size_t d : net.dims()) write_u32(os, static_cast<std::uint32_t>(d));
  for (double p : net.params()) write_f64(os, p);
  if (!os) throw IoError("failed writing checkpoint");
}

inline Checkpoint read_checkpoint(std::istream& is) {
  expect_magic(is, "PYRM");
  const std::uint32_t version = read_u32(is);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t n = read_u32(is);
  if (n < 2 || n > 64) throw IoError("implausible layer count " + std::to_string(n));
  std::vector<std::size_t> dims(n);
  for (auto& d : dims) d = read_u32(is);
  const model::LocalFieldSpec spec = infer_field_spec(dims.back());
  const std::size_t fixed = spec.features() + model::kTimeFeatures;
  if (dims.front() <= fixed) throw IoError("checkpoint input width too small for its field layout");
  const auto stages = static_cast<int>(dims.front() - fixed);
  model::MlpNet net(std::move(dims), stages);
  for (double& p : net.params()) p = read_f64(is);
  return {std::move(net), spec};
}

inline void save_checkpoint(const std::filesystem::path& path, const model::MlpNet& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, net);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace pyrflow::io
