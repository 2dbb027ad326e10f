#pragma once

#include "pyrflow/grid.hpp"
#include "pyrflow/temporal.hpp"

namespace pyrflow {

/// Model interface: velocity at state x, global time t and pyramid stage.
/// Output has the shape of x. `condition` may be null (unconditional).
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual LatentGrid evaluate(const LatentGrid& x, double t, int stage, const HistoryPyramid* condition) const = 0;
};

}  // namespace pyrflow
