#pragma once

#include <vector>

#include "icac/tensor.hpp"

namespace icac {

// Anything the evaluator can run greedily. Actions are normalized, [-1,1]^d.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<float> act_greedy(const Tensor& obs) = 0;
};

}  // namespace icac
