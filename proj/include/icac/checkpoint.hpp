#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "icac/tensor.hpp"

namespace icac {

// Container: "ICAC-CKPT-1" magic line, optional "meta <text>" lines, one
// "tensor <name> <ndim> <dims...>" line per tensor in declaration order,
// an "end" line, then the concatenated raw little-endian float32 payloads.
inline constexpr const char* kCheckpointMagic = "ICAC-CKPT-1";

class CheckpointWriter {
 public:
  void meta(std::string line);
  void add(std::string name, const Tensor& t);
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> meta_;
  std::vector<std::pair<std::string, Tensor>> tensors_;
};

class Checkpoint {
 public:
  static Checkpoint read(std::istream& is);
  static Checkpoint read_file(const std::string& path);

  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  const std::vector<std::string>& meta() const { return meta_; }

 private:
  std::vector<std::string> order_;
  std::vector<std::string> meta_;
  std::vector<std::pair<std::string, Tensor>> tensors_;
};

}  // namespace icac
