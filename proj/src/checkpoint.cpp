#include "icac/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icac {

namespace {

void put_f32_le(std::ostream& os, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  const char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                     static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
  os.write(b, 4);
}

float get_f32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated payload");
  const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                          (static_cast<std::uint32_t>(b[2]) << 16) |
                          (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(u);
}

}  // namespace

void CheckpointWriter::meta(std::string line) { meta_.push_back(std::move(line)); }

void CheckpointWriter::add(std::string name, const Tensor& t) {
  if (name.empty() || name.find(' ') != std::string::npos || name.find('\n') != std::string::npos)
    throw std::invalid_argument("checkpoint: tensor name must be non-empty and space-free");
  tensors_.emplace_back(std::move(name), t);
}

void CheckpointWriter::write(std::ostream& os) const {
  os << kCheckpointMagic << "\n";
  for (const auto& m : meta_) os << "meta " << m << "\n";
  for (const auto& [name, t] : tensors_) {
    os << "tensor " << name << " " << t.shape.size();
    for (int d : t.shape) os << " " << d;
    os << "\n";
  }
  os << "end\n";
  for (const auto& [name, t] : tensors_)
    for (float v : t.data) put_f32_le(os, v);
}

void CheckpointWriter::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint Checkpoint::read(std::istream& is) {
  Checkpoint ck;
  std::string line;
  if (!std::getline(is, line) || line != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic (expected " + std::string(kCheckpointMagic) + ")");

  struct Pending {
    std::string name;
    std::vector<int> shape;
  };
  std::vector<Pending> pending;
  while (std::getline(is, line)) {
    if (line == "end") break;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      ck.meta_.push_back(rest);
    } else if (kind == "tensor") {
      Pending p;
      std::size_t ndim = 0;
      ls >> p.name >> ndim;
      for (std::size_t i = 0; i < ndim; ++i) {
        int d = 0;
        ls >> d;
        p.shape.push_back(d);
      }
      if (!ls || p.name.empty()) throw std::runtime_error("checkpoint: malformed tensor line: " + line);
      pending.push_back(std::move(p));
    } else {
      throw std::runtime_error("checkpoint: unexpected header line: " + line);
    }
  }
  if (line != "end") throw std::runtime_error("checkpoint: missing end marker");

  for (auto& p : pending) {
    Tensor t = Tensor::zeros(p.shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t.data[i] = get_f32_le(is);
    ck.order_.push_back(p.name);
    ck.tensors_.emplace_back(std::move(p.name), std::move(t));
  }
  return ck;
}

Checkpoint Checkpoint::read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  return read(f);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : tensors_)
    if (n == name) return true;
  return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : tensors_)
    if (n == name) return t;
  throw std::runtime_error("checkpoint: no tensor named '" + name + "'");
}

}  // namespace icac
