#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "icac/checkpoint.hpp"
#include "icac/rng.hpp"

using namespace icac;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-5.0, 5.0));
  return t;
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise exact") {
  CheckpointWriter w;
  w.meta("agent cacla");
  const Tensor a = random_tensor({4, 3}, 1);
  const Tensor b = random_tensor({2, 2, 2, 2}, 2);
  const Tensor c = random_tensor({7}, 3);
  w.add("encoder/L0/weights", a);
  w.add("encoder/L0/bias", b);
  w.add("critic/L2/weights", c);

  std::stringstream ss;
  w.write(ss);
  const Checkpoint ck = Checkpoint::read(ss);

  CHECK(ck.names() == std::vector<std::string>{"encoder/L0/weights", "encoder/L0/bias",
                                               "critic/L2/weights"});
  CHECK(ck.meta() == std::vector<std::string>{"agent cacla"});
  CHECK(ck.get("encoder/L0/weights").shape == a.shape);
  CHECK(ck.get("encoder/L0/weights").data == a.data);
  CHECK(ck.get("encoder/L0/bias").data == b.data);
  CHECK(ck.get("critic/L2/weights").data == c.data);
  CHECK(ck.has("critic/L2/weights"));
  CHECK_FALSE(ck.has("nope"));
  CHECK_THROWS(ck.get("nope"));
}

TEST_CASE("checkpoint header starts with the magic string") {
  CheckpointWriter w;
  w.add("t", random_tensor({2}, 4));
  std::stringstream ss;
  w.write(ss);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "ICAC-CKPT-1");
}

TEST_CASE("checkpoint rejects bad magic") {
  std::stringstream ss("WRONG-MAGIC\nend\n");
  CHECK_THROWS(Checkpoint::read(ss));
}

TEST_CASE("checkpoint rejects truncated payload") {
  CheckpointWriter w;
  w.add("t", random_tensor({8}, 5));
  std::stringstream ss;
  w.write(ss);
  std::string full = ss.str();
  std::stringstream cut(full.substr(0, full.size() - 8));
  CHECK_THROWS(Checkpoint::read(cut));
}

TEST_CASE("checkpoint rejects missing end marker and bad names") {
  std::stringstream ss("ICAC-CKPT-1\ntensor t 1 4\n");
  CHECK_THROWS(Checkpoint::read(ss));

  CheckpointWriter w;
  CHECK_THROWS(w.add("has space", random_tensor({1}, 6)));
  CHECK_THROWS(w.add("", random_tensor({1}, 7)));
}

TEST_CASE("checkpoint preserves exact float bits including negative zero") {
  CheckpointWriter w;
  Tensor t({4}, {-0.0f, 1e-38f, 3.14159265f, -123456.75f});
  w.add("bits", t);
  std::stringstream ss;
  w.write(ss);
  const Checkpoint ck = Checkpoint::read(ss);
  const Tensor& r = ck.get("bits");
  for (std::size_t i = 0; i < t.numel(); ++i) {
    CHECK(std::memcmp(&r.data[i], &t.data[i], sizeof(float)) == 0);
  }
}
