#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "afnet/nn/checkpoint.hpp"
#include "afnet/nn/modules.hpp"

using namespace afnet;
using namespace afnet::nn;

namespace {

ParamStore<float> small_store(std::uint64_t seed) {
  ParamStore<float> store;
  std::mt19937_64 rng(seed);
  ParamBuilder<float> b(store, rng);
  Conv2d<float>::create(b.scope("conv"), 3, 4, 3, 1, 1);
  BatchNorm2d<float>::create(b.scope("bn"), 4);
  return store;
}

}  // namespace

TEST_CASE("param store registry") {
  auto store = small_store(1);
  CHECK(store.size() == 6);
  CHECK(store.contains("conv.weight"));
  CHECK(store.contains("bn.running_var"));
  CHECK(store.parameter_count() == 4 * 3 * 9 + 4 + 4 + 4);
  CHECK_FALSE(store.get("bn.running_mean").tensor.requires_grad());
  CHECK(store.get("conv.weight").tensor.requires_grad());
  std::mt19937_64 rng(0);
  ParamBuilder<float> b(store, rng);
  CHECK_THROWS_AS(b.constant("conv.bias", {4}, 0.0f, ParamKind::kBias), ContractError);
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "afnet_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.afck";
  auto src = small_store(7);
  write_checkpoint(path, params_to_records(src));

  std::ifstream is(path, std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  CHECK(std::string(magic, 4) == "AFCK");

  auto dst = small_store(8);
  CHECK_FALSE(dst.equals(src));
  load_params(dst, read_checkpoint(path));
  CHECK(dst.equals(src));

  ParamStore<float> other;
  std::mt19937_64 rng(0);
  ParamBuilder<float> b(other, rng);
  Conv2d<float>::create(b.scope("conv"), 3, 5, 3);
  CHECK_THROWS_AS(load_params(other, read_checkpoint(path)), ContractError);

  // Truncations surface as parse errors.
  std::ifstream full(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(full)), {});
  for (std::size_t cut : {std::size_t{2}, std::size_t{6}, std::size_t{20}, bytes.size() - 1}) {
    std::ofstream(dir / "t.afck", std::ios::binary) << bytes.substr(0, cut);
    CHECK_THROWS_AS(read_checkpoint(dir / "t.afck"), ParseError);
  }
  std::filesystem::remove_all(dir);
}
