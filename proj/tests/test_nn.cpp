#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "adam/error.hpp"
#include "adam/fault_engine.hpp"
#include "adam/nn.hpp"

using namespace adam;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ADAM_DATA_DIR;

const nn::ModelGraph& fixture() {
  static const auto m = nn::load_model(kData / "lenet5_int8.json");
  return m;
}

const nn::Dataset& holdout() {
  static const auto d =
      nn::load_idx(kData / "mnist-holdout-images.idx3-ubyte", kData / "mnist-holdout-labels.idx1-ubyte");
  return d;
}

nlohmann::json reference() {
  std::ifstream in(kData / "lenet5_reference.json");
  return nlohmann::json::parse(in);
}

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("adam_nn_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fixture loads") {
  const auto& m = fixture();
  REQUIRE(m.layers.size() == 7);
  CHECK(nn::layer_type(m.layers[0]) == "conv2d");
  CHECK(nn::layer_type(m.layers[1]) == "maxpool");
  CHECK(nn::layer_type(m.layers[4]) == "flatten");
  CHECK(nn::layer_type(m.layers[6]) == "dense");
  CHECK(m.num_classes == 10);
  CHECK(m.input_shape == std::vector<std::size_t>{1, 28, 28});
  CHECK(m.output_shapes[1] == std::vector<std::size_t>{6, 12, 12});
  CHECK(m.output_shapes[4] == std::vector<std::size_t>{256});
  CHECK(holdout().size() == 2000);
  CHECK(holdout().rows == 28);
}

TEST_CASE("corrupt or truncated blob is rejected") {
  TempDir t;
  fs::copy_file(kData / "lenet5_int8.json", t.path / "lenet5_int8.json");
  std::ifstream in(kData / "lenet5_int8.bin", std::ios::binary);
  std::vector<char> blob((std::istreambuf_iterator<char>(in)), {});
  {
    std::ofstream out(t.path / "lenet5_int8.bin", std::ios::binary);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size() - 10));
  }
  CHECK(error_code([&] { nn::load_model(t.path / "lenet5_int8.json"); }) == "checksum_mismatch");
  blob[100] ^= 1;
  {
    std::ofstream out(t.path / "lenet5_int8.bin", std::ios::binary);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  CHECK(error_code([&] { nn::load_model(t.path / "lenet5_int8.json"); }) == "checksum_mismatch");
  CHECK(error_code([&] { nn::load_model(t.path / "missing.json"); }) == "io");
}

TEST_CASE("graph validation") {
  nn::ModelGraph g;
  g.input_shape = {1, 28, 28};
  CHECK(error_code([&] { g.validate(); }) == "schema");

  auto m = fixture();
  std::get<nn::Dense>(m.layers[5]).in_features = 300;
  CHECK(error_code([&] { m.validate(); }) == "shape_mismatch");
}

TEST_CASE("requantize rounding") {
  CHECK(nn::requantize(5, 0.5, 0, false) == 3);
  CHECK(nn::requantize(-5, 0.5, 0, false) == -3);
  CHECK(nn::requantize(-100, 1.0, 0, true) == 0);
  CHECK(nn::requantize(1000, 1.0, 0, false) == 127);
  CHECK(nn::requantize(-1000, 1.0, 0, false) == -128);
  CHECK(nn::requantize(10, 1.0, 5, false) == 15);
}

TEST_CASE("exact-multiplier logits match the integer reference") {
  const auto ref = reference();
  const auto& logits = ref["logits"];
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto r = nn::infer(fixture(), holdout().image(i), MultiplierKind::exact);
    REQUIRE(r.logits.size() == 10);
    for (std::size_t c = 0; c < 10; ++c)
      REQUIRE(r.logits[c] == doctest::Approx(logits[i][c].get<double>()).epsilon(1e-9));
    double sum = 0;
    for (double p : r.probabilities) sum += p;
    CHECK(sum == doctest::Approx(1.0));
  }
  const auto pred = nn::predict(fixture(), holdout(), MultiplierKind::exact);
  const auto& want = ref["predictions"];
  REQUIRE(want.size() == pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) REQUIRE(pred[i] == want[i].get<int>());
  CHECK(nn::evaluate_accuracy(fixture(), holdout(), MultiplierKind::exact) ==
        doctest::Approx(ref["accuracy_percent"].get<double>()));
}

TEST_CASE("approximate multiplier keeps almost every prediction") {
  nn::Dataset d = holdout();
  d.labels.resize(1000);
  const auto e = nn::predict(fixture(), d, MultiplierKind::exact);
  const auto a = nn::predict(fixture(), d, MultiplierKind::adam);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < e.size(); ++i) agree += e[i] == a[i];
  CHECK(agree >= 990);
}

TEST_CASE("serial and parallel prediction agree") {
  nn::Dataset d = holdout();
  d.labels.resize(64);
  CHECK(nn::predict(fixture(), d, MultiplierKind::adam, {}, Exec::serial) ==
        nn::predict(fixture(), d, MultiplierKind::adam, {}, Exec::parallel));
}

TEST_CASE("empty dataset") {
  nn::Dataset d;
  CHECK(error_code([&] { nn::evaluate_accuracy(fixture(), d, MultiplierKind::exact); }) == "invalid_argument");
}

TEST_CASE("bad input shape") {
  std::vector<std::uint8_t> px(100);
  CHECK(error_code([&] { nn::infer(fixture(), px, MultiplierKind::exact); }) == "shape_mismatch");
}

TEST_CASE("classify_sdc") {
  const std::vector<double> g{0.7, 0.2, 0.05, 0.03, 0.01, 0.01, 0, 0, 0, 0};
  auto r = nn::classify_sdc(g, g);
  CHECK_FALSE(r.any());
  CHECK(r.label() == "none");

  // Top-1 flips, confidence drop 0.4.
  r = nn::classify_sdc(g, std::vector<double>{0.3, 0.6, 0.05, 0.03, 0.01, 0.01, 0, 0, 0, 0});
  CHECK(r.sdc1);
  CHECK_FALSE(r.sdc5);
  CHECK(r.sdc10);
  CHECK(r.sdc20);
  CHECK(r.label() == "SDC-1|SDC-10%|SDC-20%");

  // Same top-1, drop of 0.15.
  r = nn::classify_sdc(g, std::vector<double>{0.55, 0.35, 0.05, 0.03, 0.01, 0.01, 0, 0, 0, 0});
  CHECK_FALSE(r.sdc1);
  CHECK(r.sdc10);
  CHECK_FALSE(r.sdc20);

  // Golden class pushed to sixth place.
  r = nn::classify_sdc(g, std::vector<double>{0.0, 0.3, 0.2, 0.2, 0.15, 0.15, 0, 0, 0, 0});
  CHECK(r.sdc5);

  // Ties rank the lower index first.
  CHECK(nn::rank_classes(std::vector<double>{0.5, 0.5})[0] == 0);
  CHECK(error_code([&] { nn::classify_sdc(g, std::vector<double>{1.0}); }) == "shape_mismatch");
}

TEST_CASE("trace replay equals full faulty inference") {
  const ArrayConfig cfg;
  const auto sched = nn::model_schedule(fixture(), cfg);
  CHECK(sched.windows.size() == 4);
  std::uint64_t expect_cycles = 0;
  for (const auto& w : sched.windows) {
    CHECK(w.cycle_base == expect_cycles);
    CHECK(w.cycles == schedule(w.dims, cfg).cycles());
    expect_cycles += w.cycles;
  }
  CHECK(sched.total_cycles == expect_cycles);

  for (auto kind : {MultiplierKind::exact, MultiplierKind::mitchell, MultiplierKind::adam}) {
    const auto sites = enumerate_sites(kind, cfg);
    const auto events =
        draw_events({.seed = 17, .n_injections = 150, .kind = kind}, sites, {0, sched.total_cycles});
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto x = nn::quantize_input(fixture(), holdout().image(i % 20));
      const auto trace = nn::trace_inference(fixture(), x, kind, cfg);
      const auto full = nn::infer(fixture(), x, kind, std::span(&events[i], 1), cfg);
      const auto fast = nn::infer_from_trace(fixture(), trace, kind, events[i], cfg);
      REQUIRE(full.logits == fast.logits);
      REQUIRE(full.detected == fast.detected);
      REQUIRE(full.faults_applied == fast.faults_applied);
    }
  }
}

TEST_CASE("idx loader limit and errors") {
  const auto d = nn::load_idx(kData / "mnist-holdout-images.idx3-ubyte", kData / "mnist-holdout-labels.idx1-ubyte", 5);
  CHECK(d.size() == 5);
  CHECK(d.pixels.size() == 5 * 784);
  CHECK(error_code([&] {
          nn::load_idx(kData / "mnist-holdout-labels.idx1-ubyte", kData / "mnist-holdout-labels.idx1-ubyte");
        }) == "schema");
}
