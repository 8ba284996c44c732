#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adam/fault_site.hpp"
#include "adam/kernels.hpp"
#include "adam/matrix.hpp"
#include "adam/multiplier.hpp"
#include "adam/systolic.hpp"

namespace adam::nn {

struct QuantParams {
  double scale = 1.0;
  std::int32_t zero_point = 0;
};

/// INT8 tensor with per-tensor affine quantization: real = scale * (q - zero_point).
struct QuantTensor {
  std::vector<std::int8_t> data;
  std::vector<std::size_t> shape;
  QuantParams quant;

  std::size_t element_count() const;
  /// Throws adam::Error("shape_mismatch") when data and shape disagree.
  void validate() const;
};

struct Conv2d {
  std::size_t in_channels = 0, out_channels = 0;
  std::size_t kernel_h = 0, kernel_w = 0;
  std::size_t stride = 1, padding = 0;
  bool relu = false;
  QuantTensor weight;               // [out, in, kh, kw], symmetric
  std::vector<std::int32_t> bias;   // scale = input scale * weight scale
  QuantParams output;
  Matrix<std::int16_t> lowered;     // [in*kh*kw, out], zero point removed
};

struct Dense {
  std::size_t in_features = 0, out_features = 0;
  bool relu = false;
  QuantTensor weight;  // [out, in], symmetric
  std::vector<std::int32_t> bias;
  std::optional<QuantParams> output;  // empty: emits real-valued logits
  Matrix<std::int16_t> lowered;       // [in, out]
};

struct MaxPool {
  std::size_t size = 2, stride = 2;
};
struct Relu {};
struct Flatten {};
struct Softmax {};

using Layer = std::variant<Conv2d, Dense, MaxPool, Relu, Flatten, Softmax>;

std::string_view layer_type(const Layer& l);

struct ModelGraph {
  std::string name;
  std::vector<std::size_t> input_shape;  // [C, H, W]
  QuantParams input;
  std::vector<Layer> layers;
  std::vector<std::vector<std::size_t>> output_shapes;  // per layer, filled by load/validate
  std::size_t num_classes = 0;

  /// Shape inference; throws adam::Error("shape_mismatch" / "schema") on
  /// incompatible layers.
  void validate();
};

/// Reads a JSON manifest and its little-endian blob; verifies the CRC-32.
ModelGraph load_model(const std::filesystem::path& manifest);

/// Global-cycle window of every GEMM-lowered layer, laid out back to back.
struct LayerWindow {
  std::size_t layer_index;
  GemmDims dims;
  std::uint64_t cycle_base;
  std::uint64_t cycles;
};

struct ModelSchedule {
  std::vector<LayerWindow> windows;
  std::uint64_t total_cycles = 0;
};

ModelSchedule model_schedule(const ModelGraph& model, const ArrayConfig& cfg);

QuantTensor quantize_input(const ModelGraph& model, std::span<const std::uint8_t> pixels);

struct InferenceResult {
  std::vector<double> logits;
  std::vector<double> probabilities;
  bool detected = false;
  std::uint32_t faults_applied = 0;
};

/// Conv and dense layers are lowered to GEMMs on the simulated array.
InferenceResult infer(const ModelGraph& model, const QuantTensor& input, MultiplierKind kind,
                      std::span<const FaultEvent> events = {}, const ArrayConfig& cfg = {});

InferenceResult infer(const ModelGraph& model, std::span<const std::uint8_t> pixels, MultiplierKind kind,
                      std::span<const FaultEvent> events = {}, const ArrayConfig& cfg = {});

/// Per-layer state of one fault-free inference, kept so a faulty run can
/// restart at the layer its fault lands in.
struct LayerTrace {
  QuantTensor input;
  QuantTensor output;
  Matrix<std::int16_t> gemm_a;     // lowered GEMM operand (conv/dense only)
  Matrix<std::int32_t> acc;        // fault-free accumulators (conv/dense only)
};

struct GoldenTrace {
  ModelSchedule schedule;
  std::vector<LayerTrace> layers;
  InferenceResult result;
};

GoldenTrace trace_inference(const ModelGraph& model, const QuantTensor& input, MultiplierKind kind,
                            const ArrayConfig& cfg = {});

/// Same result as infer() with the single event, computed from the golden
/// trace: only the hit output element is re-evaluated, and later layers run
/// only if that change survives requantization.
InferenceResult infer_from_trace(const ModelGraph& model, const GoldenTrace& trace, MultiplierKind kind,
                                 const FaultEvent& event, const ArrayConfig& cfg = {});

/// Round half away from zero, then add zero_point and clamp to int8; with
/// relu the lower clamp is the zero point.
std::int8_t requantize(std::int64_t acc, double multiplier, std::int32_t zero_point, bool relu);

/// Ranking used for top-k: descending probability, ties by lower index.
std::vector<std::size_t> rank_classes(std::span<const double> probs);

struct SdcRecord {
  std::uint64_t run_id = 0;
  bool sdc1 = false;   // top-1 changed
  bool sdc5 = false;   // golden top-1 not in faulty top-5
  bool sdc10 = false;  // |delta confidence of golden top-1| > 0.10
  bool sdc20 = false;  // |delta confidence of golden top-1| > 0.20
  bool detected = false;

  bool any() const { return sdc1 || sdc5 || sdc10 || sdc20; }
  /// "none" or criteria joined by '|', e.g. "SDC-1|SDC-10%".
  std::string label() const;
};

SdcRecord classify_sdc(std::span<const double> golden, std::span<const double> faulty);

struct Dataset {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return std::span<const std::uint8_t>(pixels).subspan(i * rows * cols, rows * cols);
  }
};

/// Reads IDX image (magic 0x00000803) and label (0x00000801) files. limit
/// of 0 keeps every item.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit = 0);

/// Fault-free top-1 accuracy in percent.
double evaluate_accuracy(const ModelGraph& model, const Dataset& data, MultiplierKind kind,
                         const ArrayConfig& cfg = {}, Exec exec = Exec::parallel);

/// Fault-free top-1 prediction per image.
std::vector<std::uint8_t> predict(const ModelGraph& model, const Dataset& data, MultiplierKind kind,
                                  const ArrayConfig& cfg = {}, Exec exec = Exec::parallel);

}  // namespace adam::nn
