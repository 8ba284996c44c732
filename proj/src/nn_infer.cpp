#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "adam/error.hpp"
#include "adam/nn.hpp"

namespace adam::nn {

std::int8_t requantize(std::int64_t acc, double multiplier, std::int32_t zero_point, bool relu) {
  const double r = std::round(static_cast<double>(acc) * multiplier);
  double q = r + zero_point;
  const double lo = relu ? static_cast<double>(zero_point) : -128.0;
  q = std::clamp(q, lo, 127.0);
  return static_cast<std::int8_t>(q);
}

ModelSchedule model_schedule(const ModelGraph& model, const ArrayConfig& cfg) {
  ModelSchedule s;
  std::vector<std::size_t> in_shape = model.input_shape;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    GemmDims dims{};
    bool lowered = false;
    if (const auto* c = std::get_if<Conv2d>(&model.layers[i])) {
      const auto& out = model.output_shapes[i];
      dims = {out[1] * out[2], c->out_channels, c->in_channels * c->kernel_h * c->kernel_w};
      lowered = true;
    } else if (const auto* d = std::get_if<Dense>(&model.layers[i])) {
      dims = {1, d->out_features, d->in_features};
      lowered = true;
    }
    if (lowered) {
      const auto cycles = schedule(dims, cfg).cycles();
      s.windows.push_back({i, dims, s.total_cycles, cycles});
      s.total_cycles += cycles;
    }
    in_shape = model.output_shapes[i];
  }
  return s;
}

QuantTensor quantize_input(const ModelGraph& model, std::span<const std::uint8_t> pixels) {
  QuantTensor t;
  t.shape = model.input_shape;
  t.quant = model.input;
  if (pixels.size() != t.element_count())
    throw Error("shape_mismatch", "image has " + std::to_string(pixels.size()) + " pixels, model expects " +
                                      std::to_string(t.element_count()));
  t.data.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double real = static_cast<double>(pixels[i]) / 255.0;
    const double q = std::round(real / model.input.scale) + model.input.zero_point;
    t.data[i] = static_cast<std::int8_t>(std::clamp(q, -128.0, 127.0));
  }
  return t;
}

namespace {

Matrix<std::int16_t> conv_input(const Conv2d& c, const QuantTensor& x, const std::vector<std::size_t>& out_shape) {
  const std::size_t h = x.shape[1], w = x.shape[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  const std::size_t kk = c.in_channels * c.kernel_h * c.kernel_w;
  const auto zp = x.quant.zero_point;

  Matrix<std::int16_t> cols(oh * ow, kk);
  for (std::size_t oy = 0; oy < oh; ++oy)
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const std::size_t row = oy * ow + ox;
      std::size_t col = 0;
      for (std::size_t ch = 0; ch < c.in_channels; ++ch)
        for (std::size_t ky = 0; ky < c.kernel_h; ++ky)
          for (std::size_t kx = 0; kx < c.kernel_w; ++kx, ++col) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * c.stride + ky) - static_cast<std::ptrdiff_t>(c.padding);
            const auto ix = static_cast<std::ptrdiff_t>(ox * c.stride + kx) - static_cast<std::ptrdiff_t>(c.padding);
            std::int16_t v = 0;
            if (iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix < static_cast<std::ptrdiff_t>(w))
              v = static_cast<std::int16_t>(x.data[(ch * h + iy) * w + ix] - zp);
            cols(row, col) = v;
          }
    }
  return cols;
}

Matrix<std::int16_t> dense_input(const Dense& d, const QuantTensor& x) {
  Matrix<std::int16_t> a(1, d.in_features);
  for (std::size_t k = 0; k < d.in_features; ++k) a(0, k) = static_cast<std::int16_t>(x.data[k] - x.quant.zero_point);
  return a;
}

QuantTensor conv_output(const Conv2d& c, const QuantParams& in, const Matrix<std::int32_t>& acc,
                        const std::vector<std::size_t>& out_shape) {
  const std::size_t pixels = out_shape[1] * out_shape[2];
  const double mult = (in.scale * c.weight.quant.scale) / c.output.scale;
  QuantTensor y;
  y.shape = out_shape;
  y.quant = c.output;
  y.data.resize(c.out_channels * pixels);
  for (std::size_t o = 0; o < c.out_channels; ++o)
    for (std::size_t p = 0; p < pixels; ++p)
      y.data[o * pixels + p] = requantize(std::int64_t{acc(p, o)} + c.bias[o], mult, c.output.zero_point, c.relu);
  return y;
}

QuantTensor dense_output(const Dense& d, const QuantParams& in, const Matrix<std::int32_t>& acc,
                         const std::vector<std::size_t>& out_shape) {
  const double mult = (in.scale * d.weight.quant.scale) / d.output->scale;
  QuantTensor y;
  y.shape = out_shape;
  y.quant = *d.output;
  y.data.resize(d.out_features);
  for (std::size_t o = 0; o < d.out_features; ++o)
    y.data[o] = requantize(std::int64_t{acc(0, o)} + d.bias[o], mult, d.output->zero_point, d.relu);
  return y;
}

std::vector<double> dense_logits(const Dense& d, const QuantParams& in, const Matrix<std::int32_t>& acc) {
  const double in_w = in.scale * d.weight.quant.scale;
  std::vector<double> logits(d.out_features);
  for (std::size_t o = 0; o < d.out_features; ++o) {
    double v = static_cast<double>(std::int64_t{acc(0, o)} + d.bias[o]) * in_w;
    if (d.relu) v = std::max(v, 0.0);
    logits[o] = v;
  }
  return logits;
}

QuantTensor maxpool_forward(const MaxPool& mp, const QuantTensor& x, const std::vector<std::size_t>& out_shape) {
  const std::size_t h = x.shape[1], w = x.shape[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  QuantTensor y;
  y.shape = out_shape;
  y.quant = x.quant;
  y.data.resize(out_shape[0] * oh * ow);
  for (std::size_t ch = 0; ch < out_shape[0]; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::int8_t m = -128;
        for (std::size_t ky = 0; ky < mp.size; ++ky)
          for (std::size_t kx = 0; kx < mp.size; ++kx)
            m = std::max(m, x.data[(ch * h + oy * mp.stride + ky) * w + ox * mp.stride + kx]);
        y.data[(ch * oh + oy) * ow + ox] = m;
      }
  return y;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) sum += (v = std::exp(v - mx));
  for (auto& v : p) v /= sum;
  return p;
}

const Matrix<std::int16_t>& weights_of(const Layer& l) {
  if (const auto* c = std::get_if<Conv2d>(&l)) return c->lowered;
  return std::get<Dense>(l).lowered;
}

// Post-GEMM half of a conv/dense layer. Returns true when it produced logits.
bool finish_gemm_layer(const Layer& layer, const QuantParams& in, const Matrix<std::int32_t>& acc,
                       const std::vector<std::size_t>& out_shape, QuantTensor& x, std::vector<double>& logits) {
  if (const auto* c = std::get_if<Conv2d>(&layer)) {
    x = conv_output(*c, in, acc, out_shape);
    return false;
  }
  const auto& d = std::get<Dense>(layer);
  if (d.output) {
    x = dense_output(d, in, acc, out_shape);
    return false;
  }
  logits = dense_logits(d, in, acc);
  return true;
}

struct Engine {
  const ModelGraph& model;
  MultiplierKind kind;
  const ArrayConfig& cfg;
  std::span<const FaultEvent> events;
  const ModelSchedule& sched;
  InferenceResult& result;
  GoldenTrace* trace = nullptr;

  // Runs layers [first, end) with x as the input of layer `first`.
  void run(QuantTensor x, std::size_t first) {
    std::size_t window = 0;
    while (window < sched.windows.size() && sched.windows[window].layer_index < first) ++window;
    bool have_logits = false;
    for (std::size_t i = first; i < model.layers.size(); ++i) {
      const auto& layer = model.layers[i];
      const auto& out_shape = model.output_shapes[i];
      LayerTrace* lt = trace ? &trace->layers[i] : nullptr;
      if (lt) lt->input = x;
      if (std::holds_alternative<Conv2d>(layer) || std::holds_alternative<Dense>(layer)) {
        auto a = std::holds_alternative<Conv2d>(layer) ? conv_input(std::get<Conv2d>(layer), x, out_shape)
                                                       : dense_input(std::get<Dense>(layer), x);
        auto g = gemm(a, weights_of(layer), cfg, kind, events, sched.windows[window++].cycle_base);
        result.detected |= g.detected;
        result.faults_applied += g.faults_applied;
        const auto in = x.quant;
        have_logits = finish_gemm_layer(layer, in, g.out, out_shape, x, result.logits);
        if (lt) {
          lt->gemm_a = std::move(a);
          lt->acc = std::move(g.out);
        }
      } else if (const auto* mp = std::get_if<MaxPool>(&layer)) {
        x = maxpool_forward(*mp, x, out_shape);
      } else if (std::holds_alternative<Relu>(layer)) {
        const auto zp = static_cast<std::int8_t>(x.quant.zero_point);
        for (auto& v : x.data) v = std::max(v, zp);
      } else if (std::holds_alternative<Flatten>(layer)) {
        x.shape = out_shape;
      }
      if (lt) lt->output = x;
    }
    if (!have_logits) {
      result.logits.resize(x.data.size());
      for (std::size_t i = 0; i < x.data.size(); ++i)
        result.logits[i] = x.quant.scale * (static_cast<double>(x.data[i]) - x.quant.zero_point);
    }
    result.probabilities = softmax(result.logits);
  }
};

void check_input(const ModelGraph& model, const QuantTensor& input) {
  input.validate();
  if (input.shape != model.input_shape) throw Error("shape_mismatch", "input shape does not match the model");
}

}  // namespace

InferenceResult infer(const ModelGraph& model, const QuantTensor& input, MultiplierKind kind,
                      std::span<const FaultEvent> events, const ArrayConfig& cfg) {
  check_input(model, input);
  InferenceResult result;
  const auto sched = model_schedule(model, cfg);
  Engine{model, kind, cfg, events, sched, result}.run(input, 0);
  return result;
}

GoldenTrace trace_inference(const ModelGraph& model, const QuantTensor& input, MultiplierKind kind,
                            const ArrayConfig& cfg) {
  check_input(model, input);
  GoldenTrace t;
  t.schedule = model_schedule(model, cfg);
  t.layers.resize(model.layers.size());
  Engine{model, kind, cfg, {}, t.schedule, t.result, &t}.run(input, 0);
  return t;
}

InferenceResult infer_from_trace(const ModelGraph& model, const GoldenTrace& trace, MultiplierKind kind,
                                 const FaultEvent& event, const ArrayConfig& cfg) {
  const auto& windows = trace.schedule.windows;
  const auto w = std::find_if(windows.begin(), windows.end(), [&](const LayerWindow& lw) {
    return event.cycle >= lw.cycle_base && event.cycle - lw.cycle_base < lw.cycles;
  });
  if (w == windows.end()) return trace.result;
  const auto li = w->layer_index;
  const auto& layer = model.layers[li];
  const auto& lt = trace.layers[li];
  const auto hit = gemm_fault_element(lt.gemm_a, weights_of(layer), cfg, kind, event, w->cycle_base);
  if (!hit) return trace.result;

  InferenceResult r = trace.result;
  r.detected = hit->detected;
  r.faults_applied = hit->faults_applied;
  if (hit->value == lt.acc(hit->row, hit->col)) return r;

  auto acc = lt.acc;
  acc(hit->row, hit->col) = hit->value;
  QuantTensor x;
  std::vector<double> logits;
  if (finish_gemm_layer(layer, lt.input.quant, acc, model.output_shapes[li], x, logits)) {
    r.logits = std::move(logits);
    r.probabilities = softmax(r.logits);
    return r;
  }
  if (x.data == lt.output.data) return r;  // masked by requantization
  InferenceResult tail;
  Engine{model, kind, cfg, {}, trace.schedule, tail}.run(std::move(x), li + 1);
  r.logits = std::move(tail.logits);
  r.probabilities = std::move(tail.probabilities);
  return r;
}

InferenceResult infer(const ModelGraph& model, std::span<const std::uint8_t> pixels, MultiplierKind kind,
                      std::span<const FaultEvent> events, const ArrayConfig& cfg) {
  return infer(model, quantize_input(model, pixels), kind, events, cfg);
}

std::vector<std::size_t> rank_classes(std::span<const double> probs) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return idx;
}

std::string SdcRecord::label() const {
  std::string s;
  auto add = [&](bool f, const char* name) {
    if (!f) return;
    if (!s.empty()) s += '|';
    s += name;
  };
  add(sdc1, "SDC-1");
  add(sdc5, "SDC-5");
  add(sdc10, "SDC-10%");
  add(sdc20, "SDC-20%");
  return s.empty() ? "none" : s;
}

SdcRecord classify_sdc(std::span<const double> golden, std::span<const double> faulty) {
  if (golden.size() != faulty.size() || golden.empty())
    throw Error("shape_mismatch", "classify_sdc: probability vectors differ in length");
  const auto g_rank = rank_classes(golden);
  const auto f_rank = rank_classes(faulty);
  const std::size_t top = g_rank[0];
  SdcRecord r;
  r.sdc1 = f_rank[0] != top;
  const std::size_t k5 = std::min<std::size_t>(5, f_rank.size());
  r.sdc5 = std::find(f_rank.begin(), f_rank.begin() + static_cast<std::ptrdiff_t>(k5), top) ==
           f_rank.begin() + static_cast<std::ptrdiff_t>(k5);
  const double delta = std::abs(faulty[top] - golden[top]);
  r.sdc10 = delta > 0.10;
  r.sdc20 = delta > 0.20;
  return r;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& p) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("io", "truncated IDX header in " + p.string());
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit) {
  std::ifstream fi(images, std::ios::binary);
  if (!fi) throw Error("io", "cannot open " + images.string());
  std::ifstream fl(labels, std::ios::binary);
  if (!fl) throw Error("io", "cannot open " + labels.string());

  if (read_be32(fi, images) != 0x00000803u) throw Error("schema", images.string() + " is not an IDX3 u8 file");
  const auto n_img = read_be32(fi, images);
  Dataset d;
  d.rows = read_be32(fi, images);
  d.cols = read_be32(fi, images);
  if (read_be32(fl, labels) != 0x00000801u) throw Error("schema", labels.string() + " is not an IDX1 u8 file");
  const auto n_lab = read_be32(fl, labels);
  if (n_img != n_lab) throw Error("schema", "image and label counts differ");

  std::size_t n = n_img;
  if (limit != 0) n = std::min<std::size_t>(n, limit);
  d.pixels.resize(n * d.rows * d.cols);
  d.labels.resize(n);
  if (!fi.read(reinterpret_cast<char*>(d.pixels.data()), static_cast<std::streamsize>(d.pixels.size())))
    throw Error("io", "truncated IDX image data in " + images.string());
  if (!fl.read(reinterpret_cast<char*>(d.labels.data()), static_cast<std::streamsize>(n)))
    throw Error("io", "truncated IDX label data in " + labels.string());
  return d;
}

std::vector<std::uint8_t> predict(const ModelGraph& model, const Dataset& data, MultiplierKind kind,
                                  const ArrayConfig& cfg, Exec exec) {
  std::vector<std::uint8_t> out(data.size());
  auto one = [&](std::size_t i) {
    const auto r = infer(model, data.image(i), kind, {}, cfg);
    out[i] = static_cast<std::uint8_t>(rank_classes(r.probabilities)[0]);
  };
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < data.size(); ++i) one(i);
  } else {
    const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  return out;
}

double evaluate_accuracy(const ModelGraph& model, const Dataset& data, MultiplierKind kind, const ArrayConfig& cfg,
                         Exec exec) {
  if (data.size() == 0) throw Error("invalid_argument", "evaluate_accuracy: empty dataset");
  const auto pred = predict(model, data, kind, cfg, exec);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace adam::nn
