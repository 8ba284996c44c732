#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "adam/error.hpp"
#include "adam/nn.hpp"

namespace adam::nn {

using nlohmann::json;

std::size_t QuantTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

void QuantTensor::validate() const {
  if (data.size() != element_count())
    throw Error("shape_mismatch", "tensor holds " + std::to_string(data.size()) + " values but its shape needs " +
                                      std::to_string(element_count()));
  if (!(quant.scale > 0.0)) throw Error("schema", "tensor scale must be positive");
}

std::string_view layer_type(const Layer& l) {
  struct V {
    std::string_view operator()(const Conv2d&) const { return "conv2d"; }
    std::string_view operator()(const Dense&) const { return "dense"; }
    std::string_view operator()(const MaxPool&) const { return "maxpool"; }
    std::string_view operator()(const Relu&) const { return "relu"; }
    std::string_view operator()(const Flatten&) const { return "flatten"; }
    std::string_view operator()(const Softmax&) const { return "softmax"; }
  };
  return std::visit(V{}, l);
}

namespace {

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

[[noreturn]] void shape_error(std::size_t idx, std::string_view type, const std::string& msg) {
  throw Error("shape_mismatch", "layer " + std::to_string(idx) + " (" + std::string(type) + "): " + msg);
}

}  // namespace

void ModelGraph::validate() {
  if (layers.empty()) throw Error("schema", "model has no layers");
  if (input_shape.size() != 3) throw Error("schema", "input shape must be [C, H, W]");
  if (!(input.scale > 0.0)) throw Error("schema", "input scale must be positive");

  output_shapes.clear();
  auto cur = input_shape;
  bool logits_emitted = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto type = layer_type(layers[i]);
    if (logits_emitted && type != "softmax") shape_error(i, type, "only softmax may follow a logits layer");
    if (auto* c = std::get_if<Conv2d>(&layers[i])) {
      if (cur.size() != 3 || cur[0] != c->in_channels)
        shape_error(i, type, "expects " + std::to_string(c->in_channels) + " input channels, got " + shape_str(cur));
      if (c->stride == 0 || c->kernel_h == 0 || c->kernel_w == 0) shape_error(i, type, "zero kernel or stride");
      if (cur[1] + 2 * c->padding < c->kernel_h || cur[2] + 2 * c->padding < c->kernel_w)
        shape_error(i, type, "kernel larger than input " + shape_str(cur));
      c->weight.validate();
      if (c->weight.shape != std::vector<std::size_t>{c->out_channels, c->in_channels, c->kernel_h, c->kernel_w})
        shape_error(i, type, "weight shape " + shape_str(c->weight.shape) + " disagrees with layer attributes");
      if (c->bias.size() != c->out_channels) shape_error(i, type, "bias length");
      cur = {c->out_channels, (cur[1] + 2 * c->padding - c->kernel_h) / c->stride + 1,
             (cur[2] + 2 * c->padding - c->kernel_w) / c->stride + 1};
    } else if (auto* d = std::get_if<Dense>(&layers[i])) {
      if (cur.size() != 1 || cur[0] != d->in_features)
        shape_error(i, type, "expects [" + std::to_string(d->in_features) + "], got " + shape_str(cur));
      d->weight.validate();
      if (d->weight.shape != std::vector<std::size_t>{d->out_features, d->in_features})
        shape_error(i, type, "weight shape " + shape_str(d->weight.shape) + " disagrees with layer attributes");
      if (d->bias.size() != d->out_features) shape_error(i, type, "bias length");
      cur = {d->out_features};
      if (!d->output) logits_emitted = true;
    } else if (auto* p = std::get_if<MaxPool>(&layers[i])) {
      if (cur.size() != 3 || p->size == 0 || p->stride == 0 || cur[1] < p->size || cur[2] < p->size)
        shape_error(i, type, "cannot pool " + shape_str(cur));
      cur = {cur[0], (cur[1] - p->size) / p->stride + 1, (cur[2] - p->size) / p->stride + 1};
    } else if (std::holds_alternative<Flatten>(layers[i])) {
      std::size_t n = 1;
      for (auto v : cur) n *= v;
      cur = {n};
    } else if (std::holds_alternative<Softmax>(layers[i])) {
      if (i + 1 != layers.size()) shape_error(i, type, "softmax must be the last layer");
      if (cur.size() != 1) shape_error(i, type, "softmax needs a vector input");
    }
    output_shapes.push_back(cur);
  }
  if (cur.size() != 1) throw Error("shape_mismatch", "model output is not a vector: " + shape_str(cur));
  num_classes = cur[0];
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class T>
T req(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error("schema", where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("schema", where + ": bad \"" + key + "\": " + e.what());
  }
}

QuantParams parse_quant(const json& j, const std::string& where) {
  QuantParams q{req<double>(j, "scale", where), req<std::int32_t>(j, "zero_point", where)};
  if (!(q.scale > 0.0)) throw Error("schema", where + ": scale must be positive");
  if (q.zero_point < -128 || q.zero_point > 127) throw Error("schema", where + ": zero_point outside int8");
  return q;
}

QuantTensor parse_weight(const json& j, std::span<const std::uint8_t> blob, const std::string& where) {
  QuantTensor t;
  t.shape = req<std::vector<std::size_t>>(j, "shape", where);
  t.quant = parse_quant(j, where);
  const auto offset = req<std::size_t>(j, "offset", where);
  const auto n = t.element_count();
  if (offset + n > blob.size()) throw Error("schema", where + ": weight extends past the blob");
  t.data.resize(n);
  std::memcpy(t.data.data(), blob.data() + offset, n);
  return t;
}

std::vector<std::int32_t> parse_bias(const json& j, std::span<const std::uint8_t> blob, const std::string& where) {
  const auto offset = req<std::size_t>(j, "offset", where);
  const auto count = req<std::size_t>(j, "count", where);
  if (offset + 4 * count > blob.size()) throw Error("schema", where + ": bias extends past the blob");
  std::vector<std::int32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = blob.data() + offset + 4 * i;
    const std::uint32_t u = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
                            (std::uint32_t{p[3]} << 24);
    out[i] = static_cast<std::int32_t>(u);
  }
  return out;
}

void lower(Conv2d& c) {
  const std::size_t kk = c.in_channels * c.kernel_h * c.kernel_w;
  c.lowered = Matrix<std::int16_t>(kk, c.out_channels);
  for (std::size_t o = 0; o < c.out_channels; ++o)
    for (std::size_t r = 0; r < kk; ++r)
      c.lowered(r, o) = static_cast<std::int16_t>(c.weight.data[o * kk + r] - c.weight.quant.zero_point);
}

void lower(Dense& d) {
  d.lowered = Matrix<std::int16_t>(d.in_features, d.out_features);
  for (std::size_t o = 0; o < d.out_features; ++o)
    for (std::size_t i = 0; i < d.in_features; ++i)
      d.lowered(i, o) = static_cast<std::int16_t>(d.weight.data[o * d.in_features + i] - d.weight.quant.zero_point);
}

}  // namespace

ModelGraph load_model(const std::filesystem::path& manifest_path) {
  json m;
  {
    std::ifstream in(manifest_path);
    if (!in) throw Error("io", "cannot open " + manifest_path.string());
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw Error("schema", manifest_path.string() + ": " + e.what());
    }
  }
  if (m.value("format", "") != "adam-int8-model") throw Error("schema", "manifest format must be \"adam-int8-model\"");
  if (m.value("version", 0) != 1) throw Error("schema", "unsupported manifest version");

  const auto& blob_js = m.contains("blob") ? m["blob"] : throw Error("schema", "manifest: missing \"blob\"");
  const auto blob_path = manifest_path.parent_path() / req<std::string>(blob_js, "path", "blob");
  const auto blob = read_file(blob_path);
  const auto expect_size = req<std::size_t>(blob_js, "size", "blob");
  const auto expect_crc = req<std::uint32_t>(blob_js, "crc32", "blob");
  if (blob.size() != expect_size)
    throw Error("checksum_mismatch", "blob " + blob_path.string() + " has " + std::to_string(blob.size()) +
                                         " bytes, manifest expects " + std::to_string(expect_size));
  const auto crc = static_cast<std::uint32_t>(crc32(0L, blob.data(), static_cast<uInt>(blob.size())));
  if (crc != expect_crc) throw Error("checksum_mismatch", "blob CRC-32 mismatch for " + blob_path.string());

  ModelGraph g;
  g.name = m.value("name", "model");
  const auto& in_js = m.contains("input") ? m["input"] : throw Error("schema", "manifest: missing \"input\"");
  g.input_shape = req<std::vector<std::size_t>>(in_js, "shape", "input");
  g.input = parse_quant(in_js, "input");

  if (!m.contains("layers") || !m["layers"].is_array()) throw Error("schema", "manifest: missing layer list");
  std::size_t idx = 0;
  for (const auto& lj : m["layers"]) {
    const std::string where = "layer " + std::to_string(idx++);
    const auto type = req<std::string>(lj, "type", where);
    if (type == "conv2d") {
      Conv2d c;
      c.in_channels = req<std::size_t>(lj, "in_channels", where);
      c.out_channels = req<std::size_t>(lj, "out_channels", where);
      const auto k = req<std::vector<std::size_t>>(lj, "kernel", where);
      if (k.size() != 2) throw Error("schema", where + ": kernel must be [h, w]");
      c.kernel_h = k[0];
      c.kernel_w = k[1];
      c.stride = lj.value("stride", std::size_t{1});
      c.padding = lj.value("padding", std::size_t{0});
      c.relu = lj.value("relu", false);
      c.weight = parse_weight(req<json>(lj, "weight", where), blob, where + " weight");
      c.bias = parse_bias(req<json>(lj, "bias", where), blob, where + " bias");
      c.output = parse_quant(req<json>(lj, "output", where), where + " output");
      g.layers.emplace_back(std::move(c));
    } else if (type == "dense") {
      Dense d;
      d.in_features = req<std::size_t>(lj, "in_features", where);
      d.out_features = req<std::size_t>(lj, "out_features", where);
      d.relu = lj.value("relu", false);
      d.weight = parse_weight(req<json>(lj, "weight", where), blob, where + " weight");
      d.bias = parse_bias(req<json>(lj, "bias", where), blob, where + " bias");
      if (lj.contains("output") && !lj["output"].is_null()) d.output = parse_quant(lj["output"], where + " output");
      g.layers.emplace_back(std::move(d));
    } else if (type == "maxpool") {
      g.layers.emplace_back(MaxPool{req<std::size_t>(lj, "size", where), lj.value("stride", std::size_t{2})});
    } else if (type == "relu") {
      g.layers.emplace_back(Relu{});
    } else if (type == "flatten") {
      g.layers.emplace_back(Flatten{});
    } else if (type == "softmax") {
      g.layers.emplace_back(Softmax{});
    } else {
      throw Error("schema", where + ": unknown layer type \"" + type + "\"");
    }
  }

  g.validate();
  for (auto& l : g.layers) {
    if (auto* c = std::get_if<Conv2d>(&l)) lower(*c);
    if (auto* d = std::get_if<Dense>(&l)) lower(*d);
  }
  return g;
}

}  // namespace adam::nn
