#include "stae/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "config_internal.hpp"
#include "stae/rng.hpp"

namespace stae {

namespace {

using nlohmann::json;

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

Tensor copy_frame(const Tensor& volume, std::size_t t) {
  const std::size_t c = volume.dim(1), h = volume.dim(2), w = volume.dim(3);
  Tensor frame({c, h, w});
  std::memcpy(frame.data(), volume.data() + t * c * h * w, c * h * w * sizeof(double));
  return frame;
}

std::string chain_trace(const ModelConfig& config, const std::vector<std::size_t>& enc_sizes,
                        const std::vector<std::size_t>& dec_sizes) {
  std::ostringstream os;
  os << "input " << config.input_size;
  for (std::size_t l = 0; l < enc_sizes.size() - 1; ++l) {
    os << " -> conv" << (l + 1) << " " << enc_sizes[l + 1];
  }
  os << " -> convlstm x" << config.temporal.size() << " " << enc_sizes.back();
  for (std::size_t l = 0; l < dec_sizes.size(); ++l) {
    os << " -> deconv" << (l + 1) << " " << dec_sizes[l];
  }
  return os.str();
}

}  // namespace

std::vector<std::size_t> encoder_size_chain(const ModelConfig& config) {
  if (config.encoder.empty()) throw std::invalid_argument("model config: encoder has no layers");
  std::vector<std::size_t> sizes{config.input_size};
  for (std::size_t l = 0; l < config.encoder.size(); ++l) {
    const SpatialLayerSpec& layer = config.encoder[l];
    try {
      sizes.push_back(conv_out_size(sizes.back(), layer.kernel, layer.stride, 0));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("model config: encoder layer " + std::to_string(l + 1) +
                                  " cannot be applied: " + e.what());
    }
  }
  return sizes;
}

SpatioTemporalAE build_model(const ModelConfig& config) {
  if (config.volume_length < 1) throw std::invalid_argument("model config: volume_length < 1");
  if (config.temporal.empty()) throw std::invalid_argument("model config: temporal has no layers");
  if (config.input_channels < 1) throw std::invalid_argument("model config: input_channels < 1");

  const std::vector<std::size_t> enc_sizes = encoder_size_chain(config);

  // the decoder mirrors the encoder, so the temporal stack must hand back the
  // encoder's output channel count
  if (config.temporal.back().filters != config.encoder.back().filters) {
    throw std::invalid_argument(
        "model config: temporal layer " + std::to_string(config.temporal.size()) + " emits " +
        std::to_string(config.temporal.back().filters) + " channels but the mirrored decoder needs " +
        std::to_string(config.encoder.back().filters));
  }

  // dry-run the mirrored size chain before allocating anything
  const std::size_t depth = config.encoder.size();
  std::vector<std::size_t> dec_sizes;
  std::size_t size = enc_sizes.back();
  for (std::size_t j = 0; j < depth; ++j) {
    const SpatialLayerSpec& mirrored = config.encoder[depth - 1 - j];
    size = deconv_out_size(size, mirrored.kernel, mirrored.stride, 0);
    dec_sizes.push_back(size);
    const std::size_t expected = enc_sizes[depth - 1 - j];
    if (size != expected) {
      throw std::invalid_argument("model config: decoder layer " + std::to_string(j + 1) +
                                  " produces size " + std::to_string(size) + ", expected " +
                                  std::to_string(expected) + "; chain: " +
                                  chain_trace(config, enc_sizes, dec_sizes));
    }
  }

  SpatioTemporalAE model;
  model.config = config;
  Rng rng(config.seed);

  std::size_t in_ch = config.input_channels;
  for (const SpatialLayerSpec& layer : config.encoder) {
    SpatioTemporalAE::SpatialLayer built;
    built.spec = ConvSpec{layer.kernel, layer.stride, in_ch, layer.filters, 0};
    const std::size_t fan_in = in_ch * layer.kernel * layer.kernel;
    const std::size_t fan_out = layer.filters * layer.kernel * layer.kernel;
    built.filters = glorot_uniform({layer.filters, in_ch, layer.kernel, layer.kernel}, fan_in,
                                   fan_out, rng);
    built.bias = Tensor({layer.filters});
    model.encoder.push_back(std::move(built));
    in_ch = layer.filters;
  }

  const std::size_t map_size = enc_sizes.back();
  for (const TemporalLayerSpec& layer : config.temporal) {
    ConvLstmLayer built;
    built.spec = ConvLstmSpec{in_ch, layer.filters, layer.kernel, 1, layer.peephole,
                              config.peephole_style};
    if (layer.kernel % 2 == 0) {
      throw std::invalid_argument("model config: temporal kernel " + std::to_string(layer.kernel) +
                                  " must be odd");
    }
    const std::size_t m = layer.kernel;
    const std::size_t gate_ch = gate_in_channels(built.spec, true);
    const std::size_t cand_ch = gate_in_channels(built.spec, false);
    const std::size_t fan_out = layer.filters * m * m;
    auto bank = [&](std::size_t ch) {
      return glorot_uniform({layer.filters, ch, m, m}, ch * m * m, fan_out, rng);
    };
    built.params.w_f = bank(gate_ch);
    built.params.w_i = bank(gate_ch);
    built.params.w_c = bank(cand_ch);
    built.params.w_o = bank(gate_ch);
    built.params.b_f = Tensor({layer.filters});
    built.params.b_i = Tensor({layer.filters});
    built.params.b_c = Tensor({layer.filters});
    built.params.b_o = Tensor({layer.filters});
    if (layer.peephole && config.peephole_style == PeepholeStyle::kElementwise) {
      built.params.p_f = Tensor({layer.filters, map_size, map_size});
      built.params.p_i = Tensor({layer.filters, map_size, map_size});
      built.params.p_o = Tensor({layer.filters, map_size, map_size});
    }
    model.temporal.push_back(std::move(built));
    in_ch = layer.filters;
  }

  for (std::size_t j = 0; j < depth; ++j) {
    const SpatialLayerSpec& mirrored = config.encoder[depth - 1 - j];
    const std::size_t out_ch =
        depth - 1 - j == 0 ? config.input_channels : config.encoder[depth - 2 - j].filters;
    SpatioTemporalAE::SpatialLayer built;
    built.spec = ConvSpec{mirrored.kernel, mirrored.stride, in_ch, out_ch, 0};
    const std::size_t fan_in = in_ch * mirrored.kernel * mirrored.kernel;
    const std::size_t fan_out = out_ch * mirrored.kernel * mirrored.kernel;
    built.filters = glorot_uniform({in_ch, out_ch, mirrored.kernel, mirrored.kernel}, fan_in,
                                   fan_out, rng);
    built.bias = Tensor({out_ch});
    model.decoder.push_back(std::move(built));
    in_ch = out_ch;
  }

  return model;
}

std::vector<std::pair<std::string, Tensor*>> SpatioTemporalAE::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    const std::string base = "encoder" + std::to_string(l + 1);
    out.emplace_back(base + ".filters", &encoder[l].filters);
    out.emplace_back(base + ".bias", &encoder[l].bias);
  }
  for (std::size_t l = 0; l < temporal.size(); ++l) {
    const std::string base = "temporal" + std::to_string(l + 1);
    LstmParams& p = temporal[l].params;
    out.emplace_back(base + ".w_f", &p.w_f);
    out.emplace_back(base + ".w_i", &p.w_i);
    out.emplace_back(base + ".w_c", &p.w_c);
    out.emplace_back(base + ".w_o", &p.w_o);
    out.emplace_back(base + ".b_f", &p.b_f);
    out.emplace_back(base + ".b_i", &p.b_i);
    out.emplace_back(base + ".b_c", &p.b_c);
    out.emplace_back(base + ".b_o", &p.b_o);
    if (!p.p_f.empty()) {
      out.emplace_back(base + ".p_f", &p.p_f);
      out.emplace_back(base + ".p_i", &p.p_i);
      out.emplace_back(base + ".p_o", &p.p_o);
    }
  }
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    const std::string base = "decoder" + std::to_string(l + 1);
    out.emplace_back(base + ".filters", &decoder[l].filters);
    out.emplace_back(base + ".bias", &decoder[l].bias);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> SpatioTemporalAE::named_params() const {
  auto mutable_params = const_cast<SpatioTemporalAE*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_params.size());
  for (auto& [name, tensor] : mutable_params) out.emplace_back(name, tensor);
  return out;
}

std::size_t SpatioTemporalAE::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, tensor] : named_params()) n += tensor->size();
  return n;
}

Tensor model_forward(const SpatioTemporalAE& model, const Tensor& volume, ModelCache* cache) {
  const ModelConfig& cfg = model.config;
  if (volume.rank() != 4 || volume.dim(0) != cfg.volume_length ||
      volume.dim(1) != cfg.input_channels || volume.dim(2) != cfg.input_size ||
      volume.dim(3) != cfg.input_size) {
    throw std::invalid_argument(
        "model_forward: volume " + volume.shape_string() + " does not match the model's " +
        shape_to_string({cfg.volume_length, cfg.input_channels, cfg.input_size, cfg.input_size}));
  }
  const std::size_t steps = cfg.volume_length;

  std::vector<Tensor> frames;
  frames.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) frames.push_back(copy_frame(volume, t));

  std::vector<std::vector<Tensor>> encoded(model.encoder.size());
  std::vector<Tensor> current = frames;
  for (std::size_t l = 0; l < model.encoder.size(); ++l) {
    const auto& layer = model.encoder[l];
    encoded[l].reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      encoded[l].push_back(
          activation(conv2d(current[t], layer.filters, layer.bias, layer.spec), cfg.activation));
    }
    current = encoded[l];
  }

  std::vector<ConvLstmCache> temporal_caches(cache ? model.temporal.size() : 0);
  for (std::size_t l = 0; l < model.temporal.size(); ++l) {
    current = conv_lstm_layer_forward(model.temporal[l], current,
                                      cache ? &temporal_caches[l] : nullptr);
  }
  std::vector<Tensor> temporal_out = current;

  std::vector<std::vector<Tensor>> decoded(model.decoder.size());
  for (std::size_t l = 0; l < model.decoder.size(); ++l) {
    const auto& layer = model.decoder[l];
    decoded[l].reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      decoded[l].push_back(
          activation(deconv2d(current[t], layer.filters, layer.bias, layer.spec), cfg.activation));
    }
    current = decoded[l];
  }

  Tensor reconstruction(volume.shape());
  const std::size_t frame_len = volume.size() / steps;
  for (std::size_t t = 0; t < steps; ++t) {
    std::memcpy(reconstruction.data() + t * frame_len, current[t].data(),
                frame_len * sizeof(double));
  }

  if (cache) {
    cache->input = std::move(frames);
    cache->encoded = std::move(encoded);
    cache->temporal = std::move(temporal_caches);
    cache->temporal_out = std::move(temporal_out);
    cache->decoded = std::move(decoded);
    cache->reconstruction = reconstruction;
  }
  return reconstruction;
}

double reconstruction_loss(const Tensor& reconstruction, const Tensor& input) {
  require_same_shape(reconstruction, input, "reconstruction_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double d = reconstruction[i] - input[i];
    acc += d * d;
  }
  return acc / static_cast<double>(input.size());
}

std::vector<Tensor> model_backward(const SpatioTemporalAE& model, const ModelCache& cache) {
  if (cache.input.empty()) {
    throw std::invalid_argument("model_backward: cache is empty; run model_forward with a cache");
  }
  const ModelConfig& cfg = model.config;
  const std::size_t steps = cfg.volume_length;
  const double inv_numel = 1.0 / static_cast<double>(cache.reconstruction.size());

  struct SpatialGrads {
    Tensor filters, bias;
  };
  std::vector<SpatialGrads> enc_grads, dec_grads;
  for (const auto& layer : model.encoder) {
    enc_grads.push_back({Tensor(layer.filters.shape()), Tensor(layer.bias.shape())});
  }
  for (const auto& layer : model.decoder) {
    dec_grads.push_back({Tensor(layer.filters.shape()), Tensor(layer.bias.shape())});
  }
  std::vector<LstmGrads> lstm_grads;
  for (const auto& layer : model.temporal) lstm_grads.push_back(make_zero_grads(layer.params));

  // loss -> decoder, frame by frame
  const std::size_t frame_len = cache.reconstruction.size() / steps;
  std::vector<Tensor> dh_top(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor g(cache.decoded.back()[t].shape());
    const double* rec = cache.reconstruction.data() + t * frame_len;
    const double* in = cache.input[t].data();
    for (std::size_t i = 0; i < frame_len; ++i) g[i] = 2.0 * (rec[i] - in[i]) * inv_numel;

    for (std::size_t l = model.decoder.size(); l-- > 0;) {
      const auto& layer = model.decoder[l];
      const Tensor& layer_in = l == 0 ? cache.temporal_out[t] : cache.decoded[l - 1][t];
      const Tensor dz = activation_backward(g, cache.decoded[l][t], cfg.activation);
      ConvGrads cg = deconv2d_backward(dz, layer_in, layer.filters, layer.spec);
      dec_grads[l].filters.add(cg.filters);
      dec_grads[l].bias.add(cg.bias);
      g = std::move(cg.input);
    }
    dh_top[t] = std::move(g);
  }

  // through the ConvLSTM stack, top layer first
  std::vector<Tensor> dh = std::move(dh_top);
  for (std::size_t l = model.temporal.size(); l-- > 0;) {
    dh = conv_lstm_layer_backward(model.temporal[l], cache.temporal[l], dh, &lstm_grads[l]);
  }

  // encoder, frame by frame
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor g = std::move(dh[t]);
    for (std::size_t l = model.encoder.size(); l-- > 0;) {
      const auto& layer = model.encoder[l];
      const Tensor& layer_in = l == 0 ? cache.input[t] : cache.encoded[l - 1][t];
      const Tensor dz = activation_backward(g, cache.encoded[l][t], cfg.activation);
      ConvGrads cg = conv2d_backward(dz, layer_in, layer.filters, layer.spec);
      enc_grads[l].filters.add(cg.filters);
      enc_grads[l].bias.add(cg.bias);
      g = std::move(cg.input);
    }
  }

  std::vector<Tensor> out;
  for (auto& grad : enc_grads) {
    out.push_back(std::move(grad.filters));
    out.push_back(std::move(grad.bias));
  }
  for (auto& grad : lstm_grads) {
    out.push_back(std::move(grad.w_f));
    out.push_back(std::move(grad.w_i));
    out.push_back(std::move(grad.w_c));
    out.push_back(std::move(grad.w_o));
    out.push_back(std::move(grad.b_f));
    out.push_back(std::move(grad.b_i));
    out.push_back(std::move(grad.b_c));
    out.push_back(std::move(grad.b_o));
    if (!grad.p_f.empty()) {
      out.push_back(std::move(grad.p_f));
      out.push_back(std::move(grad.p_i));
      out.push_back(std::move(grad.p_o));
    }
  }
  for (auto& grad : dec_grads) {
    out.push_back(std::move(grad.filters));
    out.push_back(std::move(grad.bias));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config JSON

namespace detail {

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key \"" + where + key + "\"");
    }
  }
}

json model_config_to_json_obj(const ModelConfig& config) {
  json encoder = json::array();
  for (const SpatialLayerSpec& layer : config.encoder) {
    encoder.push_back({{"filters", layer.filters},
                       {"kernel", layer.kernel},
                       {"stride", layer.stride}});
  }
  json temporal = json::array();
  for (const TemporalLayerSpec& layer : config.temporal) {
    temporal.push_back({{"filters", layer.filters},
                        {"kernel", layer.kernel},
                        {"peephole", layer.peephole}});
  }
  return json{{"input_size", config.input_size},
              {"input_channels", config.input_channels},
              {"volume_length", config.volume_length},
              {"encoder", encoder},
              {"temporal", temporal},
              {"peephole_style",
               config.peephole_style == PeepholeStyle::kConcat ? "concat" : "elementwise"},
              {"activation", config.activation == Activation::kTanh ? "tanh" : "sigmoid"},
              {"seed", config.seed}};
}

ModelConfig model_config_from_json_obj(const json& obj, const ModelConfig& defaults,
                                       const std::string& where) {
  require_keys(obj, where,
               {"input_size", "input_channels", "volume_length", "encoder", "temporal",
                "peephole_style", "activation", "seed"});
  ModelConfig config = defaults;
  config.input_size = obj.value("input_size", defaults.input_size);
  config.input_channels = obj.value("input_channels", defaults.input_channels);
  config.volume_length = obj.value("volume_length", defaults.volume_length);
  config.seed = obj.value("seed", defaults.seed);
  if (obj.contains("encoder")) {
    config.encoder.clear();
    for (const json& layer : obj.at("encoder")) {
      require_keys(layer, where + "encoder.", {"filters", "kernel", "stride"});
      SpatialLayerSpec spec;
      spec.filters = layer.value("filters", std::size_t{1});
      spec.kernel = layer.value("kernel", std::size_t{1});
      spec.stride = layer.value("stride", std::size_t{1});
      config.encoder.push_back(spec);
    }
  }
  if (obj.contains("temporal")) {
    config.temporal.clear();
    for (const json& layer : obj.at("temporal")) {
      require_keys(layer, where + "temporal.", {"filters", "kernel", "peephole"});
      TemporalLayerSpec spec;
      spec.filters = layer.value("filters", std::size_t{1});
      spec.kernel = layer.value("kernel", std::size_t{3});
      spec.peephole = layer.value("peephole", true);
      config.temporal.push_back(spec);
    }
  }
  if (obj.contains("peephole_style")) {
    const std::string style = obj.at("peephole_style").get<std::string>();
    if (style == "concat") {
      config.peephole_style = PeepholeStyle::kConcat;
    } else if (style == "elementwise") {
      config.peephole_style = PeepholeStyle::kElementwise;
    } else {
      throw std::invalid_argument("config: unknown peephole_style \"" + style + "\"");
    }
  }
  if (obj.contains("activation")) {
    const std::string kind = obj.at("activation").get<std::string>();
    if (kind == "tanh") {
      config.activation = Activation::kTanh;
    } else if (kind == "sigmoid") {
      config.activation = Activation::kSigmoid;
    } else {
      throw std::invalid_argument("config: unknown activation \"" + kind + "\"");
    }
  }
  return config;
}

}  // namespace detail

std::string model_config_to_json(const ModelConfig& config) {
  return detail::model_config_to_json_obj(config).dump(2);
}

ModelConfig model_config_from_json(const std::string& json_text) {
  return detail::model_config_from_json_obj(json::parse(json_text), ModelConfig{}, "model.");
}

// ---------------------------------------------------------------------------
// Checkpoint container

namespace {

constexpr char kMagic[8] = {'S', 'T', 'A', 'E', 'C', 'K', 'P', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_tensor_data(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_tensor_data(std::ifstream& in, Tensor& t) {
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::string& path, const SpatioTemporalAE& model,
                     const PreprocessStats* stats) {
  json manifest = json::array();
  const auto params = model.named_params();
  for (const auto& [name, tensor] : params) {
    manifest.push_back({{"name", name}, {"shape", tensor->shape()}});
  }
  if (stats) {
    manifest.push_back({{"name", "stats.mean_image"}, {"shape", stats->mean_image.shape()}});
  }
  json header{{"version", 1},
              {"config", detail::model_config_to_json_obj(model.config)},
              {"tensors", manifest}};
  if (stats) {
    header["stats"] = {{"resize", stats->resize},
                       {"standard_mean", stats->standard_mean},
                       {"standard_var", stats->standard_var}};
  } else {
    header["stats"] = nullptr;
  }
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& [name, tensor] : params) write_tensor_data(out, *tensor);
  if (stats) write_tensor_data(out, stats->mean_image);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: " + path + " is not a checkpoint file");
  }
  const std::uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path);
  const json header = json::parse(header_text);
  if (header.at("version").get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  }

  Checkpoint result;
  const ModelConfig config =
      detail::model_config_from_json_obj(header.at("config"), ModelConfig{}, "checkpoint.config.");
  result.model = build_model(config);

  const json& manifest = header.at("tensors");
  const auto params = result.model.named_params();
  std::size_t entry = 0;
  for (const auto& [name, tensor] : params) {
    if (entry >= manifest.size() || manifest[entry].at("name") != name ||
        manifest[entry].at("shape").get<std::vector<std::size_t>>() != tensor->shape()) {
      throw std::runtime_error("checkpoint: manifest mismatch at \"" + name + "\" in " + path);
    }
    read_tensor_data(in, *tensor);
    ++entry;
  }
  if (!header.at("stats").is_null()) {
    PreprocessStats stats;
    const json& s = header.at("stats");
    detail::require_keys(s, "checkpoint.stats.", {"resize", "standard_mean", "standard_var"});
    stats.resize = s.at("resize").get<std::size_t>();
    stats.standard_mean = s.at("standard_mean").get<double>();
    stats.standard_var = s.at("standard_var").get<double>();
    if (entry >= manifest.size() || manifest[entry].at("name") != "stats.mean_image") {
      throw std::runtime_error("checkpoint: missing mean image entry in " + path);
    }
    stats.mean_image = Tensor(manifest[entry].at("shape").get<std::vector<std::size_t>>());
    read_tensor_data(in, stats.mean_image);
    ++entry;
    result.stats = std::move(stats);
  }
  if (entry != manifest.size()) {
    throw std::runtime_error("checkpoint: unread manifest entries in " + path);
  }
  if (!in) throw std::runtime_error("checkpoint: truncated tensor data in " + path);
  return result;
}

}  // namespace stae
