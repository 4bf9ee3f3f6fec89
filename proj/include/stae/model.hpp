#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stae/conv.hpp"
#include "stae/lstm.hpp"
#include "stae/pipeline.hpp"
#include "stae/tensor.hpp"

namespace stae {

struct SpatialLayerSpec {
  std::size_t filters = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
};

struct TemporalLayerSpec {
  std::size_t filters = 1;
  std::size_t kernel = 3;
  bool peephole = true;
};

/// Architecture of the spatiotemporal autoencoder. The decoder is always the
/// exact mirror of the encoder and is derived, not configured.
struct ModelConfig {
  std::size_t input_size = 227;
  std::size_t input_channels = 1;
  std::size_t volume_length = 10;
  std::vector<SpatialLayerSpec> encoder{{128, 11, 4}, {64, 5, 2}};
  std::vector<TemporalLayerSpec> temporal{{64, 3, true}, {32, 3, true}, {64, 3, true}};
  PeepholeStyle peephole_style = PeepholeStyle::kConcat;
  Activation activation = Activation::kTanh;
  std::uint64_t seed = 0;
};

class SpatioTemporalAE {
 public:
  struct SpatialLayer {
    ConvSpec spec;
    Tensor filters;
    Tensor bias;
  };

  ModelConfig config;
  std::vector<SpatialLayer> encoder;
  std::vector<ConvLstmLayer> temporal;
  std::vector<SpatialLayer> decoder;  // deconv layers, filters [in, out, m, m]

  /// Every trainable tensor in a fixed, checkpoint-stable order.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<std::pair<std::string, const Tensor*>> named_params() const;
  std::size_t parameter_count() const;
};

/// Spatial sizes after each encoder layer, input size first.
/// Throws with a full layer-by-layer trace when a layer cannot be applied.
std::vector<std::size_t> encoder_size_chain(const ModelConfig& config);

/// Validates the config (size chain must return to the input size, channel
/// chain must match) and deterministically initializes all parameters.
SpatioTemporalAE build_model(const ModelConfig& config);

struct ModelCache {
  std::vector<Tensor> input;                    // per-frame [C,H,W]
  std::vector<std::vector<Tensor>> encoded;     // [layer][frame], post-activation
  std::vector<ConvLstmCache> temporal;          // per layer
  std::vector<Tensor> temporal_out;             // top hidden sequence
  std::vector<std::vector<Tensor>> decoded;     // [layer][frame], post-activation
  Tensor reconstruction;                        // [T,C,H,W]
};

/// volume [T,C,H,W] -> reconstruction of the same shape. The spatial encoder
/// and decoder run frame by frame with shared weights; the encoded sequence
/// passes through the ConvLSTM stack in time order.
Tensor model_forward(const SpatioTemporalAE& model, const Tensor& volume,
                     ModelCache* cache = nullptr);

/// Mean over all elements of the squared difference.
double reconstruction_loss(const Tensor& reconstruction, const Tensor& input);

/// Gradients of reconstruction_loss(forward(volume), volume) for every
/// parameter, aligned with named_params() order. Requires the cache from the
/// forward pass.
std::vector<Tensor> model_backward(const SpatioTemporalAE& model, const ModelCache& cache);

// ---------------------------------------------------------------------------
// Checkpoint container: self-describing single file holding the config, the
// seed, all parameter tensors with named shapes and, when present, the
// preprocessing stats. save -> load -> save is byte-exact.

struct Checkpoint {
  SpatioTemporalAE model;
  std::optional<PreprocessStats> stats;
};

void save_checkpoint(const std::string& path, const SpatioTemporalAE& model,
                     const PreprocessStats* stats = nullptr);
Checkpoint load_checkpoint(const std::string& path);

// JSON round-trip for the config, shared with the CLI's config file.
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json_text);

}  // namespace stae
