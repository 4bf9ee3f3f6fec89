#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stae/tensor.hpp"

namespace stae {

/// Ordered single-channel frames from one video. Intensities are raw pixel
/// values (0..255 for ingested images) until preprocessing standardizes them.
struct FrameSequence {
  std::vector<Tensor> frames;  // each [H, W]
  double fps = 25.0;
  std::string source_id;
};

/// Statistics fitted on training data and reused verbatim at test time.
struct PreprocessStats {
  Tensor mean_image;          // [resize, resize], on the 0..1 scale
  double standard_mean = 0.0;
  double standard_var = 1.0;  // population variance of mean-subtracted pixels
  std::size_t resize = 227;
};

struct PreprocessOutput {
  FrameSequence frames;
  PreprocessStats stats;
};

/// A stack of volume_length frames forming one model input [T, 1, H, W].
/// source_indices keeps the 1-based frame numbers the volume was drawn from.
struct VideoVolume {
  Tensor frames;
  std::vector<std::size_t> source_indices;
};

struct StrideSet {
  std::vector<std::size_t> strides{1, 2, 3};
  std::size_t volume_length = 10;
};

Tensor resize_bilinear(const Tensor& frame, std::size_t out_h, std::size_t out_w);

/// Full preprocessing chain, fitting stats:
/// resize -> scale to [0,1] -> subtract the global mean image -> grayscale ->
/// standardize to zero mean and unit variance.
/// Rejects empty input and constant (zero-variance) video.
PreprocessOutput preprocess_train(const FrameSequence& raw, std::size_t resize);

/// Same chain reusing previously fitted stats.
FrameSequence preprocess_test(const FrameSequence& raw, const PreprocessStats& stats);

/// For each stride s and start i (1-based) with i + (T-1)*s <= N, emits the
/// volume of frames {i, i+s, ..., i+(T-1)s}.
std::vector<VideoVolume> build_volumes(const FrameSequence& frames, const StrideSet& strides);

/// Volumes used at scoring time: stride 1 only, every start position.
std::vector<VideoVolume> build_score_volumes(const FrameSequence& frames, std::size_t volume_length);

// ---------------------------------------------------------------------------
// Synthetic desk-scale scenario: bright sprites sliding across a dark
// background at constant per-sprite speed. Anomalies disturb the motion (or
// add a novel shape) inside configured windows of the test sequence.

enum class AnomalyKind { kSpeed, kReverse, kShape };

struct AnomalyWindow {
  std::size_t start = 0;  // 1-based, inclusive
  std::size_t end = 0;
  AnomalyKind kind = AnomalyKind::kSpeed;
};

struct SyntheticSpec {
  std::size_t width = 32;
  std::size_t height = 32;
  std::size_t sprites = 3;
  std::size_t sprite_size = 5;
  double speed_min = 1.0;
  double speed_max = 2.0;
  double speed_multiplier = 4.0;  // applied inside kSpeed windows
  std::size_t train_frames = 240;
  std::size_t test_frames = 500;
  double fps = 25.0;
  std::vector<AnomalyWindow> anomalies;
};

struct SyntheticData {
  FrameSequence train;
  FrameSequence test;
  std::vector<int> labels;  // one 0/1 per test frame
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Frame I/O. A video is either a directory of zero-padded numeric .pgm files
// (binary P5 or ASCII P2) or a single .gry file: the 4 bytes "GRY1" followed
// by little-endian u32 width, height, frame count and raw row-major bytes.

struct IngestResult {
  FrameSequence frames;
  std::vector<std::string> warnings;
};

IngestResult ingest(const std::string& path);

void write_frames(const std::string& dir, const FrameSequence& frames);
void write_gry(const std::string& path, const FrameSequence& frames);

void write_labels_csv(const std::string& path, const std::vector<int>& labels);
/// (frame_index, label) pairs, 1-based indices.
std::vector<std::pair<std::size_t, int>> read_labels_csv(const std::string& path);

}  // namespace stae
