#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avvp/numeric.hpp"

namespace avvp {

enum class Modality : std::uint8_t { Audio = 0, Visual = 1, AudioVisual = 2 };

std::string_view modality_name(Modality m) noexcept;
Modality parse_modality(std::string_view s);  // audio | visual | audio-visual

// One video's audio and visual snippet features (one row per 1 s snippet).
struct VideoBag {
  std::string video_id;
  Matrix audio;   // T x d_a
  Matrix visual;  // T x d_v

  std::size_t steps() const noexcept { return audio.rows(); }
  void validate() const;  // throws ShapeError
};

struct WeakLabel {
  std::string video_id;
  std::vector<std::uint8_t> classes;  // multi-hot, length C

  Vector as_targets() const { return Vector(classes.begin(), classes.end()); }
  bool any() const noexcept;
};

// Half-open interval [onset, offset) in whole seconds.
struct EventSegment {
  std::size_t cls = 0;
  Modality modality = Modality::Audio;
  int onset = 0;
  int offset = 0;

  int length() const noexcept { return offset - onset; }
  bool operator==(const EventSegment&) const = default;
};

// T x C multi-hot grid.
class LabelGrid {
 public:
  LabelGrid() = default;
  LabelGrid(std::size_t steps, std::size_t classes)
      : steps_(steps), classes_(classes), cells_(steps * classes, 0) {}

  std::size_t steps() const noexcept { return steps_; }
  std::size_t classes() const noexcept { return classes_; }
  std::uint8_t& at(std::size_t t, std::size_t c) noexcept { return cells_[t * classes_ + c]; }
  std::uint8_t at(std::size_t t, std::size_t c) const noexcept { return cells_[t * classes_ + c]; }
  std::size_t count() const noexcept;

  // Cellwise product; the audio-visual grid is audio * visual.
  LabelGrid intersect(const LabelGrid& other) const;
  bool operator==(const LabelGrid&) const = default;

 private:
  std::size_t steps_ = 0, classes_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct DenseAnnotation {
  std::string video_id;
  LabelGrid audio;
  LabelGrid visual;

  LabelGrid audio_visual() const { return audio.intersect(visual); }
};

// Maximal runs of positive cells per class, tagged with `modality`.
std::vector<EventSegment> extract_events(const LabelGrid& grid, Modality modality);

// Rasterises audio/visual events onto T x C grids. Throws InvalidArgument if
// an event lies outside [0, T) or names an out-of-range class.
DenseAnnotation to_dense(const std::string& video_id, std::span<const EventSegment> events,
                         std::size_t steps, std::size_t classes);

class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<std::string> names);
  static Taxonomy synthetic(std::size_t classes);  // class_0 .. class_{C-1}

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> find(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---- on-disk formats ----------------------------------------------------

inline constexpr std::size_t kFeatureHeaderBytes = 32;
inline constexpr std::uint16_t kFeatureFormatVersion = 1;

struct FeatureFile {
  Matrix features;
  Modality modality = Modality::Audio;
};

// Binary feature file: "AVVP", u16 version, u16 reserved, u32 T, u32 d,
// u8 modality tag, padding to 32 bytes, then T*d little-endian float32.
void save_features(const std::filesystem::path& path, const Matrix& features, Modality modality);
FeatureFile load_features(const std::filesystem::path& path);

Taxonomy load_taxonomy(const std::filesystem::path& path);
void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);

std::vector<WeakLabel> load_weak_labels(const std::filesystem::path& path, const Taxonomy& tax);
void save_weak_labels(const std::filesystem::path& path, std::span<const WeakLabel> labels,
                      const Taxonomy& tax);

struct VideoEvents {
  std::string video_id;
  std::vector<EventSegment> events;
};

std::vector<VideoEvents> load_annotations(const std::filesystem::path& path, const Taxonomy& tax);
void save_annotations(const std::filesystem::path& path, std::span<const DenseAnnotation> dense,
                      const Taxonomy& tax);

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path audio_path;
  std::filesystem::path visual_path;
};

// Relative paths are resolved against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

// Writes via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// ---- datasets -----------------------------------------------------------

struct Dataset {
  Taxonomy taxonomy;
  std::vector<VideoBag> bags;
  std::vector<WeakLabel> weak;         // aligned with bags
  std::vector<DenseAnnotation> dense;  // aligned with bags, or empty

  std::size_t size() const noexcept { return bags.size(); }
  bool has_annotations() const noexcept { return !dense.empty(); }
};

// Directory layout: classes.txt, manifest.tsv, weak_labels.csv,
// annotations.csv (optional), features/<id>_{audio,visual}.feat
Dataset load_dataset(const std::filesystem::path& dir, bool require_annotations = false);
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

// Throws InvalidArgument listing videos whose weak label has no positive class.
void validate_training_set(const Dataset& data);

// Splits off the last n_test videos.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t n_test);

// ---- synthetic planted-event data ----------------------------------------

struct SynthConfig {
  std::size_t n_videos = 100;
  std::size_t steps = 10;
  std::size_t d_audio = 128;
  std::size_t d_visual = 512;
  std::size_t classes = 25;
  double noise_sigma = 0.1;
  // Fraction of discriminative signal routed to audio: audio gain is
  // (1 + bias), visual gain (1 - bias).
  double modality_bias = 0.0;
  double signal_gain = 1.0;
  std::size_t max_classes_per_video = 3;
  // Per planted class: probability the event is audio-only / visual-only;
  // the remainder appear in both modalities with independent intervals.
  double p_audio_only = 0.25;
  double p_visual_only = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  Dataset data;
  std::vector<std::string> warnings;
};

SynthResult synth_generate(const SynthConfig& cfg);

// The per-(class, modality) unit prototypes synth_generate plants for cfg.
std::pair<Matrix, Matrix> synth_prototypes(const SynthConfig& cfg);

}  // namespace avvp
