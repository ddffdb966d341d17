#include "avvp/datamodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace avvp {

namespace fs = std::filesystem;

std::string_view modality_name(Modality m) noexcept {
  switch (m) {
    case Modality::Audio: return "audio";
    case Modality::Visual: return "visual";
    case Modality::AudioVisual: return "audio-visual";
  }
  return "unknown";
}

Modality parse_modality(std::string_view s) {
  if (s == "audio") return Modality::Audio;
  if (s == "visual") return Modality::Visual;
  if (s == "audio-visual") return Modality::AudioVisual;
  throw InvalidArgument("unknown modality '" + std::string(s) + "'");
}

void VideoBag::validate() const {
  if (audio.rows() == 0) throw ShapeError("video " + video_id + " has no snippets");
  if (audio.rows() != visual.rows()) {
    throw ShapeError("video " + video_id + ": audio has " + std::to_string(audio.rows()) +
                     " snippets, visual has " + std::to_string(visual.rows()));
  }
}

bool WeakLabel::any() const noexcept {
  return std::any_of(classes.begin(), classes.end(), [](std::uint8_t v) { return v != 0; });
}

std::size_t LabelGrid::count() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

LabelGrid LabelGrid::intersect(const LabelGrid& other) const {
  if (steps_ != other.steps_ || classes_ != other.classes_) {
    throw ShapeError("label grid shape mismatch");
  }
  LabelGrid out(steps_, classes_);
  for (std::size_t i = 0; i < cells_.size(); ++i) out.cells_[i] = cells_[i] * other.cells_[i];
  return out;
}

std::vector<EventSegment> extract_events(const LabelGrid& grid, Modality modality) {
  std::vector<EventSegment> out;
  for (std::size_t c = 0; c < grid.classes(); ++c) {
    std::size_t t = 0;
    while (t < grid.steps()) {
      if (!grid.at(t, c)) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end < grid.steps() && grid.at(end, c)) ++end;
      out.push_back({c, modality, static_cast<int>(t), static_cast<int>(end)});
      t = end;
    }
  }
  return out;
}

DenseAnnotation to_dense(const std::string& video_id, std::span<const EventSegment> events,
                         std::size_t steps, std::size_t classes) {
  DenseAnnotation d{video_id, LabelGrid(steps, classes), LabelGrid(steps, classes)};
  for (const auto& e : events) {
    if (e.cls >= classes) {
      throw InvalidArgument("video " + video_id + ": class index " + std::to_string(e.cls) +
                            " out of range");
    }
    if (e.onset < 0 || e.onset >= e.offset || static_cast<std::size_t>(e.offset) > steps) {
      throw InvalidArgument("video " + video_id + ": event [" + std::to_string(e.onset) + "," +
                            std::to_string(e.offset) + ") outside [0," + std::to_string(steps) +
                            ")");
    }
    LabelGrid* g = nullptr;
    if (e.modality == Modality::Audio) g = &d.audio;
    else if (e.modality == Modality::Visual) g = &d.visual;
    else throw InvalidArgument("audio-visual ground truth is derived, never stored");
    for (int t = e.onset; t < e.offset; ++t) g->at(static_cast<std::size_t>(t), e.cls) = 1;
  }
  return d;
}

Taxonomy::Taxonomy(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw InvalidArgument("empty class name in taxonomy");
    if (!index_.emplace(names_[i], i).second) {
      throw InvalidArgument("duplicate class name '" + names_[i] + "'");
    }
  }
}

Taxonomy Taxonomy::synthetic(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("class_" + std::to_string(c));
  return Taxonomy(std::move(names));
}

std::optional<std::size_t> Taxonomy::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---- helpers ---------------------------------------------------------------

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

template <class T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

int parse_int(const std::string& s, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
}

std::string join_names(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---- feature files ------------------------------------------------------------

void save_features(const fs::path& path, const Matrix& features, Modality modality) {
  if (modality == Modality::AudioVisual) throw InvalidArgument("feature files are audio or visual");
  std::string out;
  out.reserve(kFeatureHeaderBytes + features.size() * 4);
  out.append("AVVP", 4);
  put_le<std::uint16_t>(out, kFeatureFormatVersion);
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.cols()));
  out.push_back(static_cast<char>(modality));
  out.append(kFeatureHeaderBytes - out.size(), '\0');
  for (double v : features.values()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_le<std::uint32_t>(out, bits);
  }
  write_file_atomic(path, out);
}

FeatureFile load_features(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::string where = path.string();
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError("truncated_header", where + ": header needs 32 bytes, file has " +
                                              std::to_string(bytes.size()));
  }
  if (std::memcmp(p, "AVVP", 4) != 0) {
    throw FormatError("bad_magic", where + ": bad magic bytes at offset 0");
  }
  const auto version = get_le<std::uint16_t>(p + 4);
  if (version != kFeatureFormatVersion) {
    throw FormatError("bad_version", where + ": unsupported format version " +
                                         std::to_string(version) + " at offset 4");
  }
  const auto steps = get_le<std::uint32_t>(p + 8);
  const auto dim = get_le<std::uint32_t>(p + 12);
  const auto tag = p[16];
  if (tag > 1) {
    throw FormatError("bad_modality", where + ": modality tag " + std::to_string(tag) +
                                          " at offset 16");
  }
  if (steps == 0 || dim == 0) {
    throw FormatError("shape_mismatch", where + ": declared shape " + std::to_string(steps) +
                                            "x" + std::to_string(dim) + " at offset 8");
  }
  const std::size_t expected = kFeatureHeaderBytes + std::size_t{steps} * dim * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated_payload", where + ": payload ends at offset " +
                                               std::to_string(bytes.size()) + ", expected " +
                                               std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) {
    throw FormatError("shape_mismatch", where + ": " +
                                            std::to_string(bytes.size() - expected) +
                                            " trailing bytes after offset " +
                                            std::to_string(expected));
  }
  FeatureFile f{Matrix(steps, dim), static_cast<Modality>(tag)};
  auto vals = f.features.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto bits = get_le<std::uint32_t>(p + kFeatureHeaderBytes + 4 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    vals[i] = v;
  }
  return f;
}

// ---- text formats ---------------------------------------------------------------

Taxonomy load_taxonomy(const fs::path& path) {
  std::vector<std::string> names;
  for (auto& line : read_lines(path)) {
    if (!line.empty()) names.push_back(std::move(line));
  }
  return Taxonomy(std::move(names));
}

void save_taxonomy(const fs::path& path, const Taxonomy& taxonomy) {
  std::string out;
  for (const auto& n : taxonomy.names()) out += n + "\n";
  write_file_atomic(path, out);
}

std::vector<WeakLabel> load_weak_labels(const fs::path& path, const Taxonomy& tax) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "video_id,labels") {
    throw ParseError("expected header 'video_id,labels'", 1);
  }
  std::vector<WeakLabel> out;
  std::map<std::string, std::size_t> index;
  std::set<std::string> unknown;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError("malformed weak-label row '" + lines[i] + "'", i + 1);
    }
    auto [it, fresh] = index.emplace(fields[0], out.size());
    if (fresh) out.push_back({fields[0], std::vector<std::uint8_t>(tax.size(), 0)});
    auto& label = out[it->second];
    if (fields[1].empty()) continue;
    for (const auto& name : split(fields[1], ';')) {
      if (auto c = tax.find(name)) label.classes[*c] = 1;
      else unknown.insert(name);
    }
  }
  if (!unknown.empty()) {
    throw InvalidArgument(path.string() + ": unknown class names: " + join_names(unknown));
  }
  return out;
}

void save_weak_labels(const fs::path& path, std::span<const WeakLabel> labels,
                      const Taxonomy& tax) {
  std::string out = "video_id,labels\n";
  for (const auto& l : labels) {
    out += l.video_id + ",";
    bool first = true;
    for (std::size_t c = 0; c < l.classes.size(); ++c) {
      if (!l.classes[c]) continue;
      if (!first) out += ";";
      out += tax.name(c);
      first = false;
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

std::vector<VideoEvents> load_annotations(const fs::path& path, const Taxonomy& tax) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "video_id,modality,class,onset,offset") {
    throw ParseError("expected header 'video_id,modality,class,onset,offset'", 1);
  }
  std::vector<VideoEvents> out;
  std::map<std::string, std::size_t> index;
  std::set<std::string> unknown;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line = i + 1;
    const auto f = split(lines[i], ',');
    if (f.size() != 5 || f[0].empty()) {
      throw ParseError("malformed annotation row '" + lines[i] + "'", line);
    }
    if (f[1] != "audio" && f[1] != "visual") {
      throw ParseError("modality must be audio or visual, got '" + f[1] + "'", line);
    }
    EventSegment e;
    e.modality = parse_modality(f[1]);
    e.onset = parse_int(f[3], line, "onset");
    e.offset = parse_int(f[4], line, "offset");
    if (e.onset < 0 || e.onset >= e.offset) {
      throw ParseError("onset must be >= 0 and < offset", line);
    }
    auto c = tax.find(f[2]);
    if (!c) {
      unknown.insert(f[2]);
      continue;
    }
    e.cls = *c;
    auto [it, fresh] = index.emplace(f[0], out.size());
    if (fresh) out.push_back({f[0], {}});
    out[it->second].events.push_back(e);
  }
  if (!unknown.empty()) {
    throw InvalidArgument(path.string() + ": unknown class names: " + join_names(unknown));
  }
  return out;
}

void save_annotations(const fs::path& path, std::span<const DenseAnnotation> dense,
                      const Taxonomy& tax) {
  std::string out = "video_id,modality,class,onset,offset\n";
  for (const auto& d : dense) {
    for (const auto* grid : {&d.audio, &d.visual}) {
      const Modality m = grid == &d.audio ? Modality::Audio : Modality::Visual;
      for (const auto& e : extract_events(*grid, m)) {
        out += d.video_id + "," + std::string(modality_name(m)) + "," + tax.name(e.cls) + "," +
               std::to_string(e.onset) + "," + std::to_string(e.offset) + "\n";
      }
    }
  }
  write_file_atomic(path, out);
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], '\t');
    if (f.size() != 3 || f[0].empty()) {
      throw ParseError("manifest rows need video_id<TAB>audio<TAB>visual", i + 1);
    }
    ManifestEntry e{f[0], f[1], f[2]};
    if (e.audio_path.is_relative()) e.audio_path = base / e.audio_path;
    if (e.visual_path.is_relative()) e.visual_path = base / e.visual_path;
    out.push_back(std::move(e));
  }
  return out;
}

void save_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.video_id + "\t" + e.audio_path.generic_string() + "\t" +
           e.visual_path.generic_string() + "\n";
  }
  write_file_atomic(path, out);
}

// ---- datasets ---------------------------------------------------------------------

Dataset load_dataset(const fs::path& dir, bool require_annotations) {
  Dataset data;
  data.taxonomy = load_taxonomy(dir / "classes.txt");
  const auto manifest = load_manifest(dir / "manifest.tsv");
  const auto weak = load_weak_labels(dir / "weak_labels.csv", data.taxonomy);

  std::map<std::string, const WeakLabel*> weak_by_id;
  for (const auto& w : weak) weak_by_id[w.video_id] = &w;

  std::vector<std::string> missing;
  for (const auto& entry : manifest) {
    VideoBag bag{entry.video_id, {}, {}};
    auto a = load_features(entry.audio_path);
    auto v = load_features(entry.visual_path);
    if (a.modality != Modality::Audio || v.modality != Modality::Visual) {
      throw FormatError("bad_modality", "video " + entry.video_id +
                                            ": manifest audio/visual files carry wrong tags");
    }
    bag.audio = std::move(a.features);
    bag.visual = std::move(v.features);
    bag.validate();
    auto it = weak_by_id.find(entry.video_id);
    if (it == weak_by_id.end()) {
      missing.push_back(entry.video_id);
      data.weak.push_back({entry.video_id, std::vector<std::uint8_t>(data.taxonomy.size(), 0)});
    } else {
      data.weak.push_back(*it->second);
    }
    data.bags.push_back(std::move(bag));
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& m : missing) ids += (ids.empty() ? "" : ", ") + m;
    throw InvalidArgument("videos without weak labels: " + ids);
  }

  const auto ann_path = dir / "annotations.csv";
  if (fs::exists(ann_path)) {
    std::map<std::string, std::vector<EventSegment>> events;
    for (auto& ve : load_annotations(ann_path, data.taxonomy)) {
      auto& dst = events[ve.video_id];
      dst.insert(dst.end(), ve.events.begin(), ve.events.end());
    }
    for (const auto& bag : data.bags) {
      auto it = events.find(bag.video_id);
      std::span<const EventSegment> evs;
      if (it != events.end()) evs = it->second;
      data.dense.push_back(to_dense(bag.video_id, evs, bag.steps(), data.taxonomy.size()));
    }
  } else if (require_annotations) {
    throw InvalidArgument("missing dense annotations: " + ann_path.string());
  }
  return data;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir / "features");
  save_taxonomy(dir / "classes.txt", data.taxonomy);
  std::vector<ManifestEntry> manifest;
  for (const auto& bag : data.bags) {
    const fs::path a = fs::path("features") / (bag.video_id + "_audio.feat");
    const fs::path v = fs::path("features") / (bag.video_id + "_visual.feat");
    save_features(dir / a, bag.audio, Modality::Audio);
    save_features(dir / v, bag.visual, Modality::Visual);
    manifest.push_back({bag.video_id, a, v});
  }
  save_manifest(dir / "manifest.tsv", manifest);
  save_weak_labels(dir / "weak_labels.csv", data.weak, data.taxonomy);
  if (data.has_annotations()) save_annotations(dir / "annotations.csv", data.dense, data.taxonomy);
}

void validate_training_set(const Dataset& data) {
  if (data.bags.empty()) throw InvalidArgument("training set is empty");
  std::string bad;
  for (const auto& w : data.weak) {
    if (!w.any()) bad += (bad.empty() ? "" : ", ") + w.video_id;
  }
  if (!bad.empty()) throw InvalidArgument("videos with no positive weak label: " + bad);
  for (const auto& w : data.weak) {
    if (w.classes.size() != data.taxonomy.size()) {
      throw ShapeError("weak label of " + w.video_id + " has wrong class count");
    }
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t n_test) {
  if (n_test > data.size()) throw InvalidArgument("split larger than dataset");
  const std::size_t cut = data.size() - n_test;
  Dataset train{data.taxonomy, {}, {}, {}}, test{data.taxonomy, {}, {}, {}};
  for (std::size_t i = 0; i < data.size(); ++i) {
    Dataset& dst = i < cut ? train : test;
    dst.bags.push_back(data.bags[i]);
    dst.weak.push_back(data.weak[i]);
    if (data.has_annotations()) dst.dense.push_back(data.dense[i]);
  }
  return {std::move(train), std::move(test)};
}

// ---- synthesis ----------------------------------------------------------------------

void SynthConfig::validate() const {
  if (n_videos < 1 || steps < 1 || d_audio < 1 || d_visual < 1 || classes < 1 ||
      max_classes_per_video < 1) {
    throw InvalidArgument("synth counts must all be >= 1");
  }
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (!(modality_bias >= 0.0 && modality_bias <= 1.0)) {
    throw InvalidArgument("modality_bias must lie in [0, 1]");
  }
  if (!(p_audio_only >= 0.0 && p_visual_only >= 0.0 && p_audio_only + p_visual_only <= 1.0)) {
    throw InvalidArgument("p_audio_only + p_visual_only must lie in [0, 1]");
  }
}

namespace {

Matrix unit_prototypes(Rng& rng, std::size_t classes, std::size_t dim) {
  Matrix p(classes, dim);
  for (std::size_t c = 0; c < classes; ++c) {
    auto r = p.row(c);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : r) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : r) x /= norm;
  }
  return p;
}

struct Interval {
  int onset, offset;
};

Interval random_interval(Rng& rng, std::size_t steps) {
  const auto len = 1 + rng.below(steps);
  const auto onset = rng.below(steps - len + 1);
  return {static_cast<int>(onset), static_cast<int>(onset + len)};
}

void plant(Matrix& features, const Matrix& protos, const LabelGrid& grid, double gain,
           double sigma, Rng& noise) {
  for (std::size_t t = 0; t < features.rows(); ++t) {
    auto row = features.row(t);
    for (std::size_t c = 0; c < grid.classes(); ++c) {
      if (!grid.at(t, c)) continue;
      auto p = protos.row(c);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += gain * p[j];
    }
    if (sigma > 0.0) {
      for (double& x : row) x += sigma * noise.normal();
    }
    // Stored features are float32; round here so memory and disk agree.
    for (double& x : row) x = static_cast<double>(static_cast<float>(x));
  }
}

}  // namespace

std::pair<Matrix, Matrix> synth_prototypes(const SynthConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 1));
  Matrix audio = unit_prototypes(rng, cfg.classes, cfg.d_audio);
  Matrix visual = unit_prototypes(rng, cfg.classes, cfg.d_visual);
  return {std::move(audio), std::move(visual)};
}

SynthResult synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthResult result;
  if (cfg.classes > cfg.d_audio || cfg.classes > cfg.d_visual) {
    result.warnings.push_back("more classes (" + std::to_string(cfg.classes) +
                              ") than feature dimensions; prototypes cannot all be orthogonal");
  }
  const auto [audio_protos, visual_protos] = synth_prototypes(cfg);
  const double audio_gain = cfg.signal_gain * (1.0 + cfg.modality_bias);
  const double visual_gain = cfg.signal_gain * (1.0 - cfg.modality_bias);

  Dataset& data = result.data;
  data.taxonomy = Taxonomy::synthetic(cfg.classes);
  const std::size_t max_k = std::min(cfg.max_classes_per_video, cfg.classes);
  for (std::size_t i = 0; i < cfg.n_videos; ++i) {
    Rng rng(mix_seed(cfg.seed, 1000 + i));
    std::ostringstream id;
    id << "synth_" << std::setw(5) << std::setfill('0') << i;

    const std::size_t k = 1 + rng.below(max_k);
    std::vector<std::size_t> order(cfg.classes);
    for (std::size_t c = 0; c < cfg.classes; ++c) order[c] = c;
    for (std::size_t j = 0; j < k; ++j) std::swap(order[j], order[j + rng.below(cfg.classes - j)]);
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());

    std::vector<EventSegment> events;
    for (std::size_t c : chosen) {
      // u < p_a: audio only; p_a <= u < p_a + p_v: visual only; else both.
      const double u = rng.uniform();
      const bool audio_only = u < cfg.p_audio_only;
      const bool visual_only = !audio_only && u < cfg.p_audio_only + cfg.p_visual_only;
      if (!visual_only) {
        auto iv = random_interval(rng, cfg.steps);
        events.push_back({c, Modality::Audio, iv.onset, iv.offset});
      }
      if (!audio_only) {
        auto iv = random_interval(rng, cfg.steps);
        events.push_back({c, Modality::Visual, iv.onset, iv.offset});
      }
    }

    DenseAnnotation dense = to_dense(id.str(), events, cfg.steps, cfg.classes);
    VideoBag bag{id.str(), Matrix(cfg.steps, cfg.d_audio), Matrix(cfg.steps, cfg.d_visual)};
    plant(bag.audio, audio_protos, dense.audio, audio_gain, cfg.noise_sigma, rng);
    plant(bag.visual, visual_protos, dense.visual, visual_gain, cfg.noise_sigma, rng);

    WeakLabel weak{id.str(), std::vector<std::uint8_t>(cfg.classes, 0)};
    for (const auto& e : events) weak.classes[e.cls] = 1;

    data.bags.push_back(std::move(bag));
    data.weak.push_back(std::move(weak));
    data.dense.push_back(std::move(dense));
  }
  return result;
}

}  // namespace avvp
