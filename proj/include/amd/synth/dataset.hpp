// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Manifest format (UTF-8 TSV):
//   # alphabet=<chars>
//   <relative image path>\t<transcript>\t<train|val|test>

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amd/recognizer/image_batch.hpp"
#include "amd/synth/augment.hpp"
#include "amd/synth/font.hpp"
#include "amd/synth/image.hpp"
#include "amd/synth/shift.hpp"
#include "amd/text/alphabet.hpp"

namespace amd::synth {

struct ManifestRow {
  std::string path;
  std::u32string transcript;
  std::string split;
  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  text::Alphabet alphabet;
  std::vector<ManifestRow> rows;
  std::filesystem::path base_dir;  // directory holding the manifest

  std::size_t count(const std::string& split) const;
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
/// Validates the header, split tags, unique paths and that every transcript
/// character belongs to the alphabet. Throws IoError or ConfigError. With
/// `only_split` set, rows of other splits are dropped before their
/// transcripts are decoded.
Manifest read_manifest(const std::filesystem::path& path, const std::string& only_split = "");

/// Image paths and splits only; the transcript column is skipped unparsed.
struct ImageList {
  text::Alphabet alphabet;
  std::vector<std::pair<std::string, std::string>> rows;  // (path, split)
  std::filesystem::path base_dir;
};
ImageList read_image_list(const std::filesystem::path& path);

struct DatasetSpec {
  std::vector<std::u32string> lexicon;
  std::size_t count = 0;
  GlyphFont font = default_font();
  AugmentationPipeline pipeline;
  std::optional<DomainShiftConfig> shift;
  std::array<double, 3> splits{0.8, 0.1, 0.1};  // train, val, test
  std::uint64_t seed = 0;
  std::size_t height = 32;
  /// Defaults to the sorted characters of the lexicon.
  std::optional<text::Alphabet> alphabet;
};

/// Pseudo-words of uniformly drawn characters with uniform lengths.
std::vector<std::u32string> random_lexicon(const text::Alphabet& alphabet, std::size_t words, std::size_t min_len,
                                           std::size_t max_len, std::uint64_t seed);

/// Renders, augments and shifts `count` words into out_dir/images and writes
/// out_dir/manifest.tsv. Sample i draws its word and every random stream from
/// derive_seed(seed, i, stream). The first round(f_train * count) samples are
/// train, the next round(f_val * count) val, the rest test.
Manifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

/// A decoded, height-normalized image with its optional transcript.
struct Sample {
  std::string id;
  Image image;
  std::u32string transcript;
};

/// Loads the rows of one split (all rows when `split` is empty).
std::vector<Sample> load_samples(const Manifest& m, const std::string& split, std::size_t height);
/// Loads images without touching transcripts.
std::vector<Sample> load_images(const ImageList& list, const std::string& split, std::size_t height);

struct Batch {
  model::ImageBatch images;
  std::vector<std::u32string> transcripts;
  std::vector<std::string> ids;
};

/// Right-pads to the widest image; each sample pads with its median level.
/// Pixels are scaled to [0, 1].
Batch make_batch(const std::vector<const Sample*>& samples);

/// Fixed-order batches, for evaluation.
std::vector<Batch> sequential_batches(const std::vector<Sample>& samples, std::size_t batch_size);

/// Shuffled mini-batches over one or more sources. In balanced mode every
/// batch takes batch_size / n_sources samples from each source and the epoch
/// ends when the smallest source runs out.
class BatchLoader {
 public:
  BatchLoader(std::vector<std::vector<Sample>> sources, std::size_t batch_size, bool balanced, std::uint64_t seed);

  std::vector<Batch> epoch(std::size_t index) const;
  std::size_t batches_per_epoch() const;
  std::size_t sample_count() const;

 private:
  std::vector<std::vector<Sample>> sources_;
  std::size_t batch_size_;
  bool balanced_;
  std::uint64_t seed_;
};

BatchLoader load_batches(const std::vector<Manifest>& manifests, const std::string& split, std::size_t batch_size,
                         std::size_t height, bool balanced, std::uint64_t seed);

}  // namespace amd::synth
