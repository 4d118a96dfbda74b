// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/synth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "amd/errors.hpp"
#include "amd/rng.hpp"

namespace amd::synth {

namespace {

constexpr std::uint64_t kWordStream = 0x10;
constexpr std::uint64_t kRenderStream = 0x11;
constexpr std::uint64_t kAugmentSampleStream = 0x12;
constexpr std::uint64_t kShiftStream = 0x13;
constexpr std::uint64_t kLexiconStream = 0x14;
constexpr std::uint64_t kShuffleStream = 0x15;
constexpr const char* kHeader = "# alphabet=";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

// Reads the alphabet header and hands each data line to `row`.
template <class RowFn>
text::Alphabet parse_manifest(const std::filesystem::path& path, RowFn row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) {
    throw IoError(path.string() + ": first line must be '" + kHeader + "<chars>'");
  }
  text::Alphabet alphabet;
  try {
    alphabet = text::Alphabet::from_utf8(line.substr(std::string(kHeader).size()));
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": invalid alphabet header: " + e.what());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated columns");
    if (cols[2] != "train" && cols[2] != "val" && cols[2] != "test") {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": unknown split '" + cols[2] + "'");
    }
    row(cols, lineno, alphabet);
  }
  return alphabet;
}

Image load_normalized(const std::filesystem::path& p, std::size_t height) { return resize_to_height(read_pgm(p), height); }

}  // namespace

std::size_t Manifest::count(const std::string& split) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const ManifestRow& r) { return r.split == split; }));
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << kHeader << m.alphabet.to_utf8() << '\n';
  for (const auto& r : m.rows) out << r.path << '\t' << text::utf8_encode(r.transcript) << '\t' << r.split << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path, const std::string& only_split) {
  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  m.alphabet = parse_manifest(path, [&](const std::vector<std::string>& cols, std::size_t lineno, const text::Alphabet& a) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!seen.insert(cols[0]).second) throw IoError(where + ": duplicate path " + cols[0]);
    if (!only_split.empty() && cols[2] != only_split) return;
    std::u32string t = text::utf8_decode(cols[1]);
    for (char32_t c : t) {
      if (!a.contains(c)) throw ConfigError(where + ": transcript character outside the alphabet");
    }
    m.rows.push_back({cols[0], std::move(t), cols[2]});
  });
  return m;
}

ImageList read_image_list(const std::filesystem::path& path) {
  ImageList l;
  l.base_dir = path.parent_path();
  l.alphabet = parse_manifest(path, [&](const std::vector<std::string>& cols, std::size_t, const text::Alphabet&) {
    l.rows.emplace_back(cols[0], cols[2]);
  });
  return l;
}

std::vector<std::u32string> random_lexicon(const text::Alphabet& alphabet, std::size_t words, std::size_t min_len,
                                           std::size_t max_len, std::uint64_t seed) {
  if (alphabet.size() == 0 || min_len == 0 || max_len < min_len) throw ConfigError("random_lexicon: bad arguments");
  std::vector<std::u32string> out;
  for (std::size_t i = 0; i < words; ++i) {
    SplitMix64 rng(derive_seed(seed, i, kLexiconStream));
    std::u32string w(min_len + rng.below(max_len - min_len + 1), U' ');
    for (auto& c : w) c = alphabet.chars()[rng.below(alphabet.size())];
    out.push_back(std::move(w));
  }
  return out;
}

Manifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.lexicon.empty()) throw ConfigError("dataset.lexicon: must not be empty");
  const double total = spec.splits[0] + spec.splits[1] + spec.splits[2];
  if (std::abs(total - 1.0) > 1e-9 || *std::min_element(spec.splits.begin(), spec.splits.end()) < 0.0) {
    throw ConfigError("dataset.splits: fractions must be non-negative and sum to 1");
  }
  Manifest m;
  if (spec.alphabet) {
    m.alphabet = *spec.alphabet;
  } else {
    std::set<char32_t> chars;
    for (const auto& w : spec.lexicon) chars.insert(w.begin(), w.end());
    m.alphabet = text::Alphabet(std::u32string(chars.begin(), chars.end()));
  }
  for (const auto& w : spec.lexicon) {
    if (w.empty()) throw ConfigError("dataset.lexicon: empty word");
    for (char32_t c : w) {
      if (!m.alphabet.contains(c)) throw ConfigError("dataset.lexicon: word uses a character outside the alphabet");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "images").string() + ": " + ec.message());
  m.base_dir = out_dir;

  const auto n_train = static_cast<std::size_t>(std::llround(spec.splits[0] * static_cast<double>(spec.count)));
  const auto n_val = std::min(spec.count - std::min(spec.count, n_train),
                              static_cast<std::size_t>(std::llround(spec.splits[1] * static_cast<double>(spec.count))));
  for (std::size_t i = 0; i < spec.count; ++i) {
    SplitMix64 pick(derive_seed(spec.seed, i, kWordStream));
    const std::u32string& word = spec.lexicon[pick.below(spec.lexicon.size())];
    Image img = render_word(word, spec.font, spec.height, derive_seed(spec.seed, i, kRenderStream));
    img = augment(img, spec.pipeline, derive_seed(spec.seed, i, kAugmentSampleStream));
    if (spec.shift) img = apply_domain_shift(img, *spec.shift, derive_seed(spec.seed, i, kShiftStream));
    char name[32];
    std::snprintf(name, sizeof(name), "images/%06zu.pgm", i);
    write_pgm(out_dir / name, img);
    const char* split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    m.rows.push_back({name, word, split});
  }
  write_manifest(out_dir / "manifest.tsv", m);
  return m;
}

std::vector<Sample> load_samples(const Manifest& m, const std::string& split, std::size_t height) {
  std::vector<Sample> out;
  for (const auto& r : m.rows) {
    if (!split.empty() && r.split != split) continue;
    out.push_back({r.path, load_normalized(m.base_dir / r.path, height), r.transcript});
  }
  return out;
}

std::vector<Sample> load_images(const ImageList& list, const std::string& split, std::size_t height) {
  std::vector<Sample> out;
  for (const auto& [path, s] : list.rows) {
    if (!split.empty() && s != split) continue;
    out.push_back({path, load_normalized(list.base_dir / path, height), {}});
  }
  return out;
}

Batch make_batch(const std::vector<const Sample*>& samples) {
  if (samples.empty()) throw DomainError("make_batch: no samples");
  Batch b;
  const std::size_t H = samples[0]->image.height;
  std::size_t W = 0;
  for (const auto* s : samples) {
    if (s->image.height != H) throw ShapeError("make_batch: images differ in height");
    W = std::max(W, s->image.width);
  }
  b.images.height = H;
  b.images.width = W;
  b.images.pixels.assign(samples.size() * H * W, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Image& img = samples[i]->image;
    const double pad = median_level(img) / 255.0;
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        b.images.pixels[(i * H + y) * W + x] = x < img.width ? img.at(y, x) / 255.0 : pad;
      }
    }
    b.images.widths.push_back(img.width);
    b.images.pad_values.push_back(pad);
    b.transcripts.push_back(samples[i]->transcript);
    b.ids.push_back(samples[i]->id);
  }
  return b;
}

std::vector<Batch> sequential_batches(const std::vector<Sample>& samples, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<Batch> out;
  for (std::size_t i = 0; i < samples.size(); i += batch_size) {
    std::vector<const Sample*> ptrs;
    for (std::size_t j = i; j < std::min(samples.size(), i + batch_size); ++j) ptrs.push_back(&samples[j]);
    out.push_back(make_batch(ptrs));
  }
  return out;
}

BatchLoader::BatchLoader(std::vector<std::vector<Sample>> sources, std::size_t batch_size, bool balanced,
                         std::uint64_t seed)
    : sources_(std::move(sources)), batch_size_(batch_size), balanced_(balanced), seed_(seed) {
  if (sources_.empty()) throw ConfigError("batch loader needs at least one source");
  if (batch_size_ == 0) throw ConfigError("batch size must be positive");
  for (const auto& s : sources_) {
    if (s.empty()) throw ConfigError("batch loader source is empty");
  }
  if (balanced_ && batch_size_ % sources_.size() != 0) {
    throw ConfigError("balanced batches need a batch size divisible by the number of sources");
  }
}

std::size_t BatchLoader::sample_count() const {
  std::size_t n = 0;
  for (const auto& s : sources_) n += s.size();
  return n;
}

std::size_t BatchLoader::batches_per_epoch() const {
  if (!balanced_) return (sample_count() + batch_size_ - 1) / batch_size_;
  const std::size_t per = batch_size_ / sources_.size();
  std::size_t smallest = sources_[0].size();
  for (const auto& s : sources_) smallest = std::min(smallest, s.size());
  return smallest / per;
}

std::vector<Batch> BatchLoader::epoch(std::size_t index) const {
  std::vector<Batch> out;
  if (!balanced_) {
    std::vector<const Sample*> all;
    for (const auto& s : sources_) {
      for (const auto& x : s) all.push_back(&x);
    }
    SplitMix64 rng(derive_seed(seed_, index, kShuffleStream));
    rng.shuffle(all);
    for (std::size_t i = 0; i < all.size(); i += batch_size_) {
      out.push_back(make_batch({all.begin() + static_cast<std::ptrdiff_t>(i),
                                all.begin() + static_cast<std::ptrdiff_t>(std::min(all.size(), i + batch_size_))}));
    }
    return out;
  }
  const std::size_t per = batch_size_ / sources_.size();
  std::vector<std::vector<const Sample*>> orders;
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    std::vector<const Sample*> o;
    for (const auto& x : sources_[s]) o.push_back(&x);
    SplitMix64 rng(derive_seed(derive_seed(seed_, index, kShuffleStream), s, kShuffleStream));
    rng.shuffle(o);
    orders.push_back(std::move(o));
  }
  for (std::size_t b = 0; b < batches_per_epoch(); ++b) {
    std::vector<const Sample*> ptrs;
    for (const auto& o : orders) ptrs.insert(ptrs.end(), o.begin() + static_cast<std::ptrdiff_t>(b * per),
                                             o.begin() + static_cast<std::ptrdiff_t>((b + 1) * per));
    out.push_back(make_batch(ptrs));
  }
  return out;
}

BatchLoader load_batches(const std::vector<Manifest>& manifests, const std::string& split, std::size_t batch_size,
                         std::size_t height, bool balanced, std::uint64_t seed) {
  std::vector<std::vector<Sample>> sources;
  for (const auto& m : manifests) sources.push_back(load_samples(m, split, height));
  return BatchLoader(std::move(sources), batch_size, balanced, seed);
}

}  // namespace amd::synth
