// SPDX-License-Identifier: Apache-2.0
#include "nnfs/embedding_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nnfs/error.hpp"

namespace nnfs {
namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', '1'};
constexpr std::size_t kPairwiseBlock = 16;

// EMB1 integers and floats are little-endian on disk regardless of host.
template <typename T>
void put_le(std::vector<char>& buf, T value) {
  static_assert(sizeof(T) == 4);
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int shift = 0; shift < 32; shift += 8) {
    buf.push_back(static_cast<char>((bits >> shift) & 0xffu));
  }
}

template <typename T>
T get_le(const char* p) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<T>(bits);
}

// Sums rows [lo, hi) into `out` (length dim) by recursive halving.
void pairwise_rows(std::span<const std::span<const float>> rows,
                   std::size_t lo, std::size_t hi, std::span<double> out) {
  if (hi - lo <= kPairwiseBlock) {
    for (std::size_t r = lo; r < hi; ++r) {
      const auto row = rows[r];
      for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] += static_cast<double>(row[j]);
      }
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  std::vector<double> right(out.size(), 0.0);
  pairwise_rows(rows, lo, mid, out);
  pairwise_rows(rows, mid, hi, right);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += right[j];
}

std::string describe(const EmbeddingDataset& d) {
  return d.task + "/" + d.language + "/" + std::string(to_string(d.split));
}

}  // namespace

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  fail(ErrorKind::kUsage,
       "split must be one of train|dev|test, got '" + std::string(text) + "'");
}

FeatureMatrix EmbeddingDataset::gather(
    std::span<const std::size_t> indices) const {
  FeatureMatrix m(indices.size(), dim);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = feature_row(indices[r]);
    auto dst = m.row(r);
    for (std::size_t j = 0; j < dim; ++j) dst[j] = static_cast<double>(src[j]);
  }
  return m;
}

FeatureMatrix EmbeddingDataset::to_matrix() const {
  std::vector<double> data(features.begin(), features.end());
  return FeatureMatrix(num_samples(), dim, std::move(data));
}

std::vector<std::vector<std::size_t>> EmbeddingDataset::indices_by_class()
    const {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < num_classes) by_class[labels[i]].push_back(i);
  }
  return by_class;
}

void validate(const EmbeddingDataset& d, const LoadOptions& options) {
  const auto bad = [](const std::string& msg) {
    fail(ErrorKind::kFormat, "invalid dataset: " + msg);
  };
  if (d.dim == 0) bad("dim must be positive");
  if (d.num_classes == 0) bad("num_classes must be positive");
  const std::size_t n = d.labels.size();
  if (d.features.size() != n * d.dim) {
    bad("features has " + std::to_string(d.features.size()) +
        " values, expected labels length " + std::to_string(n) + " x dim " +
        std::to_string(d.dim));
  }
  if (d.logits && d.logits->size() != n * d.num_classes) {
    bad("logits has " + std::to_string(d.logits->size()) +
        " values, expected labels length " + std::to_string(n) +
        " x num_classes " + std::to_string(d.num_classes));
  }
  std::vector<std::size_t> counts(d.num_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (d.labels[i] >= d.num_classes) {
      bad("labels[" + std::to_string(i) + "] = " +
          std::to_string(d.labels[i]) + " out of range for num_classes " +
          std::to_string(d.num_classes));
    }
    ++counts[d.labels[i]];
  }
  if (!options.allow_empty_classes) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) {
        bad("labels: class " + std::to_string(c) + " has no samples");
      }
    }
  }
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    if (!std::isfinite(d.features[i])) {
      bad("features: non-finite value at row " + std::to_string(i / d.dim) +
          ", column " + std::to_string(i % d.dim));
    }
  }
  if (d.logits) {
    for (std::size_t i = 0; i < d.logits->size(); ++i) {
      if (!std::isfinite((*d.logits)[i])) {
        bad("logits: non-finite value at row " +
            std::to_string(i / d.num_classes));
      }
    }
  }
}

void write_emb1(const EmbeddingDataset& d, std::ostream& out) {
  validate(d, LoadOptions{.allow_empty_classes = true});

  const nlohmann::json header = {
      {"task", d.task},
      {"language", d.language},
      {"split", to_string(d.split)},
      {"dim", d.dim},
      {"num_classes", d.num_classes},
      {"num_samples", d.num_samples()},
      {"has_logits", d.has_logits()},
      {"provenance", d.provenance},
  };
  const std::string header_text = header.dump();

  std::vector<char> buf(kMagic.begin(), kMagic.end());
  buf.reserve(8 + header_text.size() +
              4 * (d.features.size() + d.labels.size() +
                   (d.logits ? d.logits->size() : 0)));
  put_le(buf, static_cast<std::uint32_t>(header_text.size()));
  buf.insert(buf.end(), header_text.begin(), header_text.end());
  for (float v : d.features) put_le(buf, v);
  for (Label l : d.labels) put_le(buf, l);
  if (d.logits) {
    for (float v : *d.logits) put_le(buf, v);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorKind::kIo, "EMB1 write failed");
}

EmbeddingDataset read_emb1(std::istream& in, const LoadOptions& options) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) {
    fail(ErrorKind::kFormat, "bad magic: expected \"EMB1\"");
  }
  std::array<char, 4> len_bytes{};
  in.read(len_bytes.data(), len_bytes.size());
  if (in.gcount() != 4) {
    fail(ErrorKind::kFormat, "truncated EMB1: missing header_len");
  }
  const auto header_len = get_le<std::uint32_t>(len_bytes.data());
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), header_len);
  if (static_cast<std::size_t>(in.gcount()) != header_len) {
    fail(ErrorKind::kFormat,
         "truncated EMB1 header: expected " + std::to_string(header_len) +
             " bytes, got " + std::to_string(in.gcount()));
  }

  EmbeddingDataset d;
  std::size_t n = 0;
  bool has_logits = false;
  try {
    const auto header = nlohmann::json::parse(header_text);
    d.task = header.at("task").get<std::string>();
    d.language = header.at("language").get<std::string>();
    d.split = parse_split(header.at("split").get<std::string>());
    d.dim = header.at("dim").get<std::size_t>();
    d.num_classes = header.at("num_classes").get<std::size_t>();
    n = header.at("num_samples").get<std::size_t>();
    has_logits = header.at("has_logits").get<bool>();
    d.provenance = header.value("provenance", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("bad EMB1 header: ") + e.what());
  }
  if (d.dim == 0) fail(ErrorKind::kFormat, "bad EMB1 header: dim must be > 0");

  const std::vector<char> payload{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  const std::size_t tail_bytes = 4 * n + (has_logits ? 4 * n * d.num_classes : 0);
  const std::size_t expected = 4 * n * d.dim + tail_bytes;
  if (payload.size() != expected) {
    // A payload that is exactly consistent with another feature width is a
    // header/payload dimension mismatch rather than a cut-off stream.
    if (n > 0 && payload.size() > tail_bytes &&
        (payload.size() - tail_bytes) % (4 * n) == 0) {
      const std::size_t payload_dim = (payload.size() - tail_bytes) / (4 * n);
      fail(ErrorKind::kFormat,
           "EMB1 dimension mismatch: header dim=" + std::to_string(d.dim) +
               " but payload holds dim=" + std::to_string(payload_dim) +
               " features for " + std::to_string(n) + " samples");
    }
    if (payload.size() < expected) {
      fail(ErrorKind::kFormat,
           "truncated EMB1 payload: expected " + std::to_string(expected) +
               " bytes, got " + std::to_string(payload.size()));
    }
    fail(ErrorKind::kFormat, "EMB1 payload has " +
                                 std::to_string(payload.size() - expected) +
                                 " trailing bytes (expected " +
                                 std::to_string(expected) + ")");
  }

  const char* p = payload.data();
  d.features.resize(n * d.dim);
  for (auto& v : d.features) {
    v = get_le<float>(p);
    p += 4;
  }
  d.labels.resize(n);
  for (auto& l : d.labels) {
    l = get_le<std::uint32_t>(p);
    p += 4;
  }
  if (has_logits) {
    std::vector<float> logits(n * d.num_classes);
    for (auto& v : logits) {
      v = get_le<float>(p);
      p += 4;
    }
    d.logits = std::move(logits);
  }
  validate(d, options);
  return d;
}

void save_emb1(const EmbeddingDataset& dataset,
               const std::filesystem::path& path) {
  validate(dataset, LoadOptions{.allow_empty_classes = true});
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open for writing: " + path.string());
  write_emb1(dataset, out);
}

EmbeddingDataset load_emb1(const std::filesystem::path& path,
                           const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open: " + path.string());
  try {
    return read_emb1(in, options);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

MeanVector compute_mean_vector(
    std::span<const EmbeddingDataset* const> datasets) {
  if (datasets.empty()) fail(ErrorKind::kUsage, "mean vector: no datasets");
  const std::size_t dim = datasets.front()->dim;
  std::vector<std::span<const float>> rows;
  std::string provenance = "mean of";
  for (const auto* d : datasets) {
    if (d->dim != dim) {
      fail(ErrorKind::kUsage, "mean vector: dim mismatch (" +
                                  std::to_string(d->dim) + " vs " +
                                  std::to_string(dim) + ") in " + describe(*d));
    }
    for (std::size_t i = 0; i < d->num_samples(); ++i) {
      rows.push_back(d->feature_row(i));
    }
    provenance += " " + describe(*d);
  }
  if (rows.empty()) fail(ErrorKind::kUsage, "mean vector: zero rows");

  MeanVector mean;
  mean.values.assign(dim, 0.0);
  pairwise_rows(rows, 0, rows.size(), mean.values);
  for (auto& v : mean.values) v /= static_cast<double>(rows.size());
  mean.provenance = provenance + " (" + std::to_string(rows.size()) + " rows)";
  return mean;
}

MeanVector compute_mean_vector(const std::vector<EmbeddingDataset>& datasets) {
  std::vector<const EmbeddingDataset*> ptrs;
  for (const auto& d : datasets) ptrs.push_back(&d);
  return compute_mean_vector(std::span<const EmbeddingDataset* const>(ptrs));
}

EmbeddingDataset mean_to_dataset(const MeanVector& mean,
                                 const std::string& task,
                                 const std::string& language) {
  EmbeddingDataset d;
  d.task = task;
  d.language = language;
  d.split = Split::kTrain;
  d.dim = mean.dim();
  d.num_classes = 1;
  d.features.assign(mean.values.begin(), mean.values.end());
  d.labels = {0};
  d.provenance = mean.provenance;
  return d;
}

MeanVector mean_from_dataset(const EmbeddingDataset& d) {
  if (d.num_samples() != 1) {
    fail(ErrorKind::kFormat, "mean file must hold exactly one row, found " +
                                 std::to_string(d.num_samples()));
  }
  MeanVector mean;
  mean.values.assign(d.features.begin(), d.features.end());
  mean.provenance = d.provenance;
  return mean;
}

void save_mean(const MeanVector& mean, const std::string& task,
               const std::string& language, const std::filesystem::path& path) {
  save_emb1(mean_to_dataset(mean, task, language), path);
}

MeanVector load_mean(const std::filesystem::path& path) {
  return mean_from_dataset(load_emb1(path));
}

std::filesystem::path split_path(const std::filesystem::path& root,
                                 std::string_view task,
                                 std::string_view language, Split split) {
  return root / task / language / (std::string(to_string(split)) + ".emb1");
}

std::filesystem::path mean_path(const std::filesystem::path& root,
                                std::string_view task) {
  return root / task / "mean_src.emb1";
}

}  // namespace nnfs
