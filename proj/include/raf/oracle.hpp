#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raf/image.hpp"

namespace raf {

/// Black-box answer: an identity label (absent when nobody is recognised) and a
/// confidence in [0, 1].
struct OracleResponse {
  std::optional<std::string> identity;
  double confidence = 0.0;

  OracleResponse() = default;
  OracleResponse(std::optional<std::string> id, double conf);

  friend bool operator==(const OracleResponse&, const OracleResponse&) = default;
};

/// Per-run query accounting. Every oracle call through identify() charges exactly one
/// query, successful or not.
class QueryLedger {
 public:
  explicit QueryLedger(std::size_t budget) : budget_(budget) {}

  std::size_t used() const { return used_; }
  std::size_t budget() const { return budget_; }
  std::size_t remaining() const { return budget_ - used_; }
  bool exhausted() const { return used_ >= budget_; }

  /// Throws BudgetExhausted without charging when nothing is left.
  void charge();

 private:
  std::size_t used_ = 0;
  std::size_t budget_;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  /// One raw query. Remote implementations throw TransportError.
  virtual OracleResponse query(const Image& img) = 0;
};

/// Budget check, charge, then query. The charge sticks when the query throws.
OracleResponse identify(Oracle& oracle, const Image& img, QueryLedger& ledger);

using Embedding = std::vector<double>;

inline constexpr int kEmbeddingSide = 32;
inline constexpr std::size_t kEmbeddingDim = kEmbeddingSide * kEmbeddingSide;
inline constexpr std::string_view kDefaultExtractorId = "gray32-v1";
inline constexpr double kDefaultThreshold = 0.95;

/// Grayscale, area-average to 32x32, mean-subtract, L2-normalise (zero vector for a
/// flat image). OpenMP-parallel.
Embedding extract_embedding(const Image& img);

namespace serial {
/// Per-cell 2-D footprint sum. Reference for extract_embedding.
Embedding extract_embedding(const Image& img);
}  // namespace serial

struct GalleryEntry {
  std::string label;
  Embedding embedding;
};

/// Enrolled identities; immutable once built. enroll() returns a new gallery.
class Gallery {
 public:
  explicit Gallery(double threshold = kDefaultThreshold,
                   std::string extractor_id = std::string(kDefaultExtractorId));

  double threshold() const { return threshold_; }
  const std::string& extractor_id() const { return extractor_id_; }
  std::span<const GalleryEntry> entries() const { return entries_; }
  std::size_t dimension() const { return entries_.empty() ? 0 : entries_.front().embedding.size(); }
  bool contains(std::string_view label) const;

  /// Adds an entry with the normalised embedding. Throws on duplicate label,
  /// dimension mismatch or a zero vector.
  Gallery with_entry(std::string label, Embedding embedding) const;

 private:
  double threshold_;
  std::string extractor_id_;
  std::vector<GalleryEntry> entries_;
};

/// Entry embedding = normalised mean of the per-image embeddings.
Gallery enroll(const Gallery& gallery, std::string label, std::span<const Image> images);

/// Best clamped cosine similarity; ties go to the smallest label. Below threshold the
/// identity is absent but the similarity is still reported.
OracleResponse match(std::span<const double> embedding, const Gallery& gallery);

/// Gallery matching on the default extractor.
class LocalOracle final : public Oracle {
 public:
  explicit LocalOracle(std::shared_ptr<const Gallery> gallery) : gallery_(std::move(gallery)) {}
  OracleResponse query(const Image& img) override;
  const Gallery& gallery() const { return *gallery_; }

 private:
  std::shared_ptr<const Gallery> gallery_;
};

struct ManifestIdentity {
  std::string label;
  std::vector<std::string> images;  ///< resolved against the manifest directory
};

struct GalleryManifest {
  double threshold = kDefaultThreshold;
  std::vector<ManifestIdentity> identities;
  /// Optional probe-stem -> label overrides for corpus ingestion.
  std::map<std::string, std::string> probes;
};

/// {"threshold": t, "identities": [{"label": s, "images": [paths]}], "probes": {stem: label}}
GalleryManifest parse_manifest(std::string_view json_text, const std::string& base_dir);
GalleryManifest load_manifest(const std::string& path);
Gallery build_gallery(const GalleryManifest& manifest);

}  // namespace raf
