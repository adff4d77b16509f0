#include "raf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "raf/error.hpp"

namespace raf {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Embedding normalised(Embedding v) {
  const double n = norm(v);
  if (n < 1e-12) {
    std::fill(v.begin(), v.end(), 0.0);
  } else {
    for (double& x : v) x /= n;
  }
  return v;
}

}  // namespace

OracleResponse::OracleResponse(std::optional<std::string> id, double conf)
    : identity(std::move(id)), confidence(conf) {
  if (!(conf >= 0.0 && conf <= 1.0)) {
    throw InvalidInput("oracle confidence must be within [0, 1]");
  }
}

void QueryLedger::charge() {
  if (used_ >= budget_) throw BudgetExhausted();
  ++used_;
}

OracleResponse identify(Oracle& oracle, const Image& img, QueryLedger& ledger) {
  ledger.charge();
  return oracle.query(img);
}

Gallery::Gallery(double threshold, std::string extractor_id)
    : threshold_(threshold), extractor_id_(std::move(extractor_id)) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidInput("gallery threshold must be within [0, 1]");
  }
}

bool Gallery::contains(std::string_view label) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const GalleryEntry& e) { return e.label == label; });
}

Gallery Gallery::with_entry(std::string label, Embedding embedding) const {
  if (contains(label)) throw InvalidInput("duplicate gallery label '" + label + "'");
  if (!entries_.empty() && embedding.size() != dimension()) {
    throw InvalidInput("embedding dimension " + std::to_string(embedding.size()) +
                       " does not match gallery dimension " + std::to_string(dimension()));
  }
  if (embedding.empty() || norm(embedding) < 1e-12) {
    throw InvalidInput("cannot enroll '" + label + "': zero embedding");
  }
  Gallery g = *this;
  g.entries_.push_back({std::move(label), normalised(std::move(embedding))});
  return g;
}

Gallery enroll(const Gallery& gallery, std::string label, std::span<const Image> images) {
  if (images.empty()) throw InvalidInput("cannot enroll '" + label + "' without images");
  Embedding sum;
  for (const Image& img : images) {
    const Embedding e = extract_embedding(img);
    if (sum.empty()) sum.assign(e.size(), 0.0);
    if (e.size() != sum.size()) throw InvalidInput("embedding dimension mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) sum[i] += e[i];
  }
  for (double& x : sum) x /= static_cast<double>(images.size());
  return gallery.with_entry(std::move(label), std::move(sum));
}

OracleResponse match(std::span<const double> embedding, const Gallery& gallery) {
  if (gallery.entries().empty()) throw InvalidInput("cannot match against an empty gallery");
  if (embedding.size() != gallery.dimension()) {
    throw InvalidInput("probe dimension " + std::to_string(embedding.size()) +
                       " does not match gallery dimension " + std::to_string(gallery.dimension()));
  }
  const double probe_norm = norm(embedding);
  const GalleryEntry* best = nullptr;
  double best_sim = -1.0;
  for (const GalleryEntry& e : gallery.entries()) {
    double sim = 0.0;
    if (probe_norm >= 1e-12) {
      double dot = 0.0;
      for (std::size_t i = 0; i < embedding.size(); ++i) dot += embedding[i] * e.embedding[i];
      sim = std::clamp(dot / probe_norm, 0.0, 1.0);
    }
    if (best == nullptr || sim > best_sim || (sim == best_sim && e.label < best->label)) {
      best = &e;
      best_sim = sim;
    }
  }
  if (best_sim >= gallery.threshold()) return {best->label, best_sim};
  return {std::nullopt, best_sim};
}

OracleResponse LocalOracle::query(const Image& img) {
  return match(extract_embedding(img), *gallery_);
}

GalleryManifest parse_manifest(std::string_view json_text, const std::string& base_dir) {
  GalleryManifest m;
  try {
    const auto j = nlohmann::json::parse(json_text);
    m.threshold = j.value("threshold", kDefaultThreshold);
    for (const auto& id : j.at("identities")) {
      ManifestIdentity mi;
      mi.label = id.at("label").get<std::string>();
      for (const auto& p : id.at("images")) {
        std::filesystem::path path = p.get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
        mi.images.push_back(path.lexically_normal().string());
      }
      m.identities.push_back(std::move(mi));
    }
    if (j.contains("probes")) m.probes = j["probes"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invalid gallery manifest: ") + e.what());
  }
  return m;
}

GalleryManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), std::filesystem::path(path).parent_path().string());
}

Gallery build_gallery(const GalleryManifest& manifest) {
  Gallery g(manifest.threshold);
  for (const ManifestIdentity& id : manifest.identities) {
    std::vector<Image> images;
    for (const std::string& p : id.images) images.push_back(load_png(p));
    g = enroll(g, id.label, images);
  }
  return g;
}

}  // namespace raf
