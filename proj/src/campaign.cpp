#include <omp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "raf/error.hpp"
#include "raf/harness.hpp"

namespace fs = std::filesystem;

namespace raf {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string resolve_label(const std::string& stem, const GalleryManifest& manifest) {
  if (auto it = manifest.probes.find(stem); it != manifest.probes.end()) return it->second;
  std::string best;
  for (const ManifestIdentity& id : manifest.identities) {
    const std::string& label = id.label;
    const bool exact = stem == label;
    const bool prefix = stem.size() > label.size() && stem.compare(0, label.size(), label) == 0 &&
                        stem[label.size()] == '_';
    if ((exact || prefix) && label.size() > best.size()) best = label;
  }
  return best;
}

}  // namespace

Corpus ingest_corpus(const std::string& root, const std::string& manifest_path) {
  if (!fs::is_directory(root)) throw IoError("corpus directory " + root + " does not exist");
  const GalleryManifest manifest = load_manifest(manifest_path);

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem().string() < b.stem().string(); });
  if (images.empty()) throw InvalidInput("corpus " + root + " is empty");

  Corpus corpus;
  corpus.manifest_path = manifest_path;
  for (const fs::path& image : images) {
    const std::string stem = image.stem().string();
    fs::path lms = image;
    lms.replace_extension(".lms");
    if (!fs::exists(lms)) throw InvalidInput("missing landmark sidecar for '" + stem + "'");
    std::string label = resolve_label(stem, manifest);
    if (label.empty()) throw InvalidInput("no gallery label for corpus item '" + stem + "'");
    const bool enrolled = std::any_of(manifest.identities.begin(), manifest.identities.end(),
                                      [&](const ManifestIdentity& id) { return id.label == label; });
    if (!enrolled) {
      throw InvalidInput("label '" + label + "' of item '" + stem + "' is absent from the gallery");
    }
    corpus.items.push_back({stem, image.string(), lms.string(), std::move(label)});
  }
  return corpus;
}

CampaignRow make_row(const CorpusItem& item, const AttackOutcome& outcome) {
  CampaignRow row;
  row.stem = item.stem;
  row.label = item.label;
  row.status = std::string(to_string(outcome.status));
  row.queries_used = outcome.queries_used;
  row.final_delta = outcome.final_delta;
  if (outcome.succeeded()) {
    row.success_function = outcome.trace.back().spec.function();
    row.success_scale = outcome.trace.back().spec.scale();
  }
  return row;
}

void summarise(CampaignReport& report) {
  report.aggregates.clear();
  report.total_queries = 0;
  for (const CampaignRow& row : report.rows) {
    report.total_queries += row.queries_used;
    if (row.success_function) {
      ++report.aggregates[std::string(to_string(*row.success_function))][row.status];
    }
  }
}

std::map<std::string, std::string> describe(const AttackConfig& config) {
  std::string order, scales;
  for (WarpFunction wf : config.order) {
    if (!order.empty()) order += ',';
    order += short_name(wf);
  }
  for (double s : config.scale_ladder()) {
    if (!scales.empty()) scales += ',';
    scales += shortest(s);
  }
  return {{"order", order},
          {"scales", scales},
          {"budget", std::to_string(config.budget)},
          {"goal", std::string(to_string(config.goal))},
          {"composition", std::string(to_string(config.composition))},
          {"step", shortest(config.step)}};
}

CampaignReport run_campaign(const Corpus& corpus, const OracleFactory& oracle_factory,
                            const AttackConfig& config, std::size_t parallelism) {
  if (parallelism < 1) throw InvalidInput("parallelism must be at least 1");
  config.validate();

  const std::size_t n = corpus.items.size();
  std::vector<CampaignRow> rows(n);
  std::atomic<std::size_t> next{0};

  auto attack_item = [&](std::size_t i) {
    const CorpusItem& item = corpus.items[i];
    try {
      const Image img = load_png(item.image_path);
      const LandmarkSet lm = load_landmarks(item.landmarks_path);
      auto oracle = oracle_factory(item);
      rows[i] = make_row(item, raf_attack(img, lm, item.label, *oracle, config));
    } catch (const std::exception& e) {
      CampaignRow row;
      row.stem = item.stem;
      row.label = item.label;
      row.status = "error";
      row.error = e.what();
      rows[i] = std::move(row);
    }
  };
  auto worker = [&](bool nested) {
    // Items already run concurrently; keep the pixel kernels on one thread each.
    if (nested) omp_set_num_threads(1);
    for (std::size_t i = next++; i < n; i = next++) attack_item(i);
  };

  const std::size_t workers = std::min(parallelism, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    worker(false);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker, true);
  }

  CampaignReport report;
  report.rows = std::move(rows);
  report.config = describe(config);
  summarise(report);
  return report;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw InvalidInput("unknown report format '" + std::string(s) + "'");
}

std::string report_to_csv(const CampaignReport& report) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const CampaignRow& row : report.rows) {
    out += row.label;
    out += ',' + row.status;
    out += ',' + std::to_string(row.queries_used);
    out += ',' + (row.success_function ? std::string(to_string(*row.success_function)) : "");
    out += ',' + (row.success_scale ? shortest(*row.success_scale) : "");
    out += ',' + shortest(row.final_delta);
    out += '\n';
  }
  return out;
}

std::string report_to_json(const CampaignReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  auto rows = nlohmann::ordered_json::array();
  for (const CampaignRow& row : report.rows) {
    nlohmann::ordered_json r;
    r["stem"] = row.stem;
    r["label"] = row.label;
    r["status"] = row.status;
    r["queries_used"] = row.queries_used;
    r["success_function"] = row.success_function
                                ? nlohmann::ordered_json(std::string(to_string(*row.success_function)))
                                : nlohmann::ordered_json(nullptr);
    r["success_scale"] = row.success_scale ? nlohmann::ordered_json(*row.success_scale)
                                           : nlohmann::ordered_json(nullptr);
    r["final_delta"] = row.final_delta;
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["aggregates"] = report.aggregates;
  j["total_queries"] = report.total_queries;
  return j.dump(2) + "\n";
}

CampaignReport report_from_json(std::string_view text) {
  CampaignReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& r : j.at("rows")) {
      CampaignRow row;
      row.stem = r.at("stem").get<std::string>();
      row.label = r.at("label").get<std::string>();
      row.status = r.at("status").get<std::string>();
      row.queries_used = r.at("queries_used").get<std::size_t>();
      if (!r.at("success_function").is_null()) {
        row.success_function = parse_warp_function(r["success_function"].get<std::string>());
      }
      if (!r.at("success_scale").is_null()) row.success_scale = r["success_scale"].get<double>();
      row.final_delta = r.at("final_delta").get<double>();
      row.error = r.value("error", "");
      report.rows.push_back(std::move(row));
    }
    report.aggregates =
        j.at("aggregates").get<std::map<std::string, std::map<std::string, std::size_t>>>();
    report.total_queries = j.at("total_queries").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invalid report: ") + e.what());
  }
  return report;
}

void write_report(const CampaignReport& report, ReportFormat format, const std::string& path) {
  const std::string text = format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report " + path);
  out << text;
  if (!out) throw IoError("failed writing report " + path);
}

}  // namespace raf
