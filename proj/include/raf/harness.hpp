#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raf/attack.hpp"
#include "raf/oracle.hpp"

namespace raf {

struct CorpusItem {
  std::string stem;
  std::string image_path;
  std::string landmarks_path;
  std::string label;
};

struct Corpus {
  std::vector<CorpusItem> items;  ///< sorted by stem
  std::string manifest_path;
};

/// Pairs every <stem>.png under `root` with <stem>.lms. The label is the manifest's
/// "probes" entry for the stem when present, else the gallery label equal to the stem
/// or to its prefix before an underscore (longest match wins).
Corpus ingest_corpus(const std::string& root, const std::string& manifest_path);

struct CampaignRow {
  std::string stem;
  std::string label;
  std::string status;  ///< dodge | impersonation | failed | error
  std::size_t queries_used = 0;
  std::optional<WarpFunction> success_function;
  std::optional<double> success_scale;
  double final_delta = 0.0;
  std::string error;

  friend bool operator==(const CampaignRow&, const CampaignRow&) = default;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;
  /// function name -> status -> count of successful rows.
  std::map<std::string, std::map<std::string, std::size_t>> aggregates;
  std::map<std::string, std::string> config;
  std::size_t total_queries = 0;

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

using OracleFactory = std::function<std::unique_ptr<Oracle>(const CorpusItem&)>;

/// Attacks every item with a fresh ledger. Rows come back in corpus order whatever
/// the worker count. Per-item failures become "error" rows.
CampaignReport run_campaign(const Corpus& corpus, const OracleFactory& oracle_factory,
                            const AttackConfig& config, std::size_t parallelism);

/// Row for one finished attack.
CampaignRow make_row(const CorpusItem& item, const AttackOutcome& outcome);
/// Recomputes aggregates and total_queries from the rows.
void summarise(CampaignReport& report);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(std::string_view s);

inline constexpr std::string_view kCsvHeader =
    "label,status,queries_used,success_function,success_scale,final_delta";

std::string report_to_csv(const CampaignReport& report);
std::string report_to_json(const CampaignReport& report);
CampaignReport report_from_json(std::string_view text);
void write_report(const CampaignReport& report, ReportFormat format, const std::string& path);

std::map<std::string, std::string> describe(const AttackConfig& config);

/// HTTP oracle service over a gallery. Optional per-client budget keyed by the
/// X-Client-Token header; requests past it get 429.
class OracleServer {
 public:
  OracleServer(std::shared_ptr<const Gallery> gallery, std::optional<std::size_t> per_client_budget);
  ~OracleServer();
  OracleServer(const OracleServer&) = delete;
  OracleServer& operator=(const OracleServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "host:port", binds and starts serving in the background.
std::unique_ptr<OracleServer> serve_oracle(std::shared_ptr<const Gallery> gallery,
                                           const std::string& bind_address,
                                           std::optional<std::size_t> per_client_budget);

}  // namespace raf
