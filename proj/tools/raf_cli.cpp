#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "raf/attack.hpp"
#include "raf/error.hpp"
#include "raf/harness.hpp"
#include "raf/synthetic.hpp"
#include "raf/wire.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct AttackFlags {
  std::string oracle;
  std::size_t budget = raf::AttackConfig{}.budget;
  std::string goal = "either";
  std::vector<std::string> order = {"sn", "smile", "re"};
  std::vector<double> scales = {0.1, 0.2, 0.3};
  std::string composition = "cumulative";
  double step = 0.1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--budget", budget, "queries per attack")->capture_default_str();
    cmd.add_option("--goal", goal, "dodge | impersonation | either")->capture_default_str();
    cmd.add_option("--order", order, "comma-separated warp functions")->delimiter(',')->capture_default_str();
    cmd.add_option("--scales", scales, "ascending scales per function")->delimiter(',')->capture_default_str();
    cmd.add_option("--composition", composition, "cumulative | fresh")->capture_default_str();
    cmd.add_option("--step", step, "scale increment when --scales is empty");
  }

  raf::AttackConfig config() const {
    raf::AttackConfig c;
    c.order.clear();
    for (const auto& name : order) c.order.push_back(raf::parse_warp_function(name));
    c.scales = scales;
    c.budget = budget;
    c.goal = raf::parse_goal(goal);
    c.composition = raf::parse_composition(composition);
    c.step = step;
    c.validate();
    return c;
  }
};

// "local:<manifest>" or "remote:<url>".
raf::OracleFactory make_oracle_factory(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "local" && !rest.empty()) {
    auto gallery = std::make_shared<const raf::Gallery>(raf::build_gallery(raf::load_manifest(rest)));
    return [gallery](const raf::CorpusItem&) { return std::make_unique<raf::LocalOracle>(gallery); };
  }
  if (kind == "remote" && !rest.empty()) {
    return [rest](const raf::CorpusItem& item) {
      return std::make_unique<raf::RemoteOracle>(rest, item.stem.empty() ? "raf" : item.stem);
    };
  }
  throw raf::InvalidInput("--oracle must be local:<manifest> or remote:<url>, got '" + spec + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw raf::IoError("cannot write " + path.string());
}

nlohmann::ordered_json trace_json(const raf::AttackOutcome& out) {
  nlohmann::ordered_json j;
  j["status"] = raf::to_string(out.status);
  j["queries_used"] = out.queries_used;
  j["final_delta"] = out.final_delta;
  j["trace"] = nlohmann::ordered_json::array();
  for (const auto& e : out.trace) {
    nlohmann::ordered_json row;
    row["function"] = raf::to_string(e.spec.function());
    row["scale"] = e.spec.scale();
    if (e.response) {
      row["identity"] = e.response->identity ? nlohmann::ordered_json(*e.response->identity) : nullptr;
      row["confidence"] = e.response->confidence;
    } else {
      row["error"] = e.error;
    }
    row["delta"] = e.delta;
    j["trace"].push_back(row);
  }
  j["skipped"] = nlohmann::ordered_json::array();
  for (const auto& s : out.skipped) {
    j["skipped"].push_back({{"function", raf::to_string(s.spec.function())},
                            {"scale", s.spec.scale()},
                            {"reason", s.reason}});
  }
  return j;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-budgeted face-warping attack toolkit"};
  app.require_subcommand(1);

  std::string image, lms, out, function = "sn";
  double scale = 0.0;
  auto* warp = app.add_subcommand("warp", "apply one warping function");
  warp->add_option("image", image)->required();
  warp->add_option("lms", lms)->required();
  warp->add_option("--function", function, "re, smile, sn, chubby, eyes or a long name")->required();
  warp->add_option("--scale", scale)->required();
  warp->add_option("-o,--output", out, "output PNG; warped landmarks go next to it as .lms")->required();

  AttackFlags flags;
  std::string label;
  auto* attack = app.add_subcommand("attack", "attack one face");
  attack->add_option("image", image)->required();
  attack->add_option("lms", lms)->required();
  attack->add_option("--label", label, "true identity")->required();
  attack->add_option("--oracle", flags.oracle, "local:<manifest> | remote:<url>")->required();
  attack->add_option("-o,--output", out, "output directory")->required();
  flags.add_to(*attack);

  std::string root, manifest, report, format = "csv";
  std::size_t parallelism = 1;
  auto* campaign = app.add_subcommand("campaign", "attack every face in a directory");
  campaign->add_option("root", root)->required();
  campaign->add_option("--manifest", manifest)->required();
  campaign->add_option("--oracle", flags.oracle, "defaults to local:<manifest>");
  campaign->add_option("--report", report)->required();
  campaign->add_option("--format", format, "csv | json")->capture_default_str();
  campaign->add_option("--parallelism", parallelism)->check(CLI::PositiveNumber)->capture_default_str();
  flags.add_to(*campaign);

  std::string bind = "127.0.0.1:8080";
  std::optional<std::size_t> server_budget;
  auto* serve = app.add_subcommand("serve-oracle", "serve a gallery over HTTP");
  serve->add_option("--manifest", manifest)->required();
  serve->add_option("--bind", bind, "host:port; port 0 picks a free one")->capture_default_str();
  serve->add_option("--budget", server_budget, "queries per client token");

  std::uint64_t n = 0, d = 0, k = 0;
  double xi = 1.0, base = 1.0;
  auto* bound = app.add_subcommand("bound", "evaluate the recursive-decomposition cost bound");
  bound->add_option("--n", n)->required();
  bound->add_option("--d", d)->required();
  bound->add_option("--k", k)->required();
  bound->add_option("--xi", xi)->required();
  bound->add_option("--base", base)->capture_default_str();

  int count = 6;
  double threshold = 0.8;
  auto* fixtures = app.add_subcommand("make-fixtures", "write the synthetic face corpus");
  fixtures->add_option("dir", root)->required();
  fixtures->add_option("--count", count)->capture_default_str();
  fixtures->add_option("--threshold", threshold)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*warp) {
      const raf::Image img = raf::load_png(image);
      const raf::LandmarkSet points = raf::load_landmarks(lms);
      const raf::WarpResult r = raf::warp_face(img, points, {raf::parse_warp_function(function), scale});
      raf::save_png(r.image, out);
      raf::save_landmarks(r.landmarks, fs::path(out).replace_extension(".lms").string());
      return 0;
    }
    if (*attack) {
      const raf::AttackConfig config = flags.config();
      const raf::Image img = raf::load_png(image);
      const raf::LandmarkSet points = raf::load_landmarks(lms);
      const auto oracle = make_oracle_factory(flags.oracle)({fs::path(image).stem().string(), image, lms, label});
      const raf::AttackOutcome outcome = raf::raf_attack(img, points, label, *oracle, config);
      fs::create_directories(out);
      raf::save_png(outcome.final_image, (fs::path(out) / "final.png").string());
      raf::save_landmarks(outcome.final_landmarks, (fs::path(out) / "final.lms").string());
      write_text(fs::path(out) / "trace.json", trace_json(outcome).dump(2) + "\n");
      std::cout << raf::to_string(outcome.status) << " after " << outcome.queries_used << " queries, delta "
                << outcome.final_delta << "\n";
      return outcome.succeeded() ? 0 : kExitFailed;
    }
    if (*campaign) {
      const raf::AttackConfig config = flags.config();
      const raf::ReportFormat fmt = raf::parse_report_format(format);
      const raf::Corpus corpus = raf::ingest_corpus(root, manifest);
      const auto factory = make_oracle_factory(flags.oracle.empty() ? "local:" + manifest : flags.oracle);
      const raf::CampaignReport r = raf::run_campaign(corpus, factory, config, parallelism);
      raf::write_report(r, fmt, report);
      std::size_t ok = 0;
      for (const auto& row : r.rows) ok += row.status == "dodge" || row.status == "impersonation";
      std::cout << ok << "/" << r.rows.size() << " succeeded, " << r.total_queries << " queries\n";
      return 0;
    }
    if (*serve) {
      auto gallery = std::make_shared<const raf::Gallery>(raf::build_gallery(raf::load_manifest(manifest)));
      auto server = raf::serve_oracle(gallery, bind, server_budget);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << server->url() << std::endl;
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server->stop();
      return 0;
    }
    if (*bound) {
      std::printf("%.17g\n", raf::complexity_bound(n, d, k, xi, base));
      return 0;
    }
    if (*fixtures) {
      std::cout << raf::write_synthetic_corpus(root, count, threshold) << "\n";
      return 0;
    }
  } catch (const raf::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const raf::TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const raf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
