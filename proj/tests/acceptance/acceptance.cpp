// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "affine_oracle.hpp"
#include "mesh_oracle.hpp"
#include "raf/attack.hpp"
#include "raf/error.hpp"
#include "raf/harness.hpp"
#include "raf/log.hpp"
#include "raf/synthetic.hpp"
#include "raf/wire.hpp"
#include "scripted_oracle.hpp"

namespace fs = std::filesystem;
using namespace raf;
using testing::recognised;
using testing::ScriptedOracle;
using testing::unrecognised;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void run(const char* id, const char* title, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.ok = false;
    v.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s && v.ok) {
    v.ok = false;
    v.detail = "over time limit";
  }
  if (!v.ok) ++failures;
  std::printf("[%s] %s %s (%.2fs)%s%s\n", v.ok ? "PASS" : "FAIL", id, title, secs,
              v.detail.empty() ? "" : ": ", v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

Verdict zero_scale_identity() {
  Verdict v;
  for (int id = 0; id < 3; ++id) {
    const SyntheticFace face = make_synthetic_face(id);
    for (WarpFunction wf : kAllWarpFunctions) {
      const WarpResult r = warp_face(face.image, face.landmarks, WarpSpec(wf, 0.0));
      const std::string tag = face.label + "/" + std::string(to_string(wf));
      v.require(r.image == face.image, tag + " image changed");
      for (std::size_t i = 0; i < kLandmarkCount; ++i)
        v.require(distance(r.landmarks[i], face.landmarks[i]) <= 1e-6, tag + " landmark moved");
    }
  }
  return v;
}

Verdict affine_estimation() {
  Verdict v;
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> coord(-100.0, 100.0), unit(-1.0, 1.0), shift(-200.0, 200.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto draw = [&](std::array<Point2, 5>& src, std::array<double, 6>& p) {
    for (auto& q : src) q = {coord(rng), coord(rng)};
    for (int k = 0; k < 4; ++k) p[k] = 2.0 * unit(rng);
    p[4] = shift(rng);
    p[5] = shift(rng);
  };
  auto apply = [](const std::array<double, 6>& p, Point2 q) {
    return Point2{q.x * p[0] + q.y * p[2] + p[4], q.x * p[1] + q.y * p[3] + p[5]};
  };

  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<Point2, 5> src{}, dst{};
    std::array<double, 6> p{};
    draw(src, p);
    for (std::size_t i = 0; i < 5; ++i) dst[i] = apply(p, src[i]);
    const AffineTransform fit = estimate_affine(FivePointSet(src), FivePointSet(dst));
    for (std::size_t i = 0; i < 5; ++i) {
      const Point2 q = fit(src[i]);
      worst = std::max({worst, std::abs(q.x - dst[i].x), std::abs(q.y - dst[i].y)});
    }
  }
  v.require(worst <= 1e-8, "exact residual " + fmt(worst));

  for (int trial = 0; trial < 100; ++trial) {
    std::array<Point2, 5> src{}, dst{};
    std::array<double, 6> p{};
    draw(src, p);
    for (std::size_t i = 0; i < 5; ++i) dst[i] = apply(p, src[i]) + Point2{noise(rng), noise(rng)};
    const AffineTransform fit = estimate_affine(FivePointSet(src), FivePointSet(dst));
    const double got = fit_residual(fit, src, dst);
    const double grid = testing::grid_min_residual(p, 0.1, 5, src, dst);
    v.require(got <= grid, "noisy trial " + std::to_string(trial) + ": " + fmt(got) + " > " + fmt(grid));
  }
  return v;
}

Verdict region_locality() {
  Verdict v;
  const SyntheticFace face = make_synthetic_face(2);  // zero tilt
  for (WarpFunction wf : {WarpFunction::RaiseEyebrow, WarpFunction::Smile, WarpFunction::StretchNose}) {
    for (double s : {0.1, 0.2, 0.3}) {
      const WarpResult r = warp_face(face.image, face.landmarks, WarpSpec(wf, s));
      const WarpMesh mesh = build_warp_mesh(face.landmarks, r.landmarks, face.image.width(), face.image.height());
      const auto region = testing::dilated_region(mesh, driven_indices(wf));
      const auto changed = testing::changed_pixels(face.image, r.image);
      const std::string tag = std::string(to_string(wf)) + "@" + fmt(s);
      v.require(!changed.empty(), tag + " changed nothing");
      std::size_t outside = 0;
      for (Point2 p : changed) outside += !testing::covered(mesh, p, region);
      v.require(outside == 0, tag + ": " + std::to_string(outside) + " changed pixels outside region");
    }
  }
  return v;
}

Verdict budget_safety() {
  Verdict v;
  std::mt19937_64 rng(7);
  const std::vector<WarpFunction> pool(kAllWarpFunctions.begin(), kAllWarpFunctions.end());
  const SyntheticFace face = make_synthetic_face(1, 48, 48);
  for (int trial = 0; trial < 500 && v.ok; ++trial) {
    AttackConfig c;
    c.order = pool;
    std::shuffle(c.order.begin(), c.order.end(), rng);
    c.order.resize(1 + rng() % pool.size());
    c.scales.clear();
    for (int k = 1; k <= 5; ++k)
      if (rng() % 2) c.scales.push_back(0.1 * k);
    c.step = 0.1 * double(1 + rng() % 5);
    c.budget = 1 + rng() % 10;
    c.goal = static_cast<Goal>(rng() % 3);
    c.composition = rng() % 2 ? Composition::Cumulative : Composition::Fresh;

    std::vector<std::optional<OracleResponse>> script;
    for (int i = 0; i < 12; ++i) {
      switch (rng() % 5) {
        case 0: script.push_back(std::nullopt); break;
        case 1: script.push_back(unrecognised()); break;
        case 2: script.push_back(recognised("other")); break;
        default: script.push_back(recognised(face.label)); break;
      }
    }
    ScriptedOracle oracle(script);
    const AttackOutcome out = raf_attack(face.image, face.landmarks, face.label, oracle, c);
    const std::string tag = "trial " + std::to_string(trial);
    v.require(out.queries_used <= c.budget && oracle.calls() <= c.budget, tag + ": over budget");
    v.require(out.queries_used == out.trace.size(), tag + ": trace/query mismatch");
    for (std::size_t i = 0; i + 1 < out.trace.size(); ++i) {
      const auto& r = out.trace[i].response;
      v.require(!(r && satisfies(c.goal, *r, face.label)), tag + ": success entry not last");
    }

    AttackConfig longer = c;
    longer.budget = c.budget + 1;
    const auto a = schedule(c), b = schedule(longer);
    v.require(a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin()), tag + ": prefix");
  }
  return v;
}

Verdict hybrid_trace() {
  Verdict v;
  const SyntheticFace face = make_synthetic_face(0);
  const auto t = recognised(face.label);
  ScriptedOracle oracle({t, t, t, t, unrecognised()});
  AttackConfig c;
  c.budget = 7;
  c.composition = Composition::Cumulative;
  const AttackOutcome out = raf_attack(face.image, face.landmarks, face.label, oracle, c);
  v.require(out.status == AttackStatus::Dodge, "status " + std::string(to_string(out.status)));
  v.require(out.queries_used == 5 && out.trace.size() == 5, "queries " + std::to_string(out.queries_used));
  std::set<WarpFunction> fns;
  for (const auto& e : out.trace) fns.insert(e.spec.function());
  v.require(fns.size() >= 2, "single function in trace");

  Image img = face.image;
  LandmarkSet lm = face.landmarks;
  for (const auto& e : out.trace) {
    WarpResult r = warp_face(img, lm, e.spec);
    img = std::move(r.image);
    lm = r.landmarks;
  }
  v.require(out.final_image == img, "cumulative image differs from recomputation");
  v.require(oracle.seen().size() == 5 && oracle.seen()[4] == img, "submitted image differs");
  const Image alone = warp_face(face.image, face.landmarks, out.trace.back().spec).image;
  v.require(!(out.final_image == alone), "final image equals a single warp of the original");
  return v;
}

Verdict complexity() {
  Verdict v;
  struct Case { std::uint64_t n, d, k; double xi, want; };
  for (const Case& c : {Case{4, 1, 2, 1, 4}, Case{8, 1, 2, 3, 216}, Case{9, 1, 3, 2, 36}}) {
    const double got = complexity_bound(c.n, c.d, c.k, c.xi, 1.0);
    v.require(std::abs(got - c.want) <= 1e-9 * c.want, fmt(got) + " != " + fmt(c.want));
  }
  return v;
}

Verdict campaign() {
  Verdict v;
  const std::string dir = RAF_FIXTURE_DIR;
  const std::string manifest_path = dir + "/manifest.json";
  const Corpus corpus = ingest_corpus(dir, manifest_path);
  const GalleryManifest manifest = load_manifest(manifest_path);
  v.require(corpus.items.size() == 6, "fixture has " + std::to_string(corpus.items.size()) + " items");
  v.require(manifest.threshold == 0.8, "fixture threshold " + fmt(manifest.threshold));

  auto gallery = std::make_shared<const Gallery>(build_gallery(manifest));
  LocalOracle direct(gallery);
  for (const auto& item : corpus.items) {
    const auto r = direct.query(load_png(item.image_path));
    v.require(r.identity == item.label, item.stem + " not recognised unwarped");
  }

  const OracleFactory factory = [gallery](const CorpusItem&) { return std::make_unique<LocalOracle>(gallery); };
  const AttackConfig config;
  const CampaignReport one = run_campaign(corpus, factory, config, 1);
  const CampaignReport four = run_campaign(corpus, factory, config, 4);
  std::size_t quick = 0;
  for (const auto& row : one.rows) quick += row.status == "dodge" && row.queries_used <= 3;
  v.require(quick * 10 >= one.rows.size() * 8,
            std::to_string(quick) + "/" + std::to_string(one.rows.size()) + " dodged within 3 queries");
  v.require(report_to_json(one) == report_to_json(four), "json differs across parallelism");
  v.require(report_to_csv(one) == report_to_csv(four), "csv differs across parallelism");
  return v;
}

Verdict loopback() {
  Verdict v;
  Gallery g(0.8);
  for (int id = 0; id < 4; ++id) {
    const SyntheticFace f = make_synthetic_face(id, 64, 64);
    g = enroll(g, f.label, std::vector<Image>{f.image});
  }
  auto gallery = std::make_shared<const Gallery>(std::move(g));
  LocalOracle local(gallery);

  {
    auto server = serve_oracle(gallery, "127.0.0.1:0", std::nullopt);
    RemoteOracle remote(server->url());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> scale(0.0, 0.5);
    for (int i = 0; i < 100; ++i) {
      // Probes live on the 8-bit grid the wire format carries.
      Image probe;
      if (i % 5 == 4) {
        std::vector<float> px(64 * 64 * 3);
        for (float& x : px) x = float(rng() % 256) / 255.0f;
        probe = Image(64, 64, 3, std::move(px));
      } else {
        const SyntheticFace f = make_synthetic_face(int(rng() % 6), 64, 64);
        const auto wf = kAllWarpFunctions[rng() % kAllWarpFunctions.size()];
        probe = decode_png(encode_png(warp_face(f.image, f.landmarks, WarpSpec(wf, scale(rng))).image));
      }
      const OracleResponse want = local.query(probe);
      const OracleResponse got = remote.query(probe);
      v.require(got.identity == want.identity, "probe " + std::to_string(i) + " label mismatch");
      v.require(std::abs(got.confidence - want.confidence) <= 1e-6,
                "probe " + std::to_string(i) + " confidence " + fmt(got.confidence) + " vs " + fmt(want.confidence));
    }
  }

  auto limited = serve_oracle(gallery, "127.0.0.1:0", 3);
  RemoteOracle client(limited->url(), "budgeted");
  const Image probe = make_synthetic_face(0, 64, 64).image;
  for (int i = 0; i < 3; ++i) client.query(probe);
  try {
    client.query(probe);
    v.require(false, "4th call was served");
  } catch (const TransportError& e) {
    const std::string msg = e.what();
    v.require(msg.find("429") != std::string::npos && msg.find("budget_exhausted") != std::string::npos,
              "4th call failed without 429: " + msg);
  }
  return v;
}

}  // namespace

int main() {
  log::set_quiet(true);
  run("AC1", "zero-scale identity", 5.0, zero_scale_identity);
  run("AC2", "affine estimation", 10.0, affine_estimation);
  run("AC3", "region locality", 0.0, region_locality);
  run("AC4", "budget safety and early stop", 0.0, budget_safety);
  run("AC5", "hybrid trace fidelity", 0.0, hybrid_trace);
  run("AC6", "complexity calculator", 0.0, complexity);
  run("AC7", "synthetic campaign", 60.0, campaign);
  run("AC8", "loopback protocol equivalence", 30.0, loopback);
  std::printf("%s: %d failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
