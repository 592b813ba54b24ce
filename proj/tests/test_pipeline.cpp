#include <doctest.h>

#include "lwct/error.hpp"
#include "lwct/metrics.hpp"
#include "lwct/pipeline.hpp"
#include "lwct/raw_io.hpp"
#include "support.hpp"

using namespace lwct;

namespace {

const char* kBase =
    "phantom=builtin:sphere_box\n"
    "views=96\n"
    "detector_rows=48\n"
    "detector_cols=40\n"
    "detector_pitch=2\n"
    "source_to_axis=600\n"
    "sparse_factor=4\n"
    "rank=8\n"
    "recon_dims=32,32,24\n"
    "voxel_pitch=2.5\n"
    "seed=5\n"
    "noise_sigma=0.01\n";

PipelineConfig config(const std::filesystem::path& out, const std::string& extra = "") {
  auto kv = KeyValues::parse(std::string(kBase) + extra);
  auto c = PipelineConfig::from(kv, out.parent_path());
  c.output_dir = out;
  return c;
}

const std::vector<std::string> kOutputs = {"truth.vol",    "full.proj",   "sparse.proj",
                                           "scan.svz",     "restored.proj", "recon.vol",
                                           "reference.vol", "report.txt"};

}  // namespace

TEST_CASE("missing config keys are named") {
  const std::string base = kBase;
  for (const char* key : {"phantom", "views", "detector_rows", "detector_cols", "detector_pitch",
                          "source_to_axis", "sparse_factor", "rank", "recon_dims", "voxel_pitch"}) {
    std::string text;
    std::istringstream in(base);
    std::string line;
    while (std::getline(in, line))
      if (line.rfind(std::string(key) + "=", 0) != 0) text += line + "\n";
    try {
      PipelineConfig::from(KeyValues::parse(text), ".");
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  }
  CHECK_THROWS_AS(config("/tmp/x", "transport=carrier-pigeon\n"), ConfigError);
  CHECK_THROWS_AS(config("/tmp/x", "filter_window=cosine\n"), ConfigError);
}

TEST_CASE("stage errors carry the stage name") {
  test::TempDir dir("pipe-err");
  auto c = config(dir / "out", "");
  c.rank = 41;
  try {
    run_pipeline(c);
    FAIL("expected failure");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("compress: ", 0) == 0);
  }
  c = config(dir / "out2", "");
  c.sparse_factor = 7;
  try {
    run_pipeline(c);
    FAIL("expected failure");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("sparse: ", 0) == 0);
  }
}

TEST_CASE("pipeline outputs are reproducible across runs and worker counts") {
  test::TempDir dir("pipe-det");
  auto a = config(dir / "a", "workers=1\n");
  auto b = config(dir / "b", "workers=3\ntransport=loopback\n");
  const auto ra = run_pipeline(a);
  const auto rb = run_pipeline(b);
  for (const auto& name : kOutputs) {
    if (name == "report.txt") continue;
    CAPTURE(name);
    CHECK(read_binary_file(dir / "a" / name) == read_binary_file(dir / "b" / name));
  }
  run_pipeline(config(dir / "c", "workers=1\n"));
  for (const auto& name : kOutputs) {
    CAPTURE(name);
    CHECK(read_binary_file(dir / "a" / name) == read_binary_file(dir / "c" / name));
  }
  CHECK_FALSE(std::filesystem::exists(dir / "b" / "store"));
  CHECK(ra.quality.mse == rb.quality.mse);
}

TEST_CASE("report carries the exact compression figures") {
  test::TempDir dir("pipe-cr");
  const auto r = run_pipeline(config(dir / "out"));
  const auto report = KeyValues::parse(read_text_file(dir / "out" / "report.txt"));
  CHECK(report.get_double("cr_total") == cr_total(48, 40, 8, 24, 96));
  CHECK(report.get_double("cr_svd") == cr_svd(48, 40, 8));
  CHECK(report.get_size("sparse_views") == 24);
  CHECK(r.compression.cr_total == cr_svd_exact(48, 40, 8) * Ratio{4, 1});
  CHECK(report.get_size("svz_file_bytes") == std::filesystem::file_size(dir / "out" / "scan.svz"));
  CHECK(r.quality.mse > 0.0);
}

TEST_CASE("lossless path reproduces the direct reconstruction") {
  test::TempDir dir("pipe-id");
  auto c = config(dir / "out", "");
  c.sparse_factor = 1;
  c.rank = 40;
  c.noise_sigma = 0.0;
  const auto r = run_pipeline(c);
  const auto recon = read_volume(dir / "out" / "recon.vol");
  const auto ref = read_volume(dir / "out" / "reference.vol");
  CHECK(test::relative_rmse(recon.data().flat(), ref.data().flat()) <= 1e-4);
  CHECK(r.quality.mse <= 1e-8);
}

TEST_CASE("scaled reference configuration reports the exact total ratio") {
  test::TempDir dir("pipe-reference");
  const auto kv = KeyValues::parse(
      "phantom=builtin:sphere_box\nviews=720\ndetector_rows=256\ndetector_cols=215\n"
      "detector_pitch=1\nsource_to_axis=600\nsparse_factor=12\nrank=30\n"
      "recon_dims=24,24,24\nvoxel_pitch=4\n");
  auto c = PipelineConfig::from(kv, dir.path());
  c.output_dir = dir / "out";
  const auto r = run_pipeline(c);
  // 256*215 / (30*(256+215+1)) * 720/60, as an exact rational.
  CHECK(r.compression.cr_total == Ratio::of(256ull * 215 * 12, 30ull * 472));
  const auto report = KeyValues::parse(r.report);
  CHECK(report.get_double("cr_total") == doctest::Approx(256.0 * 215.0 * 12.0 / (30.0 * 472.0)).epsilon(1e-14));
  CHECK(report.get_size("sparse_views") == 60);
}
