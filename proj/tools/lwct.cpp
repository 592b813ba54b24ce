#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lwct/client.hpp"
#include "lwct/error.hpp"
#include "lwct/fdk.hpp"
#include "lwct/keyvalue.hpp"
#include "lwct/metrics.hpp"
#include "lwct/phantom.hpp"
#include "lwct/pipeline.hpp"
#include "lwct/raw_io.hpp"
#include "lwct/server.hpp"
#include "lwct/simulate.hpp"
#include "lwct/sparse.hpp"
#include "lwct/svd_codec.hpp"
#include "lwct/svz.hpp"

namespace fs = std::filesystem;
using namespace lwct;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kTransport = 3 };

Phantom load_phantom(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) return builtin_phantom(spec.substr(8));
  return parse_phantom(read_text_file(spec));
}

VolumeGrid parse_grid(const std::string& dims, double pitch) {
  KeyValues kv;
  kv.set("dims", dims);
  const auto d = kv.get_sizes("dims");
  if (d.size() != 3) throw ConfigError("dims", "--dims needs nx,ny,nz");
  VolumeGrid g{d[0], d[1], d[2], pitch};
  g.validate();
  return g;
}

// "a:b" (inclusive), "a:b:step" or a comma list.
std::vector<std::size_t> parse_ks(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    KeyValues kv;
    kv.set("ks", text);
    return kv.get_sizes("ks");
  }
  const auto second = text.find(':', colon + 1);
  const std::size_t lo = parse_size(text.substr(0, colon), "ks");
  const std::size_t hi = parse_size(text.substr(colon + 1, second == std::string::npos ? std::string::npos : second - colon - 1), "ks");
  const std::size_t step = second == std::string::npos ? 1 : parse_size(text.substr(second + 1), "ks");
  if (step == 0 || lo > hi) throw ConfigError("ks", "--ks range is empty");
  std::vector<std::size_t> ks;
  for (std::size_t k = lo; k <= hi; k += step) ks.push_back(k);
  return ks;
}

ProjectionStack load_stack(const fs::path& path) {
  if (path.extension() == ".svz") return svd_decode(svz::read_file(path));
  return read_projections(path);
}

std::string quality_text(const QualityReport& q) {
  KeyValues kv;
  kv.set("mse", q.mse);
  kv.set("psnr", q.psnr);
  kv.set("ssim", q.ssim);
  std::string out = kv.str();
  out += "# slice,mse,psnr,ssim\n";
  for (std::size_t z = 0; z < q.slices.size(); ++z)
    out += "# " + std::to_string(z) + "," + format_double(q.slices[z].mse) + "," +
           format_double(q.slices[z].psnr) + "," + format_double(q.slices[z].ssim) + "\n";
  return out;
}

std::string compression_text(const CompressionReport& r) {
  KeyValues kv;
  kv.set("cr_svd", r.cr_svd.value());
  kv.set("cr_sparse", r.cr_sparse.value());
  kv.set("cr_total", r.cr_total.value());
  kv.set("cr_total_rounded", r.cr_total_rounded);
  kv.set("bytes_raw", static_cast<std::size_t>(r.bytes_raw));
  kv.set("bytes_sparse", static_cast<std::size_t>(r.bytes_sparse));
  kv.set("bytes_compressed", static_cast<std::size_t>(r.bytes_compressed));
  kv.set("gb_raw", binary_gb(r.bytes_raw));
  kv.set("gb_sparse", binary_gb(r.bytes_sparse));
  kv.set("gb_compressed", binary_gb(r.bytes_compressed));
  return kv.str();
}

int serve_until_signal(transport::Server& server) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  server.start();
  std::cerr << "listening on " << server.endpoint().str() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lightweight cone-beam CT pipeline"};
  app.require_subcommand(1);
  std::function<int()> action;

  // phantom
  std::string ph_spec = "builtin:sphere", ph_dims, ph_out;
  double ph_pitch = 1.0;
  auto* ph = app.add_subcommand("phantom", "Voxelize a phantom");
  ph->add_option("--phantom", ph_spec, "builtin:NAME or phantom file")->capture_default_str();
  ph->add_option("--dims", ph_dims, "nx,ny,nz")->required();
  ph->add_option("--pitch", ph_pitch, "voxel pitch, mm")->capture_default_str();
  ph->add_option("-o,--out", ph_out)->required();
  ph->callback([&] {
    action = [&] {
      write_volume(ph_out, voxelize(load_phantom(ph_spec), parse_grid(ph_dims, ph_pitch)));
      return kOk;
    };
  });

  // project
  std::string pr_spec = "builtin:sphere", pr_out;
  std::size_t pr_views = 720, pr_rows = 256, pr_cols = 215;
  double pr_pitch = 1.0, pr_r = 600.0, pr_sigma = 0.0;
  std::uint64_t pr_seed = 0;
  auto* pr = app.add_subcommand("project", "Simulate cone-beam projections");
  pr->add_option("--phantom", pr_spec)->capture_default_str();
  pr->add_option("--views", pr_views)->capture_default_str();
  pr->add_option("--rows", pr_rows)->capture_default_str();
  pr->add_option("--cols", pr_cols)->capture_default_str();
  pr->add_option("--pitch", pr_pitch, "detector pitch at the axis, mm")->capture_default_str();
  pr->add_option("--source-to-axis", pr_r, "mm")->capture_default_str();
  pr->add_option("--noise-sigma", pr_sigma)->capture_default_str();
  pr->add_option("--seed", pr_seed)->capture_default_str();
  pr->add_option("-o,--out", pr_out)->required();
  pr->callback([&] {
    action = [&] {
      const auto g = make_circular_geometry(pr_views, pr_rows, pr_cols, pr_pitch, pr_r);
      ProjectionStack p = forward_project(load_phantom(pr_spec), g);
      if (pr_sigma > 0.0) p = add_noise(p, pr_sigma, pr_seed);
      write_projections(pr_out, p);
      return kOk;
    };
  });

  // sparse
  std::string sp_in, sp_out;
  std::size_t sp_factor = 12;
  auto* sp = app.add_subcommand("sparse", "Keep every F-th view");
  sp->add_option("input", sp_in)->required();
  sp->add_option("--sparse-factor", sp_factor)->capture_default_str();
  sp->add_option("-o,--out", sp_out)->required();
  sp->callback([&] {
    action = [&] {
      write_projections(sp_out, sparse_sample(read_projections(sp_in), sp_factor));
      return kOk;
    };
  });

  // compress
  std::string co_in, co_out;
  std::size_t co_rank = 0;
  double co_budget = -1.0;
  auto* co = app.add_subcommand("compress", "Truncated-SVD encode to SVZ");
  co->add_option("input", co_in)->required();
  auto* rank_opt = co->add_option("--rank", co_rank, "retained singular values");
  auto* budget_opt = co->add_option("--mse-budget", co_budget, "choose the smallest rank within this MSE");
  rank_opt->excludes(budget_opt);
  co->add_option("-o,--out", co_out)->required();
  co->callback([&] {
    if (co_rank == 0 && co_budget < 0.0) throw CLI::ValidationError("compress", "--rank or --mse-budget required");
    action = [&] {
      const ProjectionStack p = read_projections(co_in);
      const std::size_t k = co_rank > 0 ? co_rank : choose_rank(p, co_budget);
      svz::write_file(co_out, svd_encode(p, k));
      std::cout << "rank=" << k << "\n";
      return kOk;
    };
  });

  // decompress
  std::string de_in, de_out;
  auto* de = app.add_subcommand("decompress", "Decode SVZ to projections");
  de->add_option("input", de_in)->required();
  de->add_option("-o,--out", de_out)->required();
  de->callback([&] {
    action = [&] {
      write_projections(de_out, svd_decode(svz::read_file(de_in)));
      return kOk;
    };
  });

  // reconstruct
  std::string re_in, re_out, re_dims, re_window = "none", re_weight = "standard";
  double re_pitch = 1.0;
  int re_workers = 0;
  auto* re = app.add_subcommand("reconstruct", "FDK reconstruction");
  re->add_option("input", re_in, ".proj or .svz")->required();
  re->add_option("--dims", re_dims, "nx,ny,nz")->required();
  re->add_option("--pitch", re_pitch, "voxel pitch, mm")->capture_default_str();
  re->add_option("--filter-window", re_window, "none|hann")->capture_default_str();
  re->add_option("--fdk-weight", re_weight, "standard|linear")->capture_default_str();
  re->add_option("--workers", re_workers)->capture_default_str();
  re->add_option("-o,--out", re_out)->required();
  re->callback([&] {
    action = [&] {
      FdkOptions opt{parse_filter_window(re_window), parse_fdk_weight(re_weight), re_workers};
      write_volume(re_out, reconstruct(load_stack(re_in), parse_grid(re_dims, re_pitch), opt));
      return kOk;
    };
  });

  // metrics
  auto* me = app.add_subcommand("metrics", "Quality and compression figures");
  me->require_subcommand(1);
  std::string mc_test, mc_ref, mc_report;
  auto* mc = me->add_subcommand("compare", "MSE, PSNR and SSIM of a volume against a reference");
  mc->add_option("test", mc_test)->required();
  mc->add_option("reference", mc_ref)->required();
  mc->add_option("--report", mc_report, "write the report here instead of stdout");
  mc->callback([&] {
    action = [&] {
      const std::string text = quality_text(compare(read_volume(mc_test), read_volume(mc_ref)));
      if (mc_report.empty()) std::cout << text;
      else write_text_file(mc_report, text);
      return kOk;
    };
  });
  std::size_t mr_rows = 2048, mr_cols = 1716, mr_rank = 30, mr_views = 60, mr_full = kFullViews;
  auto* mr = me->add_subcommand("compression", "Compression ratios and storage");
  mr->add_option("--rows", mr_rows)->capture_default_str();
  mr->add_option("--cols", mr_cols)->capture_default_str();
  mr->add_option("--rank", mr_rank)->capture_default_str();
  mr->add_option("--views", mr_views, "views kept")->capture_default_str();
  mr->add_option("--full-views", mr_full)->capture_default_str();
  mr->callback([&] {
    action = [&] {
      std::cout << compression_text(compression_report(mr_rows, mr_cols, mr_rank, mr_views, mr_full));
      return kOk;
    };
  });

  // curve
  std::string cu_in, cu_ks = "1:50", cu_out;
  auto* cu = app.add_subcommand("curve", "Projection MSE versus retained rank");
  cu->add_option("input", cu_in)->required();
  cu->add_option("--ks", cu_ks, "a:b, a:b:step or a list")->capture_default_str();
  cu->add_option("--out", cu_out, "CSV output; stdout if omitted");
  cu->callback([&] {
    action = [&] {
      const auto curve = mse_curve(read_projections(cu_in), parse_ks(cu_ks));
      const std::string csv = format_curve_csv(curve);
      if (cu_out.empty()) std::cout << csv;
      else write_text_file(cu_out, csv);
      std::cerr << "plateau_rank=" << plateau_rank(curve) << "\n";
      return kOk;
    };
  });

  // serve
  std::string se_listen = "127.0.0.1:7400", se_store;
  std::size_t se_slots = 1;
  auto* se = app.add_subcommand("serve", "Run the scan store and reconstruction server");
  se->add_option("--listen", se_listen, "HOST:PORT")->capture_default_str();
  se->add_option("--store", se_store, "scan store directory")->required();
  se->add_option("--slots", se_slots, "concurrent reconstructions")->capture_default_str();
  se->callback([&] {
    action = [&] {
      transport::ServerConfig cfg;
      cfg.listen = net::Endpoint::parse(se_listen);
      cfg.store_dir = se_store;
      cfg.recon_slots = se_slots;
      transport::Server server(cfg);
      return serve_until_signal(server);
    };
  });

  // upload
  std::string up_server, up_in;
  int up_attempts = 5;
  auto* up = app.add_subcommand("upload", "Send an SVZ scan to a server");
  up->add_option("--server", up_server, "HOST:PORT")->required();
  up->add_option("--attempts", up_attempts)->capture_default_str();
  up->add_option("input", up_in)->required();
  up->callback([&] {
    action = [&] {
      transport::UploadOptions opt;
      opt.max_attempts = up_attempts;
      const auto r = transport::upload(net::Endpoint::parse(up_server), read_binary_file(up_in), opt);
      std::cout << r.scan_id << "\n";
      return kOk;
    };
  });

  // fetch
  std::string fe_server, fe_scan, fe_dims, fe_out, fe_window = "none", fe_weight = "standard";
  double fe_pitch = 1.0;
  auto* fe = app.add_subcommand("fetch", "Reconstruct a stored scan on the server");
  fe->add_option("--server", fe_server, "HOST:PORT")->required();
  fe->add_option("--scan", fe_scan, "scan id")->required();
  fe->add_option("--dims", fe_dims, "nx,ny,nz")->required();
  fe->add_option("--pitch", fe_pitch)->capture_default_str();
  fe->add_option("--filter-window", fe_window)->capture_default_str();
  fe->add_option("--fdk-weight", fe_weight)->capture_default_str();
  fe->add_option("output", fe_out)->required();
  fe->callback([&] {
    action = [&] {
      transport::FetchOptions opt;
      opt.grid = parse_grid(fe_dims, fe_pitch);
      opt.window = parse_filter_window(fe_window);
      opt.weight = parse_fdk_weight(fe_weight);
      write_volume(fe_out, transport::fetch(net::Endpoint::parse(fe_server), fe_scan, opt));
      return kOk;
    };
  });

  // pipeline
  std::string pi_config, pi_outdir;
  auto* pi = app.add_subcommand("pipeline", "Run the end-to-end pipeline from a config file");
  pi->add_option("config", pi_config)->required();
  pi->add_option("--output-dir", pi_outdir, "overrides output_dir");
  pi->callback([&] {
    action = [&] {
      PipelineConfig cfg = PipelineConfig::load(pi_config);
      if (!pi_outdir.empty()) cfg.output_dir = pi_outdir;
      std::cout << run_pipeline(cfg).report;
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const TransportError& e) {
    std::cerr << "transport error" << (e.transient() ? " (transient)" : "") << ": " << e.what() << "\n";
    return kTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
