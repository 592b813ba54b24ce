#include "lwct/pipeline.hpp"

#include <sstream>

#include "lwct/client.hpp"
#include "lwct/error.hpp"
#include "lwct/raw_io.hpp"
#include "lwct/server.hpp"
#include "lwct/simulate.hpp"
#include "lwct/sparse.hpp"
#include "lwct/svd_codec.hpp"
#include "lwct/svz.hpp"

namespace lwct {
namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string tag = std::string(name) + ": ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(e.key(), tag + e.what());
  } catch (const TransportError& e) {
    throw TransportError(e.kind(), tag + e.what(), e.code());
  } catch (const DataError& e) {
    throw DataError(tag + e.what());
  } catch (const std::exception& e) {
    throw DataError(tag + e.what());
  }
}

template <class T>
T config_value(const char* key, T (*parse)(std::string_view), const std::string& text) {
  try {
    return parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(key, std::string("config key '") + key + "': " + e.what());
  }
}

void put_quality(std::ostringstream& out, const std::string& prefix, const QualityReport& q) {
  out << prefix << "_mse=" << format_double(q.mse) << '\n'
      << prefix << "_psnr=" << format_double(q.psnr) << '\n'
      << prefix << "_ssim=" << format_double(q.ssim) << '\n';
}

std::string ratio_text(const Ratio& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace

PipelineConfig PipelineConfig::from(const KeyValues& kv, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  c.phantom_source = kv.get("phantom");
  if (c.phantom_source.rfind("builtin:", 0) == 0) {
    const std::string name = c.phantom_source.substr(8);
    try {
      c.phantom = builtin_phantom(name);
    } catch (const std::exception& e) {
      throw ConfigError("phantom", std::string("config key 'phantom': ") + e.what());
    }
  } else {
    std::filesystem::path p = c.phantom_source;
    if (p.is_relative()) p = base_dir / p;
    try {
      c.phantom = parse_phantom(read_text_file(p));
    } catch (const std::exception& e) {
      throw ConfigError("phantom", std::string("config key 'phantom': ") + e.what());
    }
  }
  c.views = kv.get_size("views");
  c.detector_rows = kv.get_size("detector_rows");
  c.detector_cols = kv.get_size("detector_cols");
  c.detector_pitch = kv.get_double("detector_pitch");
  c.source_to_axis = kv.get_double("source_to_axis");
  c.sparse_factor = kv.get_size("sparse_factor");
  c.rank = kv.get_size("rank");
  const auto dims = kv.get_sizes("recon_dims");
  if (dims.size() != 3) throw ConfigError("recon_dims", "config key 'recon_dims' needs nx,ny,nz");
  c.grid = VolumeGrid{dims[0], dims[1], dims[2], kv.get_double("voxel_pitch")};
  try {
    c.grid.validate();
  } catch (const DataError& e) {
    throw ConfigError("recon_dims", std::string("config key 'recon_dims': ") + e.what());
  }

  c.seed = kv.get_size_or("seed", 0);
  c.noise_sigma = kv.get_double_or("noise_sigma", 0.0);
  if (!(c.noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "config key 'noise_sigma' must be >= 0");
  c.output_dir = kv.get_or("output_dir", "out");
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
  const std::string transport = kv.get_or("transport", "none");
  if (transport == "none") c.transport = TransportMode::None;
  else if (transport == "loopback") c.transport = TransportMode::Loopback;
  else throw ConfigError("transport", "config key 'transport' must be none or loopback");
  c.fdk.workers = static_cast<int>(kv.get_size_or("workers", 0));
  c.fdk.window = config_value("filter_window", parse_filter_window, kv.get_or("filter_window", "none"));
  c.fdk.weight = config_value("fdk_weight", parse_fdk_weight, kv.get_or("fdk_weight", "standard"));
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const KeyValues kv = KeyValues::parse(read_text_file(path));
  return from(kv, path.parent_path());
}

PipelineResult run_pipeline(const PipelineConfig& c) {
  namespace fs = std::filesystem;
  const fs::path dir = c.output_dir;
  stage("setup", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
  });

  const ScanGeometry geometry = stage("geometry", [&] {
    return make_circular_geometry(c.views, c.detector_rows, c.detector_cols, c.detector_pitch,
                                  c.source_to_axis);
  });

  const Volume truth = stage("phantom", [&] {
    Volume v = voxelize(c.phantom, c.grid);
    write_volume(dir / "truth.vol", v);
    return v;
  });

  const ProjectionStack full = stage("simulate", [&] {
    ProjectionStack p = forward_project(c.phantom, geometry);
    if (c.noise_sigma > 0.0) p = add_noise(p, c.noise_sigma, c.seed);
    write_projections(dir / "full.proj", p);
    return p;
  });

  const ProjectionStack sparse = stage("sparse", [&] {
    ProjectionStack p = sparse_sample(full, c.sparse_factor);
    write_projections(dir / "sparse.proj", p);
    return p;
  });

  std::vector<std::byte> svz_bytes = stage("compress", [&] {
    const SvdScan scan = svd_encode(sparse, c.rank);
    auto bytes = svz::encode(scan);
    write_file_atomic(dir / "scan.svz", bytes);
    return bytes;
  });

  if (c.transport == TransportMode::Loopback) {
    svz_bytes = stage("transport", [&] {
      transport::ServerConfig sc;
      sc.listen = net::Endpoint{"127.0.0.1", 0};
      sc.store_dir = dir / "store";
      transport::Server server(sc);
      server.start();
      const auto up = transport::upload(server.endpoint(), svz_bytes);
      auto stored = read_binary_file(server.scan_path(up.scan_id));
      server.stop();
      fs::remove(server.scan_path(up.scan_id));
      fs::remove(sc.store_dir);
      if (stored != svz_bytes) throw DataError("stored scan differs from the uploaded bytes");
      return stored;
    });
  }

  const ProjectionStack restored = stage("decompress", [&] {
    ProjectionStack p = svd_decode(svz::decode(svz_bytes));
    write_projections(dir / "restored.proj", p);
    return p;
  });

  const Volume recon = stage("reconstruct", [&] {
    Volume v = reconstruct(restored, c.grid, c.fdk);
    write_volume(dir / "recon.vol", v);
    return v;
  });

  const Volume reference = stage("reference", [&] {
    Volume v = reconstruct(full, c.grid, c.fdk);
    write_volume(dir / "reference.vol", v);
    return v;
  });

  return stage("metrics", [&] {
    PipelineResult r;
    r.compression = compression_report(c.detector_rows, c.detector_cols, c.rank, sparse.views(),
                                       c.views);
    r.svz_file_bytes = svz_bytes.size();
    r.projection_mse = mse(restored, sparse);
    r.quality = compare(recon, reference);
    r.reference_vs_truth = compare(reference, truth);
    r.recon_vs_truth = compare(recon, truth);

    std::ostringstream out;
    out << "# lwct pipeline report\n"
        << "phantom=" << c.phantom_source << '\n'
        << "views=" << c.views << '\n'
        << "sparse_factor=" << c.sparse_factor << '\n'
        << "sparse_views=" << sparse.views() << '\n'
        << "detector_rows=" << c.detector_rows << '\n'
        << "detector_cols=" << c.detector_cols << '\n'
        << "rank=" << c.rank << '\n'
        << "recon_dims=" << c.grid.nx << ',' << c.grid.ny << ',' << c.grid.nz << '\n'
        << "filter_window=" << to_string(c.fdk.window) << '\n'
        << "fdk_weight=" << to_string(c.fdk.weight) << '\n'
        << "transport=" << (c.transport == TransportMode::Loopback ? "loopback" : "none") << '\n'
        << "cr_svd=" << format_double(r.compression.cr_svd.value()) << '\n'
        << "cr_svd_exact=" << ratio_text(r.compression.cr_svd) << '\n'
        << "cr_sparse=" << format_double(r.compression.cr_sparse.value()) << '\n'
        << "cr_total=" << format_double(r.compression.cr_total.value()) << '\n'
        << "cr_total_exact=" << ratio_text(r.compression.cr_total) << '\n'
        << "cr_total_rounded=" << format_double(r.compression.cr_total_rounded) << '\n'
        << "bytes_raw=" << r.compression.bytes_raw << '\n'
        << "bytes_sparse=" << r.compression.bytes_sparse << '\n'
        << "bytes_compressed=" << r.compression.bytes_compressed << '\n'
        << "svz_file_bytes=" << r.svz_file_bytes << '\n'
        << "gb_raw=" << format_double(binary_gb(r.compression.bytes_raw)) << '\n'
        << "gb_sparse=" << format_double(binary_gb(r.compression.bytes_sparse)) << '\n'
        << "gb_compressed=" << format_double(binary_gb(r.compression.bytes_compressed)) << '\n'
        << "projection_mse=" << format_double(r.projection_mse) << '\n';
    put_quality(out, "recon_vs_reference", r.quality);
    put_quality(out, "reference_vs_truth", r.reference_vs_truth);
    put_quality(out, "recon_vs_truth", r.recon_vs_truth);
    r.report = out.str();
    write_text_file(dir / "report.txt", r.report);
    return r;
  });
}

}  // namespace lwct
