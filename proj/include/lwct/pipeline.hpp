#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "lwct/fdk.hpp"
#include "lwct/keyvalue.hpp"
#include "lwct/metrics.hpp"
#include "lwct/phantom.hpp"

namespace lwct {

enum class TransportMode { None, Loopback };

// Pipeline configuration, plain key=value text.
//
// Required: phantom (file path or builtin:NAME), views, detector_rows,
// detector_cols, detector_pitch, source_to_axis, sparse_factor, rank,
// recon_dims (nx,ny,nz), voxel_pitch.
// Optional: seed (0), noise_sigma (0), output_dir (next to the config, "out"),
// transport (none|loopback), workers (0), filter_window (none|hann),
// fdk_weight (standard|linear).
struct PipelineConfig {
  Phantom phantom;
  std::string phantom_source;
  std::size_t views = 0;
  std::size_t detector_rows = 0;
  std::size_t detector_cols = 0;
  double detector_pitch = 0.0;
  double source_to_axis = 0.0;
  std::size_t sparse_factor = 1;
  std::size_t rank = 1;
  VolumeGrid grid;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::filesystem::path output_dir;
  TransportMode transport = TransportMode::None;
  FdkOptions fdk;

  // Relative paths resolve against base_dir. Throws ConfigError naming the key.
  static PipelineConfig from(const KeyValues& kv, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
};

struct PipelineResult {
  CompressionReport compression;
  std::uint64_t svz_file_bytes = 0;
  double projection_mse = 0.0;        // decoded vs sparse projections
  QualityReport quality;              // reconstruction vs full-view reference
  QualityReport reference_vs_truth;
  QualityReport recon_vs_truth;
  std::string report;                 // report.txt contents
};

// simulate -> sparse -> svd_encode -> [loopback transport] -> svd_decode ->
// reconstruct -> metrics. Writes truth.vol, full.proj, sparse.proj, scan.svz,
// restored.proj, recon.vol, reference.vol and report.txt into output_dir.
// Failures are rethrown with the stage name prefixed to the message.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace lwct
