#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dronepki/ledger.hpp"
#include "dronepki/serialization.hpp"
#include "dronepki/simnet.hpp"

namespace dpki {

// Metric definitions (simulated time, 1 tick = SimConfig::tick_seconds):
//   latency_s      mean (completion tick - submission tick) over completed ops
//   throughput_ops completed ops / (last completion - first submission)
//   block_bytes    mean canonical block size of the run's ledger
// Every figure is the mean over `seeds` runs with seeds 1..seeds.

struct BenchPoint {
  std::uint64_t axis = 0;  // node count or transaction count
  OpClass op_class = OpClass::Registration;
  double latency_s = 0;
  double throughput_ops = 0;
  double block_bytes = 0;
  std::size_t seeds = 0;
};

struct SweepOptions {
  std::size_t repetitions = 5;
  SimConfig base;
  /// Run independent simulations of a sweep on OpenMP threads.
  bool parallel = true;
};

/// One point per (node count, class). Throws Error(InvalidConfig) on an
/// empty list or a zero count.
std::vector<BenchPoint> sweep_nodes(const std::vector<std::size_t>& node_counts,
                                    std::size_t tx_count, const SweepOptions& options);

/// One point per (transaction count, class).
std::vector<BenchPoint> sweep_transactions(const std::vector<std::size_t>& tx_counts,
                                           std::size_t node_count, const SweepOptions& options);

/// Mean serialized block length. Throws Error(EmptyLedger).
double measure_block_size(const Ledger& ledger);

inline constexpr const char* kBenchCsvHeader = "axis,op_class,latency_s,throughput_ops,block_bytes,seeds";

void write_csv(std::ostream& out, const std::vector<BenchPoint>& points);

/// Sidecar metadata: configuration, revision, primitives, metric definitions.
Json bench_metadata(const std::string& sweep, const std::vector<std::size_t>& axis,
                    const SweepOptions& options, const std::vector<BenchPoint>& points);

std::string git_revision();

}  // namespace dpki
