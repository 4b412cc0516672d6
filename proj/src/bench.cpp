#include "dronepki/bench.hpp"

#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef DRONEPKI_GIT_REVISION
#define DRONEPKI_GIT_REVISION "unknown"
#endif

namespace dpki {

double measure_block_size(const Ledger& ledger) {
  if (ledger.empty()) throw Error(Errc::EmptyLedger, "no blocks to measure");
  double total = 0;
  for (const auto& b : ledger.blocks()) total += static_cast<double>(canonical_bytes(b).size());
  return total / static_cast<double>(ledger.size());
}

std::string git_revision() { return DRONEPKI_GIT_REVISION; }

namespace {

struct RunSample {
  std::array<double, 3> latency_s{};
  std::array<double, 3> throughput_ops{};
  double block_bytes = 0;
};

RunSample sample(const SimConfig& cfg) {
  const SimTrace trace = run(cfg);
  RunSample s;
  for (OpClass op : kOpClasses) {
    const auto i = static_cast<std::size_t>(op);
    const auto& m = trace.metrics.of(op);
    s.latency_s[i] = m.mean_latency_ticks() * cfg.tick_seconds;
    s.throughput_ops[i] = m.throughput_per_tick() / cfg.tick_seconds;
  }
  s.block_bytes = trace.metrics.mean_block_bytes;
  return s;
}

template <typename Configure>
std::vector<BenchPoint> sweep(const std::vector<std::size_t>& axis, const SweepOptions& options,
                              Configure&& configure) {
  if (axis.empty()) throw Error(Errc::InvalidConfig, "sweep needs at least one axis value");
  if (options.repetitions == 0) throw Error(Errc::InvalidConfig, "repetitions must be positive");
  for (auto a : axis) {
    if (a == 0) throw Error(Errc::InvalidConfig, "axis values must be positive");
  }

  const std::size_t reps = options.repetitions;
  std::vector<SimConfig> configs;
  for (auto a : axis) {
    for (std::size_t r = 0; r < reps; ++r) {
      SimConfig cfg = options.base;
      configure(cfg, a);
      cfg.seed = r + 1;
      cfg.validate();
      configs.push_back(cfg);
    }
  }

  std::vector<RunSample> samples(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto n = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) if (options.parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      samples[i] = sample(configs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<BenchPoint> points;
  for (std::size_t ai = 0; ai < axis.size(); ++ai) {
    for (OpClass op : kOpClasses) {
      const auto c = static_cast<std::size_t>(op);
      BenchPoint p;
      p.axis = axis[ai];
      p.op_class = op;
      p.seeds = reps;
      for (std::size_t r = 0; r < reps; ++r) {
        const RunSample& s = samples[ai * reps + r];
        p.latency_s += s.latency_s[c];
        p.throughput_ops += s.throughput_ops[c];
        p.block_bytes += s.block_bytes;
      }
      p.latency_s /= static_cast<double>(reps);
      p.throughput_ops /= static_cast<double>(reps);
      p.block_bytes /= static_cast<double>(reps);
      points.push_back(p);
    }
  }
  return points;
}

}  // namespace

std::vector<BenchPoint> sweep_nodes(const std::vector<std::size_t>& node_counts,
                                    std::size_t tx_count, const SweepOptions& options) {
  return sweep(node_counts, options, [tx_count](SimConfig& cfg, std::size_t nodes) {
    cfg.n_validators = nodes;
    cfg.n_transactions = tx_count;
  });
}

std::vector<BenchPoint> sweep_transactions(const std::vector<std::size_t>& tx_counts,
                                           std::size_t node_count, const SweepOptions& options) {
  return sweep(tx_counts, options, [node_count](SimConfig& cfg, std::size_t txs) {
    cfg.n_validators = node_count;
    cfg.n_transactions = txs;
  });
}

void write_csv(std::ostream& out, const std::vector<BenchPoint>& points) {
  out << kBenchCsvHeader << '\n';
  for (const auto& p : points) {
    std::ostringstream row;
    row << std::setprecision(9) << p.axis << ',' << to_string(p.op_class) << ',' << p.latency_s
        << ',' << p.throughput_ops << ',' << p.block_bytes << ',' << p.seeds;
    out << row.str() << '\n';
  }
}

Json bench_metadata(const std::string& sweep_name, const std::vector<std::size_t>& axis,
                    const SweepOptions& options, const std::vector<BenchPoint>& points) {
  const SimConfig& c = options.base;
  Json j;
  j["sweep"] = sweep_name;
  j["axis"] = axis;
  j["repetitions"] = options.repetitions;
  j["seeds"] = "1.." + std::to_string(options.repetitions);
  j["git_revision"] = git_revision();
  j["config"] = {{"mode", to_string(c.mode)},
                 {"n_operators", c.n_operators},
                 {"age_threshold", c.age_threshold},
                 {"poll_retries", c.poll_retries},
                 {"poll_delay", c.poll_delay},
                 {"vote_timeout", c.vote_timeout},
                 {"cert_lifetime", c.cert_lifetime},
                 {"mix", {{"initial", c.mix.initial}, {"revoke", c.mix.revoke}, {"verify", c.mix.verify}}},
                 {"strict_voting", c.strict_voting},
                 {"tick_seconds", c.tick_seconds}};
  j["primitives"] = {{"digest", "SHA-256"},
                     {"signature", "Ed25519"},
                     {"seal", "X25519 sealed box (XSalsa20-Poly1305)"},
                     {"library", "libsodium"}};
  j["metrics"] = {
      {"time", "simulated; 1 tick = tick_seconds"},
      {"latency_s", "mean (completion tick - submission tick) * tick_seconds"},
      {"throughput_ops", "completed / ((last completion - first submission) * tick_seconds)"},
      {"block_bytes", "mean canonical block length"}};
  double bytes = 0;
  for (const auto& p : points) bytes += p.block_bytes;
  j["mean_block_bytes"] = points.empty() ? 0.0 : bytes / static_cast<double>(points.size());
  return j;
}

}  // namespace dpki
