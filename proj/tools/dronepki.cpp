#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "dronepki/bench.hpp"
#include "dronepki/ledger.hpp"
#include "dronepki/plugin.hpp"
#include "dronepki/replay.hpp"
#include "dronepki/simnet.hpp"

namespace {

using namespace dpki;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

struct SimulateArgs {
  SimConfig cfg;
  std::string mode = "sign-only";
  std::string adversary = "none";
  std::string out;
  std::string ledger_out;
  bool spoofer_has_acl = false;
  bool spoofer_has_victim_key = false;
};

int simulate(SimulateArgs& a) {
  a.cfg.mode = challenge_mode_from_string(a.mode);
  a.cfg.adversary = AdversaryScenario::parse(a.adversary);
  a.cfg.adversary.spoofer_has_acl = a.spoofer_has_acl;
  a.cfg.adversary.spoofer_has_victim_key = a.spoofer_has_victim_key;
  a.cfg.validate();

  std::unique_ptr<std::ofstream> trace_file;
  if (!a.out.empty()) trace_file = std::make_unique<std::ofstream>(open_out(a.out));
  const SimTrace t = run(a.cfg, trace_file.get());
  if (!a.ledger_out.empty()) {
    auto out = open_out(a.ledger_out);
    export_jsonl(t.ledger, out);
  }

  const auto& m = t.metrics;
  std::cout << "scenario " << a.cfg.adversary.describe() << ", mode " << to_string(a.cfg.mode)
            << ", seed " << a.cfg.seed << "\n";
  std::cout << "blocks " << t.ledger.size() << ", rounds " << m.rounds << ", failed rounds "
            << m.failed_rounds << ", terminal rejections " << m.terminal_rejections << "\n";
  for (OpClass op : kOpClasses) {
    const auto& c = m.of(op);
    std::cout << to_string(op) << ": " << c.completed << "/" << c.submitted << " completed, latency "
              << c.mean_latency_ticks() * a.cfg.tick_seconds << " s, throughput "
              << c.throughput_per_tick() / a.cfg.tick_seconds << " ops/s\n";
  }
  if (m.spoof_attempts) {
    std::cout << "spoof attempts " << m.spoof_attempts << ", spoof commits " << m.spoof_commits
              << "\n";
  }
  if (m.invalid_commits) std::cout << "invalid commits " << m.invalid_commits << "\n";
  if (m.majority_compromise) std::cout << "majority compromise: safety not guaranteed\n";
  if (m.rejected_admissions) std::cout << "rejected admissions " << m.rejected_admissions << "\n";
  if (m.evictions) std::cout << "evictions " << m.evictions << "\n";
  for (const auto& [reason, n] : m.reject_reasons) std::cout << "reject " << reason << " " << n << "\n";
  std::cout << "end tick " << m.end_tick << "\n";
  if (t.budget_exhausted) {
    std::cerr << "tick budget exhausted\n";
    return 2;
  }
  return 0;
}

int ledger_verify(const std::string& path, bool parallel) {
  auto in = open_in(path);
  const Ledger ledger = import_jsonl(in);
  const ChainReport r = parallel ? verify_chain_parallel(ledger) : verify_chain(ledger);
  if (r.ok) {
    std::cout << "ok: " << ledger.size() << " blocks\n";
    return 0;
  }
  std::cout << "invalid at block " << (r.failed_at ? std::to_string(*r.failed_at) : "?") << ": "
            << (r.reason ? std::string(to_string(*r.reason)) : "") << " " << r.detail << "\n";
  return 1;
}

int verify_drone(const std::string& drone, const std::string& path, std::optional<Tick> at) {
  auto in = open_in(path);
  const Ledger ledger = import_jsonl(in);
  const ChainReport chain = verify_chain(ledger);
  if (!chain.ok) {
    std::cout << drone << ": invalid (ledger fails verification: " << chain.detail << ")\n";
    return 1;
  }
  const Tick now = at ? *at : (ledger.empty() ? 0 : ledger.blocks().back().header.timestamp);
  VerificationArray array;
  array.sync(ledger, now);
  const bool valid = array.is_valid(drone, now);
  std::cout << drone << ": " << (valid ? "valid" : "invalid") << " ("
            << to_string(ledger.certificate_status(drone, now)) << " at tick " << now << ")\n";
  return valid ? 0 : 1;
}

int replay(const std::string& path) {
  auto in = open_in(path);
  const ReplayReport r = replay_trace(in);
  std::cout << "events " << r.events << ", commits " << r.commits << ", evictions " << r.evictions
            << ", invalid commits " << r.invalid_commits << ", discrepancies " << r.discrepancies
            << "\n";
  for (const auto& p : r.problems) std::cout << "  " << p << "\n";
  return r.ok() ? 0 : 1;
}

struct BenchArgs {
  std::vector<std::size_t> counts;
  std::size_t fixed = 0;
  std::size_t reps = 5;
  std::string mode = "sign-only";
  std::size_t operators = 2;
  std::string out;
};

int bench(const std::string& sweep, BenchArgs& a) {
  SweepOptions options;
  options.repetitions = a.reps;
  options.base.mode = challenge_mode_from_string(a.mode);
  options.base.n_operators = a.operators;
  const auto points = sweep == "nodes" ? sweep_nodes(a.counts, a.fixed, options)
                                       : sweep_transactions(a.counts, a.fixed, options);
  {
    auto out = open_out(a.out);
    write_csv(out, points);
  }
  Json meta = bench_metadata(sweep, a.counts, options, points);
  meta[sweep == "nodes" ? "transactions" : "nodes"] = a.fixed;
  auto side = open_out(a.out + ".meta.json");
  side << meta.dump(2) << "\n";
  write_csv(std::cout, points);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized drone certificate issuance: simulator, ledger tools and benchmarks"};
  app.require_subcommand(1);
  int code = 0;

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run one seeded scenario");
  simulate_cmd->add_option("--seed", sim.cfg.seed);
  simulate_cmd->add_option("--validators", sim.cfg.n_validators);
  simulate_cmd->add_option("--operators", sim.cfg.n_operators);
  simulate_cmd->add_option("--transactions", sim.cfg.n_transactions);
  simulate_cmd->add_option("--mode", sim.mode)->check(CLI::IsMember({"sign-only", "handshake"}));
  simulate_cmd->add_option("--adversary", sim.adversary,
                           "none | spoof[:K] | malicious:K | target:V,O | sybil:K");
  simulate_cmd->add_option("--out", sim.out, "JSON-lines event trace");
  simulate_cmd->add_option("--ledger-out", sim.ledger_out, "Exported ledger (JSON lines)");
  simulate_cmd->add_option("--age-threshold", sim.cfg.age_threshold);
  simulate_cmd->add_option("--poll-retries", sim.cfg.poll_retries);
  simulate_cmd->add_option("--poll-delay", sim.cfg.poll_delay);
  simulate_cmd->add_option("--vote-timeout", sim.cfg.vote_timeout);
  simulate_cmd->add_option("--tick-budget", sim.cfg.tick_budget);
  simulate_cmd->add_option("--cert-lifetime", sim.cfg.cert_lifetime);
  simulate_cmd->add_flag("--strict", sim.cfg.strict_voting, "Voters re-fetch the registry token");
  simulate_cmd->add_flag("--parallel", sim.cfg.parallel, "Verify votes on OpenMP threads");
  simulate_cmd->add_flag("--spoofer-has-acl", sim.spoofer_has_acl,
                         "Negative control: the spoofer holds the victim's ACL entry");
  simulate_cmd->add_flag("--spoofer-has-victim-key", sim.spoofer_has_victim_key,
                         "Negative control: the spoofer holds the victim's signing key");

  auto* ledger_cmd = app.add_subcommand("ledger", "Ledger file tools");
  ledger_cmd->require_subcommand(1);
  std::string ledger_path;
  bool ledger_parallel = false;
  auto* ledger_verify_cmd = ledger_cmd->add_subcommand("verify", "Re-verify an exported ledger");
  ledger_verify_cmd->add_option("file", ledger_path)->required();
  ledger_verify_cmd->add_flag("--parallel", ledger_parallel);

  std::string drone;
  std::string verify_ledger = "ledger.jsonl";
  std::optional<Tick> verify_at;
  auto* verify_cmd = app.add_subcommand("verify", "Client check of one drone; exit 0 if valid");
  verify_cmd->add_option("drone_name", drone)->required();
  verify_cmd->add_option("--ledger", verify_ledger);
  verify_cmd->add_option("--at", verify_at, "Tick to evaluate at (default: tip timestamp)");

  std::string trace_path;
  auto* consensus_cmd = app.add_subcommand("consensus", "Consensus tools");
  consensus_cmd->require_subcommand(1);
  auto* replay_cmd = consensus_cmd->add_subcommand("replay", "Rebuild and check a trace");
  replay_cmd->add_option("trace", trace_path)->required();

  auto* bench_cmd = app.add_subcommand("bench", "Scalability sweeps");
  bench_cmd->require_subcommand(1);
  BenchArgs nodes{{2, 4, 6, 8, 10, 12}, 2000, 5, "sign-only", 2, "nodes.csv"};
  auto* nodes_cmd = bench_cmd->add_subcommand("nodes", "Sweep validator count");
  nodes_cmd->add_option("--counts", nodes.counts)->delimiter(',');
  nodes_cmd->add_option("--tx", nodes.fixed);
  nodes_cmd->add_option("--reps", nodes.reps);
  nodes_cmd->add_option("--mode", nodes.mode)->check(CLI::IsMember({"sign-only", "handshake"}));
  nodes_cmd->add_option("--operators", nodes.operators);
  nodes_cmd->add_option("--out", nodes.out);
  BenchArgs txs{{100, 500, 1000, 1500, 2000}, 12, 5, "sign-only", 2, "txs.csv"};
  auto* txs_cmd = bench_cmd->add_subcommand("txs", "Sweep transaction count");
  txs_cmd->add_option("--counts", txs.counts)->delimiter(',');
  txs_cmd->add_option("--nodes", txs.fixed);
  txs_cmd->add_option("--reps", txs.reps);
  txs_cmd->add_option("--mode", txs.mode)->check(CLI::IsMember({"sign-only", "handshake"}));
  txs_cmd->add_option("--operators", txs.operators);
  txs_cmd->add_option("--out", txs.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate_cmd) code = simulate(sim);
    else if (*ledger_verify_cmd) code = ledger_verify(ledger_path, ledger_parallel);
    else if (*verify_cmd) code = verify_drone(drone, verify_ledger, verify_at);
    else if (*replay_cmd) code = replay(trace_path);
    else if (*nodes_cmd) code = bench("nodes", nodes);
    else if (*txs_cmd) code = bench("txs", txs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
