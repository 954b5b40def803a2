// irec: experiment runner and data exporter.
//
//   irec gen-topology --n 50 --avg-degree 6 --spread-km 5000 --seed 1 --out topo.georel
//   irec prune --in full.georel --n 500 --out top500.georel
//   irec run --config configs/evaluation.ini --out results/
//   irec metrics --result results/ --kind delay|tlf|pcb --out metrics/
//
// Exit codes: 0 ok, 1 other error, 2 usage, 3 parse, 4 config, 5 I/O,
// 6 missing result, 7 infeasible parameters.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "irec/error.hpp"
#include "irec/metrics.hpp"
#include "irec/sim.hpp"
#include "irec/topology.hpp"

namespace fs = std::filesystem;
using namespace irec;

namespace {

enum class LogLevel { Off, Info, Debug };

LogLevel log_level() {
  const char* v = std::getenv("IREC_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "off") return LogLevel::Off;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

void info(const std::string& msg) {
  if (log_level() != LogLevel::Off) std::cout << msg << '\n';
}

void debug(const std::string& msg) {
  if (log_level() == LogLevel::Debug) std::cerr << "debug: " << msg << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
}

std::string topology_summary(const Topology& t) {
  return std::to_string(t.as_count()) + " ASes, " + std::to_string(t.link_count()) + " links, " +
         std::to_string(t.interface_count()) + " interfaces";
}

void cmd_gen_topology(const SynthParams& p, const std::string& out) {
  const Topology t = synth_topology(p);
  std::ostringstream buf;
  buf << "# synthetic topology n=" << p.n_ases << " avg_degree=" << p.avg_degree << " spread_km=" << p.geo_spread_km
      << " seed=" << p.seed << '\n';
  write_georel(buf, t);
  write_file_atomic(out, buf.str());
  info(topology_summary(t));
}

void cmd_prune(const std::string& in_path, std::size_t n, const std::string& out) {
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + in_path);
  const Topology t = load_georel(in);
  const PruneResult r = prune_to_top_n(t, n);
  std::ostringstream buf;
  buf << "# pruned to top " << n << " by degree from " << in_path << '\n';
  write_georel(buf, r.topology);
  write_file_atomic(out, buf.str());
  info("removed " + std::to_string(t.as_count() - r.topology.as_count()) + " ASes; " +
       topology_summary(r.topology));
}

void cmd_run(const std::string& config, const std::string& out) {
  const SimConfig cfg = load_sim_config(config);
  debug("topology: " + topology_summary(*cfg.topology));
  ensure_dir(out);
  SimResult res;
  write_file_atomic(fs::path(out) / "events.log", [&](std::ostream& sink) { res = run(cfg, &sink); });
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  save_result(res, out);
  info("rounds " + std::to_string(res.rounds) + ", " + std::to_string(res.log.size()) + " events, " +
       std::to_string(res.registry.size()) + " registered paths");
}

std::string render(const auto& writer, const auto& rows) {
  std::ostringstream s;
  writer(s, rows);
  return s.str();
}

void cmd_metrics(const std::string& result_dir, const std::string& kind, const std::string& out) {
  if (!fs::is_directory(result_dir)) throw Error(ErrorCode::MissingResult, "no result directory " + result_dir);
  const SimResult res = load_result(result_dir, false);
  ensure_dir(out);
  const fs::path dir(out);
  std::map<std::string, std::vector<double>> cdf;

  if (kind == "delay") {
    std::vector<DelayRatioRow> rows;
    for (const auto& alg : res.algorithms) {
      if (alg == "PD") continue;
      auto part = delay_ratio_table(res, alg, "1SP");
      for (const auto& r : part) cdf[alg].push_back(r.ratio);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    write_file_atomic(dir / "delay_ratio.csv", render(write_delay_ratio_csv, rows));
    write_file_atomic(dir / "delay_ratio_cdf.csv", render(write_cdf_csv, cdf));
    info(std::to_string(rows.size()) + " delay ratio rows");
  } else if (kind == "tlf") {
    const auto rows = tlf_table(res);
    for (const auto& r : rows) {
      if (r.paths > 0) cdf[r.alg].push_back(static_cast<double>(r.tlf));
    }
    write_file_atomic(dir / "tlf.csv", render(write_tlf_csv, rows));
    write_file_atomic(dir / "tlf_cdf.csv", render(write_cdf_csv, cdf));
    info(std::to_string(rows.size()) + " tlf rows");
  } else if (kind == "pcb") {
    std::ifstream events(fs::path(result_dir) / "events.log");
    if (!events) throw Error(ErrorCode::IoError, "cannot read events.log in " + result_dir);
    const auto rows = pcb_count_distribution(res, events);
    for (const auto& r : rows) cdf[r.alg].push_back(static_cast<double>(r.count));
    write_file_atomic(dir / "pcb_counts.csv", render(write_pcb_counts_csv, rows));
    write_file_atomic(dir / "pcb_counts_cdf.csv", render(write_cdf_csv, cdf));
    info(std::to_string(rows.size()) + " pcb count rows");
  } else {
    throw Error(ErrorCode::ConfigError, "unknown metrics kind '" + kind + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IREC control-plane simulator"};
  app.require_subcommand(1);

  SynthParams synth;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-topology", "Write a seeded synthetic geo-rel topology");
  gen->add_option("--n", synth.n_ases, "Number of ASes")->required();
  gen->add_option("--avg-degree", synth.avg_degree, "Average AS degree")->required();
  gen->add_option("--spread-km", synth.geo_spread_km, "Geographic spread")->required();
  gen->add_option("--seed", synth.seed, "Random seed")->required();
  gen->add_option("--out", gen_out, "Output geo-rel file")->required();

  std::string prune_in, prune_out;
  std::size_t prune_n = 0;
  auto* prune = app.add_subcommand("prune", "Keep the top-n ASes by degree");
  prune->add_option("--in", prune_in, "Input geo-rel file")->required();
  prune->add_option("--n", prune_n, "ASes to keep")->required()->check(CLI::PositiveNumber);
  prune->add_option("--out", prune_out, "Output geo-rel file")->required();

  std::string run_config, run_out;
  auto* runc = app.add_subcommand("run", "Run a simulation");
  runc->add_option("--config", run_config, "Config file")->required();
  runc->add_option("--out", run_out, "Result directory")->required();

  std::string met_result, met_kind, met_out;
  auto* met = app.add_subcommand("metrics", "Compute metric tables from a result directory");
  met->add_option("--result", met_result, "Result directory")->required();
  met->add_option("--kind", met_kind, "delay, tlf or pcb")->required()->check(CLI::IsMember({"delay", "tlf", "pcb"}));
  met->add_option("--out", met_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) cmd_gen_topology(synth, gen_out);
    if (*prune) cmd_prune(prune_in, prune_n, prune_out);
    if (*runc) cmd_run(run_config, run_out);
    if (*met) cmd_metrics(met_result, met_kind, met_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
