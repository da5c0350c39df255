// zombie: community-wise zombie account detection on follower graphs.

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "stages.hpp"

namespace {

using namespace zombie;
using namespace zombie::cli;

unsigned default_threads() {
  if (const char* env = std::getenv("ZOMBIE_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

IoSource parse_io_source(const std::string& s) {
  if (s == "local") return IoSource::local_degrees;
  if (s == "profile") return IoSource::profile_counts;
  throw ValidationError("unknown IO source '" + s + "'");
}

RankMode parse_mode(const std::string& s) {
  if (s == "even") return RankMode::even;
  if (s == "uneven") return RankMode::uneven;
  throw ValidationError("unknown rank mode '" + s + "'");
}

struct SchemaOptions {
  std::string fields = "uid,name,gender,verified,region,followers,followees,tweets";
  std::string delimiter = ",";
  bool no_header = false;

  void add(CLI::App* app) {
    app->add_option("--profile-schema", fields, "Comma-separated profile column names");
    app->add_option("--profile-delimiter", delimiter, "Profile field delimiter (single character, 'tab' for \\t)");
    app->add_flag("--profile-no-header", no_header, "Profile file has no header line");
  }
  ProfileSchema build() const {
    char d = delimiter == "tab" ? '\t' : (delimiter.size() == 1 ? delimiter[0] : '\0');
    if (d == '\0') throw ValidationError("profile delimiter must be a single character");
    return ProfileSchema::from_string(fields, d, !no_header);
  }
};

void print_manifest_note(const StageRecord& rec) { std::cout << "run " << rec.run_id << '\n'; }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect zombie accounts by community-wise credibility-weighted PageRank"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: $ZOMBIE_THREADS or hardware concurrency)")
      ->check(CLI::PositiveNumber);

  RunConfig cfg;
  std::string mode = "uneven", io_source = "local", quartile = "linear";
  auto add_louvain = [&](CLI::App* sc) {
    sc->add_option("--seed", cfg.louvain.seed, "Node sweep order seed");
    sc->add_option("--epsilon", cfg.louvain.min_level_gain, "Minimum modularity gain per level");
    sc->add_option("--max-iters", cfg.louvain.max_levels, "Maximum aggregation levels");
  };
  auto add_rank = [&](CLI::App* sc, const char* iters_flag) {
    sc->add_option("--damping", cfg.rank.damping, "Damping factor in (0, 1]");
    sc->add_option("--tol", cfg.rank.tolerance, "L1 convergence tolerance");
    sc->add_option(iters_flag, cfg.rank.max_iterations, "Maximum power iterations");
    sc->add_option("--mode", mode, "even | uneven")->check(CLI::IsMember({"even", "uneven"}));
    sc->add_option("--io-source", io_source, "local | profile")->check(CLI::IsMember({"local", "profile"}));
  };
  auto add_detect = [&](CLI::App* sc) {
    sc->add_option("--min-size", cfg.detect.min_community_size, "Smallest community that is thresholded");
    sc->add_option("--quartile-method", quartile, "linear | nearest-rank")
        ->check(CLI::IsMember({"linear", "nearest-rank"}));
  };

  // convert
  std::string network, cache_out;
  auto* convert = app.add_subcommand("convert", "Parse a weibo_network file into a binary cache");
  convert->add_option("network", network)->required();
  convert->add_option("--cache", cache_out)->required();

  // stats
  std::string stats_cache, stats_out;
  auto* stats = app.add_subcommand("stats", "Node/arc counts and degree histogram");
  stats->add_option("cache", stats_cache)->required();
  stats->add_option("--bin-width", cfg.bin_width)->check(CLI::PositiveNumber);
  stats->add_option("-o,--output", stats_out, "Histogram CSV (stdout when absent)");

  // communities
  std::string comm_cache, comm_out, comm_uids;
  auto* communities = app.add_subcommand("communities", "Louvain community detection");
  communities->add_option("cache", comm_cache)->required();
  add_louvain(communities);
  communities->add_option("--uidlist", comm_uids, "Write external uids instead of node ids");
  communities->add_option("-o,--output", comm_out)->required();

  // rank
  std::string rank_cache, rank_partition, rank_out, rank_profiles, rank_uids;
  bool rank_partition_uids = false;
  SchemaOptions rank_schema;
  auto* rank = app.add_subcommand("rank", "Per-community PageRank");
  rank->add_option("cache", rank_cache)->required();
  rank->add_option("partition", rank_partition)->required();
  add_rank(rank, "--max-iters");
  rank->add_option("--profiles", rank_profiles, "Profile file for --io-source profile");
  rank->add_option("--uidlist", rank_uids, "uid list matching profiles / partition uids");
  rank->add_flag("--partition-uids", rank_partition_uids, "Partition is keyed by external uid");
  rank_schema.add(rank);
  rank->add_option("-o,--output", rank_out)->required();

  // detect
  std::string det_ranks, det_out, det_summary;
  auto* detect = app.add_subcommand("detect", "IQR threshold per community");
  detect->add_option("ranks", det_ranks)->required();
  add_detect(detect);
  detect->add_option("-o,--output", det_out)->required();
  detect->add_option("--summary", det_summary)->required();

  // evaluate
  std::string ev_report, ev_truth, ev_out, ev_profiles, ev_uids, ev_regions_out;
  SchemaOptions ev_schema;
  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and metrics against ground truth");
  evaluate->add_option("report", ev_report)->required();
  evaluate->add_option("truth", ev_truth)->required();
  evaluate->add_option("-o,--output", ev_out)->required();
  evaluate->add_flag("--transpose", cfg.transpose, "Swap the roles of truth and prediction");
  evaluate->add_option("--regions", ev_profiles, "Profile file; enables the region distribution of zombies");
  evaluate->add_option("--regions-output", ev_regions_out, "Region CSV path (default <output>.regions.csv)");
  evaluate->add_option("--uidlist", ev_uids);
  ev_schema.add(evaluate);

  // synth
  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("config", synth_config)->required();
  synth->add_option("-o,--output", synth_out)->required();

  // pipeline
  std::string pipe_source, pipe_out, pipe_manifest;
  SchemaOptions pipe_schema;
  auto* pipeline = app.add_subcommand("pipeline", "convert -> communities -> rank -> detect (-> evaluate)");
  pipeline->add_option("source", pipe_source, "weibo_network file or corpus directory")->required();
  pipeline->add_option("-o,--output", pipe_out)->required();
  pipeline->add_option("--from-manifest", pipe_manifest, "Take every setting from an earlier manifest.json");
  add_louvain(pipeline);
  add_rank(pipeline, "--rank-max-iters");
  add_detect(pipeline);
  pipeline->add_flag("--transpose", cfg.transpose);
  pipe_schema.add(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    cfg.rank.mode = parse_mode(mode);
    cfg.io_source = parse_io_source(io_source);
    cfg.detect.method = parse_quartile_method(quartile);
    auto opt_path = [](const std::string& s) -> std::optional<fs::path> {
      if (s.empty()) return std::nullopt;
      return fs::path(s);
    };

    if (*convert) {
      auto rec = run_convert(network, cache_out, std::cout);
      write_stage_manifest(rec, cache_out);
      print_manifest_note(rec);
    } else if (*stats) {
      auto rec = run_stats(stats_cache, cfg.bin_width, opt_path(stats_out), std::cout);
      if (!stats_out.empty()) write_stage_manifest(rec, stats_out);
    } else if (*communities) {
      auto rec = run_communities(comm_cache, cfg.louvain, opt_path(comm_uids), comm_out, std::cout);
      write_stage_manifest(rec, comm_out);
      print_manifest_note(rec);
    } else if (*rank) {
      ProfileInputs prof{opt_path(rank_profiles), opt_path(rank_uids), rank_schema.build()};
      auto rec = run_rank(rank_cache, rank_partition, cfg.rank, cfg.io_source, prof, rank_partition_uids, threads,
                          rank_out, std::cout);
      write_stage_manifest(rec, rank_out);
      print_manifest_note(rec);
      return rec.exit_code;
    } else if (*detect) {
      auto rec = run_detect(det_ranks, cfg.detect, det_out, det_summary, std::cout);
      write_stage_manifest(rec, det_out);
      print_manifest_note(rec);
    } else if (*evaluate) {
      ProfileInputs prof{opt_path(ev_profiles), opt_path(ev_uids), ev_schema.build()};
      auto rec = run_evaluate(ev_report, ev_truth, cfg.transpose, prof, opt_path(ev_regions_out), ev_out, std::cout);
      write_stage_manifest(rec, ev_out);
      print_manifest_note(rec);
    } else if (*synth) {
      auto rec = run_synth(synth_config, synth_out, std::cout);
      write_stage_manifest(rec, fs::path(synth_out) / "synth");
      print_manifest_note(rec);
    } else if (*pipeline) {
      if (!pipe_manifest.empty()) {
        std::ifstream in(pipe_manifest, std::ios::binary);
        if (!in) throw IoError("cannot open " + pipe_manifest);
        try {
          cfg = RunConfig::from_json(json::parse(in).at("config"));
        } catch (const json::exception& e) {
          throw ValidationError(std::string("bad manifest: ") + e.what());
        }
      }
      auto result = run_pipeline(pipe_source, pipe_out, cfg, pipe_schema.build(), threads, std::cout);
      std::cout << "manifest " << (fs::path(pipe_out) / "manifest.json").string() << '\n';
      return result.exit_code;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const CacheError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  }
  return kOk;
}
