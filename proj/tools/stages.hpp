#ifndef ZOMBIE_TOOLS_STAGES_HPP
#define ZOMBIE_TOOLS_STAGES_HPP

// Pipeline stages behind the `zombie` command line tool.
//
// Every stage derives a run id from its name, the tool's schema version, the
// SHA-256 of each input file and its canonical configuration. The id is
// written as the first line of each CSV output and into the stage manifest,
// so identical inputs and parameters give byte-identical outputs whether a
// stage runs alone or inside `pipeline`.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "zombie/zombie.hpp"

namespace zombie::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kInputError = 2, kNonConvergence = 3, kIoFailure = 4 };

inline std::string to_hex(const unsigned char* p, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(digits[p[i] >> 4]);
    s.push_back(digits[p[i] & 15]);
  }
  return s;
}

class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  void update(std::string_view s) { update(s.data(), s.size()); }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    return to_hex(md, len);
  }

private:
  EVP_MD_CTX* ctx_;
};

inline std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

struct InputRecord {
  std::string role;
  fs::path path;
  std::string sha256;
};

inline InputRecord input(const std::string& role, const fs::path& path) { return {role, path, file_digest(path)}; }

inline std::string run_id(const std::string& stage, const std::vector<InputRecord>& inputs, const json& config) {
  Sha256 h;
  h.update(stage);
  h.update("\n" + std::to_string(kOutputSchemaVersion) + "\n");
  for (const auto& i : inputs) h.update(i.role + "=" + i.sha256 + "\n");
  h.update(config.dump());
  return h.hex().substr(0, 16);
}

/// Output written to a temporary sibling and renamed into place on commit().
/// Uncommitted files are removed.
class OutputFile {
public:
  explicit OutputFile(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".partial") {
    if (path_.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path_.parent_path(), ec);
    }
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw IoError("cannot write " + path_.string());
  }
  ~OutputFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;

  std::ostream& stream() { return stream_; }
  const fs::path& path() const { return path_; }

  void close() {
    stream_.flush();
    if (!stream_) throw IoError("write failed: " + path_.string());
    stream_.close();
  }
  void commit() {
    if (stream_.is_open()) close();
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw IoError("cannot move output into place: " + path_.string());
    committed_ = true;
  }

private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

inline void write_json(const fs::path& path, const json& j) {
  OutputFile f(path);
  f.stream() << j.dump(2) << '\n';
  f.commit();
}

/// Everything configurable in a run. Thread count is excluded: outputs do
/// not depend on it.
struct RunConfig {
  LouvainConfig louvain;
  RankConfig rank;
  IoSource io_source = IoSource::local_degrees;
  DetectConfig detect;
  bool transpose = false;
  std::size_t bin_width = 10;

  json louvain_json() const {
    return {{"seed", louvain.seed}, {"epsilon", louvain.min_level_gain}, {"max_iters", louvain.max_levels},
            {"max_sweeps", louvain.max_sweeps}};
  }
  json rank_json() const {
    return {{"damping", rank.damping}, {"tolerance", rank.tolerance}, {"max_iters", rank.max_iterations},
            {"mode", to_string(rank.mode)}, {"io_source", to_string(io_source)}};
  }
  json detect_json() const {
    return {{"min_size", detect.min_community_size}, {"quartile_method", to_string(detect.method)}};
  }
  json evaluate_json() const { return {{"transpose", transpose}}; }
  json to_json() const {
    return {{"louvain", louvain_json()}, {"rank", rank_json()}, {"detect", detect_json()},
            {"evaluate", evaluate_json()}, {"stats", {{"bin_width", bin_width}}}};
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    const auto& l = j.at("louvain");
    c.louvain.seed = l.at("seed").get<std::uint64_t>();
    c.louvain.min_level_gain = l.at("epsilon").get<double>();
    c.louvain.max_levels = l.at("max_iters").get<std::size_t>();
    c.louvain.max_sweeps = l.value("max_sweeps", c.louvain.max_sweeps);
    const auto& r = j.at("rank");
    c.rank.damping = r.at("damping").get<double>();
    c.rank.tolerance = r.at("tolerance").get<double>();
    c.rank.max_iterations = r.at("max_iters").get<std::size_t>();
    c.rank.mode = r.at("mode").get<std::string>() == "even" ? RankMode::even : RankMode::uneven;
    c.io_source = r.at("io_source").get<std::string>() == "profile" ? IoSource::profile_counts : IoSource::local_degrees;
    const auto& d = j.at("detect");
    c.detect.min_community_size = d.at("min_size").get<std::size_t>();
    c.detect.method = parse_quartile_method(d.at("quartile_method").get<std::string>());
    c.transpose = j.value("evaluate", json::object()).value("transpose", false);
    c.bin_width = j.value("stats", json::object()).value("bin_width", c.bin_width);
    return c;
  }
};

struct StageRecord {
  std::string stage;
  std::string run_id;
  std::vector<InputRecord> inputs;
  std::vector<fs::path> outputs;
  json config;
  json summary;
  double millis = 0.0;
  int exit_code = kOk;

  json to_json() const {
    json ins = json::array();
    for (const auto& i : inputs) ins.push_back({{"role", i.role}, {"path", i.path.string()}, {"sha256", i.sha256}});
    json outs = json::array();
    for (const auto& o : outputs) outs.push_back({{"path", o.string()}, {"sha256", file_digest(o)}});
    return {{"stage", stage}, {"run_id", run_id},   {"inputs", ins},  {"outputs", outs},
            {"config", config}, {"summary", summary}, {"millis", millis}, {"exit_code", exit_code}};
  }
};

inline json manifest_header() {
  return {{"tool", "zombie"}, {"version", kVersion}, {"schema_version", kOutputSchemaVersion}};
}

inline void write_stage_manifest(const StageRecord& rec, const fs::path& primary_output) {
  json j = manifest_header();
  j["stages"] = json::array({rec.to_json()});
  write_json(primary_output.string() + ".manifest.json", j);
}

class Stopwatch {
public:
  double millis() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json("undefined"); }

// Stages. Each returns its record; output files are committed on success.

inline StageRecord run_convert(const fs::path& network, const fs::path& cache, std::ostream& log) {
  Stopwatch sw;
  StageRecord rec{"convert", {}, {input("network", network)}, {cache}, json::object(), {}, 0, kOk};
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);
  RawNetwork raw = parse_weibo_network_file(network.string());
  for (const auto& w : raw.warnings) log << "warning: " << w << '\n';
  BuildStats stats;
  DirectedGraph g = build_graph(raw.arcs, raw.declared_nodes, &stats);
  if (stats.dropped_self_loops) log << "warning: dropped " << stats.dropped_self_loops << " self-loops\n";
  if (stats.dropped_duplicates) log << "warning: dropped " << stats.dropped_duplicates << " duplicate arcs\n";
  OutputFile out(cache);
  cache_save(g, out.stream());
  out.commit();
  log << "nodes " << raw.declared_nodes << "\ndeclared relationships " << raw.declared_relationships
      << "\nparsed arcs " << raw.arcs.size() << "\ngraph arcs " << g.edge_count() << '\n';
  rec.summary = {{"nodes", raw.declared_nodes},
                 {"declared_relationships", raw.declared_relationships},
                 {"parsed_arcs", raw.arcs.size()},
                 {"graph_arcs", g.edge_count()},
                 {"dropped_self_loops", stats.dropped_self_loops},
                 {"dropped_duplicates", stats.dropped_duplicates}};
  rec.millis = sw.millis();
  return rec;
}

inline StageRecord run_stats(const fs::path& cache, std::size_t bin_width, const std::optional<fs::path>& output,
                             std::ostream& log) {
  Stopwatch sw;
  StageRecord rec{"stats", {}, {input("cache", cache)}, {}, {{"bin_width", bin_width}}, {}, 0, kOk};
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);
  DirectedGraph g = cache_load(cache.string());
  auto bins = degree_histogram(g, bin_width);
  log << "nodes " << g.node_count() << "\narcs " << g.edge_count() << '\n';
  if (output) {
    OutputFile out(*output);
    tables::write_histogram(out.stream(), bins, rec.run_id);
    out.commit();
    rec.outputs.push_back(*output);
  } else {
    tables::write_histogram(log, bins);
  }
  rec.summary = {{"nodes", g.node_count()}, {"arcs", g.edge_count()}, {"bins", bins.size()}};
  rec.millis = sw.millis();
  return rec;
}

inline std::vector<std::string> load_uidlist(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_uidlist(in);
}

inline StageRecord run_communities(const fs::path& cache, const LouvainConfig& cfg,
                                   const std::optional<fs::path>& uidlist, const fs::path& output,
                                   std::ostream& log) {
  Stopwatch sw;
  RunConfig rc;
  rc.louvain = cfg;
  StageRecord rec{"communities", {}, {input("cache", cache)}, {output}, rc.louvain_json(), {}, 0, kOk};
  if (uidlist) rec.inputs.push_back(input("uidlist", *uidlist));
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);

  DirectedGraph g = cache_load(cache.string());
  std::vector<std::string> uids;
  if (uidlist) {
    uids = load_uidlist(*uidlist);
    if (uids.size() != g.node_count()) throw ValidationError("uid list length differs from node count");
  }
  if (g.node_count() == 0) throw ValidationError("graph has no nodes");
  UndirectedGraph ug = symmetrize(g);
  Dendrogram d = louvain(ug, cfg);
  const double q_std = modularity(ug, d.partition, ModularityVariant::standard);
  const double q_off = modularity(ug, d.partition, ModularityVariant::off_diagonal);

  OutputFile out(output);
  tables::write_partition(out.stream(), d.partition, uidlist ? &uids : nullptr, rec.run_id);
  out.commit();

  log << "communities " << d.partition.community_count() << "\nlevels " << d.levels.size()
      << "\nmodularity " << tables::format_real(q_std) << "\nmodularity_off_diagonal " << tables::format_real(q_off)
      << '\n';
  json levels = json::array();
  for (const auto& lv : d.levels)
    levels.push_back({{"nodes", lv.node_count}, {"communities", lv.partition.community_count()},
                      {"modularity", lv.modularity}, {"sweeps", lv.sweeps}});
  rec.summary = {{"nodes", g.node_count()},
                 {"undirected_edges", ug.total_weight()},
                 {"communities", d.partition.community_count()},
                 {"modularity", q_std},
                 {"modularity_off_diagonal", q_off},
                 {"levels", levels}};
  rec.millis = sw.millis();
  return rec;
}

struct ProfileInputs {
  std::optional<fs::path> profiles;
  std::optional<fs::path> uidlist;
  ProfileSchema schema;
};

inline ProfileSet load_profiles(const ProfileInputs& in) {
  std::vector<std::string> uids;
  if (in.uidlist) uids = load_uidlist(*in.uidlist);
  std::ifstream f(*in.profiles, std::ios::binary);
  if (!f) throw IoError("cannot open " + in.profiles->string());
  return parse_profiles(f, in.schema, in.uidlist ? &uids : nullptr);
}

inline StageRecord run_rank(const fs::path& cache, const fs::path& partition, const RankConfig& cfg, IoSource source,
                            const ProfileInputs& prof, bool partition_uses_uids, unsigned threads,
                            const fs::path& output, std::ostream& log) {
  Stopwatch sw;
  RunConfig rc;
  rc.rank = cfg;
  rc.io_source = source;
  StageRecord rec{"rank", {}, {input("cache", cache), input("partition", partition)}, {output}, rc.rank_json(), {}, 0,
                  kOk};
  if (source == IoSource::profile_counts) {
    if (!prof.profiles) throw ValidationError("--io-source profile needs --profiles");
    rec.inputs.push_back(input("profiles", *prof.profiles));
  }
  if (prof.uidlist) rec.inputs.push_back(input("uidlist", *prof.uidlist));
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);

  DirectedGraph g = cache_load(cache.string());
  std::vector<std::string> uids;
  if (partition_uses_uids) {
    if (!prof.uidlist) throw ValidationError("a uid-keyed partition needs --uidlist");
    uids = load_uidlist(*prof.uidlist);
  }
  std::ifstream pin(partition, std::ios::binary);
  if (!pin) throw IoError("cannot open " + partition.string());
  Partition p = tables::read_partition(pin, g.node_count(), partition_uses_uids ? &uids : nullptr);

  ProfileSet profiles;
  ProfileIndex index;
  RankOptions opts;
  opts.io_source = source;
  opts.threads = threads;
  if (source == IoSource::profile_counts) {
    profiles = load_profiles(prof);
    if (profiles.missing_numeric) log << "warning: " << profiles.missing_numeric << " unparseable profile counts\n";
    index = index_profiles(profiles.profiles, g.node_count());
    opts.profiles = &index;
  }
  RankSummary ranks = rank_all_communities(g, p, cfg, opts);
  if (ranks.io_fallbacks) log << "warning: " << ranks.io_fallbacks << " nodes fell back to local degrees for IO\n";

  OutputFile out(output);
  tables::write_ranks(out.stream(), ranks, g.node_count(), rec.run_id);
  out.commit();

  std::size_t max_iter = 0;
  for (const auto& c : ranks.communities) max_iter = std::max(max_iter, c.importance.iterations);
  log << "communities " << ranks.communities.size() << "\nnon_converged " << ranks.non_converged << '\n';
  if (ranks.non_converged) {
    log << "warning: " << ranks.non_converged << " communities did not converge\n";
    rec.exit_code = kNonConvergence;
  }
  rec.summary = {{"communities", ranks.communities.size()},
                 {"non_converged", ranks.non_converged},
                 {"io_fallbacks", ranks.io_fallbacks},
                 {"max_iterations_used", max_iter}};
  rec.millis = sw.millis();
  return rec;
}

inline StageRecord run_detect(const fs::path& ranks_csv, const DetectConfig& cfg, const fs::path& output,
                              const fs::path& summary_path, std::ostream& log) {
  Stopwatch sw;
  RunConfig rc;
  rc.detect = cfg;
  StageRecord rec{"detect", {}, {input("ranks", ranks_csv)}, {output, summary_path}, rc.detect_json(), {}, 0, kOk};
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);

  std::ifstream in(ranks_csv, std::ios::binary);
  if (!in) throw IoError("cannot open " + ranks_csv.string());
  auto table = tables::read_ranks(in);
  ZombieReport report = detect_zombies(table.communities, cfg);

  json summary = {{"run_id", rec.run_id},
                  {"communities", report.communities},
                  {"thresholded_communities", report.thresholded_communities},
                  {"flagged", report.zombie_count},
                  {"total", report.total()},
                  {"proportion", report.proportion()},
                  {"method", to_string(report.method)},
                  {"min_size", report.min_community_size}};
  OutputFile out(output);
  tables::write_report(out.stream(), report, rec.run_id);
  OutputFile sum(summary_path);
  sum.stream() << summary.dump(2) << '\n';
  out.close();
  sum.close();
  out.commit();
  sum.commit();

  log << "flagged " << report.zombie_count << " of " << report.total() << "\nproportion "
      << tables::format_real(report.proportion()) << '\n';
  rec.summary = summary;
  rec.millis = sw.millis();
  return rec;
}

inline StageRecord run_evaluate(const fs::path& report_csv, const fs::path& truth_csv, bool transpose,
                                const ProfileInputs& prof, const std::optional<fs::path>& regions_out,
                                const fs::path& output, std::ostream& log) {
  Stopwatch sw;
  RunConfig rc;
  rc.transpose = transpose;
  StageRecord rec{"evaluate", {}, {input("report", report_csv), input("truth", truth_csv)}, {output},
                  rc.evaluate_json(), {}, 0, kOk};
  if (prof.profiles) rec.inputs.push_back(input("profiles", *prof.profiles));
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);

  std::ifstream rin(report_csv, std::ios::binary);
  if (!rin) throw IoError("cannot open " + report_csv.string());
  ZombieReport report = tables::read_report(rin);
  std::ifstream tin(truth_csv, std::ios::binary);
  if (!tin) throw IoError("cannot open " + truth_csv.string());
  auto truth = tables::read_truth(tin);

  // Ground truth may cover a sample; score exactly the labelled nodes.
  LabelMap all = tables::report_labels(report);
  LabelMap predicted;
  for (const auto& [id, _] : truth.labels) {
    auto it = all.find(id);
    if (it != all.end()) predicted.emplace(id, it->second);
  }
  ConfusionMatrix cm = confusion(predicted, truth.labels);
  if (transpose) cm = cm.transposed();
  MetricSet m = metrics(cm);
  json j = {{"run_id", rec.run_id},
            {"tp", cm.tp},
            {"fn", cm.fn},
            {"fp", cm.fp},
            {"tn", cm.tn},
            {"accuracy", optional_json(m.accuracy)},
            {"precision", optional_json(m.precision)},
            {"recall", optional_json(m.recall)},
            {"f1", optional_json(m.f1)}};

  std::optional<OutputFile> regions_file;
  if (prof.profiles) {
    ProfileSet profiles = load_profiles(prof);
    auto index = index_profiles(profiles.profiles, report.rows.empty() ? 0 : report.rows.back().node + 1);
    auto dist = region_distribution(report, index);
    fs::path rpath = regions_out ? *regions_out : fs::path(output.string() + ".regions.csv");
    regions_file.emplace(rpath);
    tables::write_regions(regions_file->stream(), dist, rec.run_id);
    rec.outputs.push_back(rpath);
    json rj = json::array();
    for (const auto& [r, c] : dist) rj.push_back({{"region", r}, {"count", c}});
    rec.summary["regions"] = rj;
  }
  OutputFile out(output);
  out.stream() << j.dump(2) << '\n';
  out.close();
  if (regions_file) regions_file->close();
  out.commit();
  if (regions_file) regions_file->commit();

  log << "tp " << cm.tp << " fn " << cm.fn << " fp " << cm.fp << " tn " << cm.tn << '\n';
  auto show = [&](const char* name, const std::optional<double>& v) {
    log << name << ' ' << (v ? tables::format_real(*v) : std::string("undefined")) << '\n';
  };
  show("accuracy", m.accuracy);
  show("precision", m.precision);
  show("recall", m.recall);
  show("f1", m.f1);
  rec.summary["metrics"] = j;
  rec.millis = sw.millis();
  return rec;
}

inline StageRecord run_synth(const fs::path& config_path, const fs::path& dir, std::ostream& log) {
  Stopwatch sw;
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + config_path.string());
  json cj;
  try {
    cj = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  SynthConfig cfg;
  try {
    cfg = SynthConfig::from_json(cj);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad synth config: ") + e.what());
  }
  StageRecord rec{"synth", {}, {input("config", config_path)}, {}, cfg.to_json(), {}, 0, kOk};
  rec.run_id = run_id(rec.stage, rec.inputs, rec.config);
  SynthCorpus corpus = generate(cfg);
  for (const auto& w : corpus.warnings) log << "warning: " << w << '\n';
  emit_weibo_format(corpus, dir);
  for (const char* f : {CorpusFiles::network, CorpusFiles::uidlist, CorpusFiles::profiles, CorpusFiles::truth})
    rec.outputs.push_back(dir / f);
  log << "nodes " << corpus.graph.node_count() << "\narcs " << corpus.graph.edge_count() << "\nzombies "
      << corpus.truth.zombie_count() << '\n';
  rec.summary = {{"nodes", corpus.graph.node_count()},
                 {"arcs", corpus.graph.edge_count()},
                 {"zombies", corpus.truth.zombie_count()}};
  rec.millis = sw.millis();
  return rec;
}

struct PipelineInputs {
  fs::path network;
  std::optional<fs::path> truth;
  std::optional<fs::path> profiles;
  std::optional<fs::path> uidlist;
};

/// A directory is read as a corpus (weibo_network plus optional uidlist,
/// profiles.csv and truth.csv); anything else is a bare network file.
inline PipelineInputs resolve_inputs(const fs::path& source) {
  PipelineInputs in;
  if (!fs::is_directory(source)) {
    if (!fs::exists(source)) throw IoError("no such file: " + source.string());
    in.network = source;
    return in;
  }
  in.network = source / CorpusFiles::network;
  if (!fs::exists(in.network)) throw IoError("corpus directory has no " + std::string(CorpusFiles::network));
  auto opt = [&](const char* name) -> std::optional<fs::path> {
    if (fs::exists(source / name)) return source / name;
    return std::nullopt;
  };
  in.truth = opt(CorpusFiles::truth);
  in.profiles = opt(CorpusFiles::profiles);
  in.uidlist = opt(CorpusFiles::uidlist);
  return in;
}

struct PipelineResult {
  std::vector<StageRecord> stages;
  int exit_code = kOk;
};

inline PipelineResult run_pipeline(const fs::path& source, const fs::path& out_dir, const RunConfig& cfg,
                                   const ProfileSchema& schema, unsigned threads, std::ostream& log) {
  PipelineInputs in = resolve_inputs(source);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  PipelineResult result;
  Stopwatch total;
  const fs::path cache = out_dir / "graph.cache";
  const fs::path partition = out_dir / "partition.csv";
  const fs::path ranks = out_dir / "ranks.csv";
  const fs::path report = out_dir / "report.csv";
  const fs::path summary = out_dir / "summary.json";

  ProfileInputs prof{in.profiles, in.uidlist, schema};
  result.stages.push_back(run_convert(in.network, cache, log));
  result.stages.push_back(run_communities(cache, cfg.louvain, std::nullopt, partition, log));
  result.stages.push_back(run_rank(cache, partition, cfg.rank, cfg.io_source, prof, false, threads, ranks, log));
  if (result.stages.back().exit_code != kOk) result.exit_code = result.stages.back().exit_code;
  result.stages.push_back(run_detect(ranks, cfg.detect, report, summary, log));
  if (in.truth) {
    result.stages.push_back(run_evaluate(report, *in.truth, cfg.transpose, prof, out_dir / "regions.csv",
                                         out_dir / "metrics.json", log));
  }

  json j = manifest_header();
  json inputs = json::array();
  inputs.push_back({{"role", "network"}, {"path", in.network.string()}, {"sha256", file_digest(in.network)}});
  for (auto [role, p] : {std::pair{"truth", in.truth}, std::pair{"profiles", in.profiles}, std::pair{"uidlist", in.uidlist}})
    if (p) inputs.push_back({{"role", role}, {"path", p->string()}, {"sha256", file_digest(*p)}});
  j["inputs"] = inputs;
  j["config"] = cfg.to_json();
  j["profile_schema"] = {{"fields", schema.fields}, {"delimiter", std::string(1, schema.delimiter)},
                         {"header", schema.header}};
  json stages = json::array();
  for (const auto& s : result.stages) stages.push_back(s.to_json());
  j["stages"] = stages;
  j["millis"] = total.millis();
  j["exit_code"] = result.exit_code;
  write_json(out_dir / "manifest.json", j);
  return result;
}

} // namespace zombie::cli

#endif // ZOMBIE_TOOLS_STAGES_HPP
