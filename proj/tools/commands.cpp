#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "csr/encoder.hpp"
#include "csr/errors.hpp"
#include "csr/metrics.hpp"
#include "csr/probe_dataset.hpp"
#include "csr/random.hpp"
#include "csr/rearrangement.hpp"
#include "csr/retrieval.hpp"
#include "csr/serialization.hpp"
#include "csr/tracking.hpp"

namespace csr::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum : std::uint64_t { kTagScenes = 0x5c, kTagEpisodes, kTagBootstrap, kTagStreams, kTagProbe, kTagControl };

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Rounds for JSON output so summaries do not depend on the last ulp of a sum.
double round6(double v) { return std::round(v * 1e6) / 1e6; }

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw ConfigError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

json summary_header(const RunConfig& config) {
  return {{"version", kSchemaVersion}, {"timestamp", timestamp()}, {"config", config_to_json(config)}};
}

// Runs task(i) for i in [0, n) on `workers` threads. Tasks write only their
// own result slot, so output order never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

std::string id_list(const std::vector<InstanceId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? ";" : "") + std::to_string(ids[i]);
  return s;
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

int cmd_gen_scenes(const RunConfig& c, std::ostream& log) {
  prepare_dir(c.out / "scenes");
  json manifest = summary_header(c);
  manifest["scenes"] = json::array();
  for (std::size_t i = 0; i < c.episodes; ++i) {
    const std::uint64_t seed = hash_seed({c.seed, kTagScenes, i});
    const Scene scene = generate_scene(c.scene, seed);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%05zu.json", i);
    write_json(c.out / "scenes" / name, scene_to_json(scene));
    manifest["scenes"].push_back({{"file", std::string("scenes/") + name}, {"seed", seed}});
  }
  manifest["count"] = c.episodes;
  write_json(c.out / "manifest.json", manifest);
  log << "wrote " << c.episodes << " scenes to " << c.out.string() << "\n";
  return kExitOk;
}

struct RowSpec {
  bool gt_matching;
  bool heuristic;
};

RowSpec row_spec(const std::string& row) {
  if (row == "ours") return {false, false};
  if (row == "gt-bt") return {false, true};
  return {true, true};
}

struct EpisodeOutcome {
  bool ok = false;
  std::string error;
  EpisodeMetrics metrics;
  int k = 0;
  std::uint64_t seed = 0;
};

int cmd_rearrange(const RunConfig& c, std::ostream& log) {
  prepare_dir(c.out);
  std::ostringstream csv;
  csv << "row,sigma,episode,seed,k,status,success,fixed_strict,energy_ratio,moved_truth,moved_detected,actions,"
         "error\n";
  json summary = summary_header(c);
  summary["results"] = json::array();
  bool any_failed = false;

  for (std::size_t si = 0; si < c.sigmas.size(); ++si) {
    const EncoderParams params{c.dim, c.sigmas[si], c.effective_encoder_seed()};
    const Encoder encoder(params);
    for (std::size_t ri = 0; ri < c.rows.size(); ++ri) {
      const RowSpec spec = row_spec(c.rows[ri]);
      std::vector<EpisodeOutcome> outcomes(c.episodes);
      parallel_for(c.episodes, c.workers, [&](std::size_t i) {
        EpisodeConfig ep;
        ep.scene = c.scene;
        ep.shuffle_k = c.shuffle_k[i % c.shuffle_k.size()];
        ep.encoder = params;
        ep.node_threshold = c.thresholds.node;
        ep.object_threshold = c.thresholds.object;
        ep.moved_threshold = c.thresholds.moved;
        ep.gt_matching = spec.gt_matching;
        ep.heuristic_trajectory = spec.heuristic;
        ep.seed = hash_seed({c.seed, kTagEpisodes, i});
        EpisodeOutcome& o = outcomes[i];
        o.k = ep.shuffle_k;
        o.seed = ep.seed;
        try {
          o.metrics = run_rearrangement(ep, encoder);
          o.ok = true;
        } catch (const std::exception& e) {
          o.error = e.what();
        }
      });

      std::vector<double> success;
      std::vector<double> fixed;
      std::vector<double> energy;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const EpisodeOutcome& o = outcomes[i];
        const EpisodeMetrics& m = o.metrics;
        csv << c.rows[ri] << ',' << num(c.sigmas[si]) << ',' << i << ',' << o.seed << ',' << o.k << ','
            << (o.ok ? "ok" : "failed") << ',';
        if (o.ok) {
          csv << m.success << ',' << num(m.fixed_strict) << ',' << num(m.energy_ratio) << ',' << id_list(m.moved_truth)
              << ',' << id_list(m.moved_detected) << ',' << m.action_count << ",\n";
          success.push_back(m.success);
          fixed.push_back(m.fixed_strict);
          energy.push_back(m.energy_ratio);
        } else {
          std::string err = o.error;
          std::replace(err.begin(), err.end(), ',', ';');
          csv << ",,,,,," << err << "\n";
          any_failed = true;
        }
      }

      json row = {{"row", c.rows[ri]},
                  {"sigma", c.sigmas[si]},
                  {"episodes", c.episodes},
                  {"completed", success.size()},
                  {"failed", c.episodes - success.size()}};
      if (!success.empty()) {
        const MeanInterval ci = bootstrap_mean_ci(success, hash_seed({c.seed, kTagBootstrap, si, ri}));
        row["success_pct"] = round6(100.0 * ci.mean);
        row["success_ci95_pct"] = {round6(100.0 * ci.lo), round6(100.0 * ci.hi)};
        row["fixed_strict_pct"] = round6(100.0 * mean(fixed));
        row["energy_ratio_mean"] = round6(mean(energy));
      }
      summary["results"].push_back(row);
      log << c.rows[ri] << " sigma=" << c.sigmas[si] << ": " << success.size() << "/" << c.episodes
          << " completed, success " << (success.empty() ? 0.0 : 100.0 * mean(success)) << "%\n";
    }
  }
  write_file(c.out / "rearrange_episodes.csv", csv.str());
  write_json(c.out / "rearrange_summary.json", summary);
  return any_failed ? kExitEpisodesFailed : kExitOk;
}

std::vector<double> sweep_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 19; ++i) t.push_back(i * 0.05);
  return t;
}

int cmd_track(const RunConfig& c, std::ostream& log) {
  std::optional<TrackStream> external;
  if (c.stream_file) {
    std::ifstream in(*c.stream_file);
    if (!in) throw ConfigError("cannot read stream file " + c.stream_file->string());
    try {
      external = load_track_stream(in);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    if (external->frames.empty()) throw ConfigError("stream file has no frames");
  }
  prepare_dir(c.out);
  const std::vector<double> thresholds = sweep_thresholds();
  json summary = summary_header(c);
  summary["results"] = json::array();
  std::ostringstream csv;
  csv << "sigma,stream,status,ari_update,ari_no_update,clusters_update,clusters_no_update,error\n";
  bool any_failed = false;

  struct Outcome {
    bool ok = false;
    std::string error;
    TrackResult update;
    TrackResult fixed;
    std::vector<SweepPoint> sweep;
  };

  // An external stream is already featurized, so it is run once as-is.
  const std::vector<double> sigmas = external ? std::vector<double>{0.0} : c.sigmas;
  const std::size_t streams = external ? 1 : c.episodes;
  for (double sigma : sigmas) {
    const Encoder encoder(EncoderParams{c.dim, sigma, c.effective_encoder_seed()});
    std::vector<Outcome> outcomes(streams);
    parallel_for(streams, c.workers, [&](std::size_t i) {
      Outcome& o = outcomes[i];
      try {
        const TrackStream stream = external ? *external
                                            : make_track_stream(TrackStreamConfig{c.scene, c.frames}, encoder,
                                                                hash_seed({c.seed, kTagStreams, i}));
        o.update = run_tracking(stream, c.thresholds.node, true);
        o.fixed = run_tracking(stream, c.thresholds.node, false);
        if (o.update.ari) o.sweep = threshold_sweep(stream, thresholds);
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    });

    std::vector<double> ari_update;
    std::vector<double> ari_fixed;
    std::vector<double> sweep_sum(thresholds.size(), 0.0);
    std::size_t swept = 0;
    for (std::size_t i = 0; i < streams; ++i) {
      const Outcome& o = outcomes[i];
      csv << num(sigma) << ',' << i << ',' << (o.ok ? "ok" : "failed") << ',';
      if (!o.ok) {
        std::string err = o.error;
        std::replace(err.begin(), err.end(), ',', ';');
        csv << ",,,," << err << "\n";
        any_failed = true;
        continue;
      }
      csv << (o.update.ari ? num(*o.update.ari) : "") << ',' << (o.fixed.ari ? num(*o.fixed.ari) : "") << ','
          << o.update.clusters << ',' << o.fixed.clusters << ",\n";
      if (o.update.ari && o.fixed.ari) {
        ari_update.push_back(*o.update.ari);
        ari_fixed.push_back(*o.fixed.ari);
      }
      if (!o.sweep.empty()) {
        for (std::size_t t = 0; t < thresholds.size(); ++t) sweep_sum[t] += o.sweep[t].ari;
        ++swept;
      }
    }

    json row = {{"sigma", sigma}, {"streams", streams}, {"scored", ari_update.size()}};
    if (!ari_update.empty()) {
      row["ari_update_mean"] = round6(mean(ari_update));
      row["ari_no_update_mean"] = round6(mean(ari_fixed));
    }
    if (swept > 0) {
      json sweep = json::array();
      std::size_t best = 0;
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        sweep.push_back({{"threshold", round6(thresholds[t])}, {"ari_mean", round6(sweep_sum[t] / swept)}});
        if (sweep_sum[t] > sweep_sum[best]) best = t;
      }
      row["sweep"] = sweep;
      row["opt_threshold"] = round6(thresholds[best]);
      row["opt_ari_mean"] = round6(sweep_sum[best] / swept);
    }
    summary["results"].push_back(row);
    log << "track sigma=" << sigma << ": ARI update " << mean(ari_update) << ", no-update " << mean(ari_fixed)
        << "\n";
  }
  write_file(c.out / "track_streams.csv", csv.str());
  write_json(c.out / "track_summary.json", summary);
  return any_failed ? kExitEpisodesFailed : kExitOk;
}

// Fraction of triplets answered correctly, computed in parallel.
double retrieval_accuracy(const std::vector<Triplet>& triplets, const FeatureSource& source, std::size_t workers) {
  std::vector<char> correct(triplets.size(), 0);
  parallel_for(triplets.size(), workers, [&](std::size_t i) {
    correct[i] = run_retrieval({triplets[i]}, source) > 0.5 ? 1 : 0;
  });
  return static_cast<double>(std::count(correct.begin(), correct.end(), 1)) / static_cast<double>(triplets.size());
}

int cmd_retrieve(const RunConfig& c, std::ostream& log) {
  prepare_dir(c.out);
  const std::vector<Triplet> triplets = make_triplets(RetrievalConfig{c.scene}, c.episodes, c.seed);
  json summary = summary_header(c);
  summary["triplets"] = triplets.size();
  summary["results"] = json::array();
  std::ostringstream csv;
  csv << "source,sigma,accuracy_pct\n";
  for (double sigma : c.sigmas) {
    const Encoder encoder(EncoderParams{c.dim, sigma, c.effective_encoder_seed()});
    const double acc = 100.0 * retrieval_accuracy(triplets, EncoderFeatures(encoder), c.workers);
    summary["results"].push_back({{"sigma", sigma}, {"accuracy_pct", round6(acc)}});
    csv << "encoder," << num(sigma) << ',' << num(acc) << "\n";
    log << "retrieve sigma=" << sigma << ": " << acc << "%\n";
  }
  const double chance =
      100.0 * retrieval_accuracy(triplets, RandomFeatures(c.dim, c.effective_encoder_seed()), c.workers);
  summary["random_baseline_pct"] = round6(chance);
  csv << "random,," << num(chance) << "\n";
  log << "retrieve random baseline: " << chance << "%\n";
  write_file(c.out / "retrieve_results.csv", csv.str());
  write_json(c.out / "retrieve_summary.json", summary);
  return kExitOk;
}

struct ProbeScores {
  double accuracy = 0.0;
  double control = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

ProbeScores probe_task(const std::vector<Scene>& scenes, ProbeTask task, const Encoder& encoder, const RunConfig& c) {
  const ProbeDataset ds = build_probe_dataset(scenes, task, encoder, hash_seed({c.seed, kTagProbe}));
  const std::size_t classes = num_classes(task);
  ProbeScores s;
  s.train_size = ds.train.labels.size();
  s.test_size = ds.test.labels.size();
  const ProbeFit fit = train_probe(ds.train.features, ds.train.labels, classes);
  s.accuracy = probe_accuracy(fit.model, ds.test.features, ds.test.labels);

  std::vector<double> control(c.control_seeds);
  parallel_for(c.control_seeds, c.workers, [&](std::size_t k) {
    std::vector<int> labels = ds.train.labels;
    Rng rng(hash_seed({c.seed, kTagControl, k}));
    rng.shuffle(labels);
    const ProbeFit shuffled = train_probe(ds.train.features, labels, classes);
    control[k] = probe_accuracy(shuffled.model, ds.test.features, ds.test.labels);
  });
  s.control = mean(control);
  return s;
}

int cmd_probe(const RunConfig& c, std::ostream& log) {
  prepare_dir(c.out);
  std::vector<Scene> scenes;
  for (std::size_t i = 0; i < c.episodes; ++i) scenes.push_back(generate_scene(c.scene, hash_seed({c.seed, kTagProbe, i})));
  json summary = summary_header(c);
  summary["results"] = json::array();
  std::ostringstream csv;
  csv << "sigma,task,accuracy_pct,shuffled_label_pct,train_size,test_size\n";
  for (double sigma : c.sigmas) {
    const Encoder encoder(EncoderParams{c.dim, sigma, c.effective_encoder_seed()});
    json row = {{"sigma", sigma}};
    double total = 0.0;
    for (ProbeTask task : {ProbeTask::Support, ProbeTask::Sibling}) {
      const ProbeScores s = probe_task(scenes, task, encoder, c);
      const std::string name(to_string(task));
      row[name + "_acc_pct"] = round6(100.0 * s.accuracy);
      row[name + "_shuffled_label_pct"] = round6(100.0 * s.control);
      row[name + "_train_size"] = s.train_size;
      row[name + "_test_size"] = s.test_size;
      total += s.accuracy;
      csv << num(sigma) << ',' << name << ',' << num(100.0 * s.accuracy) << ',' << num(100.0 * s.control) << ','
          << s.train_size << ',' << s.test_size << "\n";
      log << "probe sigma=" << sigma << " " << name << ": " << 100.0 * s.accuracy << "% (shuffled labels "
          << 100.0 * s.control << "%)\n";
    }
    row["mean_acc_pct"] = round6(100.0 * total / 2.0);
    summary["results"].push_back(row);
  }
  write_file(c.out / "probe_results.csv", csv.str());
  write_json(c.out / "probe_summary.json", summary);
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& log) {
  switch (config.command) {
    case Command::GenScenes: return cmd_gen_scenes(config, log);
    case Command::Rearrange: return cmd_rearrange(config, log);
    case Command::Track: return cmd_track(config, log);
    case Command::Retrieve: return cmd_retrieve(config, log);
    case Command::Probe: return cmd_probe(config, log);
  }
  return kExitUsage;
}

}  // namespace csr::cli
