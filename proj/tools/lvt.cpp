#include <CLI11.hpp>

#include "lvt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace lvt;

namespace {

PipelineConfig config_from(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

std::string machine_descriptor() {
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      const size_t colon = line.find(':');
      if (colon != std::string::npos) return trim(line.substr(colon + 1));
    }
  }
  return "unknown";
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 long long seed_override, bool csv_frames) {
  ScenarioConfig cfg = scenario_path.empty() ? ScenarioConfig{} : load_scenario(scenario_path);
  if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
  ScenarioRunner runner(cfg);
  write_dataset(out_dir, runner, csv_frames);
  std::cout << "wrote " << runner.frame_count() << " frames x " << cfg.sensors.size()
            << " sensors to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& dataset, const std::string& config_path,
            const std::string& out_dir, bool sequential) {
  const PipelineConfig cfg = config_from(config_path);
  const RunStats stats = run_pipeline(dataset, cfg, out_dir, !sequential);
  std::vector<double> totals;
  for (const StageTimes& t : stats.times) totals.push_back(t.total_ms);
  std::cout << "frames " << stats.frames << ", skipped " << stats.skipped << ", detections "
            << stats.detections << ", track rows " << stats.track_rows << ", median latency "
            << fmt_csv(median_of(totals)) << " ms\n";
  return 0;
}

int cmd_segment(const std::string& dataset, const std::string& config_path,
                const std::string& out_dir) {
  const PipelineConfig cfg = config_from(config_path);
  DatasetReader reader(dataset);
  Pipeline pipeline(cfg, reader.map());
  fs::create_directories(out_dir);

  std::vector<std::pair<uint64_t, ClusterSet>> rows;
  for (int k = 0; k < reader.frame_count(); ++k) {
    const DatasetFrame df = reader.frame(k);
    FrameResult fr = pipeline.process(df.frames, df.ego, df.stamp_ns);
    rows.emplace_back(df.stamp_ns, std::move(fr.merged));
  }
  write_clusters_csv((fs::path(out_dir) / "clusters.csv").string(), rows);
  std::cout << "wrote clusters for " << rows.size() << " frames\n";
  return 0;
}

int cmd_detect(const std::string& dataset, const std::string& config_path,
               const std::string& out_dir) {
  const PipelineConfig cfg = config_from(config_path);
  DatasetReader reader(dataset);
  Pipeline pipeline(cfg, reader.map());
  fs::create_directories(out_dir);

  std::vector<Detection> all;
  for (int k = 0; k < reader.frame_count(); ++k) {
    const DatasetFrame df = reader.frame(k);
    const FrameResult fr = pipeline.process(df.frames, df.ego, df.stamp_ns);
    all.insert(all.end(), fr.detections.begin(), fr.detections.end());
  }
  write_detections_csv((fs::path(out_dir) / "detections.csv").string(), all);
  std::cout << "wrote " << all.size() << " detections\n";
  return 0;
}

int cmd_track(const std::string& detections_path, const std::string& map_path,
              const std::string& config_path, const std::string& out_dir) {
  const PipelineConfig cfg = config_from(config_path);
  const TrackMapModel map = load_map(map_path);
  const std::vector<Detection> detections = read_detections_csv(detections_path);

  std::map<uint64_t, std::vector<Detection>> by_stamp;
  for (const Detection& d : detections) by_stamp[d.stamp_ns].push_back(d);

  Tracker tracker(cfg.tracker, &map);
  std::vector<TrackSnapshot> rows;
  for (const auto& [stamp, dets] : by_stamp) {
    tracker.step(dets, stamp);
    const auto out = tracker.output(stamp);
    rows.insert(rows.end(), out.begin(), out.end());
  }
  fs::create_directories(out_dir);
  write_tracks_csv((fs::path(out_dir) / "tracks.csv").string(), rows);
  write_tracks_jsonl((fs::path(out_dir) / "tracks.jsonl").string(), rows);
  std::cout << "wrote " << rows.size() << " track rows\n";
  return 0;
}

int cmd_eval(const std::string& dataset, const std::string& config_path,
             const std::string& out_dir) {
  const PipelineConfig cfg = config_from(config_path);
  DatasetReader reader(dataset);
  Pipeline pipeline(cfg, reader.map());
  fs::create_directories(out_dir);

  std::ofstream ground_csv(fs::path(out_dir) / "ground_metrics.csv");
  ground_csv << "stamp_ns,sensor,tp,fp,fn,tn,tpr,ppv,f1\n";
  std::ofstream cluster_csv(fs::path(out_dir) / "clustering.csv");
  cluster_csv << "stamp_ns,opp_id,clusters_per_car,mixed_clusters\n";

  DetectionProbabilityAccumulator det_prob(-100.0, 100.0, 5.0, 2.0);
  TrackingErrorAccumulator track_err(2.0);

  for (int k = 0; k < reader.frame_count(); ++k) {
    const DatasetFrame df = reader.frame(k, /*with_labels=*/true);
    FrameResult fr = pipeline.process(df.frames, df.ego, df.stamp_ns);

    for (size_t i = 0; i < df.frames.size(); ++i) {
      if (i >= df.labels.size() || df.labels[i].empty()) continue;
      std::vector<uint8_t> truth(df.labels[i].size());
      for (size_t p = 0; p < truth.size(); ++p) {
        truth[p] = df.labels[i][p] == static_cast<uint8_t>(PointClass::kGround) ? 0 : 1;
      }
      const SensorOutput* so = nullptr;
      for (const SensorOutput& cand : fr.per_sensor) {
        if (cand.image.sensor_id == df.frames[i].sensor_id) {
          so = &cand;
          break;
        }
      }
      if (!so) continue;
      const BinaryMetrics m = ground_metrics(so->ground, so->image, truth);
      ground_csv << df.stamp_ns << ',' << df.frames[i].sensor_id << ',' << m.tp << ',' << m.fp
                 << ',' << m.fn << ',' << m.tn << ',' << fmt_csv(m.tpr()) << ','
                 << fmt_csv(m.ppv()) << ',' << fmt_csv(m.f1()) << '\n';
    }

    std::vector<OrientedBox> boxes;
    std::vector<Vec2> truth_pos;
    std::vector<TrackingErrorAccumulator::TruthState> truth_states;
    for (const OpponentTruth& op : df.opponents) {
      const Vec2 local = df.ego.to_vehicle({op.x, op.y});
      boxes.push_back({local, wrap_angle(op.psi - df.ego.heading), cfg.dims.length * 1.5,
                       cfg.dims.width * 1.5});
      truth_pos.push_back({op.x, op.y});
      truth_states.push_back({op.id, {op.x, op.y}, op.v, op.psi});
    }
    const ClusterQuality q = clustering_metrics(fr.merged, boxes);
    for (size_t b = 0; b < boxes.size(); ++b) {
      cluster_csv << df.stamp_ns << ',' << df.opponents[b].id << ',' << q.clusters_per_car[b]
                  << ',' << q.mixed_clusters << '\n';
    }
    det_prob.add_frame(df.ego, truth_pos, fr.detections);
    track_err.add_frame(df.stamp_ns, df.ego, truth_states, fr.tracks);
  }

  {
    std::ofstream os(fs::path(out_dir) / "detection_probability.csv");
    os << "bin_center_m,detection_probability,false_positive_rate,truth_frames,false_positives\n";
    const RangeHistogram& tpr = det_prob.tpr_by_range();
    const RangeHistogram& fp = det_prob.fp_by_range();
    for (int b = 0; b < tpr.bins(); ++b) {
      os << fmt_csv(tpr.center(b)) << ',' << fmt_csv(tpr.value(b)) << ',' << fmt_csv(fp.value(b))
         << ',' << tpr.denom[b] << ',' << fp.numer[b] << '\n';
    }
  }
  {
    std::ofstream os(fs::path(out_dir) / "tracking_error.csv");
    os << "stamp_ns,truth_id,track_id,ex_map,ey_map,ex_ego,ey_ego,ev,ephi\n";
    for (const TrackErrorSample& s : track_err.samples()) {
      os << s.stamp_ns << ',' << s.truth_id << ',' << s.track_id << ',' << fmt_csv(s.ex_map)
         << ',' << fmt_csv(s.ey_map) << ',' << fmt_csv(s.ex_ego) << ',' << fmt_csv(s.ey_ego)
         << ',' << fmt_csv(s.ev) << ',' << fmt_csv(s.ephi) << '\n';
    }
    std::ofstream sum(fs::path(out_dir) / "tracking_summary.csv");
    sum << "channel,n,mean,mean_abs,p25,p75,p95\n";
    const std::pair<const char*, double TrackErrorSample::*> channels[] = {
        {"x_map", &TrackErrorSample::ex_map}, {"y_map", &TrackErrorSample::ey_map},
        {"x_ego", &TrackErrorSample::ex_ego}, {"y_ego", &TrackErrorSample::ey_ego},
        {"v", &TrackErrorSample::ev},         {"phi", &TrackErrorSample::ephi},
    };
    for (const auto& [name, field] : channels) {
      const ErrorStats st = error_stats(track_err.channel(field));
      sum << name << ',' << st.n << ',' << fmt_csv(st.mean) << ',' << fmt_csv(st.mean_abs)
          << ',' << fmt_csv(st.p25) << ',' << fmt_csv(st.p75) << ',' << fmt_csv(st.p95) << '\n';
    }
  }
  std::cout << "evaluation tables written to " << out_dir << "\n";
  return 0;
}

int cmd_bench(const std::string& dataset, const std::string& config_path,
              const std::string& out_dir, int reps) {
  const PipelineConfig cfg = config_from(config_path);
  DatasetReader reader(dataset);
  fs::create_directories(out_dir);

  std::vector<StageTimes> all;
  for (int rep = 0; rep < reps; ++rep) {
    Pipeline pipeline(cfg, reader.map());
    for (int k = 0; k < reader.frame_count(); ++k) {
      const DatasetFrame df = reader.frame(k);
      const FrameResult fr = pipeline.process(df.frames, df.ego, df.stamp_ns);
      all.push_back(fr.times);
    }
  }

  auto stats_line = [&](const char* name, double StageTimes::* field) {
    std::vector<double> v;
    for (const StageTimes& t : all) v.push_back(t.*field);
    std::sort(v.begin(), v.end());
    std::ostringstream os;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= std::max<size_t>(1, v.size());
    os << name << ',' << fmt_csv(mean) << ',' << fmt_csv(percentile(v, 50)) << ','
       << fmt_csv(percentile(v, 5)) << ',' << fmt_csv(percentile(v, 25)) << ','
       << fmt_csv(percentile(v, 75)) << ',' << fmt_csv(percentile(v, 95));
    return os.str();
  };

  std::ofstream os(fs::path(out_dir) / "bench.csv");
  os << "stage,mean_ms,median_ms,p5_ms,p25_ms,p75_ms,p95_ms\n";
  os << stats_line("segment", &StageTimes::segment_ms) << '\n';
  os << stats_line("detect", &StageTimes::detect_ms) << '\n';
  os << stats_line("track", &StageTimes::track_ms) << '\n';
  os << stats_line("total", &StageTimes::total_ms) << '\n';
  os << "# machine: " << machine_descriptor() << '\n';

  std::cout << "stage,mean_ms,median_ms,p5_ms,p25_ms,p75_ms,p95_ms\n"
            << stats_line("segment", &StageTimes::segment_ms) << '\n'
            << stats_line("detect", &StageTimes::detect_ms) << '\n'
            << stats_line("track", &StageTimes::track_ms) << '\n'
            << stats_line("total", &StageTimes::total_ms) << '\n'
            << "machine: " << machine_descriptor() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR vehicle detection and tracking pipeline"};
  app.require_subcommand(1);

  std::string scenario, dataset, config_path, out_dir = "out", detections_path, map_path;
  long long seed = -1;
  bool sequential = false, csv_frames = false;
  int reps = 1;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--scenario", scenario, "scenario file (defaults when omitted)");
  sim->add_option("--out", out_dir, "output dataset directory")->required();
  sim->add_option("--seed", seed, "seed override");
  sim->add_flag("--csv-frames", csv_frames, "write frames as CSV instead of pcbin");

  auto* run = app.add_subcommand("run", "full pipeline over a dataset");
  run->add_option("--dataset", dataset)->required();
  run->add_option("--config", config_path);
  run->add_option("--out", out_dir)->required();
  run->add_flag("--sequential", sequential, "disable per-sensor parallelism");

  auto* seg = app.add_subcommand("segment", "segmentation stage only");
  seg->add_option("--dataset", dataset)->required();
  seg->add_option("--config", config_path);
  seg->add_option("--out", out_dir)->required();

  auto* det = app.add_subcommand("detect", "segmentation + detection stages");
  det->add_option("--dataset", dataset)->required();
  det->add_option("--config", config_path);
  det->add_option("--out", out_dir)->required();

  auto* trk = app.add_subcommand("track", "tracking stage from a detections file");
  trk->add_option("--detections", detections_path)->required();
  trk->add_option("--map", map_path, "track map file")->required();
  trk->add_option("--config", config_path);
  trk->add_option("--out", out_dir)->required();

  auto* ev = app.add_subcommand("eval", "metric tables for a dataset");
  ev->add_option("--dataset", dataset)->required();
  ev->add_option("--config", config_path);
  ev->add_option("--out", out_dir)->required();

  auto* bench = app.add_subcommand("bench", "per-stage latency measurement");
  bench->add_option("--dataset", dataset)->required();
  bench->add_option("--config", config_path);
  bench->add_option("--out", out_dir)->required();
  bench->add_option("--reps", reps, "full passes over the dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scenario, out_dir, seed, csv_frames);
    if (run->parsed()) return cmd_run(dataset, config_path, out_dir, sequential);
    if (seg->parsed()) return cmd_segment(dataset, config_path, out_dir);
    if (det->parsed()) return cmd_detect(dataset, config_path, out_dir);
    if (trk->parsed()) return cmd_track(detections_path, map_path, config_path, out_dir);
    if (ev->parsed()) return cmd_eval(dataset, config_path, out_dir);
    if (bench->parsed()) return cmd_bench(dataset, config_path, out_dir, reps);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
