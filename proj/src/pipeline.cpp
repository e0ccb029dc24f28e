#include "lvt/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace fs = std::filesystem;

namespace lvt {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& cfg, const TrackMapModel& map)
    : cfg_(cfg), map_(&map), tracker_(cfg.tracker, &map) {
  cfg_.validate();
}

SensorOutput Pipeline::segment_sensor(const PointFrame& frame, const SensorMount& mount) const {
  SensorOutput out;
  const double half_fov = deg2rad(mount.fov_deg) / 2.0;
  RangeImage img = build_range_image(frame, cfg_.rows, cfg_.cols, -half_fov, half_fov);
  img = fill_empty_pixels(img);

  const AngleImage angles = compute_angle_image(img);
  const AngleImage smoothed = smooth_angle_image(angles, cfg_.sg_window);
  out.ground = label_ground(smoothed, cfg_.th_gnd());

  if (cfg_.ngrir_enabled) {
    RepairResult rep = repair_nonground(img, out.ground, cfg_.ngrir_half_window,
                                        cfg_.ngrir_range_gap);
    out.image = std::move(rep.image);
    out.mask = std::move(rep.mask);
    out.repaired = rep.repaired;
  } else {
    out.image = std::move(img);
    out.mask = out.ground;
  }

  out.labels = segment(out.image, out.mask, cfg_.th_seg());
  const ClusterSet sensor_frame = extract_clusters(out.labels, out.image, frame);
  out.clusters = transform_clusters(sensor_frame, mount.transform());
  return out;
}

FrameResult Pipeline::process(const std::vector<PointFrame>& frames, const EgoPose& ego,
                              uint64_t stamp_ns, bool parallel) {
  FrameResult res;
  res.stamp_ns = stamp_ns;

  const auto t_start = std::chrono::steady_clock::now();

  // Per-sensor segmentation, one worker per sensor, joined in mount order so
  // the output is independent of scheduling.
  std::vector<const PointFrame*> inputs;
  std::vector<const SensorMount*> mounts;
  for (const SensorMount& m : cfg_.sensors) {
    for (const PointFrame& f : frames) {
      if (f.sensor_id == m.id) {
        inputs.push_back(&f);
        mounts.push_back(&m);
        break;
      }
    }
  }
  res.per_sensor.resize(inputs.size());
  if (parallel && inputs.size() > 1) {
    std::vector<std::future<SensorOutput>> jobs;
    for (size_t i = 0; i < inputs.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [this, &inputs, &mounts, i] {
        return segment_sensor(*inputs[i], *mounts[i]);
      }));
    }
    for (size_t i = 0; i < inputs.size(); ++i) res.per_sensor[i] = jobs[i].get();
  } else {
    for (size_t i = 0; i < inputs.size(); ++i) {
      res.per_sensor[i] = segment_sensor(*inputs[i], *mounts[i]);
    }
  }

  std::vector<SensorView> views;
  for (SensorOutput& so : res.per_sensor) views.push_back({&so.clusters, &so.image});
  std::vector<SensorAdjacency> adjacency;
  for (const SensorAdjacency& adj : cfg_.adjacency) {
    const bool have_left = std::any_of(views.begin(), views.end(), [&](const SensorView& v) {
      return v.image->sensor_id == adj.left;
    });
    const bool have_right = std::any_of(views.begin(), views.end(), [&](const SensorView& v) {
      return v.image->sensor_id == adj.right;
    });
    if (have_left && have_right) adjacency.push_back(adj);
  }
  res.merged = merge_sensor_clusters(views, adjacency, cfg_.th_mrg);
  res.merged.stamp_ns = stamp_ns;
  res.times.segment_ms = ms_since(t_start);

  const auto t_detect = std::chrono::steady_clock::now();
  res.candidates = filter_clusters(res.merged, cfg_.dims, *map_, ego, cfg_.detector);
  res.detections =
      detect_vehicles(res.candidates, cfg_.dims, *map_, ego, cfg_.detector).detections;
  res.times.detect_ms = ms_since(t_detect);

  const auto t_track = std::chrono::steady_clock::now();
  tracker_.step(res.detections, stamp_ns);
  res.tracks = tracker_.output(stamp_ns);
  res.times.track_ms = ms_since(t_track);
  res.times.total_ms = ms_since(t_start);
  return res;
}

RunStats run_pipeline(const std::string& dataset_dir, const PipelineConfig& cfg,
                      const std::string& out_dir, bool parallel) {
  DatasetReader reader(dataset_dir);
  Pipeline pipeline(cfg, reader.map());

  fs::create_directories(out_dir);
  std::vector<Detection> all_detections;
  std::vector<TrackSnapshot> all_tracks;
  std::ofstream timing(fs::path(out_dir) / "timing.csv");
  timing << "stamp_ns,segment_ms,detect_ms,track_ms,total_ms\n";

  RunStats stats;
  for (int k = 0; k < reader.frame_count(); ++k) {
    DatasetFrame df;
    try {
      df = reader.frame(k);
    } catch (const DataError& e) {
      std::cerr << "skipping frame " << k << ": " << e.what() << "\n";
      ++stats.skipped;
      continue;
    }
    const FrameResult fr = pipeline.process(df.frames, df.ego, df.stamp_ns, parallel);
    all_detections.insert(all_detections.end(), fr.detections.begin(), fr.detections.end());
    all_tracks.insert(all_tracks.end(), fr.tracks.begin(), fr.tracks.end());
    timing << fr.stamp_ns << ',' << fmt_csv(fr.times.segment_ms) << ','
           << fmt_csv(fr.times.detect_ms) << ',' << fmt_csv(fr.times.track_ms) << ','
           << fmt_csv(fr.times.total_ms) << '\n';
    stats.times.push_back(fr.times);
    ++stats.frames;
  }

  write_detections_csv((fs::path(out_dir) / "detections.csv").string(), all_detections);
  write_tracks_csv((fs::path(out_dir) / "tracks.csv").string(), all_tracks);
  write_tracks_jsonl((fs::path(out_dir) / "tracks.jsonl").string(), all_tracks);
  stats.detections = static_cast<int>(all_detections.size());
  stats.track_rows = static_cast<int>(all_tracks.size());
  return stats;
}

}  // namespace lvt
