#include "vqa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "csv_util.hpp"
#include "vqa/dataset_tools.hpp"
#include "vqa/errors.hpp"
#include "vqa/frame_io.hpp"
#include "vqa/haar.hpp"
#include "vqa/metrics.hpp"
#include "vqa/model.hpp"
#include "vqa/sampler.hpp"
#include "vqa/scoring.hpp"
#include "vqa/trainer.hpp"

namespace vqa {

namespace {

StrategyKind parse_strategy(const std::string& name) {
  if (name == "fupic") return StrategyKind::kFupic;
  if (name == "grid" || name == "grid_minipatch") return StrategyKind::kGridMinipatch;
  if (name == "center" || name == "center_crop") return StrategyKind::kCenterCrop;
  if (name == "resize") return StrategyKind::kResize;
  throw std::invalid_argument("unknown strategy: " + name);
}

void write_video_scores(const std::vector<VideoScore>& scores,
                        const std::string& out_path,
                        const std::string& frame_out_path) {
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot open output csv: " + out_path);
  out << "video_id,Q\n";
  for (const VideoScore& vs : scores) {
    out << vs.video_id << "," << detail::fmt_g17(vs.value) << "\n";
  }
  if (frame_out_path.empty()) return;
  std::ofstream fout(frame_out_path);
  if (!fout) throw DataError("cannot open output csv: " + frame_out_path);
  fout << "video_id,frame_id,frame_score\n";
  for (const VideoScore& vs : scores) {
    for (const FrameScore& fs : vs.frame_scores) {
      fout << vs.video_id << "," << fs.frame_id << ","
           << detail::fmt_g17(fs.value) << "\n";
    }
  }
}

// Two-column CSV with a header row -> id/value pairs in file order.
std::vector<std::pair<std::string, double>> read_score_csv(
    const std::string& path) {
  const auto rows = detail::read_csv(path);
  if (rows.size() < 2) {
    throw DataError("csv has no data rows: " + path);
  }
  std::vector<std::pair<std::string, double>> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) {
      throw DataError("csv row needs id,value in " + path);
    }
    out.emplace_back(rows[i][0], detail::parse_double(rows[i][1], path));
  }
  return out;
}

struct CoverageOpts {
  std::string strategy;
  int width = 0, height = 0;
  int input_side = 224;
  int patch_size = 384;
  std::string out;
};

void run_coverage(const CoverageOpts& o) {
  StrategySpec spec;
  spec.kind = parse_strategy(o.strategy);
  spec.input_side = o.input_side;
  spec.patch_size = o.patch_size;
  const double ratio = coverage(spec, o.width, o.height);
  std::printf("%.5f\n", ratio);
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw DataError("cannot open output csv: " + o.out);
    out << "strategy,width,height,ratio\n";
    out << strategy_name(spec.kind) << "," << o.width << "," << o.height << ","
        << detail::fmt_g17(ratio) << "\n";
  }
}

struct HaarOpts {
  std::string input;
  std::string out_prefix;
};

void run_haar(const HaarOpts& o) {
  const Frame frame = load_frame(o.input);
  if (frame.width != frame.height || frame.width % 2 != 0) {
    throw DataError("haar input must be square with an even side: " + o.input);
  }
  const FreqMaps maps = haar_forward(frame);
  const int h = maps.half();
  const size_t plane = size_t(h) * size_t(h);

  auto write_component = [&](const std::vector<double>& comp,
                             const std::string& suffix) {
    // Channel mean, then min-max scaled for inspection.
    std::vector<double> gray(plane, 0.0);
    for (size_t i = 0; i < plane; ++i) {
      gray[i] = (comp[i] + comp[plane + i] + comp[2 * plane + i]) / 3.0;
    }
    const auto [lo, hi] = std::minmax_element(gray.begin(), gray.end());
    const double span = *hi - *lo;
    for (double& v : gray) {
      v = span > 0.0 ? (v - *lo) / span : 0.5;
    }
    save_pgm(gray, h, h, o.out_prefix + "_" + suffix + ".pgm");
  };
  write_component(maps.avg, "avg");
  write_component(maps.h1, "h1");
  write_component(maps.h2, "h2");
  write_component(maps.h3, "h3");
}

struct ScoreOpts {
  std::string manifest, checkpoint, out, frame_out;
  size_t interval = 10;
  int workers = 1;
};

void run_score(const ScoreOpts& o) {
  const auto manifests = load_manifest(o.manifest);
  const ModelParams params = load_checkpoint(o.checkpoint);
  const auto scores = score_videos(manifests, params, o.interval, o.workers);
  write_video_scores(scores, o.out, o.frame_out);
}

struct TrainOpts {
  std::string manifest;
  TrainConfig config;
  std::string sampling = "fupic";
};

void run_train(TrainOpts& o) {
  if (o.sampling == "fupic") {
    o.config.sampling = TrainConfig::Sampling::kFullCover;
  } else if (o.sampling == "random-crop") {
    o.config.sampling = TrainConfig::Sampling::kRandomCrop;
  } else {
    throw std::invalid_argument("unknown sampling mode: " + o.sampling);
  }
  const auto manifests = load_manifest(o.manifest);
  const TrainResult result = train(manifests, o.config);
  if (!result.history.empty()) {
    const EpochStats& last = result.history.back();
    std::printf("epochs=%d final_loss=%.6g train_srcc=%.4f\n", last.epoch,
                last.mean_loss, last.train_srcc);
  } else {
    std::printf("epochs=0 (initialization only)\n");
  }
}

struct EvalOpts {
  std::string pred, mos;
};

void run_eval(const EvalOpts& o) {
  const auto pred = read_score_csv(o.pred);
  const auto mos = read_score_csv(o.mos);
  std::map<std::string, double> mos_by_id;
  for (const auto& [id, v] : mos) mos_by_id[id] = v;
  std::vector<double> x, y;
  for (const auto& [id, v] : pred) {
    auto it = mos_by_id.find(id);
    if (it == mos_by_id.end()) {
      throw DataError("no mos entry for video " + id);
    }
    x.push_back(v);
    y.push_back(it->second);
  }
  if (x.size() < 2) {
    throw DataError("need at least 2 joined rows to correlate");
  }
  std::printf("srcc=%.6f plcc=%.6f\n", srcc(x, y), plcc(x, y));
}

struct IndicatorOpts {
  std::string manifest, out;
};

void run_indicators(const IndicatorOpts& o) {
  const auto manifests = load_manifest(o.manifest);
  std::ofstream out(o.out);
  if (!out) throw DataError("cannot open output csv: " + o.out);
  out << "video_id,spatial_activity,temporal_activity,noise,brightness,contrast\n";
  for (const VideoManifest& m : manifests) {
    if (m.total_frames() < 2) {
      throw DataError("video " + m.video_id + " needs at least 2 frames");
    }
    std::vector<Frame> clip;
    clip.reserve(m.total_frames());
    for (const std::string& path : m.frame_paths) {
      clip.push_back(load_frame(path));
    }
    const IndicatorVector iv = indicators(clip);
    out << m.video_id << "," << detail::fmt_g17(iv.spatial_activity) << ","
        << detail::fmt_g17(iv.temporal_activity) << ","
        << detail::fmt_g17(iv.noise) << "," << detail::fmt_g17(iv.brightness)
        << "," << detail::fmt_g17(iv.contrast) << "\n";
  }
}

struct PcScaleOpts {
  std::string records, out;
};

void run_pc_scale(const PcScaleOpts& o) {
  const auto rows = detail::read_csv(o.records);
  if (rows.size() < 2) {
    throw DataError("no comparison rows in " + o.records);
  }
  std::vector<PairComparisonRecord> records;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw DataError("pc rows need winner_id,loser_id,count in " + o.records);
    }
    PairComparisonRecord r;
    r.winner_id = rows[i][0];
    r.loser_id = rows[i][1];
    r.count = detail::parse_int(rows[i][2], o.records);
    if (r.count <= 0) {
      throw DataError("pc count must be positive in " + o.records);
    }
    records.push_back(std::move(r));
  }
  const auto mos = bradley_terry_mos(records);
  std::ofstream out(o.out);
  if (!out) throw DataError("cannot open output csv: " + o.out);
  out << "video_id,mos\n";
  for (const MosRecord& r : mos) {
    out << r.video_id << "," << detail::fmt_g17(r.mos) << "\n";
  }
}

struct WeightsOpts {
  std::string manifest, checkpoint, out_dir;
  size_t interval = 10;
  int workers = 1;
};

void run_weights(const WeightsOpts& o) {
  const auto manifests = load_manifest(o.manifest);
  const ModelParams params = load_checkpoint(o.checkpoint);
  std::filesystem::create_directories(o.out_dir);
  const int l = params.config.patch_size;

  for (const VideoManifest& m : manifests) {
    const std::vector<size_t> idx = sample_frame_indices(m.total_frames(), o.interval);
    for (size_t fi : idx) {
      const Frame frame = load_frame(m.frame_paths[fi]);
      const PatchSet set = partition(frame, l, std::to_string(fi));
      const FrameScore fs =
          aggregate_region_aware(forward_frame(set, params, o.workers));
      const int rows = (frame.height + l - 1) / l;
      const int cols = (frame.width + l - 1) / l;

      char name[128];
      std::snprintf(name, sizeof(name), "%s_f%04zu_weights", m.video_id.c_str(), fi);
      const std::string base = (std::filesystem::path(o.out_dir) / name).string();

      std::ofstream csv(base + ".csv");
      if (!csv) throw DataError("cannot open output csv: " + base + ".csv");
      for (int c = 0; c < cols; ++c) csv << (c ? "," : "") << "c" << c;
      csv << "\n";
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          csv << (c ? "," : "")
              << detail::fmt_g17(fs.weights[size_t(r) * cols + size_t(c)]);
        }
        csv << "\n";
      }

      const auto [lo, hi] = std::minmax_element(fs.weights.begin(), fs.weights.end());
      const double span = *hi - *lo;
      std::vector<double> gray(fs.weights.size());
      for (size_t i = 0; i < gray.size(); ++i) {
        gray[i] = span > 0.0 ? (fs.weights[i] - *lo) / span : 0.5;
      }
      save_pgm(gray, cols, rows, base + ".pgm");
    }
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Full-coverage no-reference video quality assessment toolkit"};
  app.require_subcommand(1);

  CoverageOpts cov;
  CLI::App* cov_cmd =
      app.add_subcommand("coverage", "Content coverage of a sampling strategy");
  cov_cmd->add_option("--strategy", cov.strategy,
                      "fupic | grid | center | resize")->required();
  cov_cmd->add_option("--width", cov.width, "source width")->required();
  cov_cmd->add_option("--height", cov.height, "source height")->required();
  cov_cmd->add_option("--input-side", cov.input_side, "network input side");
  cov_cmd->add_option("--patch-size", cov.patch_size, "fupic patch side");
  cov_cmd->add_option("--out", cov.out, "write a csv row");
  cov_cmd->callback([&]() { run_coverage(cov); });

  HaarOpts haar;
  CLI::App* haar_cmd =
      app.add_subcommand("haar", "Write the four frequency components as PGM");
  haar_cmd->add_option("--input", haar.input, "square even-sided PPM")->required();
  haar_cmd->add_option("--out-prefix", haar.out_prefix, "output path prefix")
      ->required();
  haar_cmd->callback([&]() { run_haar(haar); });

  ScoreOpts score;
  CLI::App* score_cmd = app.add_subcommand("score", "Score videos in a manifest");
  score_cmd->add_option("--manifest", score.manifest)->required();
  score_cmd->add_option("--checkpoint", score.checkpoint)->required();
  score_cmd->add_option("--out", score.out, "per-video csv")->required();
  score_cmd->add_option("--frame-out", score.frame_out, "per-frame csv");
  score_cmd->add_option("--interval", score.interval, "frame sampling stride");
  score_cmd->add_option("--workers", score.workers);
  score_cmd->callback([&]() { run_score(score); });

  TrainOpts tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--manifest", tr.manifest)->required();
  train_cmd->add_option("--checkpoint-out", tr.config.checkpoint_out)->required();
  train_cmd->add_option("--history-csv", tr.config.history_csv);
  train_cmd->add_option("--seed", tr.config.seed);
  train_cmd->add_option("--epochs", tr.config.epochs);
  train_cmd->add_option("--lr", tr.config.lr);
  train_cmd->add_option("--patch-size", tr.config.model.patch_size);
  train_cmd->add_option("--token-side", tr.config.model.token_side);
  train_cmd->add_option("--micro-batch", tr.config.micro_batch);
  train_cmd->add_option("--units-per-step", tr.config.units_per_step);
  train_cmd->add_option("--split", tr.config.split, "train fraction");
  train_cmd->add_option("--interval", tr.config.interval);
  train_cmd->add_option("--embed-dim", tr.config.model.embed_dim);
  train_cmd->add_option("--depth", tr.config.model.depth);
  train_cmd->add_option("--window", tr.config.model.window);
  train_cmd->add_option("--ffn-hidden", tr.config.model.ffn_hidden);
  train_cmd->add_option("--workers", tr.config.workers);
  train_cmd->add_option("--sampling", tr.sampling, "fupic | random-crop");
  train_cmd->callback([&]() { run_train(tr); });

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "SRCC/PLCC of predictions vs mos");
  eval_cmd->add_option("--pred", ev.pred, "csv with video_id,Q")->required();
  eval_cmd->add_option("--mos", ev.mos, "csv with video_id,mos")->required();
  eval_cmd->callback([&]() { run_eval(ev); });

  IndicatorOpts ind;
  CLI::App* ind_cmd = app.add_subcommand("indicators", "Per-clip content indicators");
  ind_cmd->add_option("--manifest", ind.manifest)->required();
  ind_cmd->add_option("--out", ind.out)->required();
  ind_cmd->callback([&]() { run_indicators(ind); });

  PcScaleOpts pc;
  CLI::App* pc_cmd =
      app.add_subcommand("pc-scale", "Scale pair-comparison outcomes to mos");
  pc_cmd->add_option("--records", pc.records, "csv with winner_id,loser_id,count")
      ->required();
  pc_cmd->add_option("--out", pc.out)->required();
  pc_cmd->callback([&]() { run_pc_scale(pc); });

  WeightsOpts wt;
  CLI::App* wt_cmd =
      app.add_subcommand("weights", "Export region weight grids and heatmaps");
  wt_cmd->add_option("--manifest", wt.manifest)->required();
  wt_cmd->add_option("--checkpoint", wt.checkpoint)->required();
  wt_cmd->add_option("--out-dir", wt.out_dir)->required();
  wt_cmd->add_option("--interval", wt.interval);
  wt_cmd->add_option("--workers", wt.workers);
  wt_cmd->callback([&]() { run_weights(wt); });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("vqa");
  for (const std::string& s : args) argv.push_back(s.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace vqa
