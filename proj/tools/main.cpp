// pfe: piecewise flat embeddings of images and weighted graphs.
//
// Subcommands: embed | segment | evaluate | benchmark
// Exit codes: 0 ok, 1 I/O error, 2 numerical error, 3 configuration error.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfe/cluster.hpp"
#include "pfe/errors.hpp"
#include "pfe/graph.hpp"
#include "pfe/imgio.hpp"
#include "pfe/init.hpp"
#include "pfe/metrics.hpp"
#include "pfe/solver.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  double sigma = 0.0;  // 0 = median heuristic
  double lambda = 100.0;
  double r = 1.0;
  int soc_max = 10;
  int sb_max1 = 5;
  int sb_max2 = 100;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  int downsample = 1;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--sigma", opt.sigma, "Heat-kernel bandwidth (0 = median heuristic)");
  cmd->add_option("--lambda", opt.lambda, "Split-Bregman penalty");
  cmd->add_option("--r", opt.r, "Orthogonality penalty");
  cmd->add_option("--soc-max", opt.soc_max, "Stage-I outer iteration cap");
  cmd->add_option("--sb-max1", opt.sb_max1, "Stage-I inner iteration cap");
  cmd->add_option("--sb-max2", opt.sb_max2, "Stage-II iteration cap");
  cmd->add_option("--tol", opt.tol, "Relative-change convergence tolerance");
  cmd->add_option("--seed", opt.seed, "Seed for all randomness");
  cmd->add_option("--downsample", opt.downsample, "Image downsampling factor");
}

pfe::PfeParams make_params(const CommonOptions& opt, int dim) {
  pfe::PfeParams params;
  params.dim = dim;
  params.lambda = opt.lambda;
  params.r = opt.r;
  params.soc_max = opt.soc_max;
  params.sb_max_stage1 = opt.sb_max1;
  params.sb_max_stage2 = opt.sb_max2;
  params.conv_tol = opt.tol;
  return params;
}

void echo_config(const std::string& cmd, const CommonOptions& opt,
                 const std::vector<std::pair<std::string, std::string>>& extra) {
  std::cerr << "config: cmd=" << cmd;
  for (const auto& [k, v] : extra) std::cerr << " " << k << "=" << v;
  std::cerr << " sigma=" << opt.sigma << " lambda=" << opt.lambda << " r=" << opt.r
            << " soc_max=" << opt.soc_max << " sb_max1=" << opt.sb_max1
            << " sb_max2=" << opt.sb_max2 << " tol=" << opt.tol << " seed=" << opt.seed
            << " downsample=" << opt.downsample << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool is_image_path(const std::string& path) {
  return fs::path(path).extension() == ".ppm";
}

struct EmbedResult {
  pfe::Embedding embedding;
  int height = 0, width = 0;  // 0 when the input was an edge list
  double graph_seconds = 0.0;
  double solve_seconds = 0.0;
};

EmbedResult run_embed(const std::string& input, int dim, const CommonOptions& opt) {
  EmbedResult res;
  auto t0 = std::chrono::steady_clock::now();

  pfe::WeightedGraph graph;
  pfe::Embedding y0;
  if (is_image_path(input)) {
    pfe::RgbImage img = pfe::load_image(input);
    img = pfe::downsample(img, opt.downsample);
    pfe::PixelGrid grid = pfe::make_pixel_grid(img);
    double sigma = opt.sigma;
    if (sigma <= 0.0) {
      sigma = pfe::median_neighbor_distance(grid);
      if (sigma <= 1e-12) sigma = 0.05;  // flat image; any bandwidth works
      std::cerr << "config: resolved sigma=" << sigma << "\n";
    }
    graph = pfe::build_image_graph(grid, sigma);
    pfe::GmmModel gmm = pfe::gmm_fit(grid.features, dim, opt.seed);
    y0 = pfe::init_embedding(gmm, grid.features, graph.degree);
    res.height = grid.height;
    res.width = grid.width;
  } else {
    graph = pfe::load_edge_list(input);
    y0 = pfe::random_embedding(graph.n, dim, opt.seed, graph.degree);
  }
  res.graph_seconds = seconds_since(t0);

  auto t1 = std::chrono::steady_clock::now();
  pfe::PfeParams params = make_params(opt, dim);
  res.embedding = pfe::pfe_two_stage(graph, params, y0);
  res.solve_seconds = seconds_since(t1);
  return res;
}

pfe::Segmentation upsample_labels(const pfe::Segmentation& seg, int height, int width) {
  pfe::Segmentation out;
  out.k = seg.k;
  out.height = height;
  out.width = width;
  out.labels.resize(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    int sr = std::min(r * seg.height / height, seg.height - 1);
    for (int c = 0; c < width; ++c) {
      int sc = std::min(c * seg.width / width, seg.width - 1);
      out.labels[static_cast<std::size_t>(r) * width + c] =
          seg.labels[static_cast<std::size_t>(sr) * seg.width + sc];
    }
  }
  return out;
}

void print_metrics(std::ostream& os, const pfe::MetricsReport& m) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "covering=%.4f pri=%.4f vi=%.4f", m.covering, m.pri, m.vi);
  os << buf << "\n";
}

std::vector<pfe::Segmentation> load_ground_truths(const std::vector<std::string>& paths,
                                                  const pfe::Segmentation& pred,
                                                  bool full_res,
                                                  pfe::Segmentation& scored_pred) {
  std::vector<pfe::Segmentation> gts;
  for (const std::string& p : paths) gts.push_back(pfe::load_labels(p));
  scored_pred = pred;
  if (!gts.empty() && full_res &&
      (gts[0].height != pred.height || gts[0].width != pred.width)) {
    scored_pred = upsample_labels(pred, gts[0].height, gts[0].width);
  }
  for (const auto& gt : gts) {
    if (gt.labels.size() != scored_pred.labels.size()) {
      throw pfe::ConfigError("evaluate: prediction and ground truth sizes differ "
                             "(use --full-res to rescale)");
    }
  }
  return gts;
}

// ground-truth files for image <stem>.ppm: <stem>.seg*.csv next to it
std::vector<std::string> find_ground_truths(const fs::path& image) {
  std::vector<std::string> out;
  std::string prefix = image.stem().string() + ".seg";
  for (const auto& entry : fs::directory_iterator(image.parent_path())) {
    std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double idx = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(idx);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

int cmd_embed(const std::string& input, const std::string& out, int dim,
              const CommonOptions& opt) {
  echo_config("embed", opt, {{"input", input}, {"out", out}, {"dim", std::to_string(dim)}});
  EmbedResult res = run_embed(input, dim, opt);
  pfe::save_embedding(res.embedding, out);
  std::cout << "graph_seconds=" << res.graph_seconds
            << " solve_seconds=" << res.solve_seconds << "\n";
  return 0;
}

int cmd_segment(const std::string& input, const std::string& out, int k, int height,
                int width, const std::string& format, const CommonOptions& opt) {
  echo_config("segment", opt,
              {{"input", input}, {"out", out}, {"k", std::to_string(k)},
               {"format", format}});
  pfe::Embedding y = pfe::load_embedding(input);
  pfe::Segmentation seg = pfe::kmeans(y, k, opt.seed);
  if (height > 0 && width > 0) {
    if (static_cast<long>(height) * width != y.rows()) {
      throw pfe::ConfigError("segment: --height*--width does not match embedding rows");
    }
    seg.height = height;
    seg.width = width;
  } else {
    seg.height = 1;  // no image layout: emit a single CSV row
    seg.width = static_cast<int>(y.rows());
  }
  pfe::save_labels(seg, out, format == "pgm" ? pfe::LabelFormat::Pgm : pfe::LabelFormat::Csv);
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& gts,
                 bool full_res, const std::string& csv_out, const CommonOptions& opt) {
  echo_config("evaluate", opt,
              {{"preds", std::to_string(preds.size())}, {"gts", std::to_string(gts.size())},
               {"full_res", full_res ? "1" : "0"}});
  std::ofstream csv;
  if (!csv_out.empty()) {
    csv.open(csv_out, std::ios::app);
    if (!csv) throw pfe::IoError("evaluate: cannot open " + csv_out);
  }

  pfe::MetricsReport mean;
  for (const std::string& pred_path : preds) {
    pfe::Segmentation pred = pfe::load_labels(pred_path);
    pfe::Segmentation scored;
    std::vector<pfe::Segmentation> gt_segs = load_ground_truths(gts, pred, full_res, scored);
    pfe::MetricsReport m = pfe::evaluate(scored, gt_segs);
    if (preds.size() > 1) std::cout << fs::path(pred_path).filename().string() << " ";
    print_metrics(std::cout, m);
    if (csv.is_open()) {
      csv << fs::path(pred_path).filename().string() << "," << m.covering << "," << m.pri
          << "," << m.vi << "\n";
    }
    mean.covering += m.covering;
    mean.pri += m.pri;
    mean.vi += m.vi;
  }
  if (preds.size() > 1) {
    mean.covering /= preds.size();
    mean.pri /= preds.size();
    mean.vi /= preds.size();
    std::cout << "mean ";
    print_metrics(std::cout, mean);
  }
  return 0;
}

int cmd_benchmark(const std::string& input_dir, std::vector<int> dims, int k, bool full_res,
                  const std::string& select, bool check_ranges, const std::string& timing_csv,
                  const CommonOptions& opt) {
  echo_config("benchmark", opt,
              {{"input", input_dir}, {"k", std::to_string(k)}, {"select", select},
               {"dims", std::to_string(dims.size())},
               {"check_ranges", check_ranges ? "1" : "0"}});
  if (dims.empty()) dims = {5, 10, 15, 20, 25};

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.path().extension() == ".ppm") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());

  std::ofstream timing;
  if (!timing_csv.empty()) {
    timing.open(timing_csv);
    if (!timing) throw pfe::IoError("benchmark: cannot open " + timing_csv);
    timing << "filename,d,seconds\n";
  }

  pfe::MetricsReport mean;
  int processed = 0;
  std::map<int, std::vector<double>> times_by_dim;

  for (const fs::path& image : images) {
    std::vector<std::string> gt_paths = find_ground_truths(image);
    if (gt_paths.empty()) {
      std::cerr << "warning: no ground truths for " << image << ", skipping\n";
      continue;
    }
    try {
      pfe::MetricsReport best;
      int best_d = 0;
      bool have_best = false;
      for (int d : dims) {
        EmbedResult res = run_embed(image.string(), d, opt);
        pfe::Segmentation seg = pfe::kmeans(res.embedding, k, opt.seed);
        seg.height = res.height;
        seg.width = res.width;
        pfe::Segmentation scored;
        std::vector<pfe::Segmentation> gt_segs =
            load_ground_truths(gt_paths, seg, full_res, scored);
        pfe::MetricsReport m = pfe::evaluate(scored, gt_segs);
        times_by_dim[d].push_back(res.solve_seconds);
        if (timing.is_open()) {
          timing << image.filename().string() << "," << d << "," << res.solve_seconds << "\n";
        }
        bool better = !have_best ||
                      (select == "vi" ? m.vi < best.vi
                       : select == "pri" ? m.pri > best.pri
                                         : m.covering > best.covering);
        if (better) {
          best = m;
          best_d = d;
          have_best = true;
        }
      }
      std::cout << image.filename().string() << " best_d=" << best_d << " ";
      print_metrics(std::cout, best);
      mean.covering += best.covering;
      mean.pri += best.pri;
      mean.vi += best.vi;
      ++processed;
    } catch (const pfe::IoError& e) {
      std::cerr << "warning: skipping " << image << ": " << e.what() << "\n";
    }
  }

  if (processed == 0) throw pfe::IoError("benchmark: no images processed in " + input_dir);
  mean.covering /= processed;
  mean.pri /= processed;
  mean.vi /= processed;
  std::cout << "mean ";
  print_metrics(std::cout, mean);
  for (const auto& [d, times] : times_by_dim) {
    std::cout << "timing d=" << d << " q25=" << quantile(times, 0.25)
              << " median=" << quantile(times, 0.5) << " q75=" << quantile(times, 0.75)
              << "\n";
  }

  if (check_ranges) {
    bool ok = mean.covering >= 0.45 && mean.covering <= 0.60 && mean.vi >= 1.8 &&
              mean.vi <= 2.6;
    std::cout << "range_check=" << (ok ? "pass" : "fail") << "\n";
    if (!ok) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise flat embeddings: solver, segmentation and evaluation"};
  app.require_subcommand(1);

  CommonOptions opt;

  // embed
  auto* embed = app.add_subcommand("embed", "Compute an embedding for an image or edge list");
  std::string embed_input, embed_out;
  int embed_dim = 5;
  embed->add_option("--input", embed_input, "Input .ppm image or edge-list file")->required();
  embed->add_option("--out", embed_out, "Output embedding CSV")->required();
  embed->add_option("--dim", embed_dim, "Embedding dimension");
  add_common_flags(embed, opt);

  // segment
  auto* segment = app.add_subcommand("segment", "Cluster an embedding into a label map");
  std::string seg_input, seg_out, seg_format = "csv";
  int seg_k = 64, seg_height = 0, seg_width = 0;
  segment->add_option("--input", seg_input, "Embedding CSV")->required();
  segment->add_option("--out", seg_out, "Output label file")->required();
  segment->add_option("--k", seg_k, "Number of segments");
  segment->add_option("--height", seg_height, "Image height of the embedding");
  segment->add_option("--width", seg_width, "Image width of the embedding");
  segment->add_option("--format", seg_format, "Label format: csv|pgm")
      ->check(CLI::IsMember({"csv", "pgm"}));
  add_common_flags(segment, opt);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score label maps against ground truths");
  std::vector<std::string> eval_preds, eval_gts;
  std::string eval_csv;
  bool eval_full_res = false;
  evaluate->add_option("--pred", eval_preds, "Predicted label file(s)")->required();
  evaluate->add_option("--gt", eval_gts, "Ground-truth label file(s)")->required();
  evaluate->add_flag("--full-res", eval_full_res,
                     "Rescale predictions to ground-truth resolution (nearest neighbor)");
  evaluate->add_option("--csv", eval_csv, "Append per-file rows to this CSV");
  add_common_flags(evaluate, opt);

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "Dimension sweep over a dataset directory");
  std::string bench_input, bench_select = "covering", bench_timing;
  std::vector<int> bench_dims;
  int bench_k = 64;
  bool bench_full_res = false, bench_check = false;
  benchmark->add_option("--input", bench_input, "Dataset directory (*.ppm + <stem>.seg*.csv)")
      ->required();
  benchmark->add_option("--dims", bench_dims, "Dimension sweep grid")->delimiter(',');
  benchmark->add_option("--k", bench_k, "Number of segments");
  benchmark->add_option("--select", bench_select, "Best-d criterion: covering|pri|vi")
      ->check(CLI::IsMember({"covering", "pri", "vi"}));
  benchmark->add_flag("--full-res", bench_full_res, "Score at ground-truth resolution");
  benchmark->add_flag("--check-ranges", bench_check,
                      "Fail unless mean covering is in [0.45,0.60] and VI in [1.8,2.6]");
  benchmark->add_option("--timing-csv", bench_timing, "Write filename,d,seconds rows");
  add_common_flags(benchmark, opt);
  benchmark->parse_complete_callback([&] {
    if (opt.downsample == 1) opt.downsample = 4;  // dataset default
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;  // bad flags are configuration errors
  }

  try {
    if (*embed) return cmd_embed(embed_input, embed_out, embed_dim, opt);
    if (*segment) {
      return cmd_segment(seg_input, seg_out, seg_k, seg_height, seg_width, seg_format, opt);
    }
    if (*evaluate) return cmd_evaluate(eval_preds, eval_gts, eval_full_res, eval_csv, opt);
    if (*benchmark) {
      return cmd_benchmark(bench_input, bench_dims, bench_k, bench_full_res, bench_select,
                           bench_check, bench_timing, opt);
    }
  } catch (const pfe::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const pfe::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pfe::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
