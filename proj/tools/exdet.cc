// Command-line front end: synth, render, decode, eval, bench, roundtrip.
//
// Exit codes: 0 success, 1 bad input or usage, 2 format error,
// 3 infeasible configuration.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exdet/errors.h"
#include "exdet/evaluator.h"
#include "exdet/grouping.h"
#include "exdet/json_io.h"
#include "exdet/parallel.h"
#include "exdet/pipeline.h"
#include "exdet/synth.h"
#include "exdet/tensor_file.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitFormat = 2;
constexpr int kExitConfig = 3;

struct DecodeFlags {
  double tau_p = 0.1;
  double tau_c = 0.1;
  double lambda_aggr = 0.1;
  int max_peaks = 40;
  double center_scale = 2.0;
  std::string ghost = "on";
  std::string soft_nms = "gaussian:0.5";
  bool refine = true;
  int stride = 4;

  void add_to(CLI::App* app) {
    app->add_option("--tau-p", tau_p, "Peak threshold")->capture_default_str();
    app->add_option("--tau-c", tau_c, "Center threshold")->capture_default_str();
    app->add_option("--lambda-aggr", lambda_aggr, "Edge aggregation weight")
        ->capture_default_str();
    app->add_option("--max-peaks", max_peaks, "Peaks kept per kind and class")
        ->capture_default_str();
    app->add_option("--center-scale", center_scale, "Center heatmap multiplier")
        ->capture_default_str();
    app->add_option("--ghost", ghost, "Ghost box suppression")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app->add_option("--soft-nms", soft_nms,
                    "gaussian:<sigma>, linear:<threshold> or off")
        ->capture_default_str();
    app->add_option("--refine", refine, "Apply offset refinement")
        ->capture_default_str();
    app->add_option("--stride", stride, "Heatmap stride in pixels")
        ->capture_default_str();
  }

  exdet::DecodeParams params() const {
    exdet::DecodeParams p;
    p.peaks.tau_p = tau_p;
    p.peaks.max_peaks = max_peaks;
    p.lambda_aggr = lambda_aggr;
    p.center_scale = center_scale;
    p.refine = refine;
    p.grouping.tau_c = tau_c;
    p.grouping.ghost_suppression = ghost == "on";
    auto& nms = p.grouping.soft_nms;
    if (soft_nms == "off") {
      nms.enabled = false;
    } else {
      const auto colon = soft_nms.find(':');
      const std::string method = soft_nms.substr(0, colon);
      double value = 0.0;
      try {
        if (colon == std::string::npos) throw std::invalid_argument(soft_nms);
        value = std::stod(soft_nms.substr(colon + 1));
      } catch (const std::exception&) {
        throw exdet::ConfigError("--soft-nms expects method:value, got " + soft_nms);
      }
      if (method == "gaussian") {
        nms.method = exdet::SoftNmsParams::Method::kGaussian;
        nms.sigma = value;
      } else if (method == "linear") {
        nms.method = exdet::SoftNmsParams::Method::kLinear;
        nms.linear_threshold = value;
      } else {
        throw exdet::ConfigError("unknown soft-nms method " + method);
      }
      if (!(value > 0.0)) throw exdet::ConfigError("--soft-nms value must be > 0");
    }
    if (max_peaks < 1) throw exdet::ConfigError("--max-peaks must be >= 1");
    if (stride < 1) throw exdet::ConfigError("--stride must be >= 1");
    if (!(center_scale > 0.0)) throw exdet::ConfigError("--center-scale must be > 0");
    if (lambda_aggr < 0.0) throw exdet::ConfigError("--lambda-aggr must be >= 0");
    return p;
  }

  json header() const {
    return {{"tau_p", tau_p},         {"tau_c", tau_c},
            {"lambda_aggr", lambda_aggr}, {"max_peaks", max_peaks},
            {"center_scale", center_scale}, {"ghost", ghost},
            {"soft_nms", soft_nms},   {"refine", refine},
            {"stride", stride}};
  }
};

struct RenderFlags {
  int stride = 4;
  std::string sigma_mode = "proportional";
  double sigma = 1.0;
  double sigma_ratio = 1.0 / 20;
  double min_sigma = 1.0;

  void add_to(CLI::App* app) {
    app->add_option("--stride", stride, "Heatmap stride in pixels")
        ->capture_default_str();
    app->add_option("--sigma-mode", sigma_mode, "fixed or proportional")
        ->check(CLI::IsMember({"fixed", "proportional"}))
        ->capture_default_str();
    app->add_option("--sigma", sigma, "Kernel sigma in cells (fixed mode)")
        ->capture_default_str();
    app->add_option("--sigma-ratio", sigma_ratio,
                    "Sigma per box diagonal (proportional mode)")
        ->capture_default_str();
    app->add_option("--min-sigma", min_sigma, "Sigma floor (proportional mode)")
        ->capture_default_str();
  }

  exdet::RenderConfig config() const {
    if (stride < 1) throw exdet::ConfigError("--stride must be >= 1");
    exdet::RenderConfig c;
    c.stride = stride;
    c.gaussian.mode = sigma_mode == "fixed" ? exdet::GaussianSpec::Mode::kFixed
                                            : exdet::GaussianSpec::Mode::kProportional;
    c.gaussian.sigma = sigma;
    c.gaussian.ratio = sigma_ratio;
    c.gaussian.min_sigma = min_sigma;
    if (!(sigma > 0.0) || !(sigma_ratio > 0.0) || min_sigma < 0.0) {
      throw exdet::ConfigError("sigma settings must be positive");
    }
    return c;
  }
};

struct SynthFlags {
  std::uint64_t seed = 7;
  exdet::SynthConfig config;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--num-images", config.num_images)->capture_default_str();
    app->add_option("--first-image-id", config.first_image_id)->capture_default_str();
    app->add_option("--width", config.width)->capture_default_str();
    app->add_option("--height", config.height)->capture_default_str();
    app->add_option("--num-classes", config.num_classes)->capture_default_str();
    app->add_option("--min-objects", config.min_objects)->capture_default_str();
    app->add_option("--max-objects", config.max_objects)->capture_default_str();
    app->add_option("--min-size", config.min_size)->capture_default_str();
    app->add_option("--max-size", config.max_size)->capture_default_str();
    app->add_option("--separation", config.separation)->capture_default_str();
    app->add_option("--box-like-fraction", config.box_like_fraction)
        ->capture_default_str();
    app->add_flag("--ghost-trap", config.ghost_trap,
                  "Three equally spaced collinear objects per image");
  }
};

struct EvalFlags {
  std::string mode = "box";
  bool matches = false;
  int max_dets = 100;

  void add_to(CLI::App* app) {
    app->add_option("--mode", mode, "box or mask IoU")
        ->check(CLI::IsMember({"box", "mask"}))
        ->capture_default_str();
    app->add_flag("--matches", matches, "Include the per-detection match audit");
    app->add_option("--max-dets", max_dets, "Detections per image and class")
        ->capture_default_str();
  }

  exdet::EvalConfig config() const {
    exdet::EvalConfig c;
    c.mode = mode == "mask" ? exdet::EvalConfig::Mode::kMask
                            : exdet::EvalConfig::Mode::kBox;
    c.max_dets = max_dets;
    if (max_dets < 1) throw exdet::ConfigError("--max-dets must be >= 1");
    return c;
  }
};

std::vector<exdet::Category> categories_for(const std::string& annotations,
                                            int num_classes) {
  if (annotations.empty()) return exdet::default_categories(num_classes);
  auto cats = exdet::read_annotations(annotations).categories;
  if (static_cast<int>(cats.size()) != num_classes) {
    throw exdet::FormatError("tensor class count " + std::to_string(num_classes) +
                             " does not match " + std::to_string(cats.size()) +
                             " categories in " + annotations);
  }
  return cats;
}

// Tensor files named <image_id>.exhm, ordered by image id.
struct TensorInput {
  std::int64_t image_id;
  std::string path;
};

std::vector<TensorInput> collect_tensors(const std::vector<std::string>& inputs) {
  std::vector<std::string> paths;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.path().extension() == ".exhm") paths.push_back(entry.path().string());
      }
    } else {
      paths.push_back(in);
    }
  }
  std::vector<TensorInput> out;
  for (const auto& p : paths) {
    const std::string stem = fs::path(p).stem().string();
    std::size_t used = 0;
    std::int64_t id = 0;
    try {
      id = std::stoll(stem, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != stem.size()) {
      throw exdet::InputError("tensor file name must be <image_id>.exhm: " + p);
    }
    out.push_back({id, p});
  }
  std::sort(out.begin(), out.end(), [](const TensorInput& a, const TensorInput& b) {
    return a.image_id < b.image_id;
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].image_id == out[i - 1].image_id) {
      throw exdet::InputError("duplicate tensor for image " +
                              std::to_string(out[i].image_id));
    }
  }
  return out;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    exdet::write_file(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-point detection decoding, evaluation and benchmarking"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads,
                 "Worker threads (0 = all cores); default from EXDET_THREADS or 1");

  SynthFlags synth_flags;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotations file");
  synth_flags.add_to(synth);
  synth->add_option("-o,--out", synth_out, "Annotations JSON (default stdout)");

  RenderFlags render_flags;
  std::string render_ann, render_dir;
  auto* render = app.add_subcommand("render", "Render oracle tensors per image");
  render->add_option("-a,--annotations", render_ann)->required();
  render->add_option("-o,--out-dir", render_dir)->required();
  render_flags.add_to(render);

  DecodeFlags decode_flags;
  std::vector<std::string> decode_inputs;
  std::string decode_ann, decode_out;
  auto* decode = app.add_subcommand("decode", "Decode tensors into detections");
  decode->add_option("tensors", decode_inputs, "Tensor files or directories")
      ->required();
  decode->add_option("-a,--annotations", decode_ann,
                     "Take category ids from this annotations file");
  decode->add_option("-o,--out", decode_out, "Detections JSONL (default stdout)");
  decode_flags.add_to(decode);

  EvalFlags eval_flags;
  std::string eval_dets, eval_ann, eval_out;
  auto* eval = app.add_subcommand("eval", "Score detections against annotations");
  eval->add_option("-d,--detections", eval_dets)->required();
  eval->add_option("-a,--annotations", eval_ann)->required();
  eval->add_option("-o,--out", eval_out, "Results JSON (default stdout)");
  eval_flags.add_to(eval);

  DecodeFlags bench_decode;
  std::vector<std::string> bench_inputs;
  int bench_reps = 3;
  int bench_images = 1;
  std::uint64_t bench_seed = 1;
  exdet::BenchMapConfig bench_maps;
  std::string bench_out;
  auto* bench = app.add_subcommand(
      "bench", "Time decoding stages on tensor files or synthetic dense maps");
  bench->add_option("tensors", bench_inputs,
                    "Tensor files or directories; synthetic maps when omitted");
  bench->add_option("--repetitions", bench_reps)->capture_default_str();
  bench->add_option("--images", bench_images, "Synthetic images")->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--classes", bench_maps.num_classes)->capture_default_str();
  bench->add_option("--size", bench_maps.width, "Synthetic map side")
      ->capture_default_str();
  bench->add_option("--peaks", bench_maps.peaks, "Forced peaks per kind")
      ->capture_default_str();
  bool bench_dense = false;
  bench->add_flag("--dense-centers", bench_dense,
                  "Stress maps: every class holds --peaks objects with centers");
  bench->add_option("-o,--out", bench_out, "Report JSON (default stdout)");
  bench_decode.add_to(bench);

  SynthFlags rt_synth;
  RenderFlags rt_render;
  DecodeFlags rt_decode;
  EvalFlags rt_eval;
  std::string rt_ann, rt_dets_out, rt_out;
  auto* roundtrip = app.add_subcommand(
      "roundtrip", "Synthesize (or load) scenes, render, decode and evaluate");
  roundtrip->add_option("-a,--annotations", rt_ann,
                        "Use these scenes instead of synthesizing");
  roundtrip->add_option("--detections-out", rt_dets_out, "Also write detections");
  roundtrip->add_option("-o,--out", rt_out, "Results JSON (default stdout)");
  rt_synth.add_to(roundtrip);
  rt_decode.add_to(roundtrip);
  rt_eval.add_to(roundtrip);
  roundtrip->add_option("--sigma-mode", rt_render.sigma_mode)
      ->check(CLI::IsMember({"fixed", "proportional"}))
      ->capture_default_str();
  roundtrip->add_option("--sigma", rt_render.sigma)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads < 0) threads = exdet::default_thread_count();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    if (*synth) {
      synth_flags.config.validate();
      exdet::Dataset ds;
      ds.categories = exdet::default_categories(synth_flags.config.num_classes);
      ds.scenes = exdet::synth_scenes(synth_flags.seed, synth_flags.config, threads);
      emit(synth_out, exdet::format_annotations(ds));
    } else if (*render) {
      const auto cfg = render_flags.config();
      const exdet::Dataset ds = exdet::read_annotations(render_ann);
      fs::create_directories(render_dir);
      exdet::parallel_for(ds.scenes.size(), threads, [&](std::size_t i) {
        const auto& scene = ds.scenes[i];
        exdet::write_tensor(
            (fs::path(render_dir) / (std::to_string(scene.image_id) + ".exhm")).string(),
            exdet::render_scene(scene, ds.num_classes(), cfg));
      });
    } else if (*decode) {
      const auto params = decode_flags.params();
      const auto inputs = collect_tensors(decode_inputs);
      std::vector<exdet::ImageDetections> images(inputs.size());
      std::vector<int> class_counts(inputs.size());
      exdet::parallel_for(inputs.size(), threads, [&](std::size_t i) {
        const auto maps = exdet::read_tensor(inputs[i].path);
        class_counts[i] = maps.num_classes();
        images[i] = exdet::to_input_coordinates(
            inputs[i].image_id, exdet::decode_image(maps, params), decode_flags.stride);
      });
      int num_classes = class_counts.empty() ? 0 : class_counts[0];
      for (int c : class_counts) {
        if (c != num_classes) throw exdet::FormatError("tensors disagree on class count");
      }
      const auto cats = num_classes > 0 ? categories_for(decode_ann, num_classes)
                                        : std::vector<exdet::Category>{};
      emit(decode_out, exdet::format_detections(decode_flags.header(), images, cats));
    } else if (*eval) {
      const auto cfg = eval_flags.config();
      const exdet::Dataset ds = exdet::read_annotations(eval_ann);
      const auto dets = exdet::read_detections(eval_dets, ds.categories);
      const auto result = exdet::evaluate(ds.scenes, dets, ds.num_classes(), cfg, threads);
      emit(eval_out,
           exdet::eval_result_to_json(result, ds.categories, eval_flags.matches).dump(1) +
               "\n");
    } else if (*bench) {
      const auto params = bench_decode.params();
      std::vector<exdet::DetectionMaps> maps;
      if (bench_inputs.empty()) {
        bench_maps.height = bench_maps.width;
        if (bench_dense) bench_maps.mode = exdet::BenchMapConfig::Mode::kDenseCenters;
        maps.resize(std::max(bench_images, 0));
        exdet::parallel_for(maps.size(), threads, [&](std::size_t i) {
          maps[i] = exdet::make_bench_maps(bench_seed, static_cast<int>(i), bench_maps);
        });
      } else {
        for (const auto& in : collect_tensors(bench_inputs)) {
          maps.push_back(exdet::read_tensor(in.path));
        }
      }
      const auto report = exdet::run_bench(maps, params, bench_reps);
      emit(bench_out, exdet::bench_report_to_json(report).dump(1) + "\n");
    } else if (*roundtrip) {
      const auto params = rt_decode.params();
      rt_render.stride = rt_decode.stride;
      const auto render_cfg = rt_render.config();
      const auto eval_cfg = rt_eval.config();
      exdet::Dataset ds;
      if (rt_ann.empty()) {
        rt_synth.config.validate();
        ds.categories = exdet::default_categories(rt_synth.config.num_classes);
        ds.scenes = exdet::synth_scenes(rt_synth.seed, rt_synth.config, threads);
      } else {
        ds = exdet::read_annotations(rt_ann);
      }
      const auto result = exdet::run_roundtrip(ds.scenes, ds.num_classes(), render_cfg,
                                               params, eval_cfg, threads);
      if (!rt_dets_out.empty()) {
        exdet::write_file(rt_dets_out,
                          exdet::format_detections(rt_decode.header(), result.detections,
                                                   ds.categories));
      }
      emit(rt_out,
           exdet::eval_result_to_json(result.eval, ds.categories, rt_eval.matches).dump(1) +
               "\n");
    }
  } catch (const exdet::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const exdet::ConfigError& e) {
    std::cerr << "infeasible configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
