#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pyrflow/accounting.hpp"
#include "pyrflow/errors.hpp"
#include "pyrflow/io/checkpoint.hpp"
#include "pyrflow/io/csv.hpp"
#include "pyrflow/io/grid_file.hpp"
#include "pyrflow/io/svg.hpp"
#include "pyrflow/model/tinyimage.hpp"
#include "pyrflow/model/toy2d.hpp"
#include "pyrflow/renoise_check.hpp"
#include "pyrflow/sampler.hpp"
#include "pyrflow/schedule.hpp"
#include "pyrflow/temporal.hpp"

namespace pyrflow::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out_dir;
};

/// Text reports go to stdout and, when --out-dir is given, also to a file
/// there. Binary and plot outputs always land in the output directory
/// ("." by default).
class Output {
 public:
  Output(const GlobalOptions& g, std::ostream& out) : g_(g), out_(out) {}

  std::filesystem::path dir() const {
    std::filesystem::path d = g_.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(g_.out_dir);
    std::filesystem::create_directories(d);
    return d;
  }

  void report(const std::string& name, const std::string& text) const {
    out_ << text;
    if (!g_.out_dir.empty()) write_text(name, text);
  }

  std::filesystem::path write_text(const std::string& name, const std::string& text) const {
    const auto path = dir() / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("failed writing " + path.string());
    return path;
  }

  std::ostream& out() const { return out_; }

 private:
  const GlobalOptions& g_;
  std::ostream& out_;
};

struct ScheduleOptions {
  int stages = 3;
  double gamma = kDecorrelationGamma;
};

inline std::string schedule_csv(const StageSchedule& sched) {
  std::ostringstream os;
  os << "k,divisor,s,e\n";
  for (int k = 0; k < sched.num_stages(); ++k) {
    const Stage& st = sched.stage(k);
    os << st.index << ',' << st.divisor << ',' << io::format_short(st.s) << ',' << io::format_short(st.e) << '\n';
  }
  return os.str();
}

struct RenoiseOptions {
  double gamma = kDecorrelationGamma;
  double s = 2.0 / 3.0;
  std::size_t samples = 1000000;
};

inline std::string renoise_report_text(const RenoiseReport& r) {
  std::ostringstream os;
  os << "quantity,measured,expected,tolerance\n";
  os << "noise_diagonal," << io::format_double(r.noise.diagonal) << ",1," << io::format_double(r.noise_tolerance)
     << '\n';
  os << "noise_off_diagonal," << io::format_double(r.noise.off_diagonal) << ',' << io::format_double(r.gamma) << ','
     << io::format_double(r.noise_tolerance) << '\n';
  os << "noise_max_block_sum," << io::format_double(r.noise.max_block_sum) << ",0,"
     << (r.gamma == kDecorrelationGamma ? "0" : "n/a") << '\n';
  os << "jump_max_mean_error," << io::format_double(r.jump.max_mean_error) << ",0,"
     << io::format_double(r.jump_tolerance) << '\n';
  os << "jump_mean_variance," << io::format_double(r.jump.mean_variance) << ','
     << io::format_double(r.jump.expected_variance) << ',' << io::format_double(r.jump_tolerance) << '\n';
  os << "jump_max_variance_error," << io::format_double(r.jump.max_variance_error) << ",0,"
     << io::format_double(r.jump_tolerance) << '\n';
  os << "jump_block_covariance," << io::format_double(r.jump.mean_block_covariance) << ",0,"
     << io::format_double(r.jump_tolerance) << '\n';
  os << (r.pass() ? "PASS" : "FAIL") << " off_diagonal=" << io::format_double(r.noise.off_diagonal)
     << " diagonal=" << io::format_double(r.noise.diagonal) << '\n';
  return os.str();
}

struct TrainOptions {
  std::string coupling = "both";
  std::string name;
  std::vector<std::size_t> hidden{64, 64};
};

inline std::string loss_csv(const std::vector<double>& losses) {
  std::ostringstream os;
  os << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) os << i << ',' << io::format_double(losses[i]) << '\n';
  return os.str();
}

inline std::string trajectory_text(const Trajectory& traj) {
  std::ostringstream os;
  io::write_trajectory_csv(os, traj);
  return os.str();
}

inline int run_train_toy2d(const GlobalOptions& g, model::TrainConfig cfg, const TrainOptions& t, const Output& o) {
  cfg.task = model::Task::Toy2d;
  cfg.seed = g.seed;
  cfg.hidden = t.hidden;
  std::vector<model::Coupling> modes;
  if (t.coupling == "both") {
    modes = {model::Coupling::Ours, model::Coupling::Random};
  } else if (t.coupling == "ours") {
    modes = {model::Coupling::Ours};
  } else if (t.coupling == "random") {
    modes = {model::Coupling::Random};
  } else {
    throw ArgumentError("coupling must be ours, random or both");
  }
  std::ostringstream summary;
  summary << "coupling,points,steps,final_loss,straightness,nearest_target_distance\n";
  for (auto mode : modes) {
    cfg.coupling = mode;
    const auto res = model::train_toy2d(cfg);
    const std::string stem = "toy2d_" + std::string(model::to_string(mode));
    io::save_checkpoint(o.dir() / (stem + ".pyrm"), res.net);
    o.write_text(stem + "_loss.csv", loss_csv(res.losses));
    const std::string traj = trajectory_text(res.samples.trajectory);
    o.write_text(stem + "_trajectory.csv", traj);
    std::istringstream is(traj);
    o.write_text(stem + ".svg", io::plot_trajectory_csv(is));
    summary << model::to_string(mode) << ',' << cfg.num_points << ',' << cfg.steps << ','
            << io::format_double(res.losses.empty() ? 0.0 : res.losses.back()) << ','
            << io::format_double(res.straightness) << ',' << io::format_double(res.nearest_target_distance)
            << '\n';
  }
  o.out() << summary.str();
  o.write_text("toy2d_summary.csv", summary.str());
  return kOk;
}

inline int run_train_image(const GlobalOptions& g, model::TrainConfig cfg, const TrainOptions& t, const Output& o) {
  cfg.task = model::Task::TinyImage;
  cfg.seed = g.seed;
  cfg.hidden = t.hidden;
  if (cfg.stages < 1 || cfg.stages > 4) throw ArgumentError("train-image supports 1 to 4 stages on 16x16 images");
  const auto res = model::train_tinyimage(cfg);
  const std::string stem = t.name.empty() ? "image_k" + std::to_string(cfg.stages) : t.name;
  io::save_checkpoint(o.dir() / (stem + ".pyrm"), res.net);
  o.write_text(stem + "_loss.csv", loss_csv(res.losses));
  std::ostringstream summary;
  summary << "stages,steps,pixel_evals,final_loss,energy_distance\n";
  summary << cfg.stages << ',' << res.losses.size() << ',' << res.pixel_evals << ','
          << io::format_double(res.losses.empty() ? 0.0 : res.losses.back()) << ','
          << io::format_double(res.energy_distance) << '\n';
  o.out() << summary.str();
  o.write_text(stem + "_summary.csv", summary.str());
  return kOk;
}

struct SampleOptions {
  std::string model;
  std::vector<int> steps;
  double guidance = 1.0;
  bool no_renoise = false;
  int particles = 256;
  std::size_t height = model::kTinyImageSide;
  std::size_t width = model::kTinyImageSide;
  std::string name = "sample";
};

inline int run_sample(const GlobalOptions& g, const SampleOptions& so, const Output& o) {
  if (so.guidance < 0.0) throw ArgumentError("guidance scale must be >= 0");
  const io::Checkpoint ck = io::load_checkpoint(so.model);
  const int K = ck.net.num_stages();
  SamplerConfig sc;
  sc.seed = g.seed;
  sc.guidance_scale = so.guidance;
  sc.renoise = !so.no_renoise;
  if (!so.steps.empty()) {
    if (static_cast<int>(so.steps.size()) != K) {
      throw ArgumentError("--steps needs " + std::to_string(K) + " entries for this model");
    }
    for (int n : so.steps) {
      if (n < 1) throw ArgumentError("steps per stage must be >= 1");
    }
    sc.steps_per_stage = so.steps;
  }
  const model::LocalMlpField field(ck.net, ck.spec);
  SampleResult res;
  if (ck.spec == model::kPointSpec) {
    if (so.particles < 1) throw ArgumentError("--particles must be >= 1");
    auto identity = [](const LatentGrid& x, int) { return x; };
    res = run_stages(field, model::toy_windows(K), sc, model::uniform_particles(so.particles, g.seed, 0x70617274),
                     identity);
  } else {
    res = sample(field, build_schedule(K), sc, Shape{so.height, so.width, 1});
  }
  io::save_grid(o.dir() / (so.name + ".pyrg"), res.sample);
  o.write_text(so.name + "_trajectory.csv", trajectory_text(res.trajectory));
  const auto& d = res.sample.data();
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  o.out() << "height,width,channels,mean\n"
          << res.sample.height() << ',' << res.sample.width() << ',' << res.sample.channels() << ','
          << io::format_double(mean) << '\n';
  return kOk;
}

struct TokensOptions {
  VideoSpec spec;
  int stages = 3;
  bool non_causal = false;
  std::vector<std::size_t> divisors;
};

inline std::string tokens_csv(const TokensOptions& t) {
  VideoSpec spec = t.spec;
  spec.causal_first_frame = !t.non_causal;
  spec.validate(t.stages);
  const std::vector<std::size_t> divisors =
      t.divisors.empty() ? default_history_divisors(spec, t.stages) : t.divisors;
  const std::size_t full = tokens_full(spec);
  const std::size_t pyr = tokens_pyramid(spec, t.stages, divisors);
  const auto cost_full = attention_cost(full);
  const auto cost_pyr = attention_cost(pyr);
  std::ostringstream os;
  os << "latent_frames,tokens_per_frame,tokens_full,tokens_pyramid,attention_full,attention_pyramid,cost_ratio\n";
  os << latent_frames(spec) << ',' << tokens_per_frame(spec) << ',' << full << ',' << pyr << ',' << cost_full << ','
     << cost_pyr << ',' << io::format_double(static_cast<double>(cost_pyr) / static_cast<double>(cost_full)) << '\n';
  return os.str();
}

struct MaskOptions {
  std::vector<std::size_t> tokens_per_frame;
  std::size_t frames = 0;
  std::size_t tokens = 0;
};

inline std::string mask_csv(const MaskOptions& m) {
  AttentionMask mask;
  if (!m.tokens_per_frame.empty()) {
    mask = causal_mask(m.tokens_per_frame);
  } else {
    if (m.frames == 0 || m.tokens == 0) throw ArgumentError("mask needs --tokens-per-frame or --frames and --tokens");
    mask = causal_mask(m.frames, m.tokens);
  }
  const std::size_t n = mask.num_tokens();
  if (n > 4096) throw ArgumentError("mask with " + std::to_string(n) + " tokens is too large to print");
  std::ostringstream os;
  os << "token,frame";
  for (std::size_t kv = 0; kv < n; ++kv) os << ",k" << kv;
  os << '\n';
  for (std::size_t q = 0; q < n; ++q) {
    os << q << ',' << mask.frame_of_token[q];
    for (std::size_t kv = 0; kv < n; ++kv) os << ',' << (mask.at(q, kv) ? 1 : 0);
    os << '\n';
  }
  return os.str();
}

struct PlotOptions {
  std::string input;
  std::string output = "plot.svg";
};

inline int run_plot(const PlotOptions& p, const Output& o) {
  std::ifstream is(p.input, std::ios::binary);
  if (!is) throw IoError("cannot open " + p.input);
  const std::string svg = io::plot_trajectory_csv(is);
  o.write_text(p.output, svg);
  return kOk;
}

/// Parses argv and runs one subcommand. Usage errors and failed checks return
/// 1, runtime and numerical failures 2.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"pyramidal flow matching toolkit", "pyrflow"};
  app.require_subcommand(1);
  app.allow_config_extras(false);
  app.set_config("--config", "", "INI config with one [subcommand] section per subcommand");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  auto* sched = app.add_subcommand("schedule", "print the stage windows as CSV")->fallthrough();
  ScheduleOptions so;
  sched->add_option("--stages", so.stages)->capture_default_str()->check(CLI::Range(1, 30));
  sched->add_option("--gamma", so.gamma)->capture_default_str();

  auto* ren = app.add_subcommand("verify-renoise", "Monte Carlo check of the jump transition")->fallthrough();
  RenoiseOptions ro;
  ren->add_option("--gamma", ro.gamma)->capture_default_str();
  ren->add_option("--s", ro.s)->capture_default_str();
  ren->add_option("--samples", ro.samples)->capture_default_str()->check(CLI::PositiveNumber);

  model::TrainConfig tcfg;
  TrainOptions topt;
  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--steps", tcfg.steps)->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--batch", tcfg.batch)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--lr", tcfg.lr)->capture_default_str();
    sub->add_option("--beta1", tcfg.beta1)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    sub->add_option("--beta2", tcfg.beta2)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    sub->add_option("--eps", tcfg.eps)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-grad-norm", tcfg.max_grad_norm)->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--hidden", topt.hidden)->delimiter(',')->capture_default_str();
    sub->add_option("--stage-weights", tcfg.stage_weights)->delimiter(',');
  };
  auto* toy = app.add_subcommand("train-toy2d", "train the 2D coupling experiment")->fallthrough();
  add_train_flags(toy);
  toy->add_option("--coupling", topt.coupling)
      ->capture_default_str()
      ->check(CLI::IsMember({"ours", "random", "both"}));
  toy->add_option("--points", tcfg.num_points)->capture_default_str()->check(CLI::IsMember({1, 3}));
  toy->add_option("--eval-particles", tcfg.eval_particles)->capture_default_str()->check(CLI::PositiveNumber);
  toy->add_option("--eval-steps", tcfg.eval_steps)->capture_default_str()->check(CLI::PositiveNumber);

  auto* img = app.add_subcommand("train-image", "train the tiny-image pyramid model")->fallthrough();
  add_train_flags(img);
  img->add_option("--stages", tcfg.stages)->capture_default_str();
  img->add_option("--pixel-budget", tcfg.pixel_budget)->capture_default_str()->check(CLI::NonNegativeNumber);
  img->add_option("--dataset-size", tcfg.dataset_size)->capture_default_str()->check(CLI::PositiveNumber);
  img->add_option("--eval-samples", tcfg.eval_samples)->capture_default_str()->check(CLI::NonNegativeNumber);
  img->add_option("--eval-steps", tcfg.eval_steps_per_stage)->capture_default_str()->check(CLI::PositiveNumber);
  img->add_flag("--single-image", tcfg.single_image);
  img->add_option("--name", topt.name, "output file stem");

  auto* smp = app.add_subcommand("sample", "sample from a checkpoint")->fallthrough();
  SampleOptions sopt;
  smp->add_option("--model", sopt.model)->required()->check(CLI::ExistingFile);
  smp->add_option("--steps", sopt.steps, "steps per stage, k0,k1,...")->delimiter(',');
  smp->add_option("--guidance", sopt.guidance)->capture_default_str();
  smp->add_flag("--no-renoise", sopt.no_renoise);
  smp->add_option("--particles", sopt.particles)->capture_default_str();
  smp->add_option("--height", sopt.height)->capture_default_str()->check(CLI::PositiveNumber);
  smp->add_option("--width", sopt.width)->capture_default_str()->check(CLI::PositiveNumber);
  smp->add_option("--name", sopt.name)->capture_default_str();

  auto* tok = app.add_subcommand("tokens", "token and attention-cost arithmetic")->fallthrough();
  TokensOptions kopt;
  tok->add_option("--frames", kopt.spec.frames)->capture_default_str();
  tok->add_option("--height", kopt.spec.height)->capture_default_str();
  tok->add_option("--width", kopt.spec.width)->capture_default_str();
  tok->add_option("--vae-spatial", kopt.spec.vae_spatial)->capture_default_str();
  tok->add_option("--vae-temporal", kopt.spec.vae_temporal)->capture_default_str();
  tok->add_option("--patch", kopt.spec.patch)->capture_default_str();
  tok->add_option("--stages", kopt.stages)->capture_default_str()->check(CLI::Range(1, 30));
  tok->add_flag("--non-causal", kopt.non_causal);
  tok->add_option("--divisors", kopt.divisors, "history divisors, oldest first")->delimiter(',');

  auto* msk = app.add_subcommand("mask", "blockwise causal attention mask as CSV")->fallthrough();
  MaskOptions mopt;
  msk->add_option("--tokens-per-frame", mopt.tokens_per_frame)->delimiter(',');
  msk->add_option("--frames", mopt.frames);
  msk->add_option("--tokens", mopt.tokens);

  auto* plt = app.add_subcommand("plot", "render a point trajectory CSV as SVG")->fallthrough();
  PlotOptions popt;
  plt->add_option("--input", popt.input)->required()->check(CLI::ExistingFile);
  plt->add_option("--output", popt.output)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kValidation;
  }

  const Output o(g, out);
  try {
    if (*sched) {
      o.report("schedule.csv", schedule_csv(build_schedule(so.stages, so.gamma)));
      return kOk;
    }
    if (*ren) {
      const RenoiseReport r = verify_renoise(ro.gamma, ro.s, ro.samples, g.seed);
      o.report("verify_renoise.csv", renoise_report_text(r));
      return r.pass() ? kOk : kValidation;
    }
    if (*toy) return run_train_toy2d(g, tcfg, topt, o);
    if (*img) return run_train_image(g, tcfg, topt, o);
    if (*smp) return run_sample(g, sopt, o);
    if (*tok) {
      o.report("tokens.csv", tokens_csv(kopt));
      return kOk;
    }
    if (*msk) {
      o.report("mask.csv", mask_csv(mopt));
      return kOk;
    }
    if (*plt) return run_plot(popt, o);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  err << app.help();
  return kValidation;
}

}  // namespace pyrflow::cli
