#ifndef HYPODIFF_PIPELINE_HPP
#define HYPODIFF_PIPELINE_HPP

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>

#include "corruption.hpp"
#include "evolution.hpp"
#include "lifting.hpp"
#include "metrics.hpp"
#include "smoothing.hpp"

namespace hypodiff {

/// A pipeline stage failed; `stage()` names it.
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string &what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string &stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

inline Mode parse_mode(const std::string &s) {
  if (s == "ptr2") return Mode::ptr2;
  if (s == "se2") return Mode::se2;
  if (s == "mumford") return Mode::mumford;
  throw InvalidInput("unknown mode '" + s + "'");
}

struct PipelineConfig {
  double sigma = 1.5; ///< smoothing std-dev, pixels
  double beta = 0.5;
  double time = 0.3;
  std::size_t n_theta = 32;
  /// Lift half-width; unset means one angular step (period / n_theta).
  std::optional<double> epsilon;
  Mode mode = Mode::ptr2;
  std::size_t iterations = 1;
  bool restore_known = false;
  std::size_t pad = 16;
  std::uint64_t seed = 0;

  double period() const { return mode_period(mode); }
  double resolved_epsilon() const {
    return epsilon.value_or(period() / static_cast<double>(n_theta));
  }

  LiftParams lift_params() const { return {resolved_epsilon(), n_theta, period(), -1.0}; }

  EvolutionParams evolution_params(double duration) const {
    EvolutionParams p;
    p.beta = beta;
    p.time = duration;
    p.mode = mode;
    return p;
  }

  void validate() const {
    if (!(sigma > 0.0)) throw InvalidInput("config: sigma must be positive");
    if (!(beta > 0.0)) throw InvalidInput("config: beta must be positive");
    if (!(time >= 0.0)) throw InvalidInput("config: time must be non-negative");
    if (iterations < 1) throw InvalidInput("config: iterations must be >= 1");
    if (mode != Mode::ptr2 && n_theta % 2 != 0)
      throw InvalidInput("config: modes with period 2 pi need an even n_theta");
    lift_params().validate();
  }

  /// Applies one key=value setting.
  void set(const std::string &key, const std::string &value) {
    const auto num = [&] {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used == 0 || used != value.size())
        throw InvalidInput("config: '" + key + "' expects a number, got '" + value + "'");
      return v;
    };
    const auto count = [&] {
      const double v = num();
      if (v < 0.0 || v != std::floor(v))
        throw InvalidInput("config: '" + key + "' expects a non-negative integer");
      return static_cast<std::size_t>(v);
    };
    if (key == "sigma") sigma = num();
    else if (key == "beta") beta = num();
    else if (key == "time") time = num();
    else if (key == "n_theta" || key == "theta_steps") n_theta = count();
    else if (key == "epsilon") epsilon = num();
    else if (key == "mode") mode = parse_mode(value);
    else if (key == "iterations") iterations = count();
    else if (key == "pad") pad = count();
    else if (key == "seed") seed = count();
    else if (key == "restore_known") {
      if (value == "true" || value == "1") restore_known = true;
      else if (value == "false" || value == "0") restore_known = false;
      else throw InvalidInput("config: restore_known expects true or false");
    } else
      throw InvalidInput("config: unknown key '" + key + "'");
  }

  /// Reads flat "key = value" lines; '#' starts a comment.
  void merge(std::istream &in) {
    const auto trim = [](const std::string &s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw InvalidInput("config line " + std::to_string(lineno) + ": expected key=value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  static PipelineConfig from_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path);
    PipelineConfig c;
    c.merge(in);
    return c;
  }

  nlohmann::json to_json() const {
    return {{"sigma", sigma},
            {"beta", beta},
            {"time", time},
            {"n_theta", n_theta},
            {"epsilon", resolved_epsilon()},
            {"mode", to_string(mode)},
            {"iterations", iterations},
            {"restore_known", restore_known},
            {"pad", pad},
            {"seed", seed}};
  }
};

/// Zero border of `pad` pixels on every side.
inline Image2D pad_image(const Image2D &img, std::size_t pad) {
  Image2D out(img.width() + 2 * pad, img.height() + 2 * pad, img.spacing());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) out(x + pad, y + pad) = img(x, y);
  return out;
}

inline Image2D crop_image(const Image2D &img, std::size_t pad, std::size_t width,
                          std::size_t height) {
  if (img.width() < width + 2 * pad || img.height() < height + 2 * pad)
    throw InvalidInput("crop_image: region exceeds image");
  Image2D out(width, height, img.spacing());
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) out(x, y) = img(x + pad, y + pad);
  return out;
}

/// Ones on the image domain inside a zero border of `pad` pixels.
inline Image2D unit_domain(const Image2D &img, std::size_t pad) {
  return pad_image(Image2D(img.width(), img.height(), img.spacing(), 1.0), pad);
}

/// Optional inputs and outputs around a pipeline run.
struct PipelineExtras {
  const Mask *mask = nullptr;            ///< known/unknown layer for restore and PSNR
  const Image2D *ground_truth = nullptr; ///< enables PSNR in the report
  std::function<void(const LiftedField &)> on_lift; ///< sees the first lift (padded grid)
};

struct PipelineResult {
  Image2D output;
  nlohmann::json report;
};

namespace detail {

template <class Fn>
auto run_stage(const char *name, double &ms, Fn &&fn) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      elapsed();
    } else {
      auto r = fn();
      elapsed();
      return r;
    }
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what());
  }
}

inline nlohmann::json decibels(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
}

} // namespace detail

/// Repeats smooth, lift, evolve(T / n_iter) and project `n_iter` times.
/// Known pixels are written back after each projection when requested.
inline PipelineResult iterate_pipeline(const Image2D &f, const PipelineConfig &cfg,
                                       std::size_t n_iter, const PipelineExtras &extras = {}) {
  if (n_iter < 1) throw InvalidInput("iterate_pipeline: n_iter must be >= 1");
  double t_config = 0;
  detail::run_stage("config", t_config, [&] { cfg.validate(); });
  if (cfg.restore_known && !extras.mask) throw StageError("config", "restore_known requires a mask");
  if (extras.mask && !extras.mask->matches(f))
    throw StageError("config", "mask differs in size from input");

  const double step = cfg.time / static_cast<double>(n_iter);
  double t_smooth = 0, t_lift = 0, t_evolve = 0, t_project = 0;
  double mass_drift = 0, residue = 0;

  // The max projection is divided by the projection of an evolved unit lift
  // with the same orientations. This cancels the 1/(2 eps) lift scale, the
  // angular spreading of the peak and the darkening near the zero border.
  Image2D current = f;
  for (std::size_t it = 0; it < n_iter; ++it) {
    const Image2D smoothed = detail::run_stage("smooth", t_smooth, [&] {
      return gaussian_convolve(pad_image(current, cfg.pad), cfg.sigma * current.spacing().hx,
                               cfg.sigma * current.spacing().hy);
    });
    const auto [lifted, unit] = detail::run_stage("lift", t_lift, [&] {
      const VectorField g = gradient(smoothed);
      return std::pair{lift_image(smoothed, g, cfg.lift_params()),
                       lift_image(unit_domain(current, cfg.pad), g, cfg.lift_params())};
    });
    if (it == 0 && extras.on_lift) extras.on_lift(lifted);
    const auto [ev, eu] = detail::run_stage("evolve", t_evolve, [&] {
      const EvolutionParams ep = cfg.evolution_params(step);
      return std::pair{evolve_field_with_diagnostics(lifted, ep), evolve_field(unit, ep)};
    });
    mass_drift = std::max(mass_drift, ev.mass_drift);
    residue = std::max(residue, ev.imaginary_residue);
    current = detail::run_stage("project", t_project, [&] {
      Image2D p = crop_image(project_max(ev.field), cfg.pad, f.width(), f.height());
      const Image2D r = crop_image(project_max(eu), cfg.pad, f.width(), f.height());
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(r.data()[i] > 0.0)) throw NumericalFailure("unit lift vanished", r.data()[i]);
        p.data()[i] /= r.data()[i];
      }
      if (cfg.restore_known)
        for (std::size_t i = 0; i < p.size(); ++i)
          if (!extras.mask->data[i]) p.data()[i] = f.data()[i];
      return p;
    });
  }

  nlohmann::json report;
  report["config"] = cfg.to_json();
  report["iterations"] = n_iter;
  report["width"] = f.width();
  report["height"] = f.height();
  report["padded_width"] = f.width() + 2 * cfg.pad;
  report["padded_height"] = f.height() + 2 * cfg.pad;
  report["timings_ms"] = {{"smooth", t_smooth},
                          {"lift", t_lift},
                          {"evolve", t_evolve},
                          {"project", t_project},
                          {"total", t_smooth + t_lift + t_evolve + t_project}};
  report["mass_drift"] = mass_drift;
  report["imaginary_residue"] = residue;
  if (extras.ground_truth) {
    const Image2D &gt = *extras.ground_truth;
    if (!gt.same_shape(f)) throw StageError("metrics", "ground truth differs in size from input");
    if (extras.mask) {
      report["psnr_masked_before"] = detail::decibels(psnr(f, gt, extras.mask));
      report["psnr_masked_after"] = detail::decibels(psnr(current, gt, extras.mask));
    }
    report["psnr_before"] = detail::decibels(psnr(f, gt));
    report["psnr_after"] = detail::decibels(psnr(current, gt));
  }
  return {std::move(current), std::move(report)};
}

/// The full pipeline with the configured iteration count.
inline PipelineResult run_pipeline(const Image2D &f, const PipelineConfig &cfg,
                                   const PipelineExtras &extras = {}) {
  return iterate_pipeline(f, cfg, cfg.iterations, extras);
}

} // namespace hypodiff

#endif
