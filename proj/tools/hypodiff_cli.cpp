#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "hypodiff/corruption.hpp"
#include "hypodiff/curves.hpp"
#include "hypodiff/image_io.hpp"
#include "hypodiff/kernel.hpp"
#include "hypodiff/lifted_io.hpp"
#include "hypodiff/morse.hpp"
#include "hypodiff/pipeline.hpp"
#include "hypodiff/smoothing.hpp"

namespace hd = hypodiff;
using nlohmann::json;

namespace {

void emit(const json &j, const std::string &path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw hd::InvalidInput("cannot write " + path);
  out << j.dump(2) << '\n';
}

// Pipeline settings given on the command line; each maps to a config key and
// overrides the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool restore_known = false;

  void attach(CLI::App *app) {
    app->add_option("--config", config_file, "flat key=value config file")->check(CLI::ExistingFile);
    const std::pair<const char *, const char *> keys[] = {
        {"--sigma", "sigma"},         {"--beta", "beta"},   {"--time", "time"},
        {"--theta-steps", "n_theta"}, {"--epsilon", "epsilon"}, {"--mode", "mode"},
        {"--iterations", "iterations"}, {"--pad", "pad"},   {"--seed", "seed"}};
    for (const auto &[flag, key] : keys) app->add_option(flag, values[key]);
    app->add_flag("--restore-known", restore_known, "write known pixels back after each pass");
  }

  hd::PipelineConfig resolve(const CLI::App *app) const {
    hd::PipelineConfig cfg;
    if (!config_file.empty()) cfg = hd::PipelineConfig::from_file(config_file);
    for (const auto &[key, value] : values) {
      const std::string flag = key == "n_theta" ? "--theta-steps" : "--" + key;
      if (app->count(flag) > 0) cfg.set(key, value);
    }
    if (restore_known) cfg.restore_known = true;
    cfg.validate();
    return cfg;
  }
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Hypoelliptic diffusion image inpainting"};
  app.require_subcommand(1);

  // inpaint
  auto *inpaint = app.add_subcommand("inpaint", "reconstruct a corrupted image");
  std::string in_path, out_path, mask_path, truth_path, report_path, dump_lift;
  ConfigFlags flags;
  inpaint->add_option("input", in_path, "corrupted image (PGM or PNG)")->required()->check(CLI::ExistingFile);
  inpaint->add_option("-o,--output", out_path, "reconstructed image")->required();
  inpaint->add_option("--mask", mask_path, "mask image, nonzero marks corrupted pixels")->check(CLI::ExistingFile);
  inpaint->add_option("--ground-truth", truth_path, "uncorrupted image for PSNR")->check(CLI::ExistingFile);
  inpaint->add_option("--report", report_path, "JSON report path ('-' for stdout)")->default_val("-");
  inpaint->add_option("--dump-lift", dump_lift, "write the lifted field of the first pass");
  flags.attach(inpaint);

  // corrupt
  auto *corrupt = app.add_subcommand("corrupt", "apply a synthetic corruption mask");
  std::string c_in, c_out, c_mask, c_kind = "stripes";
  double c_coverage = 0.1;
  std::size_t c_thickness = 2;
  std::uint64_t c_seed = 0;
  bool c_vertical = false;
  corrupt->add_option("input", c_in)->required()->check(CLI::ExistingFile);
  corrupt->add_option("-o,--output", c_out, "corrupted image")->required();
  corrupt->add_option("--mask", c_mask, "where to write the mask image");
  corrupt->add_option("--kind", c_kind, "stripes, grid, diagonal or random_blocks")->default_val("stripes");
  corrupt->add_option("--coverage", c_coverage, "fraction of corrupted pixels")->default_val(0.1);
  corrupt->add_option("--thickness", c_thickness, "stripe width or block side in pixels")->default_val(2);
  corrupt->add_flag("--vertical", c_vertical, "vertical stripes");
  corrupt->add_option("--seed", c_seed)->default_val(0);

  // kernel-eval
  auto *kernel = app.add_subcommand("kernel-eval", "evaluate the SE(2) or PT R^2 heat kernel");
  double kx = 0, ky = 0, kth = 0, kt = 0.5, kbeta = 1.0;
  std::vector<double> kbar;
  bool kptr2 = false;
  kernel->add_option("--x", kx);
  kernel->add_option("--y", ky);
  kernel->add_option("--theta", kth);
  kernel->add_option("--time", kt)->default_val(0.5);
  kernel->add_option("--beta", kbeta)->default_val(1.0);
  kernel->add_flag("--ptr2", kptr2, "projective kernel p(g) + p(g Pi)");
  kernel->add_option("--from", kbar, "base point x y theta for the projective kernel")->expected(3);

  // curve-cost
  auto *curve = app.add_subcommand("curve-cost", "cost, energy and cusps of a sampled curve");
  std::string curve_path;
  double cbeta = 1.0;
  curve->add_option("curve", curve_path, "rows of 't x y [theta]'")->required()->check(CLI::ExistingFile);
  curve->add_option("--beta", cbeta)->default_val(1.0);

  // morse-check
  auto *morse = app.add_subcommand("morse-check", "critical points of a (smoothed) image");
  std::string m_in;
  double m_sigma = 0.0;
  morse->add_option("input", m_in)->required()->check(CLI::ExistingFile);
  morse->add_option("--sigma", m_sigma, "Gaussian smoothing in pixels before the scan (0 = none)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inpaint) {
      const hd::PipelineConfig cfg = flags.resolve(inpaint);
      const hd::Image2D input = hd::load_image(in_path);
      std::optional<hd::Mask> mask;
      std::optional<hd::Image2D> truth;
      if (!mask_path.empty()) mask = hd::Mask::from_image(hd::load_image(mask_path));
      if (!truth_path.empty()) truth = hd::load_image(truth_path);
      hd::PipelineExtras extras;
      extras.mask = mask ? &*mask : nullptr;
      extras.ground_truth = truth ? &*truth : nullptr;
      if (!dump_lift.empty())
        extras.on_lift = [&](const hd::LiftedField &v) { hd::write_lifted_field(dump_lift, v); };
      const auto result = hd::run_pipeline(input, cfg, extras);
      hd::save_image(result.output, out_path);
      emit(result.report, report_path);
    } else if (*corrupt) {
      hd::MaskSpec spec;
      spec.kind = hd::parse_mask_kind(c_kind);
      spec.coverage = c_coverage;
      spec.thickness = c_thickness;
      spec.vertical = c_vertical;
      const auto c = hd::corrupt_image(hd::load_image(c_in), spec, c_seed);
      hd::save_image(c.image, c_out);
      if (!c_mask.empty()) hd::save_image(c.mask.to_image(), c_mask);
      emit({{"kind", hd::to_string(spec.kind)}, {"coverage", c.mask.fraction()}, {"seed", c_seed}}, "-");
    } else if (*kernel) {
      const hd::Se2HeatKernel p(kt, hd::KernelQuadrature::defaults_for(kt, kbeta), kbeta);
      const hd::Se2 g{kx, ky, kth};
      json j{{"x", kx}, {"y", ky}, {"theta", kth}, {"time", kt}, {"beta", kbeta}};
      if (kptr2) {
        const hd::Se2 gbar = kbar.size() == 3 ? hd::Se2{kbar[0], kbar[1], kbar[2]} : hd::Se2{};
        j["from"] = {gbar.x, gbar.y, gbar.theta};
        j["ptr2"] = p.ptr2(g, gbar);
      } else {
        const auto v = p.evaluate(g);
        j["value"] = v.value;
        j["imaginary"] = v.imaginary;
      }
      emit(j, "-");
    } else if (*curve) {
      std::ifstream in(curve_path);
      hd::LiftedCurve lc = hd::read_curve(in);
      const hd::PlanarCurve pc = lc.planar();
      json j{{"samples", pc.size()}, {"beta", cbeta}};
      try {
        j["cost"] = hd::cost_J(pc, cbeta);
        j["energy"] = hd::energy_E(pc, cbeta);
      } catch (const hd::CuspCandidate &e) {
        j["cost"] = nullptr;
        j["energy"] = nullptr;
        j["vanishing_velocity_node"] = e.node();
      }
      if (lc.theta.empty()) {
        try {
          lc = hd::lift_curve(pc);
        } catch (const hd::InvalidInput &) {
        }
      }
      if (!lc.theta.empty()) j["cusps"] = hd::detect_cusps(lc);
      emit(j, "-");
    } else if (*morse) {
      hd::Image2D img = hd::load_image(m_in);
      if (m_sigma > 0.0) img = hd::gaussian_convolve(img, m_sigma);
      const hd::PixelWindow window =
          m_sigma > 0.0 ? hd::PixelWindow::with_margin(img, std::ceil(4 * m_sigma))
                        : hd::PixelWindow{};
      const auto r = hd::find_critical_points(img, window);
      json pts = json::array();
      for (const auto &p : r.points)
        pts.push_back({{"x", p.x}, {"y", p.y}, {"kind", hd::to_string(p.kind)},
                       {"hessian_det", p.hessian_det}, {"gradient_norm", p.gradient_norm}});
      emit({{"is_morse", r.is_morse}, {"count", r.count()}, {"points", pts}}, "-");
    }
  } catch (const hd::FormatError &e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
