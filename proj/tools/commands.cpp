#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "ghostlab/config.hpp"
#include "ghostlab/error.hpp"
#include "ghostlab/fileio.hpp"
#include "ghostlab/gis1.hpp"
#include "ghostlab/imaging.hpp"
#include "ghostlab/moments.hpp"
#include "ghostlab/parallel.hpp"
#include "ghostlab/pgm.hpp"
#include "ghostlab/registration.hpp"
#include "ghostlab/specklesim.hpp"

namespace fs = std::filesystem;

namespace ghostlab::cli {
namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> frames;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Pipeline configuration file");
  cmd->add_option("--out", flags.out, "Output directory (overrides out_dir)");
  cmd->add_option("--seed", flags.seed, "Master seed (overrides seed)");
  cmd->add_option("--frames", flags.frames, "Frame count (overrides n_frames)");
  cmd->add_option("--threads", flags.threads, "Worker cap (default GHOSTLAB_THREADS)")
      ->check(CLI::PositiveNumber);
}

unsigned thread_count(const CommonFlags& flags) {
  return flags.threads ? *flags.threads : default_threads();
}

// Config with flag overrides applied; empty config when none was given.
PipelineConfig load_config(const CommonFlags& flags) {
  PipelineConfig cfg = flags.config.empty() ? PipelineConfig::parse("", fs::current_path())
                                            : PipelineConfig::load(flags.config);
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  if (flags.frames) cfg.set("n_frames", std::to_string(*flags.frames));
  if (!flags.out.empty()) cfg.set("out_dir", fs::absolute(flags.out).string());
  return cfg;
}

// Collects every output of a command and writes them only once all were
// produced, each through a temporary file and rename.
class OutputSet {
public:
  void add(fs::path path, std::string bytes) { files_.emplace_back(std::move(path), std::move(bytes)); }
  void commit() const {
    for (const auto& [path, bytes] : files_) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
    }
    for (const auto& [path, bytes] : files_) atomic_write(path, bytes);
  }

private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

fs::path arm_path(const fs::path& dir, int arm) { return dir / ("arm" + std::to_string(arm) + ".gis"); }

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt_d(Displacement d) {
  return "(" + std::to_string(d.dx) + ", " + std::to_string(d.dy) + ")";
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const CommonFlags& flags, std::ostream& out) {
  const PipelineConfig cfg = load_config(flags);
  const SimConfig sim = cfg.sim_config();
  const SimResult result = simulate(sim, thread_count(flags));
  const fs::path dir = cfg.out_dir();

  OutputSet outputs;
  for (int i = 0; i < 3; ++i) outputs.add(arm_path(dir, i + 1), gis1::encode(result.arms[i]));
  outputs.add(dir / "truth.txt", result.truth.to_text(sim));
  GrayImage mask{sim.object.extent, 255, {}};
  for (const double t : sim.object.transmission)
    mask.pixels.push_back(static_cast<std::uint16_t>(std::lround(t * 255.0)));
  outputs.add(dir / "object.pgm", encode_pgm(mask));
  outputs.commit();

  out << "simulated " << sim.speckle.grid_width << "x" << sim.speckle.grid_height << "x"
      << sim.speckle.n_frames << " frames, seed " << sim.speckle.seed << "\n";
  out << "speckle coh_radius = " << fmt(sim.speckle.coh_radius, 4)
      << " px, intensity FWHM = " << fmt(intensity_fwhm_for_coh_radius(sim.speckle.coh_radius), 4)
      << " px\n";
  for (int i = 0; i < 3; ++i) {
    const auto px = result.arms[i].pixels();
    double sum = 0.0;
    for (const double v : px) sum += v;
    out << "arm " << i + 1 << ": mean intensity " << fmt(sum / static_cast<double>(px.size()), 3)
        << ", decorrelation " << fmt(sim.arms[i].decorrelation, 4) << ", offset "
        << fmt_d(sim.arms[i].offset) << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- register

struct RegisterFlags {
  std::string anchor;
  std::optional<int> search_radius;
  std::string arms[3];
};

FrameStack load_arm(const std::string& flag, const fs::path& dir, int arm) {
  return read_stack(flag.empty() ? arm_path(dir, arm) : fs::path(flag));
}

void add_map_outputs(OutputSet& outputs, const fs::path& dir, const std::string& stem,
                     const CorrelationMap& map) {
  outputs.add(dir / (stem + ".csv"), map.to_csv());
  const Rendering heat =
      render({map.window.columns(), map.window.rows()}, map.values, 255);
  outputs.add(dir / (stem + ".pgm"), encode_pgm(heat.image));
  outputs.add(dir / (stem + ".pgm.txt"), heat.sidecar());
}

void report_registration(std::ostream& out, const std::string& label, const RegistrationResult& r,
                         const CorrelationMap& map) {
  out << label << ": d_max = " << fmt_d(r.d_max) << "\n";
  out << "  peak = " << fmt(r.peak_value) << "\n";
  out << "  fwhm = (" << fmt(r.fwhm_x, 3) << ", " << fmt(r.fwhm_y, 3) << ") px\n";
  out << "  distance = " << fmt(r.distance, 3) << " px\n";
  if (r.on_boundary) out << "  warning: peak lies on the search window boundary\n";
  if (r.fwhm_truncated) out << "  warning: FWHM crossing outside the map, value is a lower bound\n";
  if (const auto skipped = map.total_skipped())
    out << "  warning: " << skipped << " frame evaluations had zero spatial variance\n";
}

std::string registration_text(const RegistrationResult& r, const std::string& tag) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << tag << "=" << r.d_max.dx << "," << r.d_max.dy << "\n";
  os << tag << "_peak=" << r.peak_value << "\n";
  os << tag << "_fwhm_x=" << r.fwhm_x << "\n";
  os << tag << "_fwhm_y=" << r.fwhm_y << "\n";
  os << tag << "_distance=" << r.distance << "\n";
  os << tag << "_on_boundary=" << (r.on_boundary ? 1 : 0) << "\n";
  return os.str();
}

int cmd_register(const CommonFlags& flags, const RegisterFlags& rf, std::ostream& out) {
  const PipelineConfig cfg = load_config(flags);
  const fs::path dir = cfg.out_dir();
  FrameStack arms[3] = {load_arm(rf.arms[0], dir, 1), load_arm(rf.arms[1], dir, 2),
                        load_arm(rf.arms[2], dir, 3)};
  const Region anchor = rf.anchor.empty() ? cfg.get_region("anchor_region") : parse_region(rf.anchor);
  const SearchWindow window =
      rf.search_radius ? SearchWindow::symmetric(*rf.search_radius) : cfg.search_window();

  const std::size_t n_total = arms[0].n_frames();
  const std::size_t n_use =
      std::min<std::size_t>(n_total, cfg.get_u64_or("register_frames", n_total));
  if (n_use < n_total)
    for (auto& a : arms) a = frame_range(a, 0, n_use);

  const unsigned threads = thread_count(flags);
  const auto map12 = correlation_map(arms[0], anchor, arms[1], anchor, window, threads);
  const auto r12 = register_peak(map12, anchor, anchor);
  const Region anchor2 = shift_region(anchor, r12.d_max, arms[1].extent());
  const auto map23 = correlation_map(arms[1], anchor2, arms[2], anchor2, window, threads);
  const auto r23 = register_peak(map23, anchor2, anchor2);
  const Region anchor3 = shift_region(anchor2, r23.d_max, arms[2].extent());

  OutputSet outputs;
  std::string text = "anchor1=" + to_string(anchor) + "\nanchor2=" + to_string(anchor2) +
                     "\nanchor3=" + to_string(anchor3) + "\nframes=" + std::to_string(n_use) + "\n";
  text += registration_text(r12, "d12");
  text += registration_text(r23, "d23");
  outputs.add(dir / "registration.txt", text);
  add_map_outputs(outputs, dir, "map12", map12);
  add_map_outputs(outputs, dir, "map23", map23);
  outputs.commit();

  report_registration(out, "arm2 vs arm1", r12, map12);
  report_registration(out, "arm3 vs arm2", r23, map23);
  return 0;
}

// ------------------------------------------------------------- reconstruct

struct ReconstructFlags {
  int order = 0;
  int ref = 2;
  std::string d12;
  std::string d23;
  std::string bucket_region;
};

void add_image_outputs(OutputSet& outputs, const fs::path& dir, const std::string& stem,
                       const GhostImage& image) {
  outputs.add(dir / (stem + ".csv"), image.to_csv());
  const Rendering heat = render(image.extent, image.values, 255);
  outputs.add(dir / (stem + ".pgm"), encode_pgm(heat.image));
  std::string side = heat.sidecar();
  for (const auto& [k, v] : image.provenance) side += k + "=" + v + "\n";
  outputs.add(dir / (stem + ".pgm.txt"), side);
}

int cmd_reconstruct(const CommonFlags& flags, const ReconstructFlags& rf, std::ostream& out) {
  if (rf.order != 2 && rf.order != 3)
    throw UsageError("--order must be 2 or 3, got " + std::to_string(rf.order));
  if (rf.ref != 2 && rf.ref != 3) throw UsageError("--ref must be 2 or 3");
  const PipelineConfig cfg = load_config(flags);
  const fs::path dir = cfg.out_dir();

  Displacement d12, d23;
  if (!rf.d12.empty() && !rf.d23.empty()) {
    d12 = parse_displacement(rf.d12);
    d23 = parse_displacement(rf.d23);
  } else {
    const auto kv = parse_key_values(read_file(dir / "registration.txt"));
    if (!kv.count("d12") || !kv.count("d23"))
      throw FormatError("registration.txt lacks d12/d23 entries");
    d12 = rf.d12.empty() ? parse_displacement(kv.at("d12")) : parse_displacement(rf.d12);
    d23 = rf.d23.empty() ? parse_displacement(kv.at("d23")) : parse_displacement(rf.d23);
  }

  const FrameStack arm1 = read_stack(arm_path(dir, 1));
  const FrameStack arm2 = read_stack(arm_path(dir, 2));
  const FrameStack arm3 = read_stack(arm_path(dir, 3));
  const Region r1 = rf.bucket_region.empty() ? cfg.get_region("bucket_region")
                                             : parse_region(rf.bucket_region);
  const Region r2 = shift_region(r1, d12, arm2.extent());
  const Region r3 = shift_region(r2, d23, arm3.extent());
  const BucketSeries b = bucket(arm1, r1);
  const unsigned threads = thread_count(flags);

  GhostImage image;
  std::string stem;
  if (rf.order == 2) {
    image = rf.ref == 2 ? ghost2(b, arm2, r2, threads) : ghost2(b, arm3, r3, threads);
    stem = "ghost2_ref" + std::to_string(rf.ref);
  } else {
    image = ghost3(b, arm2, r2, arm3, r3, threads);
    stem = "ghost3";
  }
  image.provenance.emplace_back("d12", std::to_string(d12.dx) + "," + std::to_string(d12.dy));
  image.provenance.emplace_back("d23", std::to_string(d23.dx) + "," + std::to_string(d23.dy));

  OutputSet outputs;
  add_image_outputs(outputs, dir, stem, image);
  outputs.commit();

  out << "order " << rf.order << " ghost image " << image.extent.width << "x"
      << image.extent.height << " from " << image.n_frames << " frames";
  if (rf.order == 2) out << " (reference arm " << rf.ref << ")";
  out << ", " << image.undefined_count() << " undefined pixels\n";
  out << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  return 0;
}

// -------------------------------------------------------------- visibility

struct VisibilityFlags {
  std::string image;
  std::string back;
  std::string obj;
};

int cmd_visibility(const CommonFlags& flags, const VisibilityFlags& vf, std::ostream& out) {
  const PipelineConfig cfg = load_config(flags);
  const fs::path image_path = vf.image;
  GhostImage image = GhostImage::from_csv(read_file(image_path));
  fs::path side = image_path;
  side.replace_extension(".pgm.txt");
  if (fs::exists(side)) {
    const auto kv = parse_key_values(read_file(side));
    if (kv.count("order")) image.order = std::stoi(kv.at("order"));
  }
  const Region back = vf.back.empty() ? cfg.get_region("back_region") : parse_region(vf.back);
  const Region obj = vf.obj.empty() ? cfg.get_region("obj_region") : parse_region(vf.obj);
  const VisibilityReport report = visibility(image, back, obj);

  const fs::path dir = flags.out.empty() ? image_path.parent_path() : fs::path(flags.out);
  OutputSet outputs;
  outputs.add(dir / (image_path.stem().string() + "_visibility.csv"), report.to_csv());
  outputs.commit();
  out << report.to_text();
  return 0;
}

// ------------------------------------------------------------------- stats

struct StatsFlags {
  std::string stack;
  std::string region;
  std::size_t bins = 64;
};

int cmd_stats(const CommonFlags& flags, const StatsFlags& sf, std::ostream& out) {
  if (sf.bins == 0) throw UsageError("--bins must be positive");
  const FrameStack stack = read_stack(sf.stack);
  const Region region = sf.region.empty() ? Region(0, 0, static_cast<long>(stack.width()),
                                                   static_cast<long>(stack.height()))
                                          : parse_region(sf.region);
  const FrameStack view = crop(stack, region);

  const MomentSummary s = summarize(view.pixels());
  const double mean = *s.mean(0);
  const double mu2 = *s.central2(0);
  const double mu3 = *s.central3(0);
  const double g2 = mean != 0.0 ? (mu2 + mean * mean) / (mean * mean) : 1.0;

  double hi = 0.0;
  for (const double v : view.pixels()) hi = std::max(hi, v);
  const double width = hi > 0.0 ? hi / static_cast<double>(sf.bins) : 1.0;
  std::vector<std::size_t> counts(sf.bins, 0);
  for (const double v : view.pixels())
    ++counts[std::min(sf.bins - 1, static_cast<std::size_t>(v / width))];
  std::ostringstream hist;
  hist << std::setprecision(17) << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < sf.bins; ++i)
    hist << width * static_cast<double>(i) << "," << width * static_cast<double>(i + 1) << ","
         << counts[i] << "\n";

  const fs::path stack_path = sf.stack;
  const fs::path dir = flags.out.empty() ? stack_path.parent_path() : fs::path(flags.out);
  OutputSet outputs;
  outputs.add(dir / (stack_path.stem().string() + "_hist.csv"), hist.str());
  outputs.commit();

  out << "samples = " << s.count() << " (region " << to_string(region) << ", "
      << view.n_frames() << " frames)\n";
  out << "mean = " << fmt(mean) << "\n";
  out << "mu2 = " << fmt(mu2) << "\n";
  out << "mu3 = " << fmt(mu3) << "\n";
  out << "g2(0) = " << fmt(g2) << "\n";
  if (mean != 0.0) out << "mu3/mean^3 = " << fmt(mu3 / (mean * mean * mean)) << "\n";
  return 0;
}

// ------------------------------------------------------------------ render

struct RenderFlags {
  std::string stack;
  std::string image;
  std::size_t frame = 0;
  std::string output;
  unsigned maxval = 255;
};

int cmd_render(const RenderFlags& rf, std::ostream& out) {
  if (rf.stack.empty() == rf.image.empty()) throw UsageError("give exactly one of --stack or --image");
  if (rf.maxval != 255 && rf.maxval != 65535) throw UsageError("--maxval must be 255 or 65535");
  Rendering r;
  if (!rf.stack.empty()) {
    const FrameStack stack = read_stack(rf.stack);
    if (rf.frame >= stack.n_frames())
      throw RangeError("frame " + std::to_string(rf.frame) + " out of range (stack has " +
                       std::to_string(stack.n_frames()) + " frames)");
    r = render(stack.extent(), stack.frame(rf.frame), rf.maxval);
  } else {
    const GhostImage image = GhostImage::from_csv(read_file(rf.image));
    r = render(image.extent, image.values, rf.maxval);
  }
  OutputSet outputs;
  outputs.add(rf.output, encode_pgm(r.image));
  outputs.add(rf.output + ".txt", r.sidecar());
  outputs.commit();
  out << "rendered " << r.image.extent.width << "x" << r.image.extent.height << " to " << rf.output
      << " (min " << r.lo << ", max " << r.hi << ", " << r.undefined.size() << " undefined)\n";
  return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ghostlab: thermal-light ghost imaging simulation and reconstruction"};
  app.require_subcommand(1);

  CommonFlags common;
  RegisterFlags reg;
  ReconstructFlags rec;
  VisibilityFlags vis;
  StatsFlags st;
  RenderFlags rnd;

  auto* sim = app.add_subcommand("simulate", "Simulate three frame-aligned arm stacks");
  add_common(sim, common);

  auto* regc = app.add_subcommand("register", "Register arms 2 and 3 by displacement search");
  add_common(regc, common);
  regc->add_option("--anchor", reg.anchor, "Object-free anchor region x,y,w,h in arm 1");
  regc->add_option("--search-radius", reg.search_radius, "Symmetric search radius in pixels");
  regc->add_option("--arm1", reg.arms[0], "Arm 1 stack (default OUT/arm1.gis)");
  regc->add_option("--arm2", reg.arms[1], "Arm 2 stack (default OUT/arm2.gis)");
  regc->add_option("--arm3", reg.arms[2], "Arm 3 stack (default OUT/arm3.gis)");

  auto* recc = app.add_subcommand("reconstruct", "Reconstruct a ghost image");
  add_common(recc, common);
  recc->add_option("--order", rec.order, "Correlation order, 2 or 3")->required();
  recc->add_option("--ref", rec.ref, "Reference arm for order 2 (2 or 3)");
  recc->add_option("--d12", rec.d12, "Arm 2 displacement dx,dy (default from registration.txt)");
  recc->add_option("--d23", rec.d23, "Arm 3 displacement dx,dy (default from registration.txt)");
  recc->add_option("--bucket", rec.bucket_region, "Bucket region x,y,w,h in arm 1");

  auto* visc = app.add_subcommand("visibility", "Visibility of a ghost image");
  add_common(visc, common);
  visc->add_option("--image", vis.image, "Ghost image CSV")->required();
  visc->add_option("--back", vis.back, "Background region x,y,w,h in image coordinates");
  visc->add_option("--obj", vis.obj, "Object region x,y,w,h in image coordinates");

  auto* stc = app.add_subcommand("stats", "Pooled speckle statistics of a stack region");
  add_common(stc, common);
  stc->add_option("--stack", st.stack, "GIS1 stack")->required();
  stc->add_option("--region", st.region, "Region x,y,w,h (default full frame)");
  stc->add_option("--bins", st.bins, "Histogram bins");

  auto* rndc = app.add_subcommand("render", "Render a frame or ghost image to PGM");
  add_common(rndc, common);
  rndc->add_option("--stack", rnd.stack, "GIS1 stack");
  rndc->add_option("--frame", rnd.frame, "Frame index");
  rndc->add_option("--image", rnd.image, "Ghost image CSV");
  rndc->add_option("--output", rnd.output, "Output PGM path")->required();
  rndc->add_option("--maxval", rnd.maxval, "PGM maxval, 255 or 65535");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(common, out);
    if (*regc) return cmd_register(common, reg, out);
    if (*recc) return cmd_reconstruct(common, rec, out);
    if (*visc) return cmd_visibility(common, vis, out);
    if (*stc) return cmd_stats(common, st, out);
    if (*rndc) return cmd_render(rnd, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

} // namespace ghostlab::cli
