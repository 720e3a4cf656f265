// seatbear command line: dataset generation, imagination, planning, trials, bench.
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seatbear/chair_gen.hpp"
#include "seatbear/error.hpp"
#include "seatbear/imagination.hpp"
#include "seatbear/mesh_io.hpp"
#include "seatbear/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seatbear;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mesh;
  std::string protocol;
  int parallel = 1;
};

class IoError : public Error {
 public:
  using Error::Error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

json config_json(const Options& o) { return o.config.empty() ? json::object() : read_json(o.config); }

TrialConfig trial_config(const Options& o) {
  TrialConfig t = trial_config_from_json(config_json(o));
  if (o.seed) t.seed = *o.seed;
  if (!o.mesh.empty()) t.chair.mesh_path = o.mesh;
  if (!o.protocol.empty()) t.protocol = protocol_from_string(o.protocol);
  return t;
}

void print_instructions(const TrialResult& r) {
  if (!r.assistance) return;
  for (const auto& round : r.assistance->rounds) std::cerr << round.instruction.text() << '\n';
}

// ---- subcommands ----

void gen_dataset(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path("dataset") : fs::path(o.out);
  fs::create_directories(dir);
  const ChairGenParams base = trial_config_from_json(config_json(o)).chair.gen;
  const std::uint64_t shift = o.seed.value_or(0);

  struct Item {
    std::string set;
    ChairVariant variant;
    std::uint64_t seed;
  };
  std::vector<Item> items;
  for (auto s : calibration_seeds()) items.push_back({"calibration", ChairVariant::Standard, s});
  for (auto s : heldout_seeds()) items.push_back({"heldout", ChairVariant::Standard, s});
  for (auto s : desk_seeds()) items.push_back({"desk", ChairVariant::Standard, s});
  items.push_back({"special", ChairVariant::StepStoolNarrowSeat, 0});
  items.push_back({"special", ChairVariant::StoolNoBack, 0});
  items.push_back({"special", ChairVariant::ImprovisedStack, 0});

  json chairs = json::array();
  for (const auto& it : items) {
    ChairGenParams p = base;
    p.variant = it.variant;
    p.seed = it.seed + shift;
    const GeneratedChair g = generate_chair(p);
    const std::string name = it.set + "_" + to_string(it.variant) + "_" + std::to_string(p.seed);
    const fs::path mesh_path = dir / (name + ".obj");
    try {
      save_mesh(mesh_path, g.mesh);
    } catch (const MeshFormatError& e) {
      throw IoError(e.what());
    }
    json entry = {{"name", name},
                  {"set", it.set},
                  {"mesh", mesh_path.string()},
                  {"physics", physics_sidecar_path(mesh_path).string()},
                  {"generator", to_json(p)},
                  {"seat", to_json(g.seat)},
                  {"triangles", g.mesh.faces.size()}};
    write_json((dir / (name + ".seat.json")).string(), entry);
    chairs.push_back(entry);
  }
  const json manifest = {{"directory", dir.string()}, {"chairs", chairs}};
  write_json((dir / "manifest.json").string(), manifest);
  std::cout << manifest.dump(2) << '\n';
}

void imagine_cmd(const Options& o) {
  TrialConfig t = trial_config_from_json(config_json(o));
  if (!o.mesh.empty()) t.chair.mesh_path = o.mesh;
  if (o.seed) t.chair.gen.seed = *o.seed;  // picks the generated chair
  const LoadedChair chair = load_chair(t.chair);
  const PipelineConfig& pc = t.config;
  ImaginationReport report;
  json out = {{"chair", chair.description}};
  try {
    const SittingPose pose = imagine(chair.mesh, pc.agent(), pc.sam_config(), pc.sim, pc.imagination, &report);
    out["found"] = true;
    out["pose"] = to_json(pose);
    out["error"] = nullptr;
  } catch (const NoSittingFound& e) {
    out["found"] = false;
    out["pose"] = nullptr;
    out["error"] = e.what();
  }
  if (chair.seat) out["ground_truth"] = to_json(*chair.seat);
  out["report"] = to_json(report);
  write_json(o.out, out);
}

void trial_cmd(const Options& o, Stage last) {
  const TrialResult r = run_trial(trial_config(o), last);
  print_instructions(r);
  write_json(o.out, to_json(r));
}

void bench_cmd(const Options& o) {
  const json cj = config_json(o);
  const TrialConfig base = trial_config_from_json(cj);
  std::vector<std::uint64_t> seeds = heldout_seeds();
  if (cj.contains("chair_seeds")) {
    try {
      seeds = cj.at("chair_seeds").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("chair_seeds: ") + e.what());
    }
  }
  if (seeds.empty()) throw ConfigError("chair_seeds is empty");
  std::vector<TrialConfig> suite = bench_suite(seeds, base.config, o.seed.value_or(base.seed));
  for (auto& t : suite) {
    const std::uint64_t chair_seed = t.chair.gen.seed;
    t.chair.gen = base.chair.gen;
    t.chair.gen.seed = chair_seed;
  }
  if (!o.protocol.empty()) {
    const Protocol keep = protocol_from_string(o.protocol);
    std::erase_if(suite, [&](const TrialConfig& t) { return t.protocol != keep; });
  }
  if (o.parallel < 1) throw ConfigError("--parallel must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<TrialResult> results = run_suite(suite, o.parallel);
  BenchSummary summary = summarize(results);
  summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json trials = json::array();
  for (const auto& r : results) trials.push_back(to_json(r));
  write_json(o.out, {{"summary", to_json(summary)}, {"trials", trials}});
  // keep stdout parseable when the JSON goes there
  std::FILE* table_stream = o.out.empty() ? stderr : stdout;
  std::fputs(format_table(summary).c_str(), table_stream);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot-assisted chair sitting: imagination, planning and simulated trials"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { o.seed = s; }, "seed");
    sub->add_option("--out", o.out, "output path (stdout when omitted)");
    sub->add_option("--mesh", o.mesh, "chair mesh (.obj / .stl)");
    sub->add_option("--protocol", o.protocol, "accessible | obey | disobey");
    sub->add_option("--parallel", o.parallel, "concurrent trials");
  };

  auto* gen = app.add_subcommand("gen-dataset", "write calibration, held-out, desk and special chairs");
  auto* img = app.add_subcommand("imagine", "imagine a sitting pose on one chair");
  auto* plan = app.add_subcommand("plan", "run a trial up to the walking plan");
  auto* trial = app.add_subcommand("trial", "run one full trial");
  auto* bench = app.add_subcommand("bench", "12 chairs x 6 trials, summary table");
  for (auto* s : {gen, img, plan, trial, bench}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) gen_dataset(o);
    if (*img) imagine_cmd(o);
    if (*plan) trial_cmd(o, Stage::Navigation);
    if (*trial) trial_cmd(o, Stage::Verdict);
    if (*bench) bench_cmd(o);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const MeshFormatError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const EmptyMesh& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const DegenerateParams& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
