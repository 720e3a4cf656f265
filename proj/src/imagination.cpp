#include "seatbear/imagination.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "seatbear/error.hpp"
#include "seatbear/json_util.hpp"

namespace seatbear {

namespace ju = json_util;

namespace {

constexpr double kJlEps = 1e-9;

int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, n);
  return std::min<int>(n, static_cast<int>(std::max<std::size_t>(1, jobs)));
}

std::vector<DropRecord> run_drops(const Mesh& aligned, std::span<const DropSpec> specs,
                                  const AgentModel& agent, const sam::SamConfig& cfg,
                                  const SimParams& sim, int workers) {
  std::vector<DropRecord> out(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      out[i] = run_drop(aligned, specs[i], agent, cfg, sim);
    }
  };
  const int n = worker_count(workers, specs.size());
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  pool.clear();
  return out;
}

bool drop_less(const DropRecord& a, const DropRecord& b) {
  if (a.spec.rotation != b.spec.rotation) return a.spec.rotation < b.spec.rotation;
  return a.spec.offset_index < b.spec.offset_index;
}

}  // namespace

nlohmann::json to_json(const SittingPose& s) { return {{"p", ju::vec(s.p)}, {"gamma", s.gamma}}; }

SittingPose sitting_pose_from_json(const nlohmann::json& j) {
  return {ju::vec3(j.at("p")), j.at("gamma").get<double>()};
}

DropSchedule make_schedule(const Obb& obb, bool extended, double l_sit_scale) {
  DropSchedule s;
  s.l_sit = l_sit_scale * 2.0 * obb.half_extents.x();
  s.extended = extended;
  const int reach = extended ? 3 : 1;
  for (int i = 0; i < 8; ++i) {
    for (int k = -reach; k <= reach; ++k) {
      s.drops.push_back({i, k, i * kPi / 4.0, k * s.l_sit});
    }
  }
  return s;
}

std::vector<DropSpec> extension_drops(const DropSchedule& extended) {
  std::vector<DropSpec> out;
  for (const auto& d : extended.drops) {
    if (std::abs(d.offset_index) > 1) out.push_back(d);
  }
  return out;
}

void ImaginationParams::validate() const {
  if (!(l_sit_scale > 0)) throw ConfigError("imagination: l_sit_scale must be > 0");
  if (workers < 0) throw ConfigError("imagination: workers must be >= 0");
}

nlohmann::json to_json(const ImaginationParams& p) {
  return {{"l_sit_scale", p.l_sit_scale}, {"workers", p.workers}};
}

ImaginationParams imagination_params_from_json(const nlohmann::json& j) {
  ImaginationParams p;
  try {
    p.l_sit_scale = j.value("l_sit_scale", p.l_sit_scale);
    p.workers = j.value("workers", p.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("imagination config: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const ImaginationReport& r) {
  nlohmann::json drops = nlohmann::json::array();
  for (const auto& d : r.drops) {
    drops.push_back({{"rotation", d.spec.rotation},
                     {"offset_index", d.spec.offset_index},
                     {"alpha", d.spec.alpha},
                     {"offset", d.spec.offset},
                     {"verdict", sam::to_json(d.verdict)},
                     {"pose_chair", to_json(d.pose_chair)},
                     {"settled", d.settled},
                     {"diverged", d.diverged},
                     {"sim_time", d.sim_time}});
  }
  return {{"drops", drops},
          {"n_correct", r.n_correct},
          {"alpha_star", r.alpha_star},
          {"extended", r.extended},
          {"found", r.found},
          {"l_sit", r.l_sit},
          {"obb", ju::obb(r.obb)},
          {"pose", to_json(r.pose)},
          {"wall_time", r.wall_time}};
}

ImaginationReport imagination_report_from_json(const nlohmann::json& j) {
  ImaginationReport r;
  for (const auto& d : j.at("drops")) {
    DropRecord rec;
    rec.spec = {d.at("rotation").get<int>(), d.at("offset_index").get<int>(),
                d.at("alpha").get<double>(), d.at("offset").get<double>()};
    rec.verdict = sam::sam_verdict_from_json(d.at("verdict"));
    rec.pose_chair = sitting_pose_from_json(d.at("pose_chair"));
    rec.settled = d.at("settled").get<bool>();
    rec.diverged = d.at("diverged").get<bool>();
    rec.sim_time = d.at("sim_time").get<double>();
    r.drops.push_back(rec);
  }
  r.n_correct = j.at("n_correct").get<std::array<int, 8>>();
  r.alpha_star = j.at("alpha_star").get<int>();
  r.extended = j.at("extended").get<bool>();
  r.found = j.at("found").get<bool>();
  r.l_sit = j.at("l_sit").get<double>();
  r.obb = ju::obb(j.at("obb"));
  r.pose = sitting_pose_from_json(j.at("pose"));
  r.wall_time = j.at("wall_time").get<double>();
  return r;
}

SittingPose aggregate_pose(std::span<const WeightedSitting> sittings, const RigidTransform& g_obb) {
  if (sittings.empty()) throw EmptyList("aggregate_pose: no sittings");
  double wsum = 0.0, s = 0.0, c = 0.0;
  Vec3 p = Vec3::Zero();
  for (const auto& ws : sittings) {
    const double w = 1.0 / std::max(ws.jl, kJlEps);
    wsum += w;
    p += w * ws.pose.p;
    s += w * std::sin(ws.pose.gamma);
    c += w * std::cos(ws.pose.gamma);
  }
  const SittingPose mean{p / wsum, std::atan2(s, c)};
  return mean.mapped(g_obb.inverse());
}

DropRecord run_drop(const Mesh& aligned_chair, const DropSpec& spec, const AgentModel& agent,
                    const sam::SamConfig& sam_cfg, const SimParams& sim) {
  DropRecord rec;
  rec.spec = spec;
  const auto parts = sam::body_parts(agent);
  try {
    Scene scene = build_drop_scene(aligned_chair, spec.alpha, agent, Vec2(spec.offset, 0.0), sim);
    const Configuration res = settle(scene, sim);
    rec.verdict = sam::classify(res, sam::key_configuration(agent), sam_cfg, parts);
    rec.settled = res.settled;
    rec.sim_time = res.sim_time;
    const RigidTransform in_chair = scene.chair_transform().inverse() * res.base;
    rec.pose_chair = {in_chair.translation, wrap_angle(in_chair.yaw())};
  } catch (const Diverged&) {
    rec.diverged = true;
    rec.verdict = sam::SamVerdict{};
    rec.verdict.T.assign(parts.size(), 0);
  }
  return rec;
}

void reduce_report(ImaginationReport& r, const RigidTransform& g_obb) {
  std::sort(r.drops.begin(), r.drops.end(), drop_less);
  r.n_correct.fill(0);
  std::array<double, 8> jl_sum{};
  for (const auto& d : r.drops) {
    if (!d.verdict.correct) continue;
    ++r.n_correct[static_cast<std::size_t>(d.spec.rotation)];
    jl_sum[static_cast<std::size_t>(d.spec.rotation)] += d.verdict.JL;
  }
  r.alpha_star = -1;
  r.found = false;
  for (int i = 0; i < 8; ++i) {
    const auto n = r.n_correct[static_cast<std::size_t>(i)];
    if (n == 0) continue;
    if (r.alpha_star < 0) {
      r.alpha_star = i;
      continue;
    }
    const auto best = static_cast<std::size_t>(r.alpha_star);
    const double mean = jl_sum[static_cast<std::size_t>(i)] / n;
    const double best_mean = jl_sum[best] / r.n_correct[best];
    if (n > r.n_correct[best] || (n == r.n_correct[best] && mean < best_mean)) r.alpha_star = i;
  }
  if (r.alpha_star < 0) return;
  std::vector<WeightedSitting> picks;
  for (const auto& d : r.drops) {
    if (d.verdict.correct && d.spec.rotation == r.alpha_star) picks.push_back({d.pose_chair, d.verdict.JL});
  }
  r.pose = aggregate_pose(picks, g_obb);
  r.found = true;
}

SittingPose imagine(const Mesh& chair, const AgentModel& agent, const sam::SamConfig& sam_cfg,
                    const SimParams& sim, const ImaginationParams& params,
                    ImaginationReport* report_out) {
  const auto t0 = std::chrono::steady_clock::now();
  params.validate();
  sam_cfg.validate(agent.joint_count(), agent.link_count());
  const Obb obb = compute_obb(chair);
  const RigidTransform g_obb = obb_alignment_transform(obb);
  const Mesh aligned = chair.transformed(g_obb);

  ImaginationReport r;
  r.obb = obb;
  const DropSchedule base = make_schedule(obb, false, params.l_sit_scale);
  r.l_sit = base.l_sit;
  r.drops = run_drops(aligned, base.drops, agent, sam_cfg, sim, params.workers);
  const auto correct = std::count_if(r.drops.begin(), r.drops.end(),
                                     [](const DropRecord& d) { return d.verdict.correct; });
  if (correct <= 1) {
    r.extended = true;
    const auto extra = extension_drops(make_schedule(obb, true, params.l_sit_scale));
    auto more = run_drops(aligned, extra, agent, sam_cfg, sim, params.workers);
    r.drops.insert(r.drops.end(), more.begin(), more.end());
  }
  reduce_report(r, g_obb);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report_out) *report_out = r;
  if (!r.found) throw NoSittingFound("imagine: no correct sitting after extension");
  return r.pose;
}

}  // namespace seatbear
