#include "siteswarm/harness/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "siteswarm/errors.hpp"
#include "siteswarm/ik/ik.hpp"
#include "siteswarm/rollout/advantage.hpp"
#include "siteswarm/sim/world.hpp"
#include "siteswarm/tasks/task_env.hpp"

namespace siteswarm::harness {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// World-frame capsule: segment a-b swept by radius r.
struct Capsule {
  sim::Segment2 seg;
  double r = 0.0;
};

std::vector<Capsule> capsules(const sim::Object& o) {
  std::vector<Capsule> out;
  for (const sim::Segment2& s : o.segments) out.push_back({sim::transform(o.pose, s), 0.0});
  for (const sim::Disc2& d : o.discs) {
    const sim::Vec2 c = sim::transform(o.pose, d.center);
    out.push_back({{c, c}, d.radius});
  }
  return out;
}

double min_distance(const std::vector<Capsule>& a, const std::vector<Capsule>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Capsule& x : a) {
    for (const Capsule& y : b) best = std::min(best, sim::segment_distance(x.seg, y.seg) - x.r - y.r);
  }
  return best;
}

}  // namespace

OracleResult gae_oracle(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), g(0.8, 1.0), x(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 10);
  std::bernoulli_distribution ends(0.25);
  OracleResult res{"gae", true, cases, 0.0, ""};
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t T = static_cast<std::size_t>(len(rng));
    const double gamma = g(rng), xi = x(rng), bootstrap = u(rng);
    std::vector<double> r(T), v(T);
    std::vector<std::uint8_t> m(T);
    for (std::size_t t = 0; t < T; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
      m[t] = ends(rng) ? 0 : 1;
    }
    const auto deltas = rollout::compute_deltas(r, v, bootstrap, m, gamma);
    const auto adv = rollout::compute_gae(deltas, m, gamma, xi);
    const auto ret = rollout::compute_returns(r, m, bootstrap, gamma);
    for (std::size_t t = 0; t < T; ++t) {
      // Explicit sums: follow the sequence until a mask cuts it.
      double a = 0.0, R = 0.0, w_adv = 1.0, w_ret = 1.0;
      bool cut = false;
      for (std::size_t k = t; k < T; ++k) {
        const double next_v = (k + 1 < T) ? v[k + 1] : bootstrap;
        const double delta = r[k] + gamma * (m[k] ? next_v : 0.0) - v[k];
        a += w_adv * delta;
        R += w_ret * r[k];
        w_adv *= gamma * xi;
        w_ret *= gamma;
        if (!m[k]) {
          cut = true;
          break;
        }
      }
      if (!cut) R += w_ret * bootstrap;
      res.max_error = std::max({res.max_error, std::abs(a - adv[t]), std::abs(R - ret[t])});
    }
  }
  res.passed = res.max_error < 1e-10;
  res.detail = fmt("max error %.3g over %g sequences", res.max_error, static_cast<double>(cases));
  return res;
}

OracleResult ik_oracle(std::uint64_t seed, std::size_t cases) {
  const sim::ArmSpec arm = tasks::make_task(tasks::TaskId::Task1).world.arms.at(0);
  const sim::Pose2 base = arm.mount;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OracleResult res{"ik", true, cases, 0.0, ""};
  std::size_t thrown = 0, wrong = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    std::vector<double> q(arm.joint_count()), guess(arm.joint_count());
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] = arm.lower[j] + u(rng) * (arm.upper[j] - arm.lower[j]);
      guess[j] = arm.lower[j] + u(rng) * (arm.upper[j] - arm.lower[j]);
    }
    const sim::Pose2 target = sim::forward_kinematics(arm, q, base).tip;
    try {
      const ik::IkSolution s = ik::solve_ik(arm, target, base, guess);
      const sim::Pose2 tip = sim::forward_kinematics(arm, s.angles, base).tip;
      const double e = (tip.position - target.position).norm();
      const double h = std::abs(sim::wrap_angle(tip.heading - target.heading));
      res.max_error = std::max({res.max_error, e, h});
    } catch (const std::exception&) {
      ++thrown;
    }
  }
  // Outside the annulus of the wrist centre.
  const double l1 = arm.link_lengths[0], l2 = arm.link_lengths[1], l3 = arm.link_lengths[2];
  const double inner = std::abs(l1 - l2), outer = l1 + l2;
  for (std::size_t c = 0; c < cases; ++c) {
    const double rad = (c % 4 == 0 && inner > 0.01) ? u(rng) * (inner - 0.005)
                                                    : outer + 0.005 + u(rng);
    const double phi = 2.0 * std::numbers::pi * u(rng), h = 2.0 * std::numbers::pi * u(rng);
    sim::Pose2 local{sim::Vec2(rad * std::cos(phi) + l3 * std::cos(h), rad * std::sin(phi) + l3 * std::sin(h)), h};
    const sim::Pose2 target = sim::compose(base, local);
    try {
      ik::solve_ik(arm, target, base, std::vector<double>(arm.joint_count(), 0.0));
      ++wrong;
    } catch (const UnreachableError&) {
    } catch (const std::exception&) {
      ++wrong;
    }
  }
  res.passed = res.max_error < 1e-9 && thrown == 0 && wrong == 0;
  res.detail = fmt("max FK error %.3g, %g reachable failures", res.max_error, static_cast<double>(thrown)) +
               fmt(", %g unreachable misses", static_cast<double>(wrong));
  return res;
}

OracleResult collision_oracle(std::uint64_t seed, std::size_t worlds) {
  sim::WorldSpec spec = tasks::make_task(tasks::TaskId::Task1).world;
  spec.collision_margin = 0.02;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OracleResult res{"collision", true, worlds, 0.0, ""};
  std::size_t disagreements = 0, contacts = 0;
  for (std::size_t w = 0; w < worlds; ++w) {
    std::vector<std::vector<double>> joints;
    for (const sim::ArmSpec& a : spec.arms) {
      std::vector<double> q(a.joint_count());
      for (std::size_t j = 0; j < q.size(); ++j) q[j] = a.lower[j] + u(rng) * (a.upper[j] - a.lower[j]);
      joints.push_back(std::move(q));
    }
    std::vector<sim::Object> objects;
    for (int k = 0; k < 3; ++k) {
      objects.push_back(sim::make_bolt("bolt" + std::to_string(k),
                                       sim::Vec2(-0.6 + 1.2 * u(rng), 0.1 + 0.6 * u(rng))));
    }
    objects.push_back(sim::make_plate("plate", {sim::Vec2(-0.5 + u(rng), 0.2 + 0.5 * u(rng)), 6.3 * u(rng)}));
    const sim::Vec2 f(-0.6 + 1.2 * u(rng), 0.2 + 0.6 * u(rng));
    objects.push_back(sim::make_fixture("fixture", {f, f + sim::Vec2(0.4 * u(rng) - 0.2, 0.4 * u(rng) - 0.2)}));
    sim::WorldState world = sim::make_world(spec, joints, sim::Pose2{}, objects);
    for (std::size_t a = 0; a < spec.arms.size(); ++a) {
      if (u(rng) < 0.3) {
        const int o = static_cast<int>(a) + 2 * static_cast<int>(u(rng) * 1.999);
        if (sim::holder_of(world, static_cast<std::size_t>(o)) < 0) world.grasped[a] = o;
      }
    }
    const sim::CollisionReport rep = sim::detect_collisions(spec, world);

    const double margin = spec.collision_margin;
    std::vector<std::vector<Capsule>> arm_caps;
    for (std::size_t a = 0; a < spec.arms.size(); ++a) {
      std::vector<Capsule> caps;
      for (const sim::Segment2& s : sim::arm_chain(spec, world, a).links) caps.push_back({s, 0.0});
      arm_caps.push_back(std::move(caps));
    }
    bool self = false;
    for (std::size_t a = 0; a < arm_caps.size(); ++a) {
      for (std::size_t b = a + 1; b < arm_caps.size(); ++b) {
        self = self || min_distance(arm_caps[a], arm_caps[b]) < margin;
      }
    }
    std::vector<std::uint8_t> arm_obj(spec.arms.size(), 0);
    for (std::size_t a = 0; a < spec.arms.size(); ++a) {
      const int held = world.grasped[a];
      for (std::size_t o = 0; o < world.objects.size(); ++o) {
        if (static_cast<int>(o) == held) continue;
        const std::vector<Capsule> oc = capsules(world.objects[o]);
        if (min_distance(arm_caps[a], oc) < margin) arm_obj[a] = 1;
        if (held >= 0 && min_distance(capsules(world.objects[static_cast<std::size_t>(held)]), oc) < margin) {
          arm_obj[a] = 1;
        }
      }
    }
    const bool any_obj = std::any_of(arm_obj.begin(), arm_obj.end(), [](std::uint8_t v) { return v != 0; });
    contacts += static_cast<std::size_t>(self) + static_cast<std::size_t>(any_obj);
    if (self != rep.self || arm_obj != rep.arm_object || any_obj != rep.object) ++disagreements;
  }
  res.max_error = static_cast<double>(disagreements);
  res.passed = disagreements == 0;
  res.detail = fmt("%g disagreements over %g worlds", static_cast<double>(disagreements), static_cast<double>(worlds)) +
               fmt(", %g worlds with contact flags", static_cast<double>(contacts));
  return res;
}

OracleResult segment_distance_oracle(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  constexpr int kSamples = 2000;
  OracleResult res{"segment", true, cases, 0.0, ""};
  bool below = false;
  for (std::size_t c = 0; c < cases; ++c) {
    const sim::Vec2 a0(u(rng), u(rng)), b0(u(rng), u(rng));
    const sim::Vec2 a1 = a0 + 0.5 * sim::Vec2(u(rng), u(rng));
    const sim::Vec2 b1 = (c % 10 == 0) ? b0 : b0 + 0.5 * sim::Vec2(u(rng), u(rng));
    const double exact = sim::segment_distance({a0, a1}, {b0, b1});
    double dense = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSamples; ++i) {
      const sim::Vec2 p = a0 + (a1 - a0) * (static_cast<double>(i) / kSamples);
      for (int j = 0; j <= kSamples; ++j) {
        dense = std::min(dense, (p - (b0 + (b1 - b0) * (static_cast<double>(j) / kSamples))).norm());
      }
    }
    if (exact > dense + 1e-12) below = true;
    res.max_error = std::max(res.max_error, std::abs(dense - exact));
  }
  res.passed = res.max_error < 2e-3 && !below;
  res.detail = fmt("max |dense - exact| %.3g", res.max_error) + (below ? ", exact above a sampled pair" : "");
  return res;
}

std::vector<OracleResult> run_oracle_suites(std::uint64_t seed) {
  return {gae_oracle(seed), ik_oracle(seed + 1), collision_oracle(seed + 2),
          segment_distance_oracle(seed + 3)};
}

}  // namespace siteswarm::harness
