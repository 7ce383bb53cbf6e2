// Copyright 2026 The cmsched Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmsched/analysis.hpp"
#include "cmsched/commands.hpp"
#include "cmsched/config.hpp"
#include "cmsched/curriculum.hpp"
#include "cmsched/io.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/model.hpp"
#include "cmsched/rng.hpp"
#include "cmsched/schedule.hpp"
#include "cmsched/toy_ct.hpp"

using namespace cmsched;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kEndpointRelTol = 1e-9;
constexpr double kMidpointRelTol = 1e-6;
// sigmas[125] of (0.002, 80, 7, 250), evaluated independently at 40 digits.
constexpr double kMidpointOracle = 2.515218976147158578827532275841355908371;
constexpr double kGradRelTol = 1e-4;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kImprovementFactor = 5.0;
constexpr double kMultistepSlack = 0.05;
constexpr double kUniqueLevelBudgetSeconds = 30.0;
constexpr double kDistributionBudgetSeconds = 10.0;
constexpr double kGradientBudgetSeconds = 30.0;
constexpr double kArmBudgetSeconds = 15.0 * 60.0;
constexpr double kMultistepBudgetSeconds = 60.0;

const fs::path kConfigs = CMSCHED_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

PointSet gaussian_points(int dim, int n, Rng& rng, double scale = 1.0) {
  PointSet p(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) p(i, j) = scale * rng.normal();
  }
  return p;
}

ToyModel perturbed_model(const ModelShape& shape, std::uint64_t seed) {
  ToyModel model(shape, ConsistencyParam{}, seed);
  Rng rng(seed ^ 0x5a5a);
  auto flat = model.params().flatten();
  for (double& v : flat) v += 0.3 * rng.normal();
  model.params().unflatten(flat);
  return model;
}

Outcome karras_array() {
  const NoiseArray array(KarrasParams{0.002, 80.0, 7.0, 250});
  const double lo = rel_err(array[0], 0.002);
  const double hi = rel_err(array[250], 80.0);
  const double mid = rel_err(array[125], kMidpointOracle);
  return {lo <= kEndpointRelTol && hi <= kEndpointRelTol && mid <= kMidpointRelTol,
          "sigmas[125]=" + fmt(array[125]) + " rel err " + fmt(mid) + ", endpoint rel err " + fmt(std::max(lo, hi))};
}

Outcome subsampling() {
  bool ok = true;
  const auto identity = subsample_indices(250, 250);
  for (std::int64_t i = 0; i <= 250; ++i) ok = ok && identity[static_cast<std::size_t>(i)] == i;
  const auto stride = subsample_indices(250, 125);
  for (std::int64_t i = 0; i <= 125; ++i) ok = ok && stride[static_cast<std::size_t>(i)] == 2 * i;
  Rng rng(2024);
  int bad = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto s1 = static_cast<std::int64_t>(1 + rng.below(5000));
    const auto n_k = static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(s1)));
    const auto idx = subsample_indices(s1, n_k);
    bool good = idx.size() == static_cast<std::size_t>(n_k + 1) && idx.front() == 0 && idx.back() == s1;
    for (std::size_t i = 1; good && i < idx.size(); ++i) good = idx[i] > idx[i - 1];
    if (!good) ++bad;
  }
  return {ok && bad == 0, "identity and stride-2 exact, " + std::to_string(trials - bad) + "/" +
                              std::to_string(trials) + " random (s1, n_k) monotone with pinned endpoints"};
}

Outcome unique_levels() {
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseArray array(KarrasParams{0.002, 80.0, 7.0, 250});
  CurriculumConfig cur;
  cur.total_steps = 10000;
  ScheduleConfig sched;
  sched.poly.batch_size = 256;
  const AuditResult closed = simulate_run_audit(cur, sched, array, 0, false);
  const AuditResult regen = simulate_run_audit(cur, sched, array, 0, true);
  const double secs = seconds_since(t0);
  return {closed.ok() && closed.distinct_count <= 251 && regen.distinct_count > 251 &&
              secs < kUniqueLevelBudgetSeconds,
          "predefined array " + std::to_string(closed.distinct_count) + " distinct, regenerated " +
              std::to_string(regen.distinct_count) + ", " + fmt(std::round(secs * 10) / 10) + " s"};
}

Outcome distribution_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseArray array(KarrasParams{0.002, 80.0, 7.0, 250});
  const BucketSpec buckets;
  NamedSchedule poly{"poly_c4", {}, 250};
  NamedSchedule logn{"lognormal", {}, 250};
  logn.schedule.kind = ScheduleKind::lognormal;
  const std::vector<NamedSchedule> both{poly, logn};
  const ScheduleComparison cmp = compare_schedules(both, array, 100000, 0, buckets);
  const double poly_top = cmp.reports[0].bucket_shares.back();
  const double logn_top = cmp.reports[1].bucket_shares.back();
  const double poly_low = cmp.reports[0].below_min_share;
  const double logn_low = cmp.reports[1].below_min_share;

  bool monotone = true;
  std::ostringstream means;
  double previous = INFINITY;
  for (int c = 1; c <= 5; ++c) {
    NamedSchedule s{"c", {}, 250};
    s.schedule.poly.curve = c;
    s.schedule.poly.jitter_std = 0.0;
    const auto sigmas = draw_schedule_sigmas(s, array, 100000, 0);
    double sum = 0.0;
    for (double v : sigmas) sum += v;
    const double mean = sum / static_cast<double>(sigmas.size());
    monotone = monotone && mean < previous;
    previous = mean;
    means << (c > 1 ? " " : "") << fmt(std::round(mean * 1e4) / 1e4);
  }
  const double secs = seconds_since(t0);
  return {poly_top > logn_top && logn_low > poly_low && monotone && secs < kDistributionBudgetSeconds,
          "(60,80] share poly " + fmt(poly_top) + " vs lognormal " + fmt(logn_top) + "; below-10 lognormal " +
              fmt(logn_low) + " vs poly " + fmt(poly_low) + "; mean sigma c=1..5: " + means.str()};
}

bool unimodal(const std::vector<std::int64_t>& v) {
  std::size_t i = 1;
  while (i < v.size() && v[i] >= v[i - 1]) ++i;
  while (i < v.size() && v[i] <= v[i - 1]) ++i;
  return i == v.size();
}

Outcome curriculum_shape() {
  CurriculumConfig sin;
  sin.total_steps = 100000;
  const CurriculumTrace st = trace(sin);
  std::int64_t plateaus = 1;
  for (std::size_t k = 1; k < st.n_of_k.size(); ++k) plateaus += st.n_of_k[k] != st.n_of_k[k - 1];
  const bool sin_ok = st.n_of_k.front() == 20 && st.max_n() == 250 && unimodal(st.n_of_k) && plateaus <= 32;

  CurriculumConfig dbl;
  dbl.kind = CurriculumKind::doubling;
  dbl.s1_cap = 1280;
  dbl.total_steps = 100000;
  const CurriculumTrace dt = trace(dbl);
  const std::set<std::int64_t> values(dt.n_of_k.begin(), dt.n_of_k.end());
  const bool dbl_ok = values == std::set<std::int64_t>{20, 40, 80, 160, 320, 640, 1280};
  return {sin_ok && dbl_ok, "sinusoidal N(0)=" + std::to_string(st.n_of_k.front()) + " max " +
                                std::to_string(st.max_n()) + " plateaus " + std::to_string(plateaus) +
                                (unimodal(st.n_of_k) ? " unimodal" : " NOT unimodal") + "; doubling takes " +
                                std::to_string(values.size()) + " values" + (dbl_ok ? " {20..1280}" : " (wrong set)")};
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseArray array(KarrasParams{});
  const ModelShape shape{2, {8, 8}, 8};
  double worst = 0.0;
  for (LossKind kind : {LossKind::squared, LossKind::pseudo_huber}) {
    LossConfig cfg;
    cfg.kind = kind;
    for (int trial = 0; trial < 20; ++trial) {
      Rng rng(7000 + static_cast<std::uint64_t>(trial));
      const ToyModel model = perturbed_model(shape, 300 + static_cast<std::uint64_t>(trial));
      const PointSet x = gaussian_points(2, 16, rng);
      const PointSet z = gaussian_points(2, 16, rng);
      MiniBatchSigmas sched;
      for (int j = 0; j < 16; ++j) {
        const std::size_t i = rng.below(array.size() - 1);
        sched.level_index.push_back(static_cast<std::int64_t>(i));
        sched.sigma_lo.push_back(array[i]);
        sched.sigma_hi.push_back(array[i + 1]);
      }
      const auto analytic = ct_loss(model, model, x, sched, z, cfg).grad.flatten();
      ToyModel probe = model;
      auto flat = model.params().flatten();
      for (std::size_t p = 0; p < flat.size(); ++p) {
        const double saved = flat[p];
        flat[p] = saved + kFiniteDiffStep;
        probe.params().unflatten(flat);
        const double up = ct_loss(probe, model, x, sched, z, cfg).loss;
        flat[p] = saved - kFiniteDiffStep;
        probe.params().unflatten(flat);
        const double down = ct_loss(probe, model, x, sched, z, cfg).loss;
        flat[p] = saved;
        const double numeric = (up - down) / (2.0 * kFiniteDiffStep);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[p]) / scale);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradientBudgetSeconds,
          "max relative error " + fmt(worst) + " over 2 loss kinds x 20 trials"};
}

Outcome boundary_identity() {
  Rng rng(77);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ToyModel model = perturbed_model(ModelShape{}, 900 + static_cast<std::uint64_t>(trial));
    const int n = 1 + static_cast<int>(rng.below(64));
    const PointSet x = gaussian_points(2, n, rng, 10.0);
    const std::vector<double> sigma(static_cast<std::size_t>(n), model.consistency().sigma_min);
    exact += consistency_forward(model, x, sigma) == x;
  }
  return {exact == 100, std::to_string(exact) + "/100 pairs bitwise equal"};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrainConfig load_train_config(const std::string& file) {
  return parse_train_config(parse_json_text(read_text_file(kConfigs / file), file));
}

struct ArmResult {
  std::vector<double> final_swd;
  std::vector<double> untrained_swd;
  std::vector<double> first_window;
  std::vector<double> last_window;
  double seconds = 0.0;
  ToyModel seed0_model;
  TrainConfig seed0_config;
};

double window_mean(const std::vector<double>& v, bool tail) {
  const std::size_t w = std::min<std::size_t>(1000, v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < w; ++i) s += tail ? v[v.size() - 1 - i] : v[i];
  return w ? s / static_cast<double>(w) : 0.0;
}

ArmResult run_arm(const std::string& file) {
  ArmResult arm;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed : {0, 1, 2}) {
    TrainConfig cfg = load_train_config(file);
    cfg.seed = seed;
    cfg.total_steps = 20000;
    cfg.batch_size = 256;
    cfg.dataset = Dataset::gaussian_mixture_8;
    TrainResult r = train(cfg);
    arm.final_swd.push_back(r.metrics.final_swd);
    arm.untrained_swd.push_back(r.metrics.untrained_swd);
    arm.first_window.push_back(window_mean(r.metrics.loss, false));
    arm.last_window.push_back(window_mean(r.metrics.loss, true));
    std::printf("  %s seed %llu: final SWD %s, untrained %s, loss %s -> %s\n", file.c_str(),
                static_cast<unsigned long long>(seed), fmt(r.metrics.final_swd).c_str(),
                fmt(r.metrics.untrained_swd).c_str(), fmt(arm.first_window.back()).c_str(),
                fmt(arm.last_window.back()).c_str());
    std::fflush(stdout);
    if (seed == 0) {
      arm.seed0_model = r.model;
      arm.seed0_config = cfg;
    }
  }
  arm.seconds = seconds_since(t0);
  return arm;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(std::round(x * 1e4) / 1e4);
  return s;
}

Outcome toy_comparison(const ArmResult& p, const ArmResult& l) {
  const double p_med = median(p.final_swd);
  const double l_med = median(l.final_swd);
  const double p_ratio = median(p.untrained_swd) / p_med;
  const double l_ratio = median(l.untrained_swd) / l_med;
  const bool ok = p_med <= l_med && p_ratio >= kImprovementFactor && l_ratio >= kImprovementFactor &&
                  p.seconds <= kArmBudgetSeconds && l.seconds <= kArmBudgetSeconds;
  return {ok, "median SWD poly+sinusoidal " + fmt(p_med) + " [" + list(p.final_swd) + "] vs lognormal+doubling " +
                  fmt(l_med) + " [" + list(l.final_swd) + "]; improvement " + fmt(std::round(p_ratio * 100) / 100) +
                  "x and " + fmt(std::round(l_ratio * 100) / 100) + "x (need " + fmt(kImprovementFactor) + "x); " +
                  fmt(std::round(p.seconds)) + " s and " + fmt(std::round(l.seconds)) + " s"};
}

Outcome multistep(const ArmResult& p) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig& cfg = p.seed0_config;
  const NoiseArray array(cfg.karras);
  EvalConfig one = cfg.eval;
  one.steps = 1;
  EvalConfig four = cfg.eval;
  four.steps = 4;
  const double swd1 = score_model(p.seed0_model, array, cfg.dataset, one, cfg.seed);
  const double swd4 = score_model(p.seed0_model, array, cfg.dataset, four, cfg.seed);
  const double secs = seconds_since(t0);
  return {swd4 <= swd1 + kMultistepSlack && secs < kMultistepBudgetSeconds,
          "reference run (poly+sinusoidal, seed 0): 1-step " + fmt(swd1) + ", 4-step " + fmt(swd4)};
}

// Runs a subcommand twice into separate directories and compares every artifact byte for byte.
bool reruns_identically(Subcommand sub, const std::string& config, const std::vector<std::string>& overrides,
                        const fs::path& root, std::string& detail) {
  const fs::path a = root / (to_string(sub) + "_a");
  const fs::path b = root / (to_string(sub) + "_b");
  for (const fs::path& dir : {a, b}) {
    CommandOptions opt;
    opt.subcommand = sub;
    opt.config_path = kConfigs / config;
    opt.output_dir = dir;
    opt.seed = 11;
    opt.overrides = overrides;
    run_command(opt);
  }
  int files = 0;
  bool same = true;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    same = same && read_text_file(entry.path()) == read_text_file(b / entry.path().filename());
  }
  detail += (detail.empty() ? "" : ", ") + to_string(sub) + " " + std::to_string(files) + " CSVs" +
            (same ? " identical" : " DIFFER");
  return same && files > 0;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "cmsched_acceptance";
  fs::remove_all(root);
  std::string detail;
  bool ok = reruns_identically(Subcommand::schedule, "poly_c4.json", {}, root, detail);
  ok = reruns_identically(Subcommand::curriculum, "sinusoidal.json", {}, root, detail) && ok;
  ok = reruns_identically(Subcommand::train, "p5_toy.json", {"total_steps=500"}, root, detail) && ok;
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

// With arguments, only the listed criteria run (criterion 9 needs 8).
int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  int ran = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    if (!selected.empty() && !selected.count(id)) return;
    ++ran;
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "Karras array", karras_array);
  report(2, "subsampling", subsampling);
  report(3, "unique-level bound", unique_levels);
  report(4, "distribution ordering", distribution_ordering);
  report(5, "curriculum shape", curriculum_shape);
  report(6, "gradient correctness", gradients);
  report(7, "boundary identity", boundary_identity);

  ArmResult poly;
  ArmResult baseline;
  bool trained = false;
  report(8, "toy comparison", [&] {
    poly = run_arm("p5_toy.json");
    baseline = run_arm("baseline_toy.json");
    trained = true;
    return toy_comparison(poly, baseline);
  });
  report(9, "multistep sampling", [&]() -> Outcome {
    if (!trained) return {false, "no reference model (criterion 8 did not train)"};
    return multistep(poly);
  });
  report(10, "determinism", determinism);

  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
