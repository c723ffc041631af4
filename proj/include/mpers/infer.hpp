#pragma once

// Desk-scale topological inference: sample a Gaussian mixture, estimate its
// density by KDE, build the superlevelset-Čech bifiltration of the sample and
// compare its homology grid module against the ground truth computed from the
// true density on a finite ambient grid.

#include <mpers/exactnum.hpp>
#include <mpers/filtration.hpp>
#include <mpers/homology.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mpers {

/// Probe grid for inference. Unset bounds are derived from the density:
/// function axis [-5/4 max density, 0], scale axis [0, ambient width / 8].
struct InferGridSpec {
  std::size_t function_points = 17;
  std::size_t scale_points = 17;
  std::size_t ambient_points = 33;
  std::optional<Rational> function_min;
  std::optional<Rational> scale_max;

  std::string str() const {
    std::string s = "f=" + std::to_string(function_points) + ",s=" + std::to_string(scale_points) +
                    ",ambient=" + std::to_string(ambient_points);
    if (function_min) s += ",fmin=" + function_min->str();
    if (scale_max) s += ",smax=" + scale_max->str();
    return s;
  }
};

/// "f=17,s=17,ambient=33,fmin=-5/4,smax=1/2"; every key optional.
inline InferGridSpec parse_infer_grid_spec(const std::string& text) {
  InferGridSpec g;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("grid spec item '" + item + "' is not key=value");
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    auto count = [&] {
      Rational r = Rational::parse(value);
      if (!r.is_integer() || r.sign() <= 0 || r > Rational(100000)) throw ParseError("bad count in grid spec: " + value);
      return static_cast<std::size_t>(r.numerator().get_ui());
    };
    if (key == "f") g.function_points = count();
    else if (key == "s") g.scale_points = count();
    else if (key == "ambient") g.ambient_points = count();
    else if (key == "fmin") g.function_min = Rational::parse(value);
    else if (key == "smax") g.scale_max = Rational::parse(value);
    else throw ParseError("unknown grid spec key '" + key + "'");
  }
  if (g.function_points < 2 || g.scale_points < 2 || g.ambient_points < 2)
    throw ParseError("grid spec counts must be at least 2");
  if (g.function_min && g.function_min->sign() >= 0) throw ParseError("fmin must be negative");
  if (g.scale_max && g.scale_max->sign() <= 0) throw ParseError("smax must be positive");
  return g;
}

struct InferConfig {
  DensitySpec density;
  std::vector<std::size_t> samples;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  KdeSpec kde;
  InferGridSpec grid;
  std::size_t degree = 0;
  Metric metric = Metric::L2;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

inline void validate_config(const InferConfig& c) {
  c.density.validate();
  if (c.samples.empty()) throw DomainError("no sample sizes");
  for (std::size_t k = 1; k < c.samples.size(); ++k)
    if (c.samples[k] < c.samples[k - 1]) throw DomainError("sample sizes must be ascending");
  if (c.trials == 0) throw DomainError("trials must be positive");
  if (c.kde.bandwidth.sign() <= 0) throw DomainError("bandwidth must be positive");
  if (c.metric == Metric::L1) throw DomainError("Cech bifiltrations do not support the l1 metric");
}

/// Evenly spaced values lo, ..., hi.
inline std::vector<Rational> linspace(const Rational& lo, const Rational& hi, std::size_t count) {
  std::vector<Rational> v;
  for (std::size_t k = 0; k < count; ++k)
    v.push_back(lo + (hi - lo) * Rational(static_cast<long>(k), static_cast<long>(count - 1)));
  return v;
}

/// Ambient grid: the box of centers +- 4 sigma, `per_axis` points per axis.
inline PointCloud ambient_grid(const DensitySpec& spec, std::size_t per_axis) {
  const std::size_t m = spec.dim();
  std::vector<std::vector<Rational>> axis(m);
  for (std::size_t d = 0; d < m; ++d) {
    Rational lo = spec.components[0].center[d] - Rational(4) * spec.components[0].sigma;
    Rational hi = spec.components[0].center[d] + Rational(4) * spec.components[0].sigma;
    for (const auto& c : spec.components) {
      lo = min(lo, c.center[d] - Rational(4) * c.sigma);
      hi = max(hi, c.center[d] + Rational(4) * c.sigma);
    }
    axis[d] = linspace(lo, hi, per_axis);
  }
  PointCloud y{m, {}};
  std::vector<std::size_t> idx(m, 0);
  for (;;) {
    std::vector<Rational> p;
    for (std::size_t d = 0; d < m; ++d) p.push_back(axis[d][idx[d]]);
    y.points.push_back(std::move(p));
    std::size_t d = m;
    while (d-- > 0) {
      if (++idx[d] < per_axis) break;
      idx[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  return y;
}

/// Negated true density on the ambient grid, rounded to multiples of 2^-30.
inline FunctionValues negated_density(const DensitySpec& spec, const PointCloud& y) {
  FunctionValues f;
  for (const auto& p : y.points) {
    std::vector<double> x;
    for (const auto& c : p) x.push_back(c.to_double());
    f.push_back({Rational::from_double(-density_value(spec, x), kKernelBits)});
  }
  return f;
}

/// The (function, scale) probe grid of an experiment.
inline Grid inference_grid(const InferConfig& c) {
  PointCloud y = ambient_grid(c.density, c.grid.ambient_points);
  Rational fmin;
  if (c.grid.function_min) {
    fmin = *c.grid.function_min;
  } else {
    Rational lowest(0);
    for (const auto& g : negated_density(c.density, y)) lowest = min(lowest, g[0]);
    fmin = Rational::from_double((lowest * Rational(5, 4)).to_double(), 10);
    if (fmin.sign() >= 0) fmin = Rational(-1, 1024);
  }
  Rational smax;
  if (c.grid.scale_max) {
    smax = *c.grid.scale_max;
  } else {
    Rational width(0);
    for (std::size_t d = 0; d < y.dim; ++d) width = max(width, y.points.back()[d] - y.points.front()[d]);
    smax = width / Rational(8);
  }
  return make_grid({linspace(fmin, Rational(0), c.grid.function_points), linspace(Rational(0), smax, c.grid.scale_points)});
}

/// H_degree grid module of the Čech bifiltration of (x, f), restricted to
/// function values below 0. Simplices above the grid's scale range are omitted.
inline GridModule cech_grid_module(const PointCloud& x, const FunctionValues& f, Metric metric, std::size_t degree,
                                   const Grid& grid, Field field = Field::prime(2)) {
  BifilteredComplex c = cech_bifiltration(x, metric, f, degree + 1, grid.axes.back().back());
  GridModule g = grid_module_of(chain_complex_of(c, field), degree, grid);
  return restrict_grid_module(g, {ExtendedReal(0), ExtendedReal::infinity()});
}

/// Ground truth: sublevelset-offset bifiltration of the negated density on the
/// ambient grid, realized as its Čech nerve.
inline GridModule ground_truth_module(const InferConfig& c, const Grid& grid) {
  PointCloud y = ambient_grid(c.density, c.grid.ambient_points);
  return cech_grid_module(y, negated_density(c.density, y), c.metric, c.degree, grid);
}

/// Distance for one trial; +inf for an empty sample.
inline ExtendedReal trial_distance(const InferConfig& c, const Grid& grid, const GridModule& truth,
                                   std::size_t sample_size, std::uint64_t trial_seed) {
  if (sample_size == 0) return ExtendedReal::infinity();
  PointCloud t = sample_density(c.density, sample_size, trial_seed);
  std::vector<Rational> kde = kde_evaluate(t, c.kde, t);
  FunctionValues f;
  for (const auto& v : kde) f.push_back({-v});
  deduplicate_points(t, f);
  return rank_shift_distance(cech_grid_module(t, f, c.metric, c.degree, grid), truth);
}

/// Median; the mean of the middle pair for even counts, +inf if either is infinite.
inline ExtendedReal median(std::vector<ExtendedReal> v) {
  if (v.empty()) throw DomainError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2) return v[n / 2];
  const auto &a = v[n / 2 - 1], &b = v[n / 2];
  if (!a.is_finite() || !b.is_finite()) return ExtendedReal::infinity();
  return ExtendedReal((a.value() + b.value()) / Rational(2));
}

struct ExperimentRecord {
  InferConfig config;
  Grid grid;
  std::vector<std::vector<std::uint64_t>> trial_seeds;  ///< [size][trial]
  std::vector<std::vector<ExtendedReal>> distances;     ///< [size][trial]
  std::vector<ExtendedReal> medians;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = config.seed;
    j["density"] = config.density.str();
    j["samples"] = config.samples;
    j["trials"] = config.trials;
    j["kernel"] = kernel_str(config.kde.kernel);
    j["bandwidth"] = config.kde.bandwidth.str();
    j["degree"] = config.degree;
    j["metric"] = metric_str(config.metric);
    j["grid"] = config.grid.str();
    auto axis = [](const std::vector<Rational>& a) {
      std::vector<std::string> s;
      for (const auto& x : a) s.push_back(x.str());
      return s;
    };
    j["function_axis"] = axis(grid.axes[0]);
    j["scale_axis"] = axis(grid.axes[1]);
    j["trial_seeds"] = trial_seeds;
    nlohmann::ordered_json d = nlohmann::ordered_json::array();
    for (const auto& row : distances) {
      std::vector<std::string> s;
      for (const auto& x : row) s.push_back(x.str());
      d.push_back(s);
    }
    j["distances"] = d;
    std::vector<std::string> med;
    for (const auto& m : medians) med.push_back(m.str());
    j["medians"] = med;
    return j;
  }
};

/// Runs every (sample size, trial) pair; trial seeds are derive_seed(seed,
/// size index, trial), so results do not depend on scheduling.
inline ExperimentRecord run_experiment(const InferConfig& c) {
  validate_config(c);
  ExperimentRecord r;
  r.config = c;
  r.grid = inference_grid(c);
  const GridModule truth = ground_truth_module(c, r.grid);
  const std::size_t sizes = c.samples.size();
  r.trial_seeds.assign(sizes, std::vector<std::uint64_t>(c.trials));
  r.distances.assign(sizes, std::vector<ExtendedReal>(c.trials, ExtendedReal(0)));
  for (std::size_t s = 0; s < sizes; ++s)
    for (std::size_t t = 0; t < c.trials; ++t) r.trial_seeds[s][t] = derive_seed(c.seed, s, t);

  const std::size_t tasks = sizes * c.trials;
  unsigned workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t k; (k = next.fetch_add(1)) < tasks;) {
        const std::size_t s = k / c.trials, t = k % c.trials;
        r.distances[s][t] = trial_distance(c, r.grid, truth, c.samples[s], r.trial_seeds[s][t]);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& row : r.distances) r.medians.push_back(median(row));
  return r;
}

}  // namespace mpers
