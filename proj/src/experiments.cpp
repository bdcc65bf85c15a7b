#include "zygmund/experiments.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>

namespace zyg {

// ---------------------------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split(const std::string& s, const char* sep) {
  std::vector<std::string> out;
  boost::algorithm::split(out, s, boost::algorithm::is_any_of(sep));
  for (auto& p : out) p = trim(p);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::fabs(x) > 1e9) throw ConfigError("config: " + key + " is not an integer: '" + v + "'");
  return static_cast<int>(x);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") {
    std::uint64_t x = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || end != value.data() + value.size() || value.empty())
      throw ConfigError("config: seed must be a nonnegative integer: '" + value + "'");
    seed = x;
  } else if (key == "caps") {
    const auto parts = split(value, ",");
    if (parts.size() != 2) throw ConfigError("config: caps must be 'L1,L2'");
    const int a = to_int(key, parts[0]), b = to_int(key, parts[1]);
    if (a < 1 || b < 1 || a + b > 20) throw ConfigError("config: caps out of range");
    l1 = a;
    l2 = b;
  } else if (key == "out") {
    out = value;
  } else if (key.empty()) {
    throw ConfigError("config: empty key");
  } else {
    params[key] = value;
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::dump() const {
  std::ostringstream o;
  o << "seed=" << seed << "\ncaps=" << l1 << "," << l2 << "\nout=" << out << "\n";
  for (const auto& [k, v] : params) o << k << "=" << v << "\n";
  return o.str();
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"seed", seed}, {"caps", {l1, l2}}, {"out", out}, {"params", params}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.l1 = j.at("caps").at(0).get<int>();
  c.l2 = j.at("caps").at(1).get<int>();
  c.out = j.at("out").get<std::string>();
  c.params = j.at("params").get<std::map<std::string, std::string>>();
  return c;
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : to_double(key, it->second);
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : to_int(key, it->second);
}

std::vector<double> ExperimentConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::vector<double> out;
  for (const auto& p : split(it->second, ",")) out.push_back(to_double(key, p));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Reports

FitReport FitReport::fit(std::string name, const std::vector<double>& scale, const std::vector<double>& value,
                         double target, double tolerance, Sense sense) {
  FitReport r;
  r.name = std::move(name);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    r.x.push_back(std::log2(scale[i]));
    r.y.push_back(std::log2(value[i]));
  }
  const LinearFit f = ols_fit(r.x, r.y, 2);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.residual = f.residual;
  r.target = target;
  r.tolerance = tolerance;
  r.sense = sense;
  r.pass = std::isfinite(r.slope) &&
           (sense == Sense::Within ? std::fabs(r.slope - target) <= tolerance : r.slope <= target + tolerance);
  return r;
}

nlohmann::json FitReport::to_json() const {
  return {{"name", name},
          {"log2_scale", x},
          {"log2_value", y},
          {"slope", slope},
          {"intercept", intercept},
          {"residual", residual},
          {"target", target},
          {"tolerance", tolerance},
          {"sense", sense == Sense::Within ? "within" : "at_most"},
          {"pass", pass}};
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t i = 0; i < table.columns.size() && i < r.size(); ++i) row[table.columns[i]] = r[i];
    rows.push_back(row);
  }
  nlohmann::json fj = nlohmann::json::array();
  for (const auto& f : fits) fj.push_back(f.to_json());
  return {{"experiment", experiment}, {"config", config.to_json()}, {"rows", rows},
          {"fits", fj},             {"summary", summary},          {"failures", failures},
          {"pass", pass()}};
}

namespace {

void require_fit(ExperimentResult& r, const FitReport& f) {
  if (!f.pass) {
    std::ostringstream o;
    o << f.name << ": slope " << f.slope << (f.sense == FitReport::Sense::Within ? " outside " : " above ") << f.target
      << (f.sense == FitReport::Sense::Within ? " +- " : " + ") << f.tolerance;
    r.failures.push_back(o.str());
  }
  r.fits.push_back(f);
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Operator resolution

GridFunction3D cancellative_span_sample(const Shape& s, const Grids3& frame, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> acc(s.size(), 0.0);
  for (const auto& I : representable_zyg(s, frame))
    for (int eta : {2, 3}) {
      const double c = u(rng);
      const auto h = h_IZ(s, frame, I, eta);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * h[i];
    }
  return GridFunction3D(s, std::move(acc));
}

std::array<double, 9> resolution_sums(const LinearMap& T, const GridFunction3D& f, const GridFunction3D& g,
                                      const Grids3& frame) {
  const Shape& s = f.shape();
  std::array<double, 9> sums{};
  for (int j1 = 0; j1 < s.l1; ++j1)
    for (int j2 = 0; j2 < s.l2; ++j2) {
      // [D1D23, E1D23, D1E23, E1E23] of a function.
      const auto parts = [&](const GridFunction3D& x) {
        const auto d23 = level_op23(x, frame, j2, j1 + j2, Op::Delta);
        const auto e23 = level_op23(x, frame, j2, j1 + j2, Op::E);
        return std::array<GridFunction3D, 4>{level_op1(d23, frame, j1, Op::Delta), level_op1(d23, frame, j1, Op::E),
                                             level_op1(e23, frame, j1, Op::Delta), level_op1(e23, frame, j1, Op::E)};
      };
      const auto pf = parts(f), pg = parts(g);
      const GridFunction3D TA = T(pf[0]), TB = T(pf[1]), TC = T(pf[2]), TD = T(pf[3]);
      sums[0] += inner(TA, pg[0]);
      sums[1] += inner(TB, pg[0]);
      sums[2] += inner(TA, pg[1]);
      sums[3] += inner(TC, pg[0]);
      sums[4] += inner(TA, pg[2]);
      sums[5] += inner(TD, pg[0]);
      sums[6] += inner(TA, pg[3]);
      sums[7] += inner(TB, pg[2]);
      sums[8] += inner(TC, pg[1]);
    }
  return sums;
}

ExperimentResult run_decomposition_identity(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "decomp";
  r.config = config;
  r.table.columns = {"case", "reference", "assembled", "rel_error", "sum1", "sum2", "sum3",
                     "sum4", "sum5",      "sum6",      "sum7",      "sum8", "sum9"};
  const Shape s = config.shape();
  const Grids3 frame = standard_frame(s);
  const double tol = config.get_double("tol.decomp", 1e-10);
  Rng rng(config.seed);
  const auto f = cancellative_span_sample(s, frame, rng);
  const auto g = cancellative_span_sample(s, frame, rng);

  double worst = 0.0;
  const auto run = [&](const std::string& name, const LinearMap& T) {
    const double ref = inner(T(f), g);
    const auto sums = resolution_sums(T, f, g, frame);
    const double total = pairwise_sum(sums);
    const double err = std::fabs(ref - total) / (ref != 0.0 ? std::fabs(ref) : 1.0);
    worst = std::max(worst, err);
    std::vector<nlohmann::json> row{name, ref, total, err};
    for (double v : sums) row.emplace_back(v);
    r.table.add(std::move(row));
    if (!(err <= tol)) r.failures.push_back(name + ": relative error " + std::to_string(err));
  };

  run("identity", [](const GridFunction3D& x) { return x; });
  const int dense = config.get_int("decomp.dense", 5);
  for (int i = 0; i < dense; ++i) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
    Rng mr(seed * 0x9E3779B97F4A7C15ULL + 17);
    std::normal_distribution<double> nd;
    std::vector<double> m(s.size() * s.size());
    for (auto& v : m) v = nd(mr);
    const auto T = DiscreteOperator::dense(s, std::move(m), {{"kind", "random dense"}, {"seed", seed}});
    run("dense seed " + std::to_string(seed), [&](const GridFunction3D& x) { return T.apply(x); });
  }
  if (config.get_int("decomp.nw", 1) != 0) {
    const auto T = discretize(nagel_wainger(), s, Truncation{}, config.get_int("nw.grading", 12));
    run("nagel-wainger", [&](const GridFunction3D& x) { return T.apply(x); });
  }
  r.summary = {{"max_rel_error", worst}, {"tolerance", tol}, {"cases", r.table.rows.size()}};
  return r;
}

// ---------------------------------------------------------------------------------------------
// Shift coefficients

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Separated: return "separated";
    case Regime::Adjacent: return "adjacent";
    case Regime::Identical: return "identical";
  }
  return "?";
}

Regime regime1(std::int64_t n1) {
  const auto a = std::llabs(n1);
  return a >= 2 ? Regime::Separated : (a == 1 ? Regime::Adjacent : Regime::Identical);
}

Regime regime23(std::int64_t n2, std::int64_t n3) {
  const auto a = std::max(std::llabs(n2), std::llabs(n3));
  return a >= 2 ? Regime::Separated : (a == 1 ? Regime::Adjacent : Regime::Identical);
}

int k_of(std::int64_t n) {
  const auto a = std::llabs(n);
  if (a == 0) return 0;
  int k = 2;
  while ((std::int64_t{1} << (k - 2)) < a) ++k;
  return k;
}

Complexity k_of(const std::array<std::int64_t, 3>& n) { return {k_of(n[0]), k_of(n[1]), k_of(n[2])}; }

namespace {

std::vector<StepPiece> unit_haar(int sig, double lo) {
  if (sig == 0) return {{lo, lo + 1.0, 1.0}};
  return {{lo, lo + 0.5, 1.0}, {lo + 0.5, lo + 1.0, -1.0}};
}

// Magnitudes 2^{k-3} < |n| <= 2^{k-2} represented by their two ends, with both signs.
std::vector<std::int64_t> offsets_up_to(int kmax) {
  std::set<std::int64_t> out{0};
  for (int k = 2; k <= kmax; ++k) {
    const std::int64_t hi = std::int64_t{1} << (k - 2);
    const std::int64_t lo = k == 2 ? 1 : (std::int64_t{1} << (k - 3)) + 1;
    for (std::int64_t m : {lo, hi}) {
      out.insert(m);
      out.insert(-m);
    }
  }
  return {out.begin(), out.end()};
}

// Every component is 0 or the top magnitude 2^{k-2} of its band.
bool top_of_band(const std::array<std::int64_t, 3>& n) {
  return std::all_of(n.begin(), n.end(), [](std::int64_t v) {
    const auto m = static_cast<std::uint64_t>(v < 0 ? -v : v);
    return m == 0 || std::has_single_bit(m);
  });
}

}  // namespace

QuadResult shift_coefficient(const KernelSpec& k, const std::array<std::int64_t, 3>& n, int eta) {
  if (eta < 1 || eta > 3) throw std::invalid_argument("shift_coefficient: eta must be 1, 2 or 3");
  const std::array<PiecewiseLinear, 3> c{
      correlation(unit_haar(1, 0.0), unit_haar(0, static_cast<double>(n[0]))),
      correlation(unit_haar(0, static_cast<double>(n[1])), unit_haar(eta2_of(eta), 0.0)),
      correlation(unit_haar(0, static_cast<double>(n[2])), unit_haar(eta3_of(eta), 0.0))};
  return continuous_pairing(k, c, 1e-11);
}

double normalized_ratio(double c, const Complexity& k, const KernelSpec& spec) {
  const int total = k[0] + k[1] + k[2];
  return std::fabs(c) / ((total + 1) * phi(k, spec.theta, spec.alpha1, spec.alpha23) * exp2i(-total));
}

KernelSpec kernel_from_config(const ExperimentConfig& config) {
  const std::string form = config.get("kernel", "nw");
  KernelSpec k;
  if (form == "nw") {
    k = nagel_wainger();
    k.theta = config.get_double("theta", k.theta);
  } else if (form == "bump") {
    const auto t = config.get_list("bump.t", {1.0, 1.0, 1.0});
    if (t.size() != 3) throw ConfigError("config: bump.t needs three scales");
    k = build_bump({t[0], t[1], t[2]}, config.get_double("theta", 1.0));
  } else {
    throw ConfigError("config: unknown kernel '" + form + "'");
  }
  return k;
}

ExperimentResult run_shift_coeff_sweep(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "coeff-sweep";
  r.config = config;
  r.table.columns = {"regime1", "regime23", "k1", "k2", "k3", "max_abs_coefficient", "max_ratio",
                     "max_band_ratio", "samples", "quadrature_failures"};
  const KernelSpec spec = kernel_from_config(config);
  const int kmax = config.get_int("coeff.kmax", 6);
  const int k3max = config.get_int("coeff.k3max", 12);
  if (kmax < 3 || k3max < 6) throw ConfigError("config: coeff.kmax must be >= 3 and coeff.k3max >= 6");

  const auto values = offsets_up_to(kmax);
  std::vector<std::array<std::int64_t, 3>> ns;
  for (auto a : values)
    for (auto b : values)
      for (auto c : values) ns.push_back({a, b, c});
  struct Sample {
    double coeff = 0.0;
    int failures = 0;
  };
  std::vector<Sample> out(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    for (int eta = 1; eta <= 3; ++eta) {
      const auto q = shift_coefficient(spec, ns[i], eta);
      out[i].coeff = std::max(out[i].coeff, std::fabs(q.value));
      if (!q.ok) ++out[i].failures;
    }
  });

  struct Cell {
    double coeff = 0.0, ratio = 0.0;  // ratio: top-of-band samples only
    double band_ratio = 0.0;          // all samples of the band
    int samples = 0, failures = 0;
  };
  // (regime1, regime23, k) -> cell; ordered for deterministic output.
  std::map<std::tuple<int, int, int, int, int>, Cell> cells;
  int failures = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto k = k_of(ns[i]);
    auto& c = cells[{static_cast<int>(regime1(ns[i][0])), static_cast<int>(regime23(ns[i][1], ns[i][2])), k[0], k[1],
                     k[2]}];
    c.coeff = std::max(c.coeff, out[i].coeff);
    const double ratio = normalized_ratio(out[i].coeff, k, spec);
    c.band_ratio = std::max(c.band_ratio, ratio);
    if (top_of_band(ns[i])) c.ratio = std::max(c.ratio, ratio);
    c.samples += 3;
    c.failures += out[i].failures;
    failures += out[i].failures;
  }

  nlohmann::json regimes = nlohmann::json::object();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const std::string name = to_string(static_cast<Regime>(a)) + "/" + to_string(static_cast<Regime>(b));
      double constant = 0.0, band_constant = 0.0;
      // marginal[m][j]: max ratio over the well-separated regime cells with k^m = j.
      std::array<std::vector<double>, 3> marginal;
      for (auto& v : marginal) v.assign(static_cast<std::size_t>(kmax + 1), -1.0);
      for (const auto& [key, c] : cells) {
        const auto& [ra, rb, k1, k2, k3] = key;
        if (ra != a || rb != b) continue;
        constant = std::max(constant, c.ratio);
        band_constant = std::max(band_constant, c.band_ratio);
        const std::array<int, 3> k{k1, k2, k3};
        // Monotonicity is read on the well-separated cells: every free component at least 3.
        const bool far1 = a != static_cast<int>(Regime::Separated) || k1 >= 3;
        const bool far23 = b != static_cast<int>(Regime::Separated) || (k2 >= 3 && k3 >= 3);
        if (!far1 || !far23) continue;
        for (int m = 0; m < 3; ++m) {
          auto& slot = marginal[static_cast<std::size_t>(m)][static_cast<std::size_t>(k[static_cast<std::size_t>(m)])];
          slot = std::max(slot, c.ratio);
        }
      }
      bool monotone = true;
      for (int m = 0; m < 3; ++m)
        for (int j = 3; j < kmax; ++j) {
          const double lo = marginal[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
          const double hi = marginal[static_cast<std::size_t>(m)][static_cast<std::size_t>(j + 1)];
          if (lo >= 0.0 && hi >= 0.0 && hi > lo * (1.0 + 1e-9)) {
            monotone = false;
            std::ostringstream o;
            o << name << ": max ratio rises from " << lo << " at k" << (m + 1) << "=" << j << " to " << hi << " at "
              << (j + 1);
            r.failures.push_back(o.str());
          }
        }
      regimes[name] = {{"constant", constant}, {"band_constant", band_constant}, {"non_increasing", monotone}};
    }
  for (const auto& [key, c] : cells) {
    const auto& [ra, rb, k1, k2, k3] = key;
    r.table.add({to_string(static_cast<Regime>(ra)), to_string(static_cast<Regime>(rb)), k1, k2, k3, c.coeff, c.ratio,
                 c.band_ratio, c.samples, c.failures});
  }

  // n = (0, 0, 2^{k3-2}): the k3 decay of |c| |K| / |I| is 2^{-k3 theta}.
  std::vector<double> scale, value;
  for (int k3 = 2; k3 <= k3max; ++k3) {
    double best = 0.0;
    for (int eta = 1; eta <= 3; ++eta) {
      const auto q = shift_coefficient(spec, {0, 0, std::int64_t{1} << (k3 - 2)}, eta);
      if (!q.ok) ++failures;
      best = std::max(best, std::fabs(q.value));
    }
    scale.push_back(exp2i(k3));
    value.push_back(best * exp2i(k3));
  }
  require_fit(r, FitReport::fit("super-zygmund k3 decay", scale, value, -spec.theta,
                                config.get_double("tol.theta_fit", 0.15), FitReport::Sense::Within));
  r.summary = {{"kernel", spec.describe()}, {"regimes", regimes}, {"quadrature_failures", failures},
               {"coefficients", 3 * ns.size()}, {"decay_exponent", -r.fits.back().slope}};
  return r;
}

// ---------------------------------------------------------------------------------------------
// Weighted growth

std::vector<WeightChoice> parse_weights(const std::string& s) {
  std::vector<WeightChoice> out;
  for (const auto& item : split(s, ";")) {
    if (item.empty()) continue;
    WeightChoice w;
    w.name = item;
    if (item != "flat") {
      const auto p = split(item, ",");
      if (p.size() != 3) throw ConfigError("config: weight '" + item + "' must be 'flat' or 'gamma,alpha,delta'");
      w.flat = false;
      w.exponents = {to_double("weights", p[0]), to_double("weights", p[1]), to_double("weights", p[2])};
      if (!admissible(PowerWeightSpec{w.exponents.gamma, w.exponents.alpha, w.exponents.delta, 2.0}))
        throw ConfigError("config: weight '" + item + "' is not an A_{2,Z} power weight");
    }
    out.push_back(w);
  }
  if (out.empty()) throw ConfigError("config: no weights");
  return out;
}

GridFunction3D weight_cells(const WeightChoice& w, const Shape& s) {
  if (w.flat) return GridFunction3D::constant(s, 1.0);
  return cell_average_weight(WeightFunction::power(w.exponents), s, {0.5, 0.5, 0.5});
}

namespace {

constexpr const char* kDefaultWeights = "flat;0.25,0.5,0.75;0,0.5,1";

bool near_boundary(const WeightChoice& w) {
  return !w.flat && w.exponents.gamma == 0.0 && w.exponents.alpha == 0.5 && w.exponents.delta == 1.0;
}

}  // namespace

ExperimentResult run_weighted_shift_bench(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "shift-bench";
  r.config = config;
  r.table.columns = {"weight", "k3", "entries", "norm", "iterations", "converged"};
  const Shape s = config.shape();
  const Grids3 frame = standard_frame(s);
  const auto weights = parse_weights(config.get("weights", kDefaultWeights));
  // I keeps its children: levels (a, b, a + b) with a < L1, b < L2, and K^3 needs a + b >= k3.
  const int k3max = s.l1 + s.l2 - 2;
  if (k3max < 3) throw ConfigError("shift-bench: caps too small for an exponent fit");
  int stagnated = 0;
  nlohmann::json sanity = nlohmann::json::object();
  for (const auto& w : weights) {
    const auto cells = weight_cells(w, s);
    std::vector<double> scale, value;
    for (int k3 = 0; k3 <= k3max; ++k3) {
      const auto q = make_shift({0, 0, k3}, 1, CoeffRule::RandomSign, s, frame, config.seed + static_cast<unsigned>(k3));
      const auto n = shift_norm(q, cells, config.seed);
      if (!n.converged) ++stagnated;
      r.table.add({w.name, k3, q.entries.size(), n.norm, n.iterations, n.converged});
      scale.push_back(exp2i(k3));
      value.push_back(n.norm);
      if (k3 == 0) {
        sanity[w.name] = n.norm;
        if (!(n.norm <= 4.0)) r.failures.push_back(w.name + ": k3 = 0 norm " + std::to_string(n.norm) + " above 4");
      }
    }
    const double ceiling = w.flat ? 0.05 : (near_boundary(w) ? 0.98 : 1.05);
    require_fit(r, FitReport::fit("shift growth " + w.name, scale, value,
                                  config.get_double("ceiling." + w.name, ceiling), 0.0, FitReport::Sense::AtMost));
  }
  r.summary = {{"stagnated_power_iterations", stagnated}, {"k3_zero_norms", sanity}, {"k3_max", k3max}};
  return r;
}

ExperimentResult run_single_shift_bench(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "op-shift-bench";
  r.config = config;
  r.table.columns = {"k1", "k2", "k3", "form", "coeff", "weight", "entries", "bound_ratio", "norm", "iterations",
                     "converged"};
  if (config.get_double("p", 2.0) != 2.0) throw ConfigError("config: shift norms are measured at p = 2 only");
  const auto kv = config.get_list("shift.k", {0.0, 0.0, 0.0});
  if (kv.size() != 3) throw ConfigError("config: shift.k needs three entries");
  Complexity k{};
  for (std::size_t m = 0; m < 3; ++m) {
    if (kv[m] < 0 || kv[m] != std::floor(kv[m])) throw ConfigError("config: shift.k entries must be nonnegative integers");
    k[m] = static_cast<int>(kv[m]);
  }
  const int form = config.get_int("shift.form", 1);
  const std::string coeff = config.get("shift.coeff", "random");
  CoeffRule rule;
  if (coeff == "maximal")
    rule = CoeffRule::Maximal;
  else if (coeff == "sign")
    rule = CoeffRule::RandomSign;
  else if (coeff == "random")
    rule = CoeffRule::Random;
  else
    throw ConfigError("config: shift.coeff must be maximal, sign or random");
  std::string wname = config.get("shift.weight", "flat");
  if (wname.starts_with("pw:")) wname = wname.substr(3);
  const auto weights = parse_weights(wname);
  if (weights.size() != 1) throw ConfigError("config: shift.weight names one weight");

  const Shape s = config.shape();
  const Grids3 frame = standard_frame(s);
  const auto q = make_shift(k, form, rule, s, frame, config.seed);
  const auto n = shift_norm(q, weight_cells(weights[0], s), config.seed);
  r.table.add({k[0], k[1], k[2], form, coeff, weights[0].name, q.entries.size(), q.bound_ratio(), n.norm, n.iterations,
               n.converged});
  r.summary = {{"norm", n.norm}, {"converged", n.converged}, {"entries", q.entries.size()}};
  if (!n.converged) r.summary["note"] = "power iteration stopped before the stagnation tolerance";
  return r;
}

ExperimentResult run_maximal_growth(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "max-growth";
  r.config = config;
  r.table.columns = {"weight", "k", "lambda", "max_ratio"};
  const Shape s = config.shape();
  const Grids3 frame = standard_frame(s);
  const auto weights = parse_weights(config.get("weights", kDefaultWeights));
  const int kmax = config.get_int("max.kmax", 5);
  if (kmax < 3 || kmax > s.l3) throw ConfigError("config: max.kmax must lie in [3, L3]");

  Rng rng(config.seed);
  std::vector<GridFunction3D> tests;
  for (int i = 0, n = config.get_int("max.random", 5); i < n; ++i) tests.push_back(random_grid(s, rng, 0.0, 1.0));
  // Indicators of the thinnest D_lambda rectangles touching the window centre.
  for (int k = 0; k <= kmax; ++k) {
    const std::int64_t c1 = s.n1() / 2, c2 = s.n2() / 2, c3 = s.n3() / 2, len = std::int64_t{1} << k;
    tests.push_back(GridFunction3D::from_cells(s, [&](std::int64_t i1, std::int64_t i2, std::int64_t i3) {
      return i1 == c1 && i2 == c2 && i3 >= c3 && i3 < c3 + len ? 1.0 : 0.0;
    }));
  }

  const LatticeFamily zyg{LatticeFamily::Kind::Zygmund, 0};
  std::vector<GridFunction3D> mz;
  for (const auto& f : tests) mz.push_back(maximal(f, frame, zyg));
  std::vector<std::vector<GridFunction3D>> ml(static_cast<std::size_t>(kmax + 1));
  std::int64_t violations = 0;
  for (int k = 0; k <= kmax; ++k) {
    const LatticeFamily fam{LatticeFamily::Kind::Dilated, k};
    const double lambda = exp2i(k);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      ml[static_cast<std::size_t>(k)].push_back(maximal(tests[t], frame, fam));
      const auto& m = ml[static_cast<std::size_t>(k)].back();
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > lambda * mz[t][i] * (1.0 + 1e-12)) ++violations;
    }
  }
  if (violations != 0) r.failures.push_back("lambda M_Z envelope violated at " + std::to_string(violations) + " cells");

  for (const auto& w : weights) {
    const auto cells = weight_cells(w, s);
    std::vector<double> scale, value;
    for (int k = 0; k <= kmax; ++k) {
      double best = 0.0;
      for (std::size_t t = 0; t < tests.size(); ++t)
        best = std::max(best, lpw_norm(ml[static_cast<std::size_t>(k)][t], 2.0, cells) / lpw_norm(tests[t], 2.0, cells));
      r.table.add({w.name, k, exp2i(k), best});
      scale.push_back(exp2i(k));
      value.push_back(best);
    }
    const double ceiling = w.flat ? 0.05 : 1.05;
    require_fit(r, FitReport::fit("maximal growth " + w.name, scale, value,
                                  config.get_double("ceiling.max." + w.name, ceiling), 0.0, FitReport::Sense::AtMost));
  }
  r.summary = {{"envelope_violations", violations}, {"test_functions", tests.size()}};
  return r;
}

// ---------------------------------------------------------------------------------------------
// Counterexample

PowerExponents delta_family(double delta) { return {delta / 3.0, 2.0 * delta / 3.0, delta}; }

ExperimentResult run_counterexample(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "counterexample";
  r.config = config;
  r.table.columns = {"series", "theta", "delta", "ecc", "value"};
  const double tol_lower = config.get_double("tol.lower", 1e-6);
  const double tol_nec = config.get_double("tol.necessary", 0.1);

  // (i) Phi_R * f >= <f>_R on R.
  Rng rng(config.seed);
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t points = 0;
  const Shape sub{2, 2, 3};
  for (int i = 0; i < config.get_int("lower.boxes", 8); ++i) {
    std::uniform_int_distribution<int> e(-3, 2);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    Box R;
    for (int m = 0; m < 3; ++m) {
      R.lo[static_cast<std::size_t>(m)] = pos(rng);
      R.hi[static_cast<std::size_t>(m)] = R.lo[static_cast<std::size_t>(m)] + exp2i(e(rng));
    }
    for (const auto& f : {GridFunction3D::constant(sub, 1.0), random_grid(sub, rng, 0.0, 1.0)}) {
      const auto rep = convolution_lower_bound(R, f);
      min_margin = std::min(min_margin, rep.min_margin);
      points += rep.points;
    }
  }
  r.table.add({"lower-bound margin", nullptr, nullptr, nullptr, min_margin});
  if (!(min_margin >= -tol_lower)) r.failures.push_back("convolution lower bound fails by " + std::to_string(-min_margin));

  // (ii) divergence of the necessary ratio, (iii) boundedness at theta = 1.
  std::vector<Box> boxes;
  std::vector<double> eps;
  for (int j = 2; j <= 10; ++j) {
    eps.push_back(eps_for_ecc_exponent(j));
    boxes.push_back(ecc_box(eps.back()));
  }
  const auto necessary = [&](double theta, double delta, const std::string& series) {
    const auto w = WeightFunction::power(delta_family(delta));
    const auto rep = necessary_ecc_check(w, 2.0, theta, boxes);
    for (std::size_t i = 0; i < rep.ecc.size(); ++i) r.table.add({series, theta, delta, rep.ecc[i], rep.ratio[i]});
    return rep;
  };
  const double delta = 3.0 - 3.0 * config.get_double("eta", 0.1);
  for (double theta : config.get_list("thetas", {0.25, 0.5, 0.75})) {
    if (!((delta - 1.0) / 2.0 > theta))
      throw ConfigError("config: counterexample needs (delta - 1)/2 > theta for every theta");
    const auto rep = necessary(theta, delta, "necessary ratio");
    require_fit(r, FitReport::fit("necessary ratio theta=" + nlohmann::json(theta).dump(), rep.ecc, rep.ratio,
                                  (delta - 1.0) / 2.0 - theta, tol_nec, FitReport::Sense::Within));
  }
  const double bounded_delta = config.get_double("bounded.delta", 1.5);
  const auto b = necessary(1.0, bounded_delta, "bounded ratio");
  require_fit(r, FitReport::fit("bounded ratio theta=1", b.ecc, b.ratio, 0.05, 0.0, FitReport::Sense::AtMost));

  // <w>_R <w^{-1}>_R grows like ecc^{delta-1} and stays below [w]_{A_2,Z} ecc^2.
  const auto w = WeightFunction::power(delta_family(delta));
  const auto growth = ecc_growth(w, eps);
  std::vector<double> ecc, prod;
  for (const auto& p : growth.points) {
    ecc.push_back(p.ecc);
    prod.push_back(p.product);
    r.table.add({"ecc growth", nullptr, delta, p.ecc, p.product});
  }
  require_fit(r, FitReport::fit("ecc growth", ecc, prod, delta - 1.0, tol_nec, FitReport::Sense::Within));
  const double apz = apz_constant(w, 2.0, config.get_int("apz.depth", 8)).constant_estimate;
  int above = 0;
  for (std::size_t i = 0; i < ecc.size(); ++i)
    if (prod[i] > apz * ecc[i] * ecc[i]) ++above;
  if (above != 0) r.failures.push_back("ecc^2 ceiling exceeded at " + std::to_string(above) + " boxes");

  r.summary = {{"lower_bound_min_margin", min_margin}, {"lower_bound_points", points}, {"delta", delta},
               {"apz_estimate", apz},                  {"ceiling_violations", above}};
  return r;
}

// ---------------------------------------------------------------------------------------------
// Goodness

ExperimentResult run_goodness_stats(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "goodness";
  r.config = config;
  r.table.columns = {"series", "level", "k", "value", "reference", "standard_error"};
  const int levels = config.get_int("good.levels", 6);
  const int samples = config.get_int("good.samples", 10000);
  const int kg = config.get_int("good.k", 2);
  if (levels < 2 || samples < 100 || kg < 2) throw ConfigError("config: goodness parameters out of range");

  int exact_bad = 0;
  for (int level = 2; level <= levels; ++level)
    for (int k = 2; k <= level; ++k) {
      const auto rep = goodness_probability(level, k, level);
      if (rep.probability != boost::rational<std::int64_t>(1, 2)) ++exact_bad;
      r.table.add({"exact", level, k,
                   std::to_string(rep.probability.numerator()) + "/" + std::to_string(rep.probability.denominator()),
                   "1/2", 0.0});
    }
  if (exact_bad != 0) r.failures.push_back(std::to_string(exact_bad) + " exact probabilities differ from 1/2");

  // Rectangles of levels (j, j, 2j), each axis k-good independently under its own shift.
  const int j = std::max(kg, 3);
  const int lmax = 2 * j;
  const std::array<int, 3> lv{j, j, 2 * j};
  Rng rng(config.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Toy {
    std::array<std::int64_t, 3> index;
    double a;
  };
  std::vector<Toy> toys;
  for (int i = 0; i < 16; ++i) {
    Toy t{};
    for (int m = 0; m < 3; ++m)
      t.index[static_cast<std::size_t>(m)] = std::uniform_int_distribution<std::int64_t>(
          0, (std::int64_t{1} << lv[static_cast<std::size_t>(m)]) - 1)(rng);
    t.a = u(rng);
    toys.push_back(t);
  }
  std::int64_t triple = 0;
  double sum_d = 0.0, sum_d2 = 0.0, sum_u = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<ShiftedGrid> grids;
    for (int m = 0; m < 3; ++m) grids.emplace_back(ShiftPattern::random(lmax, rng()), lmax);
    bool all = true;
    for (int m = 0; m < 3; ++m)
      all = all && grids[static_cast<std::size_t>(m)].is_k_good(grids[static_cast<std::size_t>(m)].interval(lv[static_cast<std::size_t>(m)], 0), kg);
    if (all) ++triple;
    // c_{I+sigma} depends on the translated rectangle only.
    double unmasked = 0.0, masked = 0.0;
    for (const auto& t : toys) {
      bool good = true;
      double phase = 0.0;
      for (int m = 0; m < 3; ++m) {
        const auto& g = grids[static_cast<std::size_t>(m)];
        const auto I = g.interval(lv[static_cast<std::size_t>(m)], t.index[static_cast<std::size_t>(m)]);
        good = good && g.is_k_good(I, kg);
        phase += (m + 1) * I.left().value();
      }
      const double c = t.a * (1.5 + std::cos(2.0 * std::numbers::pi * phase));
      unmasked += c;
      if (good) masked += c;
    }
    const double d = 8.0 * masked - unmasked;
    sum_d += d;
    sum_d2 += d * d;
    sum_u += unmasked;
  }
  const double n = samples;
  const double freq = static_cast<double>(triple) / n;
  const double se = std::sqrt((1.0 / 8.0) * (7.0 / 8.0) / n);
  r.table.add({"triple frequency", lv[0], kg, freq, 0.125, se});
  if (!(std::fabs(freq - 0.125) <= 3.0 * se)) r.failures.push_back("triple goodness frequency " + std::to_string(freq));
  const double mean_d = sum_d / n;
  const double se_d = std::sqrt(std::max(0.0, sum_d2 / n - mean_d * mean_d) / (n - 1.0));
  r.table.add({"8 masked - unmasked", lv[0], kg, mean_d, 0.0, se_d});
  if (!(std::fabs(mean_d) <= 3.0 * se_d)) r.failures.push_back("factor-8 identity off by " + std::to_string(mean_d));
  r.summary = {{"exact_mismatches", exact_bad}, {"triple_frequency", freq}, {"triple_standard_error", se},
               {"factor8_mean_difference", mean_d}, {"factor8_standard_error", se_d},
               {"unmasked_mean", sum_u / n}};
  return r;
}

// ---------------------------------------------------------------------------------------------
// Single-module drivers

ExperimentResult run_apz(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "weights-apz";
  r.config = config;
  r.table.columns = {"depth", "sup", "verdict"};
  const PowerWeightSpec spec{config.get_double("gamma", 0.0), config.get_double("alpha", 0.0),
                             config.get_double("delta", 0.0), config.get_double("p", 2.0)};
  const auto rep = apz_constant(WeightFunction::power(spec.exponents()), spec.p, config.get_int("depth", 8));
  for (const auto& [d, v] : rep.sweep_trace) r.table.add({d, v, to_string(rep.verdict)});
  const bool adm = admissible(spec);
  r.summary = {{"constant_estimate", rep.constant_estimate},
               {"verdict", to_string(rep.verdict)},
               {"admissible", adm},
               {"boxes", rep.boxes},
               {"consistent", adm ? rep.verdict == Verdict::Stabilized : rep.verdict == Verdict::Diverging}};
  return r;
}

ExperimentResult run_kernel_check(const ExperimentConfig& config) {
  ExperimentResult r;
  r.experiment = "kernel-check";
  r.config = config;
  r.table.columns = {"condition", "sup_ratio", "samples", "quadrature_failures", "maximizer"};
  const KernelSpec spec = kernel_from_config(config);
  SamplePlan plan;
  plan.samples = config.get_int("samples", 10000);
  plan.seed = config.seed;
  std::vector<Condition> conds;
  const std::string which = config.get("cond", "all");
  if (which == "all")
    conds = all_conditions();
  else
    for (const auto& c : split(which, ",")) conds.push_back(parse_condition(c));
  nlohmann::json reports = nlohmann::json::array();
  for (Condition c : conds) {
    const auto rep = check_condition(spec, c, plan);
    r.table.add({to_string(c), rep.sup_ratio, rep.samples, rep.quadrature_failures, rep.maximizer});
    reports.push_back(rep.to_json());
  }
  r.summary = {{"kernel", spec.describe()}, {"reports", reports}};
  return r;
}

}  // namespace zyg
