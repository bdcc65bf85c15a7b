#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "zygmund/kernels.hpp"
#include "zygmund/operators.hpp"

namespace zyg {

// Every knob of a run. Unset keys take the documented defaults of each driver.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  int l1 = 3, l2 = 3;  // window caps; L3 = L1 + L2
  std::string out = "results";
  std::map<std::string, std::string> params;

  Shape shape() const { return Shape::caps(l1, l2); }

  // Plain-text key=value lines; '#' starts a comment.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string dump() const;  // parse(dump()) == *this
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  // key=value assignment; seed, caps and out address the typed fields.
  void set(const std::string& key, const std::string& value);

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct FitReport {
  enum class Sense { Within, AtMost };  // |slope - target| <= tol, or slope <= target + tol
  std::string name;
  std::vector<double> x, y;  // log2 scales and log2 values, smallest two scales included
  double slope = 0.0, intercept = 0.0, residual = 0.0;
  double target = 0.0, tolerance = 0.0;
  Sense sense = Sense::Within;
  bool pass = false;

  // Log-log OLS of y against x with the smallest two scales dropped.
  static FitReport fit(std::string name, const std::vector<double>& scale, const std::vector<double>& value,
                       double target, double tolerance, Sense sense);
  nlohmann::json to_json() const;
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  void add(std::vector<nlohmann::json> row) { rows.push_back(std::move(row)); }
};

struct ExperimentResult {
  std::string experiment;
  ExperimentConfig config;
  ResultTable table;
  std::vector<FitReport> fits;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failures;  // human-readable reasons; empty iff pass
  bool pass() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

using LinearMap = std::function<GridFunction3D(const GridFunction3D&)>;

// ---- operator resolution -------------------------------------------------

// Random combination of h_{I^1} x h^eta_{I^{2,3}} over representable Zygmund I, eta in {2,3}.
GridFunction3D cancellative_span_sample(const Shape& s, const Grids3& frame, Rng& rng);

// The nine level sums in the order
//   <T D1D23 f, D1D23 g>, <T E1D23 f, D1D23 g>, <T D1D23 f, E1D23 g>,
//   <T D1E23 f, D1D23 g>, <T D1D23 f, D1E23 g>, <T E1E23 f, D1D23 g>,
//   <T D1D23 f, E1E23 g>, <T E1D23 f, D1E23 g>, <T D1E23 f, E1D23 g>,
// each summed over j1 < L1, j2 < L2 with X1 at level j1 and X23 at levels (j2, j1 + j2).
std::array<double, 9> resolution_sums(const LinearMap& T, const GridFunction3D& f, const GridFunction3D& g,
                                      const Grids3& frame);

// Keys: decomp.dense (5), decomp.nw (1), tol.decomp (1e-10), nw.grading (12).
ExperimentResult run_decomposition_identity(const ExperimentConfig& config);

// ---- shift coefficients --------------------------------------------------

enum class Regime { Separated, Adjacent, Identical };
std::string to_string(Regime r);
Regime regime1(std::int64_t n1);
Regime regime23(std::int64_t n2, std::int64_t n3);
// 0 for n = 0, otherwise the k with 2^{k-3} < |n| <= 2^{k-2}.
int k_of(std::int64_t n);
Complexity k_of(const std::array<std::int64_t, 3>& n);

// <T(h0_{I^1+n^1} x h^eta_{I^{2,3}}), h1_{I^1} x h0_{I^{2,3}+n^{2,3}}> for the unit cube I.
QuadResult shift_coefficient(const KernelSpec& k, const std::array<std::int64_t, 3>& n, int eta);

// |c| / ((|k|+1) phi(k) 2^{-|k|}).
double normalized_ratio(double c, const Complexity& k, const KernelSpec& spec);

// Keys: kernel (nw | bump), theta, bump.t (1,1,1), coeff.kmax (6), coeff.k3max (12), tol.theta_fit (0.15).
ExperimentResult run_shift_coeff_sweep(const ExperimentConfig& config);

// ---- weighted growth -----------------------------------------------------

struct WeightChoice {
  std::string name;
  bool flat = true;
  PowerExponents exponents;
};
// "flat" or "g,a,d"; entries separated by ';'.
std::vector<WeightChoice> parse_weights(const std::string& s);
GridFunction3D weight_cells(const WeightChoice& w, const Shape& s);

// Keys: weights (flat;0.25,0.5,0.75;0,0.5,1).
ExperimentResult run_weighted_shift_bench(const ExperimentConfig& config);

// One shift norm. Keys: shift.k (0,0,0), shift.form (1), shift.coeff (maximal | sign | random),
// shift.weight (flat | pw:g,a,d), p (2).
ExperimentResult run_single_shift_bench(const ExperimentConfig& config);

// Keys: weights, max.kmax (5), max.random (5).
ExperimentResult run_maximal_growth(const ExperimentConfig& config);

// ---- counterexample ------------------------------------------------------

// (delta/3, 2 delta/3, delta).
PowerExponents delta_family(double delta);

// Keys: thetas (0.25,0.5,0.75), eta (0.1), bounded.delta (1.5), tol.necessary (0.1), tol.lower (1e-6).
ExperimentResult run_counterexample(const ExperimentConfig& config);

// ---- goodness ------------------------------------------------------------

// Keys: good.levels (6), good.samples (10000), good.k (2).
ExperimentResult run_goodness_stats(const ExperimentConfig& config);

// ---- single-module drivers -----------------------------------------------

// Keys: gamma, alpha, delta, p (2), depth (8).
ExperimentResult run_apz(const ExperimentConfig& config);

// Keys: kernel, theta, bump.t, cond (all), samples (10000).
ExperimentResult run_kernel_check(const ExperimentConfig& config);

KernelSpec kernel_from_config(const ExperimentConfig& config);

}  // namespace zyg
