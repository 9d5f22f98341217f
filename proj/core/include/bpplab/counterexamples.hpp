#pragma once

#include "bpplab/error.hpp"
#include "bpplab/fields.hpp"
#include "bpplab/operator.hpp"
#include "bpplab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bpplab {

// The four documented failures of boundary point principles when one
// hypothesis is dropped. Keys are the identifiers used on the command line.
enum class CaseId {
  kLocalLowerLipschitz,   // "ex2_9":  u = 0, v = (1 - |x|²)² on the unit disk
  kUnboundedHessian,      // "ex2_12": u = x^{3/2}, v = 2x^{3/2} on (0, 1)
  kInfiniteOrderDisk,     // "ex3_2":  divergence form, v = exp(-1/(1 - |x|²))
  kInfiniteOrderAnnulus,  // "ex3_4":  same v on the annulus 0.9 < |x| < 1
};

std::string case_key(CaseId id);
CaseId parse_case(const std::string& key);
std::vector<CaseId> all_cases();

struct CaseStudy {
  CaseId id;
  std::string key;
  std::string description;
  int dimension = 0;
  AnalyticField u;
  AnalyticField v;
  QuasilinearData q;
  Vector x_b;
  Vector normal;  // outward unit normal at x_b
  // Ball inside Ω whose boundary passes through x_b; distances d(x) in the
  // growth conditions are measured to its boundary.
  Ball tangent_ball;
  // Σ v_ii / v in closed form (the z-coefficient of B is its negative);
  // empty when B = 0.
  std::function<double(const Vector&)> laplacian_over_v;
  // Interior samples, graded toward ∂Ω.
  std::function<std::vector<Vector>(std::size_t, std::uint64_t)> sample;
  // Points at distance δ from ∂Ω (the collar used for growth estimates).
  std::function<std::vector<Vector>(double)> collar;
  // Collar widths used for growth fits, coarse to fine.
  std::vector<double> collar_widths;
  // Samples where a fourth-order step-1e-4 difference Hessian resolves v.
  std::function<bool(const Vector&)> fd_resolved;
  std::map<std::string, bool> expected;
};

CaseStudy instantiate(CaseId id);

struct CaseCheck {
  std::string name;
  std::string kind;  // "hypothesis", "conclusion" or "diagnostic"
  bool expected = true;
  bool observed = false;
  double margin = 0.0;
  nlohmann::json detail;
  nlohmann::json to_json() const;
};

struct CaseReport {
  std::string id;
  std::string description;
  std::vector<CaseCheck> checks;  // ordered by name
  bool matches_expected() const;
  nlohmann::json to_json() const;
};

struct VerifyBudget {
  std::size_t samples = 4000;
  std::uint64_t seed = 0;
};

CaseReport evaluate(const CaseStudy& study, const VerifyBudget& budget = {});

class CaseMismatchError : public Error {
 public:
  explicit CaseMismatchError(CaseReport report);
  const CaseReport& report() const { return report_; }

 private:
  CaseReport report_;
};

// evaluate() that throws CaseMismatchError when an observation contradicts
// the expected pattern.
CaseReport verify(const CaseStudy& study, const VerifyBudget& budget = {});

// Order of the zero of w at distance 0, from log-log slopes over sliding
// windows of a geometric distance sequence.
struct ZeroOrderOptions {
  double d0 = 0.5;
  double kappa = 0.8;
  std::size_t count = 24;
  std::size_t window = 5;
  double threshold = 20.0;
};

struct ZeroOrderEstimate {
  std::vector<double> distances;
  std::vector<double> values;
  std::vector<double> slopes;  // one per window, coarse to fine
  double order = 0.0;          // slope of the finest window
  bool numerically_infinite = false;
  nlohmann::json to_json() const;
};

std::vector<double> geometric_distances(double d0, double kappa, std::size_t count);

ZeroOrderEstimate zero_order_estimate(const std::function<double(double)>& w,
                                      const std::vector<double>& distances,
                                      std::size_t window = 5,
                                      double threshold = 20.0);
ZeroOrderEstimate zero_order_estimate(const std::function<double(double)>& w,
                                      const ZeroOrderOptions& options = {});

// Exponent p in sup_{collar δ} g ~ δ^p, fitted over the collar widths.
struct CollarGrowth {
  std::vector<double> widths;
  std::vector<double> sups;
  double exponent = 0.0;
  nlohmann::json to_json() const;
};

CollarGrowth collar_growth(const CaseStudy& study,
                           const std::function<double(const Vector&)>& g);

// Local lower-Lipschitz constants of B = -z Σv_ii / v for the unit-disk
// case: M_K = M n / inf_{B_R} v over balls B_R, R = 1 - δ.
struct CollarLipschitzRow {
  double width;
  double inf_v;
  double M_K;
  double lower_bound;  // M n / (v_νν δ²)
};

struct CollarLipschitzTable {
  double M = 0.0;
  double v_nu_nu = 0.0;
  std::vector<CollarLipschitzRow> rows;
  double fitted_exponent = 0.0;
  nlohmann::json to_json() const;
};

// M is sampled as sup |v|, |v_i|, |v_ij| on a grid of spacing 0.01 unless
// given explicitly.
CollarLipschitzTable collar_lipschitz_growth(const std::vector<double>& widths,
                                             std::optional<double> M = std::nullopt);

}  // namespace bpplab
