#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stoplab/processes.hpp"
#include "stoplab/snell.hpp"

namespace stoplab {

/// A tree model parsed from the version-1 JSON format. Metadata is a flat
/// string map; pre-track entries absent from the file default to the
/// "no predictable stop" sentinel and the affected ids are recorded under
/// metadata["pre_defaulted"].
struct ParsedModel {
  FiltrationTree tree;
  LadlagReward reward;
  std::map<std::string, std::string> metadata;
};

/// Strict parser: unknown fields are rejected, semantic validation is
/// delegated to FiltrationTree::validate. Errors carry the JSON path.
ParsedModel parse_model(const std::string& text);

/// Serializes to the version-1 format with numbers at 17 significant digits.
/// write_model(parse_model(text)) is a fixed point (normalization).
std::string write_model(const FiltrationTree& tree, const LadlagReward& reward,
                        const std::map<std::string, std::string>& metadata = {});

enum class PayoffKind { put, call, custom };

/// Recombining binomial lattice with a Bermudan-style exercise payoff.
/// The reward at step t is discount^t * payoff(S_t).
struct LatticeModel {
  int steps = 1;
  double s0 = 100.0;
  double up = 1.1;
  double down = 1.0 / 1.1;
  double prob = 0.5;      // one-step up probability
  double discount = 1.0;  // per step
  PayoffKind payoff = PayoffKind::put;
  double strike = 100.0;
  std::vector<std::pair<double, double>> custom_knots;  // (S, payoff), sorted
};

void validate_lattice(const LatticeModel& lattice);
double lattice_payoff(const LatticeModel& lattice, double s);

/// Backward-induction value table on the lattice, in time-0 units:
/// y[t][j] for j up-moves out of t steps, with the never-stop floor at the
/// horizon. `value` = y[0][0].
struct LatticeSnell {
  double value = 0.0;
  std::vector<std::vector<double>> y;
};

LatticeSnell lattice_snell(const LatticeModel& lattice);

struct ExpandedLattice {
  FiltrationTree tree;
  LadlagReward reward;  // opt = discounted payoff, pre = opt on the parent
};

/// Expands the lattice into a non-recombining tree (2^(steps+1)-1 nodes).
/// Only allowed for steps <= 12 and within the node cap.
ExpandedLattice expand_binomial(const LatticeModel& lattice,
                                std::uint64_t node_cap = kDefaultEnumerationCap);

struct BinomialModel {
  LatticeModel lattice;
  std::optional<ExpandedLattice> expanded;
};

BinomialModel gen_binomial(const LatticeModel& lattice, bool expand,
                           std::uint64_t node_cap = kDefaultEnumerationCap);

enum class RegularityMode { free_form, subregular, regular };

struct RandomTreeSpec {
  int depth = 3;
  int max_branch = 2;
  std::uint64_t seed = 0;
  double opt_lo = -1.0, opt_hi = 2.0;  // uniform reward law, opt track
  double pre_lo = -1.0, pre_hi = 2.0;  // uniform reward law, pre track
  RegularityMode mode = RegularityMode::free_form;
  std::uint64_t node_cap = kDefaultEnumerationCap;
};

struct GeneratedModel {
  FiltrationTree tree;
  LadlagReward reward;
};

/// Reproducible random tree + reward: identical spec, identical model.
/// `subregular` clamps the pre draw at the predictable projection;
/// `regular` replaces it by the projection.
GeneratedModel gen_random_tree(const RandomTreeSpec& spec);

/// Deterministic reward profile on [0,1] with explicit left limits, used by
/// the grid-refinement study. Cells are left-closed: the grid point at a
/// jump takes the new value.
struct RefinementProfile {
  std::string name;
  std::function<double(double)> value;       // R(x), x in [0,1]
  std::function<double(double)> left_limit;  // lim_{s-> x-} R(s), x in (0,1]
};

/// Built-in profiles: "linear_dropoff", "constant", "step_up".
RefinementProfile named_profile(const std::string& name);

struct RefinementRow {
  int resolution = 0;
  double os_value = 0.0;
  double oqs_value = 0.0;
};

/// For each resolution n, builds the deterministic chain with
/// opt(k) = value(k/n) and pre(k) = left_limit((k+1)/n) and solves both the
/// pure and the quasi problem. Resolutions must be >= 2, strictly increasing.
std::vector<RefinementRow> refinement_study(const RefinementProfile& profile,
                                            const std::vector<int>& resolutions);

}  // namespace stoplab
