#include "stoplab/modelio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

namespace stoplab {

namespace {

using nlohmann::ordered_json;

std::string num17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

NodeId parse_node_key(const std::string& key, const std::string& where) {
  try {
    std::size_t pos = 0;
    NodeId id = std::stoll(key, &pos);
    if (pos != key.size()) throw std::invalid_argument(key);
    return id;
  } catch (const std::exception&) {
    throw ValidationError(where + ": key '" + key + "' is not a node id");
  }
}

void expect_fields(const ordered_json& obj, std::initializer_list<const char*> allowed,
                   const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ValidationError(where + ": unknown field '" + it.key() + "'");
  }
}

double expect_number(const ordered_json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace

ParsedModel parse_model(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("model syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model: expected a JSON object");
  expect_fields(doc, {"version", "horizon", "nodes", "reward", "metadata"}, "model");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw ValidationError("model.version: expected 1");
  if (!doc.contains("horizon") || !doc["horizon"].is_number_integer())
    throw ValidationError("model.horizon: expected an integer");
  int horizon = doc["horizon"].get<int>();

  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    throw ValidationError("model.nodes: expected an array");
  std::vector<RawNode> raw;
  std::size_t idx = 0;
  for (const auto& jn : doc["nodes"]) {
    std::string where = "model.nodes[" + std::to_string(idx++) + "]";
    if (!jn.is_object()) throw ValidationError(where + ": expected an object");
    expect_fields(jn, {"id", "time", "parent", "cond_prob"}, where);
    RawNode rn;
    if (!jn.contains("id") || !jn["id"].is_number_integer())
      throw ValidationError(where + ".id: expected an integer");
    rn.id = jn["id"].get<NodeId>();
    if (!jn.contains("time") || !jn["time"].is_number_integer())
      throw ValidationError(where + ".time: expected an integer");
    rn.time = jn["time"].get<int>();
    if (jn.contains("parent") && !jn["parent"].is_null()) {
      if (!jn["parent"].is_number_integer())
        throw ValidationError(where + ".parent: expected an integer or null");
      rn.parent = jn["parent"].get<NodeId>();
    }
    if (!jn.contains("cond_prob"))
      throw ValidationError(where + ".cond_prob: missing");
    rn.cond_prob = expect_number(jn["cond_prob"], where + ".cond_prob");
    if (rn.cond_prob > 1.0 + kProbSumTol)
      throw ValidationError(where + ".cond_prob: probability " + num17(rn.cond_prob) +
                            " out of range");
    raw.push_back(rn);
  }

  ParsedModel model{FiltrationTree::validate(raw, horizon), {}, {}};

  if (!doc.contains("reward") || !doc["reward"].is_object())
    throw ValidationError("model.reward: expected an object");
  const auto& jr = doc["reward"];
  expect_fields(jr, {"opt", "pre"}, "model.reward");
  if (!jr.contains("opt") || !jr["opt"].is_object())
    throw ValidationError("model.reward.opt: expected an object");
  for (auto it = jr["opt"].begin(); it != jr["opt"].end(); ++it) {
    NodeId id = parse_node_key(it.key(), "model.reward.opt");
    model.reward.opt.set(id, expect_number(it.value(), "model.reward.opt." + it.key()));
  }
  if (jr.contains("pre")) {
    if (!jr["pre"].is_object())
      throw ValidationError("model.reward.pre: expected an object");
    for (auto it = jr["pre"].begin(); it != jr["pre"].end(); ++it) {
      NodeId id = parse_node_key(it.key(), "model.reward.pre");
      model.reward.pre.set(id, expect_number(it.value(), "model.reward.pre." + it.key()));
    }
  }

  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object())
      throw ValidationError("model.metadata: expected an object of strings");
    for (auto it = doc["metadata"].begin(); it != doc["metadata"].end(); ++it) {
      if (!it.value().is_string())
        throw ValidationError("model.metadata." + it.key() + ": expected a string");
      model.metadata[it.key()] = it.value().get<std::string>();
    }
  }

  // Missing pre entries default to the no-predictable-stop sentinel.
  std::vector<NodeId> defaulted;
  for (NodeId id : model.tree.node_ids()) {
    if (model.tree.is_terminal(id)) continue;
    if (!model.reward.pre.contains(id)) {
      model.reward.pre.set(id, kNoPredictableStop);
      defaulted.push_back(id);
    }
  }
  if (!defaulted.empty()) {
    std::string ids;
    for (NodeId id : defaulted) {
      if (!ids.empty()) ids += ",";
      ids += std::to_string(id);
    }
    model.metadata["pre_defaulted"] = ids;
  }

  validate_reward(model.tree, model.reward);
  return model;
}

std::string write_model(const FiltrationTree& tree, const LadlagReward& reward,
                        const std::map<std::string, std::string>& metadata) {
  validate_reward(tree, reward);
  ordered_json doc;
  doc["version"] = 1;
  doc["horizon"] = tree.horizon();
  doc["nodes"] = ordered_json::array();
  for (NodeId id : tree.node_ids()) {
    ordered_json jn;
    jn["id"] = id;
    jn["time"] = tree.time_of(id);
    auto parent = tree.parent_of(id);
    if (parent) jn["parent"] = *parent;
    else jn["parent"] = nullptr;
    jn["cond_prob"] = tree.cond_prob(id);
    doc["nodes"].push_back(std::move(jn));
  }
  ordered_json opt = ordered_json::object();
  ordered_json pre = ordered_json::object();
  for (NodeId id : tree.node_ids()) {
    opt[std::to_string(id)] = reward.opt.at(id);
    if (!tree.is_terminal(id)) pre[std::to_string(id)] = reward.pre.at(id);
  }
  doc["reward"]["opt"] = std::move(opt);
  doc["reward"]["pre"] = std::move(pre);
  if (!metadata.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : metadata) meta[k] = v;
    doc["metadata"] = std::move(meta);
  }
  return doc.dump(2) + "\n";
}

void validate_lattice(const LatticeModel& lattice) {
  if (lattice.steps < 1) throw ValidationError("lattice: steps must be >= 1");
  if (!(lattice.down > 0.0 && lattice.down < 1.0 && lattice.up > 1.0))
    throw ValidationError("lattice: need 0 < down < 1 < up");
  if (!(lattice.prob > 0.0 && lattice.prob < 1.0))
    throw ValidationError("lattice: probability must lie in (0,1)");
  if (!(lattice.discount > 0.0))
    throw ValidationError("lattice: discount must be positive");
  if (!(lattice.s0 > 0.0)) throw ValidationError("lattice: s0 must be positive");
  if (lattice.payoff == PayoffKind::custom) {
    if (lattice.custom_knots.size() < 2)
      throw ValidationError("lattice: custom payoff needs >= 2 knots");
    if (!std::is_sorted(lattice.custom_knots.begin(), lattice.custom_knots.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
      throw ValidationError("lattice: custom payoff knots must be sorted by price");
  }
}

double lattice_payoff(const LatticeModel& lattice, double s) {
  switch (lattice.payoff) {
    case PayoffKind::put: return std::max(lattice.strike - s, 0.0);
    case PayoffKind::call: return std::max(s - lattice.strike, 0.0);
    case PayoffKind::custom: break;
  }
  const auto& knots = lattice.custom_knots;
  if (s <= knots.front().first) return knots.front().second;
  if (s >= knots.back().first) return knots.back().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (s <= knots[i].first) {
      double w = (s - knots[i - 1].first) / (knots[i].first - knots[i - 1].first);
      return (1.0 - w) * knots[i - 1].second + w * knots[i].second;
    }
  }
  return knots.back().second;
}

LatticeSnell lattice_snell(const LatticeModel& lattice) {
  validate_lattice(lattice);
  const int steps = lattice.steps;
  LatticeSnell out;
  out.y.assign(static_cast<std::size_t>(steps) + 1, {});
  for (int t = steps; t >= 0; --t) {
    auto& level = out.y[static_cast<std::size_t>(t)];
    level.resize(static_cast<std::size_t>(t) + 1);
    double disc = std::pow(lattice.discount, t);
    for (int j = 0; j <= t; ++j) {
      double s = lattice.s0 * std::pow(lattice.up, j) * std::pow(lattice.down, t - j);
      double exercise = disc * lattice_payoff(lattice, s);
      if (t == steps) {
        level[static_cast<std::size_t>(j)] = std::max(exercise, 0.0);
      } else {
        const auto& next = out.y[static_cast<std::size_t>(t) + 1];
        double cont = lattice.prob * next[static_cast<std::size_t>(j) + 1] +
                      (1.0 - lattice.prob) * next[static_cast<std::size_t>(j)];
        level[static_cast<std::size_t>(j)] = std::max(exercise, cont);
      }
    }
  }
  out.value = out.y[0][0];
  return out;
}

ExpandedLattice expand_binomial(const LatticeModel& lattice, std::uint64_t node_cap) {
  validate_lattice(lattice);
  if (lattice.steps > 12)
    throw CapExceededError("lattice expansion limited to 12 steps, got " +
                           std::to_string(lattice.steps));
  std::uint64_t n_nodes = (2ull << lattice.steps) - 1;
  if (n_nodes > node_cap)
    throw CapExceededError("expanded tree has " + std::to_string(n_nodes) +
                           " nodes, cap is " + std::to_string(node_cap));

  // Heap layout: node k has children 2k+1 (down) and 2k+2 (up).
  std::vector<RawNode> raw;
  std::vector<double> price(static_cast<std::size_t>(n_nodes));
  std::vector<int> depth(static_cast<std::size_t>(n_nodes));
  for (std::uint64_t k = 0; k < n_nodes; ++k) {
    RawNode rn;
    rn.id = static_cast<NodeId>(k);
    if (k == 0) {
      rn.time = 0;
      rn.cond_prob = 1.0;
      price[k] = lattice.s0;
      depth[k] = 0;
    } else {
      std::uint64_t parent = (k - 1) / 2;
      bool is_up = (k % 2) == 0;
      rn.parent = static_cast<NodeId>(parent);
      rn.time = depth[parent] + 1;
      rn.cond_prob = is_up ? lattice.prob : 1.0 - lattice.prob;
      price[k] = price[parent] * (is_up ? lattice.up : lattice.down);
      depth[k] = rn.time;
    }
    raw.push_back(rn);
  }

  ExpandedLattice out{FiltrationTree::validate(raw, lattice.steps), {}};
  for (std::uint64_t k = 0; k < n_nodes; ++k) {
    double disc = std::pow(lattice.discount, depth[k]);
    out.reward.opt.set(static_cast<NodeId>(k), disc * lattice_payoff(lattice, price[k]));
  }
  for (NodeId id : out.tree.node_ids())
    if (!out.tree.is_terminal(id)) out.reward.pre.set(id, out.reward.opt.at(id));
  return out;
}

BinomialModel gen_binomial(const LatticeModel& lattice, bool expand, std::uint64_t node_cap) {
  validate_lattice(lattice);
  BinomialModel out{lattice, std::nullopt};
  if (expand) out.expanded = expand_binomial(lattice, node_cap);
  return out;
}

GeneratedModel gen_random_tree(const RandomTreeSpec& spec) {
  if (spec.depth < 0) throw ValidationError("random tree: depth must be >= 0");
  if (spec.max_branch < 1) throw ValidationError("random tree: max_branch must be >= 1");
  if (spec.opt_hi < spec.opt_lo || spec.pre_hi < spec.pre_lo)
    throw ValidationError("random tree: reward law bounds reversed");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> branch(1, spec.max_branch);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> opt_law(spec.opt_lo, spec.opt_hi);
  std::uniform_real_distribution<double> pre_law(spec.pre_lo, spec.pre_hi);

  std::vector<RawNode> raw;
  raw.push_back({0, 0, std::nullopt, 1.0});
  std::vector<NodeId> level{0};
  NodeId next_id = 1;
  for (int t = 0; t < spec.depth; ++t) {
    std::vector<NodeId> next_level;
    for (NodeId p : level) {
      int k = branch(rng);
      std::vector<double> weights(static_cast<std::size_t>(k));
      double total = 0.0;
      for (double& w : weights) {
        w = unit(rng);
        total += w;
      }
      for (int c = 0; c < k; ++c) {
        raw.push_back({next_id, t + 1, p, weights[static_cast<std::size_t>(c)] / total});
        next_level.push_back(next_id);
        ++next_id;
      }
      if (static_cast<std::uint64_t>(next_id) > spec.node_cap)
        throw CapExceededError("random tree exceeds node cap " +
                               std::to_string(spec.node_cap));
    }
    level = std::move(next_level);
  }

  GeneratedModel out{FiltrationTree::validate(raw, spec.depth), {}};
  for (NodeId id : out.tree.node_ids()) out.reward.opt.set(id, opt_law(rng));
  if (spec.depth > 0) {
    NodeFunction proj = predictable_projection(out.tree, out.reward.opt);
    for (NodeId id : out.tree.node_ids()) {
      if (out.tree.is_terminal(id)) continue;
      switch (spec.mode) {
        case RegularityMode::free_form: out.reward.pre.set(id, pre_law(rng)); break;
        case RegularityMode::subregular:
          out.reward.pre.set(id, std::min(pre_law(rng), proj.at(id)));
          break;
        case RegularityMode::regular: out.reward.pre.set(id, proj.at(id)); break;
      }
    }
  }
  return out;
}

RefinementProfile named_profile(const std::string& name) {
  if (name == "linear_dropoff") {
    return {"linear_dropoff", [](double x) { return x < 1.0 ? x : 0.0; },
            [](double x) { return x; }};
  }
  if (name == "constant") {
    return {"constant", [](double) { return 1.0; }, [](double) { return 1.0; }};
  }
  if (name == "step_up") {
    return {"step_up", [](double x) { return x < 0.5 ? 0.0 : 1.0; },
            [](double x) { return x <= 0.5 ? 0.0 : 1.0; }};
  }
  throw ValidationError("unknown profile '" + name +
                        "' (known: linear_dropoff, constant, step_up)");
}

std::vector<RefinementRow> refinement_study(const RefinementProfile& profile,
                                            const std::vector<int>& resolutions) {
  if (resolutions.empty()) throw ValidationError("refinement: no resolutions");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 2) throw ValidationError("refinement: resolutions must be >= 2");
    if (i > 0 && resolutions[i] <= resolutions[i - 1])
      throw ValidationError("refinement: resolutions must be strictly increasing");
  }
  std::vector<RefinementRow> rows;
  for (int n : resolutions) {
    std::vector<RawNode> raw;
    for (int k = 0; k <= n; ++k)
      raw.push_back({k, k, k == 0 ? std::optional<NodeId>{} : std::optional<NodeId>{k - 1},
                     1.0});
    FiltrationTree chain = FiltrationTree::validate(raw, n);
    LadlagReward reward;
    for (int k = 0; k <= n; ++k) {
      reward.opt.set(k, profile.value(static_cast<double>(k) / n));
      if (k < n) reward.pre.set(k, profile.left_limit(static_cast<double>(k + 1) / n));
    }
    rows.push_back({n, solve_os(chain, reward).value, quasi_snell(chain, reward).value});
  }
  return rows;
}

}  // namespace stoplab
