// stoplab command-line front end: solvers, certificates, bounds, norms and
// the grid-refinement lab over tree model files.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stoplab/duality.hpp"
#include "stoplab/modelio.hpp"
#include "stoplab/norms.hpp"
#include "stoplab/relaxation.hpp"
#include "stoplab/snell.hpp"

namespace {

using nlohmann::ordered_json;
using namespace stoplab;

constexpr const char* kToolVersion = "1.0.0";

enum class OutFormat { text, json, csv };

struct CommonOpts {
  std::string out = "text";
  double tol = kDefaultTol;
  bool no_timings = false;
};

OutFormat parse_format(const std::string& s) {
  if (s == "text") return OutFormat::text;
  if (s == "json") return OutFormat::json;
  if (s == "csv") return OutFormat::csv;
  throw ValidationError("unknown output format '" + s + "' (text|json|csv)");
}

std::uint64_t node_cap_from_env() {
  const char* env = std::getenv("STOPLAB_NODE_CAP");
  if (!env) return kDefaultEnumerationCap;
  try {
    return static_cast<std::uint64_t>(std::stoull(env));
  } catch (const std::exception&) {
    throw ValidationError("STOPLAB_NODE_CAP is not a number: " + std::string(env));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + buf;
}

struct RunRecord {
  std::string command;
  std::vector<std::string> arguments;
  std::string model_hash;
  ordered_json results = ordered_json::object();
  double total_ms = 0.0;
};

void emit(const RunRecord& record, const CommonOpts& opts) {
  OutFormat fmt = parse_format(opts.out);
  if (fmt == OutFormat::json) {
    ordered_json doc;
    doc["tool"] = "stoplab";
    doc["version"] = kToolVersion;
    doc["command"] = record.command;
    doc["arguments"] = record.arguments;
    if (!record.model_hash.empty()) doc["model_hash"] = record.model_hash;
    doc["results"] = record.results;
    if (!opts.no_timings) doc["timings"] = {{"total_ms", record.total_ms}};
    std::cout << doc.dump(2) << "\n";
    return;
  }
  if (fmt == OutFormat::csv) {
    std::cout << "key,value\n";
    std::function<void(const std::string&, const ordered_json&)> walk =
        [&](const std::string& prefix, const ordered_json& v) {
          if (v.is_object()) {
            for (auto it = v.begin(); it != v.end(); ++it)
              walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
          } else if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i)
              walk(prefix + "[" + std::to_string(i) + "]", v[i]);
          } else {
            std::cout << prefix << "," << v.dump() << "\n";
          }
        };
    walk("", record.results);
    if (!opts.no_timings) std::cout << "total_ms," << record.total_ms << "\n";
    return;
  }
  // text
  std::function<void(const std::string&, const ordered_json&, int)> walk =
      [&](const std::string& key, const ordered_json& v, int indent) {
        std::string pad(static_cast<std::size_t>(indent), ' ');
        if (v.is_object()) {
          if (!key.empty()) std::cout << pad << key << ":\n";
          for (auto it = v.begin(); it != v.end(); ++it)
            walk(it.key(), it.value(), key.empty() ? indent : indent + 2);
        } else if (v.is_array()) {
          std::cout << pad << key << ": " << v.dump() << "\n";
        } else {
          std::cout << pad << key << ": " << v.dump() << "\n";
        }
      };
  walk("", record.results, 0);
  if (!opts.no_timings) std::cout << "total_ms: " << record.total_ms << "\n";
}

ordered_json policy_json(const FiltrationTree& tree, const QuasiStoppingTime& q) {
  ordered_json out;
  ordered_json stops = ordered_json::array();
  for (NodeId n : q.opt_stops)
    stops.push_back({{"node", n}, {"slot", "t"}, {"time", tree.time_of(n)}});
  for (NodeId p : q.pre_stops)
    stops.push_back(
        {{"node", p}, {"slot", "pre"}, {"time", tree.time_of(p) + 1}});
  out["stops"] = std::move(stops);
  out["never_stop_paths"] = [&] {
    int count = 0;
    for (NodeId leaf : tree.leaves()) {
      bool marked = false;
      for (NodeId n : tree.path_to(leaf))
        if (q.opt_stops.count(n) || q.pre_stops.count(n)) marked = true;
      if (!marked) ++count;
    }
    return count;
  }();
  return out;
}

QuasiStoppingTime parse_policy_arg(const std::string& arg) {
  QuasiStoppingTime q;
  std::ifstream probe(arg);
  if (probe.good()) {
    ordered_json doc = ordered_json::parse(read_file(arg));
    if (doc.contains("opt_stops"))
      for (const auto& v : doc["opt_stops"]) q.opt_stops.insert(v.get<NodeId>());
    if (doc.contains("pre_stops"))
      for (const auto& v : doc["pre_stops"]) q.pre_stops.insert(v.get<NodeId>());
    return q;
  }
  // inline form: "opt:1,2;pre:0"
  std::stringstream ss(arg);
  std::string part;
  while (std::getline(ss, part, ';')) {
    auto colon = part.find(':');
    if (colon == std::string::npos)
      throw ValidationError("bad policy spec '" + part + "' (want opt:ids or pre:ids)");
    std::string kind = part.substr(0, colon);
    std::stringstream ids(part.substr(colon + 1));
    std::string tok;
    while (std::getline(ids, tok, ',')) {
      if (tok.empty()) continue;
      NodeId id = std::stoll(tok);
      if (kind == "opt") q.opt_stops.insert(id);
      else if (kind == "pre") q.pre_stops.insert(id);
      else throw ValidationError("bad policy kind '" + kind + "'");
    }
  }
  return q;
}

ordered_json certificate_report_json(const CertificateReport& report, double tol) {
  ordered_json out;
  out["feasible"] = report.feasible;
  out["optimal"] = report.optimal;
  out["gap"] = report.gap;
  out["oc1_residual"] = report.oc1_residual;
  out["oc2_residual"] = report.oc2_residual;
  out["tolerance"] = tol;
  ordered_json viols = ordered_json::array();
  for (const auto& v : report.violations)
    viols.push_back({{"kind", v.kind}, {"node", v.node}, {"amount", v.amount}});
  out["violations"] = std::move(viols);
  return out;
}

ParsedModel load_model(const std::string& path, RunRecord& record) {
  std::string bytes = read_file(path);
  record.model_hash = fnv1a_hash(bytes);
  ParsedModel model = parse_model(bytes);
  std::uint64_t cap = node_cap_from_env();
  if (model.tree.node_count() > cap)
    throw CapExceededError("model has " + std::to_string(model.tree.node_count()) +
                           " nodes, over the cap " + std::to_string(cap) +
                           " (override with STOPLAB_NODE_CAP)");
  return model;
}

int cmd_solve(const std::string& model_path, bool quasi, bool relaxed,
              const std::string& export_lp, const CommonOpts& opts, RunRecord& record) {
  ParsedModel model = load_model(model_path, record);

  if (!export_lp.empty()) {
    std::ofstream out(export_lp);
    if (!out) throw ValidationError("cannot write LP file: " + export_lp);
    out << write_lp_text(build_primal_lp(model.tree, model.reward, quasi));
  }

  record.results["problem"] = quasi ? (relaxed ? "ROQS" : "OQS") : (relaxed ? "ROS" : "OS");
  if (relaxed) {
    LinearProgram lp = build_primal_lp(model.tree, model.reward, quasi);
    LpSolution sol = solve_lp(lp);
    RandomizedQuasiStopping x = from_lp_solution(lp, sol);
    record.results["value"] = sol.objective;
    ordered_json masses = ordered_json::array();
    for (const auto& [id, w] : x.a)
      masses.push_back({{"node", id}, {"slot", "t"}, {"mass", w}});
    for (const auto& [id, w] : x.b)
      masses.push_back({{"node", id}, {"slot", "pre"}, {"mass", w}});
    record.results["vertex"] = std::move(masses);
    record.results["is_extreme"] = is_extreme(model.tree, x, opts.tol);
  } else {
    SnellSolution s = quasi ? quasi_snell(model.tree, model.reward)
                            : solve_os(model.tree, model.reward);
    record.results["value"] = s.value;
    record.results["policy"] = policy_json(model.tree, s.policy);
  }
  return 0;
}

int cmd_certify(const std::string& model_path, bool auto_policy,
                const std::string& policy_arg, const CommonOpts& opts, RunRecord& record) {
  ParsedModel model = load_model(model_path, record);

  SnellSolution s = quasi_snell(model.tree, model.reward);
  MartingaleCertificate cert = dual_from_snell(model.tree, s);
  QuasiStoppingTime policy;
  if (auto_policy) {
    policy = s.policy;
  } else {
    policy = parse_policy_arg(policy_arg);
    validate_policy(model.tree, policy);
  }
  CertificateReport report =
      check_certificate(model.tree, model.reward, to_randomized(policy), cert, opts.tol);
  record.results["value"] = s.value;
  record.results["policy"] = policy_json(model.tree, policy);
  record.results["certificate"] = certificate_report_json(report, opts.tol);
  ordered_json m = ordered_json::object();
  for (NodeId id : model.tree.node_ids()) m[std::to_string(id)] = cert.m.at(id);
  record.results["martingale"] = std::move(m);
  return report.optimal ? 0 : 4;
}

int cmd_bounds(const LatticeModel& lattice, const std::string& martingale,
               std::int64_t paths, std::uint64_t seed, int threads, RunRecord& record) {
  DualMartingale spec;
  if (martingale == "snell_doob") spec = DualMartingale::snell_doob;
  else if (martingale == "zero") spec = DualMartingale::zero;
  else throw ValidationError("unknown martingale '" + martingale + "' (snell_doob|zero)");

  double primal = lattice_snell(lattice).value;
  McDualResult mc = mc_dual_bound(lattice, spec, paths, seed, threads);
  record.results["primal_value"] = primal;
  record.results["dual_estimate"] = mc.estimate;
  record.results["std_error"] = mc.std_error;
  record.results["gap"] = mc.estimate - primal;
  record.results["paths"] = paths;
  record.results["seed"] = seed;
  record.results["martingale"] = martingale;
  return 0;
}

int cmd_norm(const std::string& model_path, const CommonOpts& opts, RunRecord& record) {
  ParsedModel model = load_model(model_path, record);
  NormReport r = proj_norm(model.tree, model.reward);
  record.results["sup_norm"] = r.sup_norm;
  record.results["proj_norm"] = r.proj_norm;
  record.results["equal_within_tol"] =
      std::abs(r.sup_norm - r.proj_norm) <= std::max(opts.tol, kGapTol);
  ordered_json witness = ordered_json::array();
  for (const auto& row : r.witness_z.values) {
    ordered_json jrow = ordered_json::array();
    for (double v : row) jrow.push_back(v);
    witness.push_back(std::move(jrow));
  }
  record.results["witness_z"] = std::move(witness);
  return 0;
}

int cmd_refine(const std::string& profile_name, const std::vector<int>& resolutions,
               const CommonOpts& opts, RunRecord& record) {
  auto rows = refinement_study(named_profile(profile_name), resolutions);
  if (parse_format(opts.out) == OutFormat::csv) {
    std::cout << "resolution,os_value,oqs_value\n";
    for (const auto& row : rows)
      std::cout << row.resolution << "," << ordered_json(row.os_value).dump() << ","
                << ordered_json(row.oqs_value).dump() << "\n";
    return 0;
  }
  record.results["profile"] = profile_name;
  record.results["grid_convention"] = "left-closed";
  ordered_json table = ordered_json::array();
  for (const auto& row : rows)
    table.push_back({{"resolution", row.resolution},
                     {"os_value", row.os_value},
                     {"oqs_value", row.oqs_value}});
  record.results["rows"] = std::move(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stoplab: optimal stopping and quasi-stopping on scenario trees"};
  app.require_subcommand(1);

  CommonOpts common;

  std::string model_path;
  bool quasi = false, relaxed = false;
  std::string export_lp;
  auto* solve = app.add_subcommand("solve", "Solve a model file");
  solve->add_option("model", model_path, "model JSON file")->required();
  solve->add_flag("--quasi", quasi, "solve the quasi-stopping problem");
  solve->add_flag("--relaxed", relaxed, "solve the LP relaxation and report the vertex");
  solve->add_option("--export-lp", export_lp, "also write the LP in interchange format");

  bool auto_policy = false;
  std::string policy_arg;
  auto* certify = app.add_subcommand("certify", "Check an optimality certificate");
  certify->add_option("model", model_path, "model JSON file")->required();
  certify->add_flag("--auto", auto_policy, "certify the solver's own policy");
  certify->add_option("--policy", policy_arg,
                      "policy file or inline spec, e.g. opt:1,2;pre:0");

  LatticeModel lattice;
  std::string payoff = "put";
  std::string martingale = "snell_doob";
  std::int64_t paths = 100000;
  std::uint64_t seed = 12345;
  int threads = 1;
  double prob = -1.0;
  auto* bounds = app.add_subcommand("bounds", "Monte Carlo dual bound on a lattice");
  bounds->add_option("--steps", lattice.steps, "lattice steps");
  bounds->add_option("--s0", lattice.s0, "spot");
  bounds->add_option("--strike", lattice.strike, "strike");
  bounds->add_option("--up", lattice.up, "up factor");
  bounds->add_option("--down", lattice.down, "down factor");
  bounds->add_option("--prob", prob, "up probability (default: risk neutral)");
  bounds->add_option("--discount", lattice.discount, "discount per step");
  bounds->add_option("--payoff", payoff, "put|call");
  bounds->add_option("--paths", paths, "number of Monte Carlo paths (>= 2)");
  bounds->add_option("--seed", seed, "random seed");
  bounds->add_option("--threads", threads, "worker count (result independent of it)");
  bounds->add_option("--martingale", martingale, "snell_doob|zero");

  auto* norm = app.add_subcommand("norm", "Stopping norm and projection seminorm");
  norm->add_option("model", model_path, "model JSON file")->required();

  std::string profile = "linear_dropoff";
  std::string resolutions_arg = "10,100";
  auto* refine = app.add_subcommand("refine", "Grid-refinement study of a reward profile");
  refine->add_option("--profile", profile, "linear_dropoff|constant|step_up");
  refine->add_option("--resolutions", resolutions_arg, "comma list, strictly increasing");

  for (auto* sub : {solve, certify, bounds, norm, refine}) {
    sub->add_option("--out", common.out, "output format: text|json|csv");
    sub->add_option("--tol", common.tol, "comparison tolerance");
    sub->add_flag("--no-timings", common.no_timings, "suppress timing output");
  }

  CLI11_PARSE(app, argc, argv);

  RunRecord record;
  // The worker count never changes results, so it is not part of the record.
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--threads") {
      ++i;
      continue;
    }
    if (arg.rfind("--threads=", 0) == 0) continue;
    record.arguments.push_back(arg);
  }

  auto started = std::chrono::steady_clock::now();
  int exit_code = 0;
  try {
    if (solve->parsed()) {
      record.command = "solve";
      exit_code = cmd_solve(model_path, quasi, relaxed, export_lp, common, record);
    } else if (certify->parsed()) {
      record.command = "certify";
      if (!auto_policy && policy_arg.empty())
        throw ValidationError("certify needs --auto or --policy");
      if (auto_policy && !policy_arg.empty())
        throw ValidationError("certify takes --auto or --policy, not both");
      exit_code = cmd_certify(model_path, auto_policy, policy_arg, common, record);
    } else if (bounds->parsed()) {
      record.command = "bounds";
      if (prob >= 0.0) lattice.prob = prob;
      else lattice.prob = (1.0 / lattice.discount - lattice.down) / (lattice.up - lattice.down);
      if (payoff == "put") lattice.payoff = PayoffKind::put;
      else if (payoff == "call") lattice.payoff = PayoffKind::call;
      else throw ValidationError("unknown payoff '" + payoff + "' (put|call)");
      exit_code = cmd_bounds(lattice, martingale, paths, seed, threads, record);
    } else if (norm->parsed()) {
      record.command = "norm";
      exit_code = cmd_norm(model_path, common, record);
    } else if (refine->parsed()) {
      record.command = "refine";
      std::vector<int> resolutions;
      std::stringstream ss(resolutions_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) resolutions.push_back(std::stoi(tok));
      int code = cmd_refine(profile, resolutions, common, record);
      if (parse_format(common.out) == OutFormat::csv) return code;  // already printed
      exit_code = code;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  auto elapsed = std::chrono::steady_clock::now() - started;
  record.total_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();

  emit(record, common);
  return exit_code;
}
