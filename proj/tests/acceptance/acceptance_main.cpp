// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Usage: acceptance <path-to-cli> <fixtures-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "acceptance/vertex_enum.hpp"
#include "stoplab/duality.hpp"
#include "stoplab/modelio.hpp"
#include "stoplab/norms.hpp"
#include "stoplab/relaxation.hpp"
#include "stoplab/snell.hpp"
#include "support/fixtures.hpp"

using namespace stoplab;

namespace {

std::string g_cli;
std::string g_fixtures;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Family {
  std::vector<GeneratedModel> models;
};

// 200 random trees, depth <= 5, branching <= 3, free-form rewards.
Family make_family() {
  Family family;
  std::mt19937_64 master(20250810);
  std::uniform_int_distribution<int> depth(1, 5);
  std::uniform_int_distribution<int> branch(1, 3);
  for (int i = 0; i < 200; ++i) {
    RandomTreeSpec spec;
    spec.depth = depth(master);
    spec.max_branch = branch(master);
    spec.seed = master();
    family.models.push_back(gen_random_tree(spec));
  }
  return family;
}

double policy_value(const FiltrationTree& tree, const LadlagReward& y,
                    const QuasiStoppingTime& q) {
  double acc = 0.0;
  for (NodeId n : q.opt_stops) acc += tree.atom_probability(n) * y.opt.at(n);
  for (NodeId p : q.pre_stops) acc += tree.atom_probability(p) * y.pre.at(p);
  return acc;
}

bool criterion_oracle_equivalence(const Family& family, std::string& detail) {
  auto started = std::chrono::steady_clock::now();
  int checked = 0;
  double worst = 0.0;
  for (const auto& m : family.models) {
    if (count_quasi_stopping_times(m.tree) > 10000) continue;
    ++checked;
    double best = -1e300;
    for (const auto& q : enumerate_quasi_stopping_times(m.tree, 10000))
      best = std::max(best, policy_value(m.tree, m.reward, q));
    double solver = quasi_snell(m.tree, m.reward).value;
    worst = std::max(worst, std::abs(solver - best));
    if (std::abs(solver - best) > 1e-10) {
      detail = "solver and brute force disagree by " + sci(solver - best);
      return false;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  detail = std::to_string(checked) + "/200 trees under the cap, worst gap " + sci(worst) +
           ", " + sci(secs) + " s";
  return secs < 60.0;
}

bool criterion_strong_duality(const Family& family, std::string& detail) {
  double worst = 0.0;
  for (const auto& m : family.models) {
    double primal = solve_lp(build_primal_lp(m.tree, m.reward, true)).objective;
    double dual = solve_lp(build_dual_lp(m.tree, m.reward)).objective;
    double snell = quasi_snell(m.tree, m.reward).value;
    worst = std::max({worst, std::abs(primal - dual), std::abs(primal - snell),
                      std::abs(dual - snell)});
    if (std::abs(primal - dual) > 1e-8 || std::abs(primal - snell) > 1e-8 ||
        std::abs(dual - snell) > 1e-8) {
      detail = "gap " + sci(worst);
      return false;
    }
  }
  detail = "200 trees, worst spread " + sci(worst);
  return true;
}

bool criterion_extreme_points(std::string& detail) {
  auto trees = stoplab::testing::small_trees();
  // two more nine-node shapes: a star and a chain
  {
    std::vector<RawNode> star{{0, 0, std::nullopt, 1.0}};
    for (int i = 1; i <= 8; ++i) star.push_back({i, 1, 0, 0.125});
    trees.push_back(FiltrationTree::validate(star, 1));
    std::vector<RawNode> chain{{0, 0, std::nullopt, 1.0}};
    for (int i = 1; i <= 8; ++i) chain.push_back({i, i, i - 1, 1.0});
    trees.push_back(FiltrationTree::validate(chain, 8));
  }

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (const auto& tree : trees) {
    if (tree.node_count() > 9) {
      detail = "tree over nine nodes in the fixture list";
      return false;
    }
    LadlagReward y;
    for (NodeId id : tree.node_ids()) {
      y.opt.set(id, unit(rng) * 2.0 - 0.5);
      if (!tree.is_terminal(id)) y.pre.set(id, unit(rng) * 2.0 - 0.5);
    }
    LinearProgram lp = build_primal_lp(tree, y, true);
    stoplab::testing::Polytope poly;
    poly.n = lp.num_vars();
    poly.a = lp.rows;
    poly.b = lp.rhs;
    auto vertices = stoplab::testing::enumerate_vertices(poly);

    std::uint64_t expected = count_quasi_stopping_times(tree);
    if (vertices.size() != expected) {
      detail = "tree with " + std::to_string(tree.node_count()) + " nodes: " +
               std::to_string(vertices.size()) + " vertices vs " +
               std::to_string(expected) + " quasi-stopping times";
      return false;
    }

    auto all = enumerate_quasi_stopping_times(tree);
    std::set<std::pair<std::set<NodeId>, std::set<NodeId>>> catalog;
    for (const auto& q : all) catalog.insert({q.opt_stops, q.pre_stops});

    for (const auto& v : vertices) {
      QuasiStoppingTime q;
      for (std::size_t j = 0; j < v.size(); ++j) {
        double w = v[j];
        if (std::abs(w) > 1e-9 && std::abs(w - 1.0) > 1e-9) {
          detail = "fractional vertex coordinate " + sci(w);
          return false;
        }
        if (w > 0.5) {
          if (lp.vars[j].kind == VarKind::optional_mass) q.opt_stops.insert(lp.vars[j].node);
          else q.pre_stops.insert(lp.vars[j].node);
        }
      }
      if (!catalog.count({q.opt_stops, q.pre_stops})) {
        detail = "vertex does not correspond to a quasi-stopping time";
        return false;
      }
    }

    // split/reconstruct random midpoints of distinct vertices
    for (int trial = 0; trial < 20 && vertices.size() >= 2; ++trial) {
      std::size_t i = rng() % vertices.size();
      std::size_t k = rng() % vertices.size();
      if (i == k) continue;
      double lambda = 0.2 + 0.6 * unit(rng);
      RandomizedQuasiStopping x;
      for (std::size_t j = 0; j < poly.n; ++j) {
        double w = lambda * vertices[i][j] + (1.0 - lambda) * vertices[k][j];
        if (w == 0.0) continue;
        if (lp.vars[j].kind == VarKind::optional_mass) x.a[lp.vars[j].node] = w;
        else x.b[lp.vars[j].node] = w;
      }
      double max_total = 0.0;
      for (NodeId leaf : tree.leaves()) {
        double total = 0.0;
        for (NodeId n : tree.path_to(leaf)) {
          total += x.a_at(n);
          if (!tree.is_terminal(n)) total += x.b_at(n);
        }
        max_total = std::max(max_total, total);
      }
      if (max_total < 1e-9) continue;  // both vertices were the never-stop plan
      double s = 0.5 * std::min(max_total, 1.0);
      SplitResult split = split_nonextreme(tree, x, s);
      for (NodeId id : tree.node_ids()) {
        double back_a = split.weight1 * split.x1.a_at(id) + split.weight2 * split.x2.a_at(id);
        if (std::abs(back_a - x.a_at(id)) > 1e-12) {
          detail = "split reconstruction off by " + sci(back_a - x.a_at(id));
          return false;
        }
        if (!tree.is_terminal(id)) {
          double back_b =
              split.weight1 * split.x1.b_at(id) + split.weight2 * split.x2.b_at(id);
          if (std::abs(back_b - x.b_at(id)) > 1e-12) {
            detail = "split reconstruction off on the pre track";
            return false;
          }
        }
      }
    }
  }
  detail = std::to_string(trees.size()) + " trees, all vertices 0/1 and in bijection";
  return true;
}

bool criterion_subregular_collapse(std::string& detail) {
  std::mt19937_64 master(4040);
  std::uniform_int_distribution<int> depth(1, 5);
  std::uniform_int_distribution<int> branch(1, 3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    RandomTreeSpec spec;
    spec.depth = depth(master);
    spec.max_branch = branch(master);
    spec.seed = master();
    spec.mode = RegularityMode::subregular;
    GeneratedModel m = gen_random_tree(spec);
    double gap = quasi_snell(m.tree, m.reward).value - solve_os(m.tree, m.reward).value;
    worst = std::max(worst, std::abs(gap));
    if (gap > 1e-9 || gap < -1e-12) {
      detail = "collapse failed with gap " + sci(gap);
      return false;
    }
  }
  auto b = stoplab::testing::fixture_b();
  double fixture_gap =
      quasi_snell(b.tree, b.reward).value - solve_os(b.tree, b.reward).value;
  detail = "100 subregular instances, worst |gap| " + sci(worst) +
           "; fixture B gap " + sci(fixture_gap);
  return fixture_gap == 0.5;
}

bool criterion_certificates(const Family& family, std::string& detail) {
  int swaps = 0;
  for (const auto& m : family.models) {
    SnellSolution s = quasi_snell(m.tree, m.reward);
    MartingaleCertificate cert = dual_from_snell(m.tree, s);
    CertificateReport good =
        check_certificate(m.tree, m.reward, to_randomized(s.policy), cert);
    if (!good.feasible || !good.optimal) {
      detail = "genuine certificate rejected";
      return false;
    }

    // breaking the martingale property at one node must be named
    MartingaleCertificate broken = cert;
    NodeId victim = m.tree.node_ids()[1];
    broken.m.set(victim, broken.m.at(victim) + 1e-3);
    CertificateReport bad =
        check_certificate(m.tree, m.reward, to_randomized(s.policy), broken);
    bool named = false;
    for (const auto& v : bad.violations) named = named || v.kind == "martingale";
    if (bad.feasible || !named) {
      detail = "perturbed martingale not rejected by name";
      return false;
    }

    // a strictly suboptimal policy must fail the optimality conditions
    if (count_quasi_stopping_times(m.tree) <= 10000) {
      QuasiStoppingTime worst_q;
      double worst_v = 1e300;
      for (const auto& q : enumerate_quasi_stopping_times(m.tree, 10000)) {
        double v = policy_value(m.tree, m.reward, q);
        if (v < worst_v) {
          worst_v = v;
          worst_q = q;
        }
      }
      if (worst_v < s.value - 1e-6) {
        ++swaps;
        CertificateReport sub =
            check_certificate(m.tree, m.reward, to_randomized(worst_q), cert);
        bool named_sub = false;
        for (const auto& v : sub.violations)
          named_sub = named_sub || v.kind == "oc1_term" || v.kind == "oc2_path";
        if (sub.optimal || !named_sub) {
          detail = "suboptimal policy accepted";
          return false;
        }
      }
    }
  }
  detail = "200 certificates accepted; perturbations rejected; " + std::to_string(swaps) +
           " suboptimal swaps rejected";
  return swaps > 0;
}

bool criterion_rogers(const Family& family, std::string& detail) {
  double worst = 0.0;
  for (const auto& m : family.models) {
    SnellSolution s = quasi_snell(m.tree, m.reward);
    MartingaleCertificate cert = dual_from_snell(m.tree, s);
    double tight = rogers_bound(m.tree, m.reward, cert.m);
    worst = std::max(worst, std::abs(tight - s.value));
    if (std::abs(tight - s.value) > 1e-9) {
      detail = "not tight at the Snell-Doob martingale: " + sci(tight - s.value);
      return false;
    }
    NodeFunction zero;
    for (NodeId id : m.tree.node_ids()) zero.set(id, 0.0);
    if (rogers_bound(m.tree, m.reward, zero) < s.value - 1e-9) {
      detail = "zero martingale bound fell below the primal value";
      return false;
    }
  }
  detail = "tight on 200 instances, worst defect " + sci(worst);
  return true;
}

bool criterion_mc_dual(std::string& detail) {
  auto started = std::chrono::steady_clock::now();
  LatticeModel put;
  put.steps = 10;
  put.s0 = 100.0;
  put.strike = 100.0;
  put.up = 1.1;
  put.down = 1.0 / 1.1;
  put.prob = (1.0 - put.down) / (put.up - put.down);
  put.discount = 1.0;
  double primal = lattice_snell(put).value;
  McDualResult mc = mc_dual_bound(put, DualMartingale::snell_doob, 100000, 20250810);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  detail = "primal " + sci(primal) + ", estimate " + sci(mc.estimate) +
           " +- " + sci(mc.std_error) + ", " + sci(secs) + " s";
  if (std::abs(mc.estimate - primal) > 3.0 * mc.std_error + 1e-12) return false;
  if (mc.std_error > 0.01 * primal) return false;
  return secs < 10.0;
}

bool criterion_norms(std::string& detail) {
  std::mt19937_64 master(8080);
  std::uniform_int_distribution<int> depth(1, 4);
  std::uniform_int_distribution<int> branch(1, 3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    RandomTreeSpec spec;
    spec.depth = depth(master);
    spec.max_branch = branch(master);
    spec.seed = master();
    GeneratedModel m = gen_random_tree(spec);
    NormReport r = proj_norm(m.tree, m.reward);
    worst = std::max(worst, std::abs(r.sup_norm - r.proj_norm));
    if (std::abs(r.sup_norm - r.proj_norm) > 1e-8) {
      detail = "norms disagree by " + sci(r.sup_norm - r.proj_norm);
      return false;
    }

    LadlagReward nonneg;
    for (NodeId id : m.tree.node_ids()) {
      nonneg.opt.set(id, std::abs(m.reward.opt.at(id)));
      if (!m.tree.is_terminal(id)) nonneg.pre.set(id, 0.0);
    }
    auto [relaxed, sup] = nonneg_norm_identity(m.tree, nonneg);
    if (std::abs(relaxed - sup) > 1e-8) {
      detail = "nonnegative identity broke by " + sci(relaxed - sup);
      return false;
    }
  }
  detail = "100 trees, worst norm spread " + sci(worst);
  return true;
}

bool criterion_refinement(std::string& detail) {
  std::vector<int> resolutions{10, 100, 1000};
  auto rows = refinement_study(named_profile("linear_dropoff"), resolutions);
  for (const auto& row : rows) {
    double expected_os = static_cast<double>(row.resolution - 1) / row.resolution;
    if (row.os_value != expected_os) {
      detail = "OS value at n=" + std::to_string(row.resolution) + " is not (n-1)/n exactly";
      return false;
    }
    if (row.oqs_value != 1.0) {
      detail = "OQS value at n=" + std::to_string(row.resolution) + " is not 1 exactly";
      return false;
    }
  }
  detail = "OS = (n-1)/n and OQS = 1 exactly at n = 10, 100, 1000";
  return true;
}

int run_cli(const std::string& args, const std::string& out_path) {
  std::string cmd = "\"" + g_cli + "\" " + args + " > " + out_path + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion_cli_determinism(std::string& detail) {
  const std::string fa = g_fixtures + "/fixture_a.json";
  const std::string fb = g_fixtures + "/fixture_b.json";
  const std::string fc = g_fixtures + "/fixture_c.json";
  std::vector<std::string> commands{
      "solve " + fb + " --quasi --out json --no-timings",
      "solve " + fb + " --out json --no-timings",
      "solve " + fc + " --quasi --relaxed --out json --no-timings",
      "certify " + fa + " --auto --out json --no-timings",
      "norm " + fa + " --out json --no-timings",
      "refine --profile linear_dropoff --resolutions 10,100 --out json --no-timings",
      "refine --profile linear_dropoff --resolutions 10,100 --out csv --no-timings",
      "bounds --steps 10 --paths 20000 --seed 7 --threads 1 --out json --no-timings",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string out1 = "acc_cli_" + std::to_string(i) + "_a.txt";
    std::string out2 = "acc_cli_" + std::to_string(i) + "_b.txt";
    int rc1 = run_cli(commands[i], out1);
    int rc2 = run_cli(commands[i], out2);
    if (rc1 != 0 || rc2 != 0) {
      detail = "command '" + commands[i] + "' exited with " + std::to_string(rc1) + "/" +
               std::to_string(rc2);
      return false;
    }
    if (slurp(out1) != slurp(out2)) {
      detail = "repeated run of '" + commands[i] + "' differed";
      return false;
    }
    std::remove(out1.c_str());
    std::remove(out2.c_str());
  }

  // worker-count independence of the Monte Carlo report
  int rc1 = run_cli("bounds --steps 10 --paths 20000 --seed 7 --threads 1 --out json --no-timings",
                    "acc_cli_t1.txt");
  int rc4 = run_cli("bounds --steps 10 --paths 20000 --seed 7 --threads 4 --out json --no-timings",
                    "acc_cli_t4.txt");
  if (rc1 != 0 || rc4 != 0 || slurp("acc_cli_t1.txt") != slurp("acc_cli_t4.txt")) {
    detail = "bounds report depends on the worker count";
    return false;
  }
  std::remove("acc_cli_t1.txt");
  std::remove("acc_cli_t4.txt");

  // exit-code contract
  if (run_cli("solve " + g_fixtures + "/missing.json --out json", "acc_cli_e.txt") != 2) {
    detail = "bad model path should exit 2";
    return false;
  }
  if (run_cli("certify " + fa + " --policy opt:0 --out json --no-timings", "acc_cli_e.txt") !=
      4) {
    detail = "suboptimal policy should exit 4";
    return false;
  }
  if (run_cli("bounds --paths 1", "acc_cli_e.txt") != 2) {
    detail = "--paths 1 should exit 2";
    return false;
  }
  {
    std::string cmd = "STOPLAB_NODE_CAP=2 \"" + g_cli + "\" solve " + fa +
                      " > acc_cli_e.txt 2>/dev/null";
    int rc = std::system(cmd.c_str());
    if (WEXITSTATUS(rc) != 2) {
      detail = "STOPLAB_NODE_CAP=2 should reject a three-node model with exit 2";
      return false;
    }
  }
  std::remove("acc_cli_e.txt");
  detail = "byte-identical reports, worker-count independent, exit codes honored";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <stoplab-cli> <fixtures-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_fixtures = argv[2];

  Family family = make_family();

  struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
  };
  std::vector<Criterion> criteria{
      {"oracle equivalence (solver = brute force)",
       [&](std::string& d) { return criterion_oracle_equivalence(family, d); }},
      {"strong duality (primal LP = dual LP = induction)",
       [&](std::string& d) { return criterion_strong_duality(family, d); }},
      {"extreme points (all vertices 0/1, split reconstructs)",
       [&](std::string& d) { return criterion_extreme_points(d); }},
      {"subregular collapse (quasi value = pure value)",
       [&](std::string& d) { return criterion_subregular_collapse(d); }},
      {"certificates (accept genuine, name violations)",
       [&](std::string& d) { return criterion_certificates(family, d); }},
      {"pathwise bound tightness at the Snell-Doob martingale",
       [&](std::string& d) { return criterion_rogers(family, d); }},
      {"Monte Carlo dual bound on the Bermudan put",
       [&](std::string& d) { return criterion_mc_dual(d); }},
      {"norm equality (stopping norm = projection seminorm)",
       [&](std::string& d) { return criterion_norms(d); }},
      {"refinement lab (non-attainment of pure stopping)",
       [&](std::string& d) { return criterion_refinement(d); }},
      {"CLI determinism and exit codes",
       [&](std::string& d) { return criterion_cli_determinism(d); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": "
              << criteria[i].name << (detail.empty() ? "" : " | " + detail) << "\n";
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
