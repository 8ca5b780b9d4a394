#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "switchlab/error.hpp"
#include "switchlab/gridgraph.hpp"
#include "switchlab/lab.hpp"
#include "switchlab/restrictions.hpp"

using namespace switchlab;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ExperimentFlags {
  ExperimentConfig cfg;
  std::string config_path;
  std::string out;
  std::string format = "csv";
  CLI::Option* seed = nullptr;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> setters;
};

// Registers an option whose value overrides the config file when given.
template <typename T, typename F>
void flag(CLI::App* app, ExperimentFlags& f, const std::string& name, T& storage, const std::string& help, F apply) {
  CLI::Option* opt = app->add_option(name, storage, help);
  f.setters.emplace_back(opt, [&storage, apply](ExperimentConfig& c) { apply(c, storage); });
}

struct FlagValues {
  int n = 0, delta = 0, k = 0, ell = 0, s = 0, terms = 0, vars = 0, threads = 0, depth_bound = 0;
  double p = 0, level = 0;
  std::vector<int> ts;
  std::uint64_t trials = 0, seed = 0;
  std::string edge_pool;
  bool allow_large = false;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f, FlagValues& v) {
  flag(app, f, "--n", v.n, "grid side", [](auto& c, auto x) { c.n = x; });
  flag(app, f, "--delta", v.delta, "centers per subgrid", [](auto& c, auto x) { c.delta = x; });
  flag(app, f, "--p", v.p, "star probability", [](auto& c, auto x) { c.p = x; });
  flag(app, f, "--k", v.k, "term width", [](auto& c, auto x) { c.k = x; });
  flag(app, f, "--l", v.ell, "partial depth ell", [](auto& c, auto x) { c.ell = x; });
  flag(app, f, "--s", v.s, "family size", [](auto& c, auto x) { c.s = x; });
  flag(app, f, "--terms", v.terms, "terms per DNF", [](auto& c, auto x) { c.terms = x; });
  flag(app, f, "--vars", v.vars, "variables (uniform experiments)", [](auto& c, auto x) { c.vars = x; });
  flag(app, f, "--threads", v.threads, "worker threads (0: SWITCHLAB_THREADS or all cores)",
       [](auto& c, auto x) { c.threads = x; });
  flag(app, f, "--depth-bound", v.depth_bound, "k of the good-tree contexts", [](auto& c, auto x) { c.depth_bound = x; });
  flag(app, f, "--level", v.level, "one-sided confidence level", [](auto& c, auto x) { c.level = x; });
  flag(app, f, "--trials", v.trials, "trials N", [](auto& c, auto x) { c.trials = x; });
  flag(app, f, "--edge-pool", v.edge_pool, "grid family edges: paths or all", [](auto& c, auto x) { c.edge_pool = x; });
  CLI::Option* t = app->add_option("--t", v.ts, "t values (repeat or comma separated)")->delimiter(',');
  f.setters.emplace_back(t, [&v](ExperimentConfig& c) { c.ts = v.ts; });
  CLI::Option* large = app->add_flag("--allow-large", v.allow_large, "lift the desk-scale caps");
  f.setters.emplace_back(large, [&v](ExperimentConfig& c) { c.allow_large = v.allow_large; });
  f.seed = app->add_option("--seed", v.seed, "master seed (fresh if omitted)");
  f.setters.emplace_back(f.seed, [&v](ExperimentConfig& c) { c.seed = v.seed; });
  app->add_option("--config", f.config_path, "JSON config; flags win on conflict")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output file (default stdout)");
  app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Writes through a file when a path is given, otherwise to stdout.
template <typename F>
void emit(const std::string& path, F write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw PreconditionError("cannot open " + path);
  write(os);
}

int run_experiment_command(const std::string& kind, ExperimentFlags& f) {
  ExperimentConfig cfg = default_config(kind);
  bool seed_from_file = false;
  if (!f.config_path.empty()) {
    std::ifstream is(f.config_path);
    nlohmann::json j = nlohmann::json::parse(is);
    if (j.contains("kind") && j["kind"] != kind)
      throw PreconditionError("config kind " + j["kind"].get<std::string>() + " does not match " + kind);
    j.get_to(cfg);
    seed_from_file = j.contains("seed");
  }
  for (auto& [opt, apply] : f.setters)
    if (opt->count() > 0) apply(cfg);
  cfg.kind = kind;
  if (f.seed->count() == 0 && !seed_from_file) cfg.seed = fresh_seed();
  std::cerr << "seed: " << cfg.seed << '\n';
  for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << '\n';
  const ExperimentResult res = run_experiment(cfg);
  emit(f.out, [&](std::ostream& os) {
    if (f.format == "json")
      write_json(os, res);
    else
      write_csv(os, res);
  });
  for (const auto& note : res.notes) std::cerr << "note: " << note << '\n';
  std::cerr << "verdict: " << (res.pass() ? "PASS" : "FAIL") << '\n';
  return res.pass() ? 0 : kExitFail;
}

Charge make_charge(const TorusGrid& grid, const std::string& kind, std::uint64_t seed) {
  const std::size_t nv = grid.graph().num_vertices();
  if (kind == "all-one") return constant_charge(nv, true);
  if (kind == "all-zero") return constant_charge(nv, false);
  if (kind == "base") return base_charge(grid);
  Rng rng(seed);
  Charge c(nv);
  for (auto& x : c) x = rng.bit();
  return c;
}

int report(const std::vector<std::string>& files) {
  bool all = true;
  for (const auto& path : files) {
    std::ifstream is(path);
    if (!is) throw PreconditionError("cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      const auto j = nlohmann::json::parse(text);
      if (j.value("schema_version", 0) != kSchemaVersion) throw PreconditionError(path + ": unsupported schema");
      std::cout << path << " " << j["config"]["kind"].get<std::string>() << " seed=" << j["config"]["seed"] << '\n';
      for (const auto& r : j["rows"]) {
        std::cout << "  " << r["label"].get<std::string>() << " t=" << r["t"] << " failures=" << r["failures"] << "/"
                  << r["trials"] << " upper=" << r["upper"] << " bound=" << r["bound"]
                  << (r["vacuous"].get<bool>() ? " (vacuous)" : "") << " " << r["verdict"].get<std::string>() << '\n';
      }
      all = all && j["verdict"] == "PASS";
    } else {
      std::istringstream lines(text);
      std::string line;
      std::getline(lines, line);
      if (line.rfind("schema_version,", 0) != 0) throw PreconditionError(path + ": not a result file");
      std::cout << path << '\n';
      while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::cout << "  " << line << '\n';
        all = all && line.size() >= 4 && line.compare(line.size() - 4, 4, "PASS") == 0;
      }
    }
  }
  std::cout << "overall: " << (all ? "PASS" : "FAIL") << '\n';
  return all ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching-lemma laboratory"};
  app.require_subcommand(1);

  // gen-tseitin
  int tn = 3;
  std::string charge = "all-one", tout;
  std::uint64_t tseed = 0;
  auto* gen = app.add_subcommand("gen-tseitin", "write a Tseitin instance on the n x n torus as DIMACS");
  gen->add_option("--n", tn, "torus side")->required();
  gen->add_option("--charge", charge, "all-one, all-zero, base or random")
      ->check(CLI::IsMember({"all-one", "all-zero", "base", "random"}));
  gen->add_option("--seed", tseed, "seed for random charges");
  gen->add_option("--out", tout, "output file (default stdout)");

  // sample-restriction
  std::string mode = "grid", rout;
  int rn = 48, rdelta = 2, rvars = 20;
  double rp = 1.0 / 32;
  std::uint64_t rseed = 0;
  auto* sample = app.add_subcommand("sample-restriction", "draw a grid or uniform restriction as JSON");
  sample->add_option("--mode", mode, "grid or uniform")->check(CLI::IsMember({"grid", "uniform"}));
  sample->add_option("--n", rn, "grid side");
  sample->add_option("--delta", rdelta, "centers per subgrid");
  sample->add_option("--vars", rvars, "variables (uniform)");
  sample->add_option("--p", rp, "star probability (uniform)");
  CLI::Option* rseed_opt = sample->add_option("--seed", rseed, "seed (fresh if omitted)");
  sample->add_option("--out", rout, "output file (default stdout)");

  // validate-paths
  int vdelta = 2, vn = 0;
  auto* validate = app.add_subcommand("validate-paths", "check the path atlas for edge-disjointness");
  validate->add_option("--delta", vdelta, "centers per subgrid")->required();
  validate->add_option("--n", vn, "grid side (default 48 delta^2)");

  // experiments
  std::map<std::string, std::pair<ExperimentFlags, FlagValues>> exps;
  std::map<std::string, CLI::App*> exp_apps;
  const std::vector<std::pair<std::string, std::string>> kinds{
      {"single-sl", "single switching lemma on random k-DNFs"},
      {"multi-sl", "multi switching lemma, uniform restrictions"},
      {"grid-sl", "multi switching lemma, grid restrictions"},
      {"equiv-suite", "exact way-one/way-two equivalence and grid dominance"},
      {"tails", "negative-binomial moments and geometric sums"}};
  for (const auto& [kind, help] : kinds) {
    auto& [flags, values] = exps[kind];
    exp_apps[kind] = app.add_subcommand(kind, help);
    add_experiment_flags(exp_apps[kind], flags, values);
  }

  // report
  std::vector<std::string> files;
  auto* rep = app.add_subcommand("report", "summarize result files; exit 1 if any verdict is FAIL");
  rep->add_option("files", files, "CSV or JSON results")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      const TorusGrid grid = build_torus(tn);
      const TseitinInstance inst{LiveGraph(grid), make_charge(grid, charge, tseed)};
      emit(tout, [&](std::ostream& os) { write_dimacs(os, inst); });
      return 0;
    }
    if (*sample) {
      if (rseed_opt->count() == 0) rseed = fresh_seed();
      std::cerr << "seed: " << rseed << '\n';
      Rng rng(rseed);
      nlohmann::json out;
      if (mode == "grid") {
        const PathAtlas atlas = build_path_atlas(GridParams{rn, rdelta});
        out = to_json(sample_grid_restriction(atlas, rng));
      } else {
        if (rvars < 1 || !(rp >= 0 && rp <= 1)) throw PreconditionError("need vars >= 1 and p in [0, 1]");
        std::vector<VarId> vars;
        for (int i = 0; i < rvars; ++i) vars.push_back(VarId{static_cast<std::uint32_t>(i)});
        const Restriction rho = sample_uniform(vars, rp, rng);
        nlohmann::json values = nlohmann::json::array();
        for (VarId v : vars) {
          auto b = rho.get(v);
          values.push_back(b ? nlohmann::json(*b ? 1 : 0) : nlohmann::json("*"));
        }
        out = {{"p", rp}, {"values", values}};
      }
      out["seed"] = rseed;
      emit(rout, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
      return 0;
    }
    if (*validate) {
      const GridParams params{vn > 0 ? vn : 48 * vdelta * vdelta, vdelta};
      params.validate(false);
      const DisjointnessReport r = validate_disjointness(build_path_atlas(params));
      std::size_t multi = 0;
      int worst = 0;
      for (const auto& s : r.shared) {
        ++multi;
        worst = std::max(worst, s.max_distance);
      }
      nlohmann::json out{{"n", params.n},
                         {"delta", params.delta},
                         {"paths", r.paths},
                         {"shared_edges", multi},
                         {"max_shared_distance", worst},
                         {"violations", r.violations},
                         {"verdict", r.pass ? "PASS" : "FAIL"}};
      std::cout << out.dump(2) << '\n';
      return r.pass ? 0 : kExitFail;
    }
    if (*rep) return report(files);
    for (auto& [kind, sub] : exp_apps)
      if (*sub) return run_experiment_command(kind, exps[kind].first);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
