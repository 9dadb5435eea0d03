#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgft/baseline.hpp"
#include "fgft/gallery.hpp"
#include "fgft/plan.hpp"
#include "fgft/spectral.hpp"

namespace fgft::cli {

namespace {

// Thrown for anything that should end the run with exit code 3.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoadedGraph {
  std::string label;
  Graph graph;
  std::vector<Involution> hints;
};

// A path to a graph JSON file, or the name of a gallery graph.
LoadedGraph resolve_graph(const std::string& arg) {
  if (std::filesystem::exists(arg)) return {arg, load_graph(arg), {}};
  const auto names = gallery_names();
  if (std::find(names.begin(), names.end(), arg) != names.end()) {
    GalleryEntry e = gallery_entry(arg);
    LoadedGraph g{arg, std::move(e.graph), {}};
    for (auto& [name, phi] : e.known_involutions) g.hints.push_back(std::move(phi));
    return g;
  }
  throw std::invalid_argument("'" + arg + "' is neither a readable file nor a gallery graph");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to --out when given, otherwise to `fallback`.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write '" + path + "'");
  f << text;
}

Matrix random_signals(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix X(n, count);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) X(r, c) = uniform(rng);
  }
  return X;
}

// Median wall time in milliseconds of apply_batch over `reps` runs.
double median_runtime_ms(const FastGftPlan& plan, const Matrix& X, int reps, int threads) {
  std::vector<double> times;
  for (int r = 0; r < std::max(reps, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix Y = apply_batch(plan, X, threads);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

// Largest gap between per-eigenspace coefficient magnitudes of two
// coefficient sets; insensitive to sign and to the basis chosen inside
// repeated eigenvalues.
double coefficient_deviation(const Matrix& A, const Matrix& B, const Vector& eigenvalues) {
  double worst = 0.0;
  for (const auto& [a, b] : eigenvalue_clusters(eigenvalues)) {
    const Eigen::Index m = b - a;
    const Vector na = A.middleRows(a, m).colwise().norm();
    const Vector nb = B.middleRows(a, m).colwise().norm();
    if (na.size() > 0) worst = std::max(worst, (na - nb).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size() || v < 0) throw std::invalid_argument("bad layer count '" + item + "'");
    values.push_back(v);
  }
  return values;
}

Matrix read_signals_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open signals file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " + std::to_string(n) +
                                  " values, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix X(n, static_cast<Eigen::Index>(rows.size()));
  for (size_t c = 0; c < rows.size(); ++c) {
    for (int r = 0; r < n; ++r) X(r, static_cast<Eigen::Index>(c)) = rows[c][static_cast<size_t>(r)];
  }
  return X;
}

std::string plan_summary(const FastGftPlan& plan) {
  std::ostringstream s;
  std::vector<int> leaves;
  int haar = 0;
  int pairs = 0;
  int scales = 0;
  for (const auto& stage : plan.stages) {
    if (const auto* h = std::get_if<HaarButterfly>(&stage)) {
      ++haar;
      pairs += static_cast<int>(h->pairs.size());
    } else if (const auto* d = std::get_if<DenseBlock>(&stage)) {
      leaves.push_back(static_cast<int>(d->matrix.rows()));
    } else if (std::holds_alternative<Scale>(stage)) {
      ++scales;
    }
  }
  const OpCount fast = op_count(plan);
  const std::int64_t n = plan.n;
  s << "n = " << plan.n << ", " << plan.stages.size() << " stages\n";
  s << "haar levels: " << haar << " (" << pairs << " butterflies)\n";
  s << "dense leaves:";
  for (int k : leaves) s << ' ' << k;
  s << "\nscale stages: " << scales << "\n";
  s << "ops (adds/mults): fast " << fast.additions << '/' << fast.multiplications << ", dense "
    << n * (n - 1) << '/' << n * n << "\n";
  return s.str();
}

PlanStrategy strategy_from(std::uint64_t budget, int max_depth, int min_leaf, const std::vector<Involution>& hints) {
  PlanStrategy s;
  s.search_budget = budget;
  s.max_depth = max_depth;
  s.min_leaf_size = min_leaf;
  s.hints = hints;
  return s;
}

const std::map<std::string, double>& reference_reductions() {
  static const std::map<std::string, double> table = {
      {"cycle12", 52.7},   {"cycle80", 79.7},   {"bidiag16", 53.7},   {"bidiag64", 68.5},
      {"zshaped16", 41.5}, {"zshaped64", 45.0}, {"skeleton15", 45.5}, {"skeleton25", 47.5},
  };
  return table;
}

struct Options {
  std::uint64_t seed = 0;
  int signals = 20000;
  int reps = 5;
  std::uint64_t budget = kDefaultSearchBudget;
  std::string layers = "0,5,10,15,20,25,30,35,40";
  std::string out;
  int threads = 1;
  int max_depth = 16;
  int min_leaf = 2;
};

int cmd_gallery_list(std::ostream& out) {
  for (const auto& name : gallery_names()) {
    const GalleryEntry e = gallery_entry(name);
    out << std::left << std::setw(12) << name << " n=" << std::setw(3) << e.graph.size() << ' ' << e.description
        << '\n';
  }
  return kExitOk;
}

int cmd_gallery_emit(const std::string& name, const Options& o, std::ostream& out) {
  emit(o.out, graph_to_json(gallery_entry(name).graph) + "\n", out);
  return kExitOk;
}

int cmd_search(const std::string& graph_arg, bool tree, const Options& o, std::ostream& out, std::ostream& err) {
  const LoadedGraph g = resolve_graph(graph_arg);
  std::vector<Involution> found;
  if (tree) {
    found = search_involutions_tree(g.graph);
  } else {
    const auto res = search_involutions(g.graph, o.budget);
    found = res.involutions;
    if (res.truncated) {
      err << "warning: search budget of " << o.budget << " extensions exhausted; results are partial\n";
    }
  }
  std::ostringstream text;
  for (const auto& phi : found) {
    nlohmann::json j;
    j["phi"] = phi.map();
    j["pairs"] = phi.pair_count();
    text << j.dump() << '\n';
  }
  emit(o.out, text.str(), out);
  if (found.empty()) err << "no non-trivial involution found\n";
  return kExitOk;
}

int cmd_plan(const std::string& graph_arg, const Options& o, std::ostream& out, std::ostream& err) {
  const LoadedGraph g = resolve_graph(graph_arg);
  const FastGftPlan plan = plan_fast_gft(g.graph, strategy_from(o.budget, o.max_depth, o.min_leaf, g.hints));
  out << plan_summary(plan);
  if (haar_stage_count(plan) == 0) err << "warning: no symmetry found; the plan is a single dense transform\n";
  const double orth = orthogonality_error(plan);
  const double diag = diagonalization_error(plan, g.graph);
  if (!(orth <= 1e-9) || !(diag <= 1e-8)) {
    throw ValidationFailure("plan failed validation: orthogonality " + format_double(orth) +
                            ", diagonalization " + format_double(diag));
  }
  if (!o.out.empty()) save_plan(plan, o.out);
  return kExitOk;
}

int cmd_apply(const std::string& plan_path, const std::string& signals_path, const Options& o, std::ostream& out) {
  const FastGftPlan plan = load_plan(plan_path);
  const Matrix X = read_signals_csv(signals_path, plan.n);
  const Matrix Y = apply_batch(plan, X, o.threads);
  std::ostringstream text;
  for (Eigen::Index c = 0; c < Y.cols(); ++c) {
    for (Eigen::Index r = 0; r < Y.rows(); ++r) text << (r ? "," : "") << format_double(Y(r, c));
    text << '\n';
  }
  emit(o.out, text.str(), out);
  return kExitOk;
}

int cmd_bench(std::vector<std::string> graphs, bool table, const Options& o, std::ostream& out, std::ostream& err) {
  if (table) {
    const auto names = benchmark_graph_names();
    graphs.insert(graphs.end(), names.begin(), names.end());
  }
  if (graphs.empty()) throw std::invalid_argument("bench: no graphs given; name some or pass --table");
  if (o.signals < 1) throw std::invalid_argument("--signals must be positive");
  if (o.signals == 1) err << "warning: timing a single signal is dominated by noise\n";
  if (o.reps < 5) err << "warning: fewer than 5 repetitions; medians will be noisy\n";

  nlohmann::json report = nlohmann::json::array();
  bool failed = false;
  out << std::left << std::setw(12) << "graph" << std::right << std::setw(5) << "n" << std::setw(14) << "matrix +/*"
      << std::setw(14) << "fast +/*" << std::setw(11) << "reduction" << std::setw(11) << "reference" << std::setw(12)
      << "max dev" << '\n';
  for (const auto& arg : graphs) {
    const LoadedGraph g = resolve_graph(arg);
    const int n = g.graph.size();
    const FastGftPlan fast = plan_fast_gft(g.graph, strategy_from(o.budget, o.max_depth, o.min_leaf, g.hints));
    const FastGftPlan dense = dense_plan(g.graph);
    const Matrix X = random_signals(n, o.signals, o.seed);
    const double t_dense = median_runtime_ms(dense, X, o.reps, o.threads);
    const double t_fast = median_runtime_ms(fast, X, o.reps, o.threads);
    const double reduction = 100.0 * (1.0 - t_fast / t_dense);
    const double deviation =
        coefficient_deviation(apply_batch(fast, X, o.threads), apply_batch(dense, X, o.threads), dense.eigenvalues);
    const OpCount fo = op_count(fast);
    const OpCount mo = op_count(dense);
    if (!(deviation <= 1e-8)) failed = true;

    const auto ref = reference_reductions().find(arg);
    std::ostringstream ops_m;
    std::ostringstream ops_f;
    ops_m << mo.additions << '/' << mo.multiplications;
    ops_f << fo.additions << '/' << fo.multiplications;
    out << std::left << std::setw(12) << g.label << std::right << std::setw(5) << n << std::setw(14) << ops_m.str()
        << std::setw(14) << ops_f.str() << std::setw(10) << std::fixed << std::setprecision(1) << reduction << '%';
    if (ref != reference_reductions().end()) {
      out << std::setw(10) << ref->second << '%';
    } else {
      out << std::setw(11) << "-";
    }
    out << std::setw(12) << std::scientific << std::setprecision(2) << deviation << '\n';
    out << std::defaultfloat;

    nlohmann::json row;
    row["graph"] = g.label;
    row["n"] = n;
    row["matrix_ops"] = {{"additions", mo.additions}, {"multiplications", mo.multiplications}};
    row["fast_ops"] = {{"additions", fo.additions}, {"multiplications", fo.multiplications}};
    row["dense_ms"] = t_dense;
    row["fast_ms"] = t_fast;
    row["reduction_percent"] = reduction;
    if (ref != reference_reductions().end()) row["reference_reduction_percent"] = ref->second;
    row["max_deviation"] = deviation;
    report.push_back(row);
  }
  if (!o.out.empty()) emit(o.out, report.dump(2) + "\n", out);
  if (failed) throw ValidationFailure("fast plan deviates from the dense GFT by more than 1e-8");
  return kExitOk;
}

int cmd_compare(const std::string& graph_arg, const Options& o, std::ostream& out, std::ostream& err) {
  const LoadedGraph g = resolve_graph(graph_arg);
  const int n = g.graph.size();
  const std::vector<int> layers = parse_int_list(o.layers);
  const Matrix X = random_signals(n, o.signals, o.seed);
  const Spectrum ref = gft(g.graph);
  const Matrix L = laplacian(g.graph);

  std::ostringstream csv;
  csv << "implementation,layers,runtime_ms,delta,epsilon\n";
  auto record = [&](const std::string& name, const std::string& j, const FastGftPlan& plan) {
    const Matrix U_hat = realized_matrix(plan).transpose();
    csv << name << ',' << j << ',' << format_double(median_runtime_ms(plan, X, o.reps, o.threads)) << ','
        << format_double(delta_error(U_hat, ref.eigenvectors)) << ','
        << format_double(epsilon_error(U_hat, ref.eigenvectors, X)) << '\n';
  };

  record("matrix", "", dense_plan(g.graph));
  // Every Haar level the planner finds, with dense leaves.
  const FastGftPlan haar_matrix =
      plan_fast_gft(g.graph, strategy_from(o.budget, o.max_depth, o.min_leaf, g.hints));
  const bool has_symmetry =
      !haar_matrix.provenance.empty() && haar_matrix.provenance.front().kind == PlanNodeKind::Haar;
  if (has_symmetry) {
    record("haar+matrix", "", haar_matrix);
  } else {
    err << "notice: no connected symmetry found; skipping the Haar variants\n";
  }
  for (int j : layers) {
    record("approx", std::to_string(j), truncated_jacobi(L, j).to_plan());
    if (has_symmetry) {
      const Involution phi(haar_matrix.provenance.front().phi);
      record("haar+approx", std::to_string(j), haar_plus_approx(g.graph, phi, j));
    }
  }
  emit(o.out, csv.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fast graph Fourier transforms from Haar butterflies", "fgft"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Seed for random signals")->capture_default_str();
  app.add_option("--signals", o.signals, "Number of random signals M")->capture_default_str();
  app.add_option("--reps", o.reps, "Timing repetitions (median is reported)")->capture_default_str();
  app.add_option("--budget", o.budget, "Involution search budget (candidate extensions)")->capture_default_str();
  app.add_option("--layers", o.layers, "Comma-separated Givens layer counts J")->capture_default_str();
  app.add_option("--out", o.out, "Write machine-readable output to this path");
  app.add_option("--threads", o.threads, "Worker threads for batch application")->capture_default_str();
  app.add_option("--max-depth", o.max_depth, "Planner recursion depth cap")->capture_default_str();
  app.add_option("--min-leaf", o.min_leaf, "Largest sub-graph kept as a dense leaf")->capture_default_str();

  auto* gallery = app.add_subcommand("gallery", "List or emit built-in graphs");
  gallery->require_subcommand(1);
  auto* gallery_list = gallery->add_subcommand("list", "List built-in graphs");
  auto* gallery_emit = gallery->add_subcommand("emit", "Write a built-in graph as JSON");
  std::string emit_name;
  gallery_emit->add_option("name", emit_name, "Gallery graph name")->required();

  std::string graph_arg;
  auto* search = app.add_subcommand("search", "Find involutions under which a graph is symmetric");
  search->add_option("graph", graph_arg, "Graph JSON file or gallery name")->required();
  bool tree = false;
  search->add_flag("--tree", tree, "Use the tree branch-swap search");

  auto* plan = app.add_subcommand("plan", "Build a fast GFT plan");
  plan->add_option("graph", graph_arg, "Graph JSON file or gallery name")->required();

  auto* apply_cmd = app.add_subcommand("apply", "Apply a plan to signals (CSV, one signal per row)");
  std::string plan_path;
  std::string signals_path;
  apply_cmd->add_option("plan", plan_path, "Plan JSON file")->required();
  apply_cmd->add_option("signals", signals_path, "Signals CSV file")->required();

  auto* bench = app.add_subcommand("bench", "Time fast plans against dense matrix application");
  std::vector<std::string> bench_graphs;
  bool table = false;
  bench->add_option("graphs", bench_graphs, "Graph JSON files or gallery names");
  bench->add_flag("--table", table, "Add the eight reference benchmark graphs");

  auto* compare = app.add_subcommand("compare", "Error and runtime of exact and approximate GFTs");
  compare->add_option("graph", graph_arg, "Graph JSON file or gallery name")->required();

  // Global options are accepted after the subcommand as well.
  for (auto* sub : {search, plan, apply_cmd, bench, compare}) sub->fallthrough();
  gallery->fallthrough();
  gallery_emit->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (gallery_list->parsed()) return cmd_gallery_list(out);
    if (gallery_emit->parsed()) return cmd_gallery_emit(emit_name, o, out);
    if (search->parsed()) return cmd_search(graph_arg, tree, o, out, err);
    if (plan->parsed()) return cmd_plan(graph_arg, o, out, err);
    if (apply_cmd->parsed()) return cmd_apply(plan_path, signals_path, o, out);
    if (bench->parsed()) return cmd_bench(bench_graphs, table, o, out, err);
    if (compare->parsed()) return cmd_compare(graph_arg, o, out, err);
  } catch (const ValidationFailure& e) {
    err << "validation failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fgft::cli
