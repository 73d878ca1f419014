#include "lossdepth/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>

#include "lossdepth/baselines.hpp"
#include "lossdepth/depths.hpp"
#include "lossdepth/eval.hpp"
#include "lossdepth/io.hpp"
#include "lossdepth/random.hpp"

namespace lossdepth {

namespace {

using json = nlohmann::ordered_json;

struct GlobalFlags {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output;
  std::string format = "csv";
};

struct MethodFlags {
  double lambda = 1.0;
  std::string kernel = "gaussian";
  std::optional<double> gamma;
  bool median_heuristic = false;
  std::optional<double> sigma;
  double imq_c = 1.0;
  double imq_beta = -0.5;
  std::string reporting = "loss";
  bool normalize = true;
  std::string intercept = "auto";
  std::optional<std::size_t> directions;
  std::size_t max_iterations = 10'000;
  double tolerance = 1e-8;
};

struct InputFlags {
  bool no_header = false;
  std::string label_column;
};

void add_global_flags(CLI::App* sub, GlobalFlags& g) {
  sub->add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  sub->add_option("--threads", g.threads, "Worker threads, 0 = all cores")
      ->envname("LOSSDEPTH_THREADS")
      ->capture_default_str();
  sub->add_option("-o,--output", g.output, "Report path (default: stdout)");
  sub->add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

void add_method_flags(CLI::App* sub, MethodFlags& m) {
  sub->add_option("--lambda", m.lambda, "Regularization strength")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--kernel", m.kernel, "SVM kernel family")
      ->check(CLI::IsMember({"gaussian", "laplacian", "imq", "linear"}))
      ->capture_default_str();
  auto* gamma = sub->add_option("--gamma", m.gamma, "Gaussian kernel bandwidth")->check(CLI::PositiveNumber);
  auto* median =
      sub->add_flag("--median-heuristic", m.median_heuristic, "Gaussian bandwidth from the median heuristic (default)");
  gamma->excludes(median);
  sub->add_option("--sigma", m.sigma, "Laplacian kernel scale")->check(CLI::PositiveNumber);
  sub->add_option("--imq-c", m.imq_c, "IMQ kernel offset")->capture_default_str();
  sub->add_option("--imq-beta", m.imq_beta, "IMQ kernel exponent (negative)")->capture_default_str();
  sub->add_option("--reporting", m.reporting, "Reported quantity at the minimizer")
      ->check(CLI::IsMember({"loss", "loss+reg"}))
      ->capture_default_str();
  sub->add_flag("--normalize,!--no-normalize", m.normalize, "Divide logistic depth by log 2")->capture_default_str();
  sub->add_option("--intercept", m.intercept, "Intercept term (auto: on for lr, off for svm)")
      ->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();
  sub->add_option("--directions", m.directions, "Random directions for halfspace depth")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", m.max_iterations, "Solver iteration limit")->capture_default_str();
  sub->add_option("--tol", m.tolerance, "Solver tolerance")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_input_flags(CLI::App* sub, InputFlags& in) {
  sub->add_flag("--no-header", in.no_header, "Input CSV files have no header row");
  sub->add_option("--label-column", in.label_column, "Label column name in the input CSV files");
}

CsvOptions csv_options(const InputFlags& in, bool require_label) {
  CsvOptions o;
  o.has_header = !in.no_header;
  if (!in.label_column.empty()) o.label_column = ColumnRef{in.label_column};
  else if (require_label) o.label_column = ColumnRef{std::string("label")};
  return o;
}

DepthOptions depth_options(const MethodFlags& m, std::uint64_t seed) {
  DepthOptions o;
  o.lambda = m.lambda;
  o.reporting = m.reporting == "loss" ? Reporting::LossOnly : Reporting::LossPlusReg;
  o.normalized = m.normalize;
  if (m.intercept != "auto") o.intercept = m.intercept == "on";
  o.solver.max_iterations = m.max_iterations;
  o.solver.tolerance = m.tolerance;
  o.solver.seed = seed;
  return o;
}

KernelSpec build_kernel(const MethodFlags& m, const DataMatrix& reference, std::uint64_t seed) {
  if (m.kernel == "gaussian") return KernelSpec::gaussian(m.gamma ? *m.gamma : median_heuristic(reference, seed));
  if (m.kernel == "laplacian") {
    if (!m.sigma) throw InvalidArgument("the laplacian kernel needs --sigma");
    return KernelSpec::laplacian(*m.sigma);
  }
  if (m.kernel == "imq") return KernelSpec::imq(m.imq_c, m.imq_beta);
  return KernelSpec::linear();
}

HalfspaceConfig halfspace_config(const MethodFlags& m, std::size_t d, std::uint64_t seed) {
  if (m.directions) return {RandomDirections{*m.directions, seed}};
  if (d > 2) {
    throw InvalidArgument("halfspace depth in d=" + std::to_string(d) +
                          " is not exact; pass --directions K to use K random directions");
  }
  return HalfspaceConfig::for_dimension(d);
}

json method_echo(const std::string& method, const MethodFlags& m, const std::optional<KernelSpec>& kernel) {
  json j;
  j["method"] = method;
  j["lambda"] = m.lambda;
  if (method == "svm" || method == "ocsvm") j["kernel"] = kernel ? kernel->describe() : m.kernel;
  if (method == "lr" || method == "svm") {
    j["reporting"] = m.reporting;
    j["normalize"] = m.normalize;
    j["intercept"] = m.intercept;
    j["max_iterations"] = m.max_iterations;
    j["tolerance"] = m.tolerance;
  }
  if (method == "halfspace") j["directions"] = m.directions ? json(*m.directions) : json(nullptr);
  return j;
}

void emit(const Report& report, const GlobalFlags& g, std::ostream& out) {
  const auto format = parse_report_format(g.format);
  if (g.output.empty()) out << render_report(report, format);
  else write_report(report, g.output, format);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, end - start);
    std::size_t used = 0;
    try {
      v.push_back(std::stod(token, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != token.size()) throw InvalidArgument(flag + ": '" + token + "' is not a number");
    start = end + 1;
  }
  return v;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

std::string failure_summary(const std::vector<BatchEntry>& entries) {
  std::size_t failed = 0;
  std::string first;
  for (const auto& e : entries) {
    if (e.ok()) continue;
    if (failed++ == 0) first = e.error;
  }
  return failed == 0 ? std::string() : std::to_string(failed) + " queries failed; first: " + first;
}

// ---------------------------------------------------------------- depth

struct DepthCommand {
  GlobalFlags global;
  MethodFlags method_flags;
  InputFlags input;
  std::string reference;
  std::string queries;
  std::string method = "lr";
  bool coefficients = false;
};

int run_depth(const DepthCommand& c, std::ostream& out, std::ostream& err) {
  const auto csv = csv_options(c.input, false);
  const auto ref = read_csv(c.reference, csv).features;
  const auto queries = read_csv(c.queries, csv).features;
  if (ref.empty()) throw InvalidArgument("reference sample is empty");
  if (!queries.empty() && queries.cols() != ref.cols()) {
    throw DimensionMismatch("queries have d=" + std::to_string(queries.cols()) + ", reference has d=" +
                            std::to_string(ref.cols()));
  }

  auto opts = depth_options(c.method_flags, c.global.seed);
  DepthMethod method;
  if (c.method == "halfspace") method = halfspace_config(c.method_flags, ref.cols(), c.global.seed);
  else if (c.method == "lr") method = LogisticDepthMethod{};
  else {
    method = SvmDepthMethod{};
    opts.kernel = build_kernel(c.method_flags, ref, c.global.seed);
  }
  if (!std::holds_alternative<HalfspaceConfig>(method) && !queries.empty()) {
    require_valid(DepthProblem{ref, queries.row(0), opts});
  }

  const auto entries = depth_batch({ref, queries, method, opts}, c.global.threads);

  Report report;
  report.title = "depth";
  report.config = method_echo(c.method, c.method_flags, opts.kernel);
  report.config["reference"] = c.reference;
  report.config["queries"] = c.queries;
  report.config["seed"] = c.global.seed;
  report.columns = {"query", "depth", "converged", "iterations", "residual", "error"};
  if (c.coefficients) report.columns.push_back("coefficients");
  std::size_t failed = 0, not_converged = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<Cell> row{static_cast<std::int64_t>(i), e.ok() ? e.result.value : nan, e.ok() && e.result.converged,
                          static_cast<std::int64_t>(e.result.iterations), e.ok() ? e.result.residual : nan, e.error};
    if (c.coefficients) row.emplace_back(join_doubles(e.result.coefficients));
    report.rows.push_back(std::move(row));
    if (!e.ok()) ++failed;
    else if (!e.result.converged) ++not_converged;
  }
  report.summary["queries"] = entries.size();
  report.summary["failed"] = failed;
  report.summary["not_converged"] = not_converged;
  emit(report, c.global, out);
  if (failed > 0) {
    err << failure_summary(entries) << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

// ------------------------------------------------------------ benchmark

struct BenchmarkCommand {
  GlobalFlags global;
  MethodFlags method_flags;
  InputFlags input;
  std::string train;
  std::string test;
  bool split = false;
  double train_fraction = 0.8;
  std::vector<std::string> methods{"lr", "svm", "lof", "ocsvm"};
  std::vector<std::size_t> lof_k{5, 10, 15, 20, 30};
  double ocsvm_nu = 0.15;
};

struct MethodScores {
  std::vector<double> scores;
  std::string error;
};

MethodScores depth_scores(const std::string& name, const BenchmarkCommand& c, const DataMatrix& train,
                          const DataMatrix& test, std::optional<KernelSpec>& kernel_used) {
  auto opts = depth_options(c.method_flags, c.global.seed);
  DepthMethod method;
  if (name == "halfspace") method = halfspace_config(c.method_flags, train.cols(), c.global.seed);
  else if (name == "lr") method = LogisticDepthMethod{};
  else {
    method = SvmDepthMethod{};
    opts.kernel = kernel_used;
  }
  const auto entries = depth_batch({train, test, method, opts}, c.global.threads);
  MethodScores s;
  s.error = failure_summary(entries);
  for (const auto& e : entries) s.scores.push_back(e.result.value);
  return s;
}

int run_benchmark(const BenchmarkCommand& c, std::ostream& out, std::ostream& err) {
  const auto csv = csv_options(c.input, true);
  auto train_set = read_csv(c.train, csv);
  LabeledDataset test_set;
  if (c.split) {
    const auto parts = stratified_split(*train_set.labels, c.train_fraction, c.global.seed);
    auto take = [&](const std::vector<std::size_t>& idx) {
      LabeledDataset d;
      d.features = train_set.features.select_rows(idx);
      std::vector<int> l;
      for (auto i : idx) l.push_back((*train_set.labels)[i]);
      d.labels = std::move(l);
      return d;
    };
    test_set = take(parts.test);
    train_set = take(parts.train);
  } else {
    test_set = read_csv(c.test, csv);
  }
  const auto& train = train_set.features;
  const auto& test = test_set.features;
  if (train.empty()) throw InvalidArgument("training set is empty");
  if (test.cols() != train.cols()) throw DimensionMismatch("train and test dimensions differ");

  LabeledScores base;
  for (int l : *test_set.labels) base.labels.push_back(l == 0);
  const auto inliers = std::count(base.labels.begin(), base.labels.end(), true);
  if (inliers == 0 || inliers == static_cast<std::ptrdiff_t>(base.labels.size())) {
    throw InvalidArgument("test labels contain a single class; AUC is undefined");
  }

  std::optional<KernelSpec> kernel;
  const bool needs_kernel = std::any_of(c.methods.begin(), c.methods.end(),
                                        [](const std::string& m) { return m == "svm" || m == "ocsvm"; });
  if (needs_kernel) kernel = build_kernel(c.method_flags, train, c.global.seed);

  Report report;
  report.title = "benchmark";
  report.columns = {"method", "parameter", "auc", "n_train", "n_test", "error"};
  const auto n_train = static_cast<std::int64_t>(train.rows()), n_test = static_cast<std::int64_t>(test.rows());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t failures = 0;
  auto add_row = [&](const std::string& method, const std::string& param, const MethodScores& s) {
    double auc = nan;
    if (s.error.empty()) {
      LabeledScores ls = base;
      ls.scores = s.scores;
      auc = auc_roc(ls);
    } else {
      ++failures;
      err << method << " " << param << ": " << s.error << "\n";
    }
    report.rows.push_back({method, param, auc, n_train, n_test, s.error});
    return auc;
  };

  json methods = json::array();
  for (const auto& m : c.methods) {
    if (m == "lof") {
      double best = -1.0;
      std::size_t best_k = 0;
      for (auto k : c.lof_k) {
        MethodScores s;
        try {
          s.scores = lof_scores(train, test, {k});
          for (auto& v : s.scores) v = -v;
        } catch (const Error& e) {
          s.error = e.what();
        }
        const double auc = add_row("lof", "k=" + std::to_string(k), s);
        if (s.error.empty() && auc > best) best = auc, best_k = k;
      }
      if (best_k > 0) report.rows.push_back({"lof", "best(k=" + std::to_string(best_k) + ")", best, n_train, n_test,
                                             std::string()});
      json j;
      j["method"] = "lof";
      j["k"] = c.lof_k;
      methods.push_back(j);
    } else if (m == "ocsvm") {
      MethodScores s;
      try {
        OcsvmConfig cfg;
        cfg.nu = c.ocsvm_nu;
        cfg.kernel = *kernel;
        s.scores = ocsvm_fit_score(train, test, cfg);
      } catch (const Error& e) {
        s.error = e.what();
      }
      add_row("ocsvm", "nu=" + format_double(c.ocsvm_nu), s);
      auto j = method_echo(m, c.method_flags, kernel);
      j.erase("lambda");
      j["nu"] = c.ocsvm_nu;
      methods.push_back(j);
    } else if (m == "oracle") {
      MethodScores s;
      for (int l : *test_set.labels) s.scores.push_back(l == 0 ? 1.0 : 0.0);
      add_row("oracle", "", s);
      methods.push_back(json{{"method", "oracle"}});
    } else {
      add_row(m, "", depth_scores(m, c, train, test, kernel));
      methods.push_back(method_echo(m, c.method_flags, kernel));
    }
  }

  report.config["train"] = c.train;
  report.config["test"] = c.split ? json(nullptr) : json(c.test);
  report.config["split"] = c.split ? json(c.train_fraction) : json(nullptr);
  report.config["seed"] = c.global.seed;
  report.config["methods"] = methods;
  report.summary["failed"] = failures;
  emit(report, c.global, out);
  return failures > 0 ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------- convergence

struct ConvergenceCommand {
  GlobalFlags global;
  MethodFlags method_flags;
  std::string method = "lr";
  std::size_t d = 2;
  std::string z;
  std::vector<std::size_t> n_grid{50, 100, 200, 400, 800, 1600};
  std::size_t repeats = 20;
  std::size_t n_ref = 0;
  std::string distribution = "gaussian";
};

int run_convergence(const ConvergenceCommand& c, std::ostream& out, std::ostream&) {
  if (c.d == 0) throw InvalidArgument("--d must be positive");
  ConvergenceConfig cfg;
  cfg.distribution =
      c.distribution == "gaussian" ? SampleDistribution::StandardGaussian : SampleDistribution::UniformCube;
  if (!c.z.empty()) {
    cfg.z = parse_list(c.z, "--z");
    if (cfg.z.size() != c.d) throw DimensionMismatch("--z has " + std::to_string(cfg.z.size()) + " coordinates, d=" +
                                                     std::to_string(c.d));
  } else if (cfg.distribution == SampleDistribution::StandardGaussian) {
    cfg.z.assign(c.d, 0.0);
    for (std::size_t j = 0; j < std::min<std::size_t>(c.d, 2); ++j) cfg.z[j] = 1.0;
  } else {
    cfg.z.assign(c.d, 0.3);
  }
  cfg.n_grid = c.n_grid;
  cfg.repeats = c.repeats;
  cfg.n_ref = c.n_ref;
  cfg.seed = c.global.seed;
  cfg.threads = c.global.threads;

  auto opts = depth_options(c.method_flags, c.global.seed);
  PointDepth depth;
  std::optional<KernelSpec> kernel;
  if (c.method == "halfspace") {
    const auto hs = halfspace_config(c.method_flags, c.d, c.global.seed);
    depth = [hs](std::span<const double> z, const DataMatrix& q) { return halfspace_depth(z, q, hs); };
  } else {
    if (c.method == "svm") {
      kernel = build_kernel(c.method_flags, convergence_reference_sample(cfg), c.global.seed);
      opts.kernel = kernel;
    }
    const bool svm = c.method == "svm";
    depth = [opts, svm](std::span<const double> z, const DataMatrix& q) {
      const auto r = svm ? svm_depth(z, q, opts) : logistic_depth(z, q, opts);
      if (!r.converged) throw NotConverged("depth solve did not converge (residual " + format_double(r.residual) + ")");
      return r.value;
    };
  }
  const auto run = convergence_experiment(cfg, depth);

  Report report;
  report.title = "convergence";
  report.config = method_echo(c.method, c.method_flags, kernel);
  report.config["d"] = c.d;
  report.config["z"] = cfg.z;
  report.config["distribution"] = c.distribution;
  report.config["n_grid"] = c.n_grid;
  report.config["repeats"] = c.repeats;
  report.config["n_ref"] = run.n_ref;
  report.config["seed"] = c.global.seed;
  report.columns = {"n", "repeat", "error"};
  for (std::size_t g = 0; g < run.n_grid.size(); ++g)
    for (std::size_t r = 0; r < run.repeats; ++r)
      report.rows.push_back(
          {static_cast<std::int64_t>(run.n_grid[g]), static_cast<std::int64_t>(r), run.errors[g][r]});
  report.summary["reference_depth"] = run.reference_depth;
  report.summary["mean_errors"] = run.mean_errors;
  report.summary["slope"] = run.slope;
  emit(report, c.global, out);
  return kExitOk;
}

// ----------------------------------------------------------------- grid

struct GridCommand {
  GlobalFlags global;
  MethodFlags method_flags;
  InputFlags input;
  std::string data;
  std::string method = "svm";
  std::size_t n = 200;
  double rate = 0.1;
  std::string center = "-1,-1";
  std::string contamination_center = "2,2";
  std::size_t resolution = 50;
  std::vector<double> quantiles{0.5, 0.6, 0.7, 0.8, 0.9};
  double ocsvm_nu = 0.15;
};

int run_grid(const GridCommand& c, std::ostream& out, std::ostream&) {
  DataMatrix data;
  std::vector<double> center, contamination;
  if (!c.data.empty()) {
    data = read_csv(c.data, csv_options(c.input, false)).features;
  } else {
    center = parse_list(c.center, "--center");
    contamination = parse_list(c.contamination_center, "--contamination-center");
    data = gen_contaminated(c.n, center, contamination, c.rate, c.global.seed);
  }
  if (data.cols() != 2) throw InvalidArgument("grid needs 2D data (got d=" + std::to_string(data.cols()) + ")");
  for (double q : c.quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("--quantiles must lie in [0, 1]");

  std::optional<KernelSpec> kernel;
  if (c.method == "svm" || c.method == "ocsvm") kernel = build_kernel(c.method_flags, data, c.global.seed);

  ScoreFunction score;
  if (c.method == "ocsvm") {
    OcsvmConfig cfg;
    cfg.nu = c.ocsvm_nu;
    cfg.kernel = *kernel;
    score = [cfg](const DataMatrix& ref, const DataMatrix& q) { return ocsvm_fit_score(ref, q, cfg); };
  } else {
    ScorerSettings s;
    s.method = c.method == "svm" ? DepthMethodKind::Svm
               : c.method == "lr" ? DepthMethodKind::Logistic
                                  : DepthMethodKind::Halfspace;
    s.options = depth_options(c.method_flags, c.global.seed);
    s.options.kernel = kernel;
    s.seed = c.global.seed;
    s.threads = c.global.threads;
    s.require_convergence = false;
    score = make_depth_scorer(s);
  }
  const auto grid = contamination_grid(data, score, c.resolution, c.quantiles);

  Report report;
  report.title = "grid";
  report.config = method_echo(c.method, c.method_flags, kernel);
  if (c.method == "ocsvm") {
    report.config.erase("lambda");
    report.config["nu"] = c.ocsvm_nu;
  }
  if (!c.data.empty()) {
    report.config["data"] = c.data;
  } else {
    report.config["generated"] = {{"n", c.n}, {"rate", c.rate}, {"center", center},
                                  {"contamination_center", contamination}};
  }
  report.config["resolution"] = c.resolution;
  report.config["quantiles"] = grid.quantiles;
  report.config["seed"] = c.global.seed;
  report.columns = {"x", "y", "score"};
  for (const auto& cell : grid.cells) report.rows.push_back({cell.x, cell.y, cell.score});
  report.summary["thresholds"] = grid.thresholds;
  if (c.data.empty()) {
    const auto probes = score(data, Matrix::from_rows({center, contamination}));
    report.summary["center_score"] = probes[0];
    report.summary["center_band"] = quantile_band(probes[0], grid.thresholds);
    report.summary["contamination_score"] = probes[1];
    report.summary["contamination_band"] = quantile_band(probes[1], grid.thresholds);
  }
  emit(report, c.global, out);

  if (!c.global.output.empty() && c.global.format == "csv") {
    Report side;
    side.columns = {"quantile", "threshold"};
    for (std::size_t i = 0; i < grid.thresholds.size(); ++i)
      side.rows.push_back({grid.quantiles[i], grid.thresholds[i]});
    write_report(side, c.global.output + ".thresholds.csv", ReportFormat::Csv);
  }
  return kExitOk;
}

// ------------------------------------------------------------- rankcorr

struct RankCorrCommand {
  GlobalFlags global;
  MethodFlags method_flags;
  std::vector<std::string> methods{"svm"};
  std::vector<std::size_t> dims{2};
  std::size_t n = 200;
  std::size_t runs = 10;
};

int run_rankcorr(const RankCorrCommand& c, std::ostream& out, std::ostream&) {
  RankCorrelationConfig cfg;
  cfg.dimensions = c.dims;
  cfg.n = c.n;
  cfg.runs = c.runs;
  cfg.seed = c.global.seed;

  Report report;
  report.title = "rankcorr";
  report.columns = {"method", "d", "run", "kendall", "spearman"};
  json methods = json::array();
  json medians = json::object();
  for (const auto& m : c.methods) {
    ScoreFunction score;
    std::optional<KernelSpec> kernel;
    if (m == "density") {
      score = true_density_scorer();
      methods.push_back(json{{"method", m}});
    } else {
      if (m == "halfspace") {
        for (auto d : c.dims) halfspace_config(c.method_flags, d, c.global.seed);
      }
      ScorerSettings s;
      s.method = m == "svm" ? DepthMethodKind::Svm : m == "lr" ? DepthMethodKind::Logistic : DepthMethodKind::Halfspace;
      s.options = depth_options(c.method_flags, c.global.seed);
      if (m == "svm" && (c.method_flags.gamma || c.method_flags.kernel != "gaussian")) {
        kernel = build_kernel(c.method_flags, Matrix(), c.global.seed);
        s.options.kernel = kernel;
      }
      s.seed = c.global.seed;
      s.halfspace_directions = c.method_flags.directions.value_or(1000);
      s.threads = c.global.threads;
      score = make_depth_scorer(s);
      auto j = method_echo(m, c.method_flags, kernel);
      if (m == "svm" && !kernel) j["kernel"] = "gaussian(median heuristic per run)";
      methods.push_back(j);
    }
    const auto rows = rank_correlation_experiment(cfg, score);
    for (auto d : c.dims) {
      std::vector<double> taus;
      for (const auto& r : rows)
        if (r.d == d) taus.push_back(r.kendall);
      std::sort(taus.begin(), taus.end());
      const std::size_t k = taus.size();
      medians[m][std::to_string(d)] = k % 2 ? taus[k / 2] : 0.5 * (taus[k / 2 - 1] + taus[k / 2]);
    }
    for (const auto& r : rows)
      report.rows.push_back({m, static_cast<std::int64_t>(r.d), static_cast<std::int64_t>(r.run), r.kendall, r.spearman});
  }
  report.config["methods"] = methods;
  report.config["dims"] = c.dims;
  report.config["n"] = c.n;
  report.config["runs"] = c.runs;
  report.config["seed"] = c.global.seed;
  report.summary["median_kendall"] = medians;
  emit(report, c.global, out);
  return kExitOk;
}

}  // namespace

SplitIndices stratified_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  std::vector<int> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  SplitIndices s;
  for (int cls : classes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    Rng rng(derive_seed(seed, {0x73706c6974ULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(cls))}));
    rng.shuffle(idx);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loss-based data depths: halfspace, logistic-regression and kernel SVM depth"};
  app.name("lossdepth");
  app.require_subcommand(1);

  DepthCommand depth;
  auto* depth_cmd = app.add_subcommand("depth", "Depth of each query row with respect to a reference sample");
  depth_cmd->add_option("reference", depth.reference, "Reference sample (CSV)")->required()->check(CLI::ExistingFile);
  depth_cmd->add_option("queries", depth.queries, "Query points (CSV)")->required()->check(CLI::ExistingFile);
  depth_cmd->add_option("--method", depth.method, "Depth")
      ->check(CLI::IsMember({"halfspace", "lr", "svm"}))
      ->capture_default_str();
  depth_cmd->add_flag("--coefficients", depth.coefficients, "Add the fitted model coefficients to each row");
  add_method_flags(depth_cmd, depth.method_flags);
  add_input_flags(depth_cmd, depth.input);
  add_global_flags(depth_cmd, depth.global);

  BenchmarkCommand bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "AUC-ROC of depths and baselines on labelled data (0 = inlier)");
  bench_cmd->add_option("train", bench.train, "Training data (CSV with a label column)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* test_opt = bench_cmd->add_option("test", bench.test, "Test data (CSV)")->check(CLI::ExistingFile);
  auto* split_opt = bench_cmd->add_flag("--split", bench.split, "Stratified seeded split of the training file");
  test_opt->excludes(split_opt);
  bench_cmd->add_option("--train-fraction", bench.train_fraction, "Training share for --split")->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "Methods to score")
      ->delimiter(',')
      ->check(CLI::IsMember({"halfspace", "lr", "svm", "lof", "ocsvm", "oracle"}))
      ->capture_default_str();
  bench_cmd->add_option("--lof-k", bench.lof_k, "LOF neighbourhood sizes")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--ocsvm-nu", bench.ocsvm_nu, "One-class SVM nu")->capture_default_str();
  add_method_flags(bench_cmd, bench.method_flags);
  add_input_flags(bench_cmd, bench.input);
  add_global_flags(bench_cmd, bench.global);

  ConvergenceCommand conv;
  auto* conv_cmd = app.add_subcommand("convergence", "Empirical convergence rate of a depth in the sample size");
  conv_cmd->add_option("--method", conv.method, "Depth")
      ->check(CLI::IsMember({"halfspace", "lr", "svm"}))
      ->capture_default_str();
  conv_cmd->add_option("--d", conv.d, "Dimension")->capture_default_str();
  conv_cmd->add_option("--z", conv.z, "Query point, comma separated (default: 1,1,0,... or 0.3,...)");
  conv_cmd->add_option("--n-grid", conv.n_grid, "Sample sizes")->delimiter(',')->capture_default_str();
  conv_cmd->add_option("--repeats", conv.repeats, "Draws per sample size")->capture_default_str();
  conv_cmd->add_option("--n-ref", conv.n_ref, "Reference sample size (0: 50 x largest n)")->capture_default_str();
  conv_cmd->add_option("--distribution", conv.distribution, "Sampling distribution")
      ->check(CLI::IsMember({"gaussian", "uniform"}))
      ->capture_default_str();
  add_method_flags(conv_cmd, conv.method_flags);
  add_global_flags(conv_cmd, conv.global);

  GridCommand grid;
  auto* grid_cmd = app.add_subcommand("grid", "Scores on a regular 2D grid plus data-quantile thresholds");
  grid_cmd->add_option("--data", grid.data, "2D data (CSV); default: generated contaminated Gaussian")
      ->check(CLI::ExistingFile);
  grid_cmd->add_option("--method", grid.method, "Scoring method")
      ->check(CLI::IsMember({"halfspace", "lr", "svm", "ocsvm"}))
      ->capture_default_str();
  grid_cmd->add_option("--n", grid.n, "Generated sample size")->capture_default_str();
  grid_cmd->add_option("--rate", grid.rate, "Generated contamination rate")->capture_default_str();
  grid_cmd->add_option("--center", grid.center, "Generated authentic center")->capture_default_str();
  grid_cmd->add_option("--contamination-center", grid.contamination_center, "Generated contamination center")
      ->capture_default_str();
  grid_cmd->add_option("--resolution", grid.resolution, "Grid points per axis")->capture_default_str();
  grid_cmd->add_option("--quantiles", grid.quantiles, "Threshold quantiles")->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--ocsvm-nu", grid.ocsvm_nu, "One-class SVM nu")->capture_default_str();
  add_method_flags(grid_cmd, grid.method_flags);
  add_input_flags(grid_cmd, grid.input);
  add_global_flags(grid_cmd, grid.global);

  RankCorrCommand rank;
  auto* rank_cmd = app.add_subcommand("rankcorr", "Rank correlation of depths with the bigaussian density");
  rank_cmd->add_option("--methods", rank.methods, "Methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"halfspace", "lr", "svm", "density"}))
      ->capture_default_str();
  rank_cmd->add_option("--dims", rank.dims, "Dimensions")->delimiter(',')->capture_default_str();
  rank_cmd->add_option("--n", rank.n, "Sample size (even)")->capture_default_str();
  rank_cmd->add_option("--runs", rank.runs, "Runs per dimension")->capture_default_str();
  add_method_flags(rank_cmd, rank.method_flags);
  add_global_flags(rank_cmd, rank.global);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*depth_cmd) return run_depth(depth, out, err);
    if (*bench_cmd) {
      if (!bench.split && bench.test.empty()) throw InvalidArgument("benchmark needs a test file or --split");
      return run_benchmark(bench, out, err);
    }
    if (*conv_cmd) return run_convergence(conv, out, err);
    if (*grid_cmd) return run_grid(grid, out, err);
    return run_rankcorr(rank, out, err);
  } catch (const std::exception& e) {
    err << "lossdepth: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"lossdepth"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lossdepth
