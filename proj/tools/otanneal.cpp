// otanneal: command-line frontend for the annealing verification library.
//
//   action     action of an annealing curve (Ising folded / Potts dual route)
//   anneal     run the layered algorithm, exact law or Poissonized sampler
//   verify     invariant suites; exit 1 when any check fails
//   landscape  magnetization landscape series as CSV
//
// Reports are JSON or CSV, written atomically (temp file + rename).
// --output resolves relative paths against OTANNEAL_OUTPUT_DIR when set.
// Timing goes to stderr or the verify summary, never into report files, so
// a fixed flag set produces byte-identical outputs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ota/annealing.hpp"
#include "ota/errors.hpp"
#include "ota/girsanov.hpp"
#include "ota/ising.hpp"
#include "ota/markov.hpp"
#include "ota/potts.hpp"
#include "ota/symmetry.hpp"
#include "ota/transport.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path resolve_output(const std::string& raw) {
  std::filesystem::path path(raw);
  if (path.is_relative()) {
    const char* dir = std::getenv("OTANNEAL_OUTPUT_DIR");
    if (dir != nullptr && *dir != '\0') path = std::filesystem::path(dir) / path;
  }
  return path;
}

void emit(const std::string& body, const std::string& output) {
  if (output.empty()) {
    std::fwrite(body.data(), 1, body.size(), stdout);
    return;
  }
  const std::filesystem::path path = resolve_output(output);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ota::Error("cannot open " + tmp.string() + " for writing");
    out << body;
    out.flush();
    if (!out) throw ota::Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------- action

// Folded Ising Gibbs curve under beta(s) = beta * s.
ota::ActionReport ising_curve_action(int n, double beta, int grid_nodes) {
  ota::CurveSpec curve;
  curve.graph = ota::projected_chain(n, 0.0, true).graph;
  curve.grid = ota::uniform_grid(0.0, 1.0, grid_nodes);
  curve.measure = [n, beta](double s) {
    return ota::projected_chain(n, beta * s, true).measure;
  };
  curve.capacity = [n, beta](double s) {
    return ota::projected_chain(n, beta * s, true).capacity;
  };
  curve.rate = [n, beta](double s) {
    const ota::ProjectedIsingChain chain =
        ota::projected_chain(n, beta * s, true);
    const Eigen::VectorXd dlog = ota::dlog_folded_measure(n, beta * s, beta);
    return ota::MassRate(chain.measure.vec().cwiseProduct(dlog));
  };
  return ota::action(curve);
}

int cmd_action(const std::string& model, int n, int q, double beta,
               double eps, int grid_nodes, const std::string& format,
               const std::string& output) {
  if (model == "ising") {
    const ota::ActionReport act = ising_curve_action(n, beta, grid_nodes);
    const double bound = std::pow(n, 5) * beta * beta / 16.0;
    if (format == "csv") {
      std::string body = "s,integrand\n";
      for (std::size_t i = 0; i < act.grid.size(); ++i)
        body += format_number(act.grid[i]) + "," +
                format_number(act.metric_derivative_sq[i]) + "\n";
      emit(body, output);
    } else {
      ordered_json report;
      report["schema"] = "otanneal.action/1";
      report["model"] = "ising";
      report["n"] = n;
      report["beta"] = beta;
      report["grid_nodes"] = grid_nodes;
      report["action"] = act.value;
      report["refinement_error"] = act.refinement_error;
      report["bound"] = bound;
      report["grid"] = act.grid;
      report["integrand"] = act.metric_derivative_sq;
      emit(report.dump(2) + "\n", output);
    }
    std::fprintf(stderr, "action %s in %s\n", format_number(act.value).c_str(),
                 output.empty() ? "stdout" : output.c_str());
    return 0;
  }

  const double beta0 = n * std::log(static_cast<double>(q)) +
                       std::log(6.0 / eps);
  const ota::PottsActionReport rep = ota::potts_action(
      n, q, ota::Schedule::linear_down(beta0, beta), grid_nodes);
  if (format == "csv") {
    std::string body = "s,exact_integrand,constructive_integrand\n";
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      body += format_number(rep.grid[i]) + "," +
              format_number(rep.exact_integrand[i]) + "," +
              format_number(rep.constructive_integrand[i]) + "\n";
    emit(body, output);
  } else {
    ordered_json report;
    report["schema"] = "otanneal.action/1";
    report["model"] = "potts";
    report["n"] = n;
    report["q"] = q;
    report["beta"] = beta;
    report["beta0"] = beta0;
    report["eps"] = eps;
    report["grid_nodes"] = grid_nodes;
    report["action"] = rep.exact;
    report["refinement_error"] = rep.exact_refinement;
    report["bound"] = rep.constructive;
    report["grid"] = rep.grid;
    report["exact_integrand"] = rep.exact_integrand;
    report["constructive_integrand"] = rep.constructive_integrand;
    emit(report.dump(2) + "\n", output);
  }
  return 0;
}

// ---------------------------------------------------------------- anneal

struct AnnealPlan {
  double T = 0.0;
  long long N = 1;
  double beta0 = 0.0;  // potts only
  ota::RateProvider kernels;
  ota::ProbVector initial;
  Eigen::VectorXd target;
};

AnnealPlan ising_plan(int n, double beta, double eps, bool have_T,
                      double T_flag, long long N_flag) {
  AnnealPlan plan{0.0,
                  1,
                  0.0,
                  [n, beta](double s) {
                    return ota::glauber_kernel(
                        ota::ising_distribution(n, beta * s));
                  },
                  ota::ProbVector::uniform(1 << n),
                  ota::ising_distribution(n, beta).vec()};
  plan.T = have_T ? T_flag : 2.0 * std::pow(n, 5) * beta * beta / eps;
  if (N_flag > 0) {
    plan.N = N_flag;
  } else if (beta > 0.0 && plan.T > 0.0) {
    plan.N = static_cast<long long>(
        std::max(1.0, std::ceil(24.0 * beta * plan.T / eps)));
  }
  return plan;
}

AnnealPlan potts_plan(int n, int q, double beta, double eps, int grid_nodes,
                      bool have_T, double T_flag, long long N_flag) {
  const ota::PottsInit init = ota::potts_init(n, q, eps);
  if (!init.nu)
    throw ota::TooLarge("anneal: potts full space q^n exceeds 2e5 states");
  AnnealPlan plan{0.0,
                  1,
                  init.beta0,
                  [n, q, beta, b0 = init.beta0](double s) {
                    const double bs = b0 - (b0 - beta) * s;
                    return ota::block_glauber_kernel(
                        ota::potts_distribution(n, q, bs), q);
                  },
                  *init.nu,
                  ota::potts_distribution(n, q, beta).vec()};
  if (have_T) {
    plan.T = T_flag;
  } else {
    const ota::PottsActionReport act = ota::potts_action(
        n, q, ota::Schedule::linear_down(init.beta0, beta), grid_nodes);
    plan.T = 2.0 * act.exact / eps;
  }
  const double dbeta = init.beta0 - beta;
  if (N_flag > 0) {
    plan.N = N_flag;
  } else if (dbeta > 0.0 && plan.T > 0.0) {
    const double eta = eps / (24.0 * (q - 1) * dbeta * plan.T);
    plan.N = static_cast<long long>(std::max(1.0, std::ceil(1.0 / eta)));
  }
  return plan;
}

int cmd_anneal(const std::string& model, int n, int q, double beta,
               double eps, const std::string& mode, bool have_T, double T_flag,
               long long N_flag, std::uint64_t seed, int replicates,
               int grid_nodes, const std::string& format,
               const std::string& output) {
  AnnealPlan plan = model == "ising"
                        ? ising_plan(n, beta, eps, have_T, T_flag, N_flag)
                        : potts_plan(n, q, beta, eps, grid_nodes, have_T,
                                     T_flag, N_flag);

  ota::AnnealConfig config;
  config.T = plan.T;
  config.N = plan.N;
  config.seed = seed;
  config.replicates = replicates;

  ordered_json report;
  report["schema"] = "otanneal.anneal/1";
  report["model"] = model;
  report["mode"] = mode;
  report["n"] = n;
  if (model == "potts") {
    report["q"] = q;
    report["beta0"] = plan.beta0;
  }
  report["beta"] = beta;
  report["eps"] = eps;
  report["T"] = plan.T;
  report["N"] = plan.N;

  if (mode == "exact") {
    const ota::AnnealResult res =
        ota::run_exact(plan.kernels, config, plan.initial);
    const double final_kl = ota::kl(plan.target, res.final_marginal->vec());
    report["kl"] = final_kl;
    report["kl_init_vs_target"] = ota::kl(plan.target, plan.initial.vec());
    report["pass"] = final_kl <= eps;
    report["mass_drift"] = res.mass_drift;
    if (format == "csv") {
      std::string body = "state,probability\n";
      for (int i = 0; i < res.final_marginal->size(); ++i)
        body += std::to_string(i) + "," +
                format_number((*res.final_marginal)(i)) + "\n";
      emit(body, output);
    } else {
      report["final_marginal"] = to_std(res.final_marginal->vec());
      emit(report.dump(2) + "\n", output);
    }
    std::fprintf(stderr, "kl %s after N=%lld layers\n",
                 format_number(final_kl).c_str(), plan.N);
    return 0;
  }

  // sampler mode: uniformized jumps P_s = I + L_s (unit-rate clocks)
  const auto transitions = [&plan](double s) {
    const ota::RateKernel k = plan.kernels(s);
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(k.num_states(),
                                                     k.num_states()) +
                           k.matrix());
  };
  const ota::StateGraphPtr graph = plan.kernels(1.0).graph();
  const ota::AnnealResult res =
      ota::run_sampler(transitions, graph, config, plan.initial);
  std::vector<long long> counts(
      static_cast<std::size_t>(graph->num_states()), 0);
  for (int s : res.final_states) ++counts[static_cast<std::size_t>(s)];
  report["seed"] = seed;
  report["replicates"] = replicates;
  report["total_jumps"] = res.total_jumps;
  if (format == "csv") {
    std::string body = "state,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i)
      body += std::to_string(i) + "," + std::to_string(counts[i]) + "\n";
    emit(body, output);
  } else {
    report["counts"] = counts;
    emit(report.dump(2) + "\n", output);
  }
  return 0;
}

// ---------------------------------------------------------------- verify

struct CheckResult {
  std::string name;
  bool pass;
};

class Suite {
public:
  void run(const std::string& name, const std::function<bool()>& body) {
    const double t0 = now_ms();
    bool ok = false;
    std::string note;
    try {
      ok = body();
    } catch (const std::exception& e) {
      note = e.what();
    }
    const double t1 = now_ms();
    std::printf("  [%s] %s (%.1f ms)%s%s\n", ok ? "PASS" : "FAIL",
                name.c_str(), t1 - t0, note.empty() ? "" : " ",
                note.c_str());
    results.push_back({name, ok});
    all_pass = all_pass && ok;
  }

  std::vector<CheckResult> results;
  bool all_pass = true;
};

ota::ReversiblePair random_reversible(std::mt19937& gen, int count) {
  const ota::StateGraphPtr g = ota::StateGraph::complete(count);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  Eigen::VectorXd pi(count);
  for (int i = 0; i < count; ++i) pi(i) = unif(gen);
  pi /= pi.sum();
  Eigen::VectorXd c(g->num_edges());
  for (int e = 0; e < g->num_edges(); ++e) c(e) = 0.1 * unif(gen);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(count, count);
  for (int e = 0; e < g->num_edges(); ++e) {
    const auto& ed = g->edges()[static_cast<std::size_t>(e)];
    rates(ed.lo, ed.hi) = c(e) / pi(ed.lo);
    rates(ed.hi, ed.lo) = c(e) / pi(ed.hi);
  }
  rates.diagonal() = -rates.rowwise().sum();
  return ota::make_reversible_pair(ota::RateKernel(g, rates),
                                   ota::ProbVector(pi));
}

ota::ProbVector random_measure(std::mt19937& gen, int count) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::VectorXd v(count);
  for (int i = 0; i < count; ++i) v(i) = unif(gen);
  return ota::ProbVector(v / v.sum());
}

bool check_metric_axioms(std::uint64_t seed) {
  std::mt19937 gen(static_cast<unsigned>(seed) + 11);
  for (int trial = 0; trial < 20; ++trial) {
    const ota::ReversiblePair pair = random_reversible(gen, 5);
    const ota::ProbVector a = random_measure(gen, 5);
    const ota::ProbVector b = random_measure(gen, 5);
    const ota::ProbVector c = random_measure(gen, 5);
    const double ab = ota::wc2_distance(pair.capacity, a, b);
    const double ba = ota::wc2_distance(pair.capacity, b, a);
    const double aa = ota::wc2_distance(pair.capacity, a, a);
    const double ac = ota::wc2_distance(pair.capacity, a, c);
    const double cb = ota::wc2_distance(pair.capacity, c, b);
    if (std::abs(ab - ba) > 1e-10 * std::max(1.0, ab)) return false;
    if (aa > 1e-9) return false;
    if (ab > ac + cb + 1e-9) return false;
  }
  return true;
}

bool check_duality(std::uint64_t seed) {
  std::mt19937 gen(static_cast<unsigned>(seed) + 23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const ota::ReversiblePair pair = random_reversible(gen, 6);
    Eigen::VectorXd r(6);
    for (int i = 0; i < 6; ++i) r(i) = 0.1 * unif(gen);
    r.array() -= r.mean();
    const ota::MassRate rate(r);
    const ota::MetricDerivative md = ota::metric_derivative_sq(
        pair.capacity, rate, pair.stationary);
    const double via_potential = md.potential.values.dot(r);
    const double via_flux = ota::flux_cost(pair.capacity, md.flux);
    const double scale = std::max(1e-30, md.value);
    if (std::abs(md.value - via_potential) > 1e-10 * scale) return false;
    if (std::abs(md.value - via_flux) > 1e-10 * scale) return false;
  }
  return true;
}

bool check_transport_inequalities(std::uint64_t seed) {
  std::mt19937 gen(static_cast<unsigned>(seed) + 37);
  for (int trial = 0; trial < 10; ++trial) {
    const ota::ReversiblePair pair = random_reversible(gen, 5);
    const double cpi = ota::poincare_constant(pair);
    for (int k = 0; k < 50; ++k) {
      const ota::ProbVector mu = random_measure(gen, 5);
      const double w = ota::wc2_distance(pair.capacity, mu, pair.stationary);
      const double bound = cpi * ota::chi2(mu.vec(), pair.stationary.vec());
      if (w * w > bound * (1.0 + 1e-9) + 1e-14) return false;
    }
  }
  for (int trial = 0; trial < 4; ++trial) {
    const ota::ReversiblePair pair = random_reversible(gen, 3);
    const double cm =
        ota::mlsi_constant(pair, ota::MlsiMode::ExactGrid, 200).value;
    for (int k = 0; k < 50; ++k) {
      const ota::ProbVector mu = random_measure(gen, 3);
      const double w = ota::wc2_distance(pair.capacity, mu, pair.stationary);
      const double linf =
          (mu.vec().array() / pair.stationary.vec().array()).maxCoeff();
      const double bound =
          4.0 * cm * linf * ota::kl(mu.vec(), pair.stationary.vec());
      if (w * w > bound * (1.0 + 1e-9) + 1e-14) return false;
    }
  }
  return true;
}

bool check_girsanov(std::uint64_t seed) {
  if (std::abs(ota::edge_kl_cost(2.0) - 0.9343200492928957) > 1e-12)
    return false;
  std::mt19937 gen(static_cast<unsigned>(seed) + 41);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const double a = unif(gen), b = unif(gen);
    const double alpha = unif(gen), beta = unif(gen);
    const ota::StateGraphPtr g = ota::StateGraph::path(2);
    Eigen::MatrixXd pr(2, 2), qr(2, 2);
    pr << -a, a, b, -b;
    qr << -alpha, alpha, beta, -beta;
    const ota::RateKernel p(g, pr), q(g, qr);
    const double mu00 = 0.9;
    const auto mu = [a, b, mu00](double t) {
      const double pi0 = b / (a + b);
      Eigen::VectorXd v(2);
      v << pi0 + (mu00 - pi0) * std::exp(-(a + b) * t), 0.0;
      v(1) = 1.0 - v(0);
      return ota::ProbVector(v);
    };
    const double continuum =
        ota::path_kl([&](double) { return p; }, [&](double) { return q; },
                     mu, 0.0, ota::uniform_grid(0.0, 1.0, 2001));
    const auto discrete = [&](double dt) {
      const int steps = static_cast<int>(std::lround(1.0 / dt));
      const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2) + dt * pr;
      const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2) + dt * qr;
      Eigen::RowVectorXd m(2);
      m << mu00, 1.0 - mu00;
      double acc = 0.0;
      for (int k = 0; k < steps; ++k) {
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y)
            if (P(x, y) > 0.0)
              acc += m(x) * P(x, y) * std::log(P(x, y) / Q(x, y));
        m = m * P;
      }
      return acc;
    };
    const double e2 = std::abs(discrete(1e-2) - continuum);
    const double e3 = std::abs(discrete(1e-3) - continuum);
    const double e4 = std::abs(discrete(1e-4) - continuum);
    if (e2 / e3 < 8.0 || e2 / e3 > 12.0) return false;
    if (e3 / e4 < 8.0 || e3 / e4 > 12.0) return false;
  }
  return true;
}

bool check_symmetry_gap(const std::string& model, int n, int q, double beta,
                        double gap_tol) {
  for (double s : ota::uniform_grid(0.0, 1.0, 11)) {
    const double bs = beta * s;
    if (model == "ising") {
      const ota::ProbVector pi = ota::ising_distribution(n, bs);
      const ota::RateKernel kernel = ota::glauber_kernel(pi);
      Eigen::VectorXd energy(1 << n);
      for (int x = 0; x < (1 << n); ++x) {
        const double mm = ota::ising_magnetization(n, x);
        energy(x) = mm * mm / (2.0 * n);
      }
      const double mean = pi.vec().dot(energy);
      const ota::MassRate rate(
          beta * pi.vec().cwiseProduct((energy.array() - mean).matrix()));
      const ota::MetricGapReport gap = ota::compare_metric_derivative(
          ota::magnetization_projection(n), pi, kernel, rate);
      if (std::abs(gap.relative_gap) > gap_tol) return false;
    } else {
      const ota::ProbVector pi = ota::potts_distribution(n, q, bs);
      const ota::RateKernel kernel = ota::block_glauber_kernel(pi, q);
      const int size = pi.size();
      Eigen::VectorXd energy(size);
      for (int x = 0; x < size; ++x)
        energy(x) = [&] {
          double h = 0.0;
          for (int v : ota::potts_magnetization(n, q, x))
            h += static_cast<double>(v) * v;
          return h;
        }();
      const double mean = pi.vec().dot(energy);
      const ota::MassRate rate(
          beta / n * pi.vec().cwiseProduct((energy.array() - mean).matrix()));
      const ota::MetricGapReport gap = ota::compare_metric_derivative(
          ota::potts_magnetization_projection(n, q), pi, kernel, rate);
      if (std::abs(gap.relative_gap) > gap_tol) return false;
    }
  }
  return true;
}

bool check_landscape() {
  for (int n = 3; n <= 30; ++n) {
    for (int j = 0; j < 15; ++j) {
      const double beta = 0.1 + 2.4 * j / 14.0;
      const ota::LandscapeReport rep = ota::landscape_classify(n, beta);
      if (!rep.trichotomy_ok || !rep.regime_bounds_ok) return false;
    }
  }
  for (double beta : {1.5, 2.0, 3.0})
    if (!ota::potts_diagonal_landscape(9, 3, beta).shape_ok) return false;
  return ota::potts_diagonal_landscape(6, 4, 2.0).shape_ok;
}

bool check_greedy_flux(std::uint64_t seed) {
  const int count = 20;
  const ota::StateGraphPtr g = ota::StateGraph::path(count);
  const auto provider = [](int x, int y) {
    std::vector<int> p;
    const int step = x <= y ? 1 : -1;
    for (int v = x; v != y + step; v += step) p.push_back(v);
    return p;
  };
  std::mt19937 gen(static_cast<unsigned>(seed) + 53);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd d(count);
    for (int i = 0; i < count; ++i) d(i) = unif(gen);
    d.array() -= d.mean();
    const auto [flux, plan] = ota::greedy_flux(g, ota::MassRate(d), provider);
    if (plan.entries.size() > static_cast<std::size_t>(2 * count))
      return false;
    for (const auto& entry : plan.entries) {
      if (!(entry.mass > 0.0)) return false;
      if (!(d(entry.source) < 0.0) || !(d(entry.sink) > 0.0)) return false;
      if (entry.mass >
          std::min(-d(entry.source), d(entry.sink)) * (1.0 + 1e-12))
        return false;
    }
    if ((ota::divergence(flux).vec() + d).cwiseAbs().maxCoeff() > 1e-12)
      return false;
  }
  return true;
}

int cmd_verify(const std::string& suite_name, const std::string& model, int n,
               int q, double beta, double gap_tol, std::uint64_t seed,
               const std::string& output) {
  Suite suite;
  if (suite_name == "metric-axioms") {
    suite.run("wc2 symmetry, identity, triangle",
              [&] { return check_metric_axioms(seed); });
  } else if (suite_name == "duality") {
    suite.run("potential vs flux forms",
              [&] { return check_duality(seed); });
  } else if (suite_name == "transport-inequalities") {
    suite.run("variance and entropy bounds",
              [&] { return check_transport_inequalities(seed); });
  } else if (suite_name == "girsanov") {
    suite.run("edge cost oracle and first-order limit",
              [&] { return check_girsanov(seed); });
  } else if (suite_name == "symmetry") {
    suite.run("projection preserves the metric derivative",
              [&] { return check_symmetry_gap(model, n, q, beta, gap_tol); });
  } else if (suite_name == "landscape") {
    suite.run("trichotomy and diagonal shape", [] { return check_landscape(); });
  } else if (suite_name == "greedy-flux") {
    suite.run("plan invariants", [&] { return check_greedy_flux(seed); });
  } else {
    std::fprintf(stderr, "unknown verify suite: %s\n", suite_name.c_str());
    return 2;
  }

  std::printf("suite %s: %s\n", suite_name.c_str(),
              suite.all_pass ? "PASS" : "FAIL");
  if (!output.empty()) {
    ordered_json report;
    report["schema"] = "otanneal.verify/1";
    report["suite"] = suite_name;
    report["pass"] = suite.all_pass;
    ordered_json checks = ordered_json::array();
    for (const auto& r : suite.results)
      checks.push_back({{"name", r.name}, {"pass", r.pass}});
    report["checks"] = checks;
    emit(report.dump(2) + "\n", output);
  }
  return suite.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------- landscape

int cmd_landscape(const std::string& model, int n, int q, double beta,
                  const std::string& output) {
  std::string body;
  if (model == "ising") {
    const ota::ProjectedIsingChain bar = ota::projected_chain(n, beta, false);
    body = "m,pi_bar\n";
    for (int i = 0; i < bar.graph->num_states(); ++i)
      body += std::to_string(bar.m_values[static_cast<std::size_t>(i)]) +
              "," + format_number(bar.measure(i)) + "\n";
  } else {
    const ota::DiagonalLandscape land =
        ota::potts_diagonal_landscape(n, q, beta);
    double max_lw = land.log_weight[0];
    for (double lw : land.log_weight) max_lw = std::max(max_lw, lw);
    double z = 0.0;
    for (double lw : land.log_weight) z += std::exp(lw - max_lw);
    body = "t,log_weight,p\n";
    for (std::size_t t = 0; t < land.log_weight.size(); ++t)
      body += std::to_string(t) + "," + format_number(land.log_weight[t]) +
              "," +
              format_number(std::exp(land.log_weight[t] - max_lw) / z) + "\n";
  }
  emit(body, output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otanneal: discrete optimal-transport annealing toolkit"};
  app.require_subcommand(1);

  std::string model = "ising";
  int n = 4;
  int q = 3;
  double beta = 1.0;
  double eps = 0.3;
  int grid_nodes = 201;
  std::string format = "json";
  std::string output;
  std::string mode = "exact";
  double T_flag = 0.0;
  long long N_flag = 0;
  std::uint64_t seed = 0;
  int replicates = 1000;
  double gap_tol = 1e-8;
  std::string suite_name;

  const auto add_common = [&](CLI::App* cmd, bool with_eps) {
    cmd->add_option("--model", model, "ising or potts")
        ->check(CLI::IsMember({"ising", "potts"}));
    cmd->add_option("--n", n, "number of sites");
    cmd->add_option("--q", q, "number of Potts colors");
    cmd->add_option("--beta", beta, "target inverse temperature");
    if (with_eps) cmd->add_option("--eps", eps, "accuracy target in (0,1)");
    cmd->add_option("--output", output,
                    "output file; relative paths resolve against "
                    "OTANNEAL_OUTPUT_DIR; stdout when omitted");
  };

  CLI::App* action_cmd =
      app.add_subcommand("action", "action of the annealing curve");
  add_common(action_cmd, true);
  action_cmd->add_option("--grid", grid_nodes, "quadrature nodes (odd)");
  action_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* anneal_cmd =
      app.add_subcommand("anneal", "run the layered annealing algorithm");
  add_common(anneal_cmd, true);
  anneal_cmd->add_option("--mode", mode, "exact or sample")
      ->check(CLI::IsMember({"exact", "sample"}));
  CLI::Option* T_opt = anneal_cmd->add_option(
      "--T", T_flag, "time horizon override (default: certified schedule)");
  anneal_cmd->add_option("--layers", N_flag, "layer count override");
  anneal_cmd->add_option("--seed", seed, "sampler seed");
  anneal_cmd->add_option("--replicates", replicates, "sampler replicates");
  anneal_cmd->add_option("--grid", grid_nodes,
                         "quadrature nodes for the potts action");
  anneal_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "invariant suites; exit 1 on failure");
  verify_cmd->add_option("suite", suite_name,
                         "metric-axioms | duality | transport-inequalities | "
                         "girsanov | symmetry | landscape | greedy-flux")
      ->required();
  verify_cmd->add_option("--model", model, "model for symmetry suite")
      ->check(CLI::IsMember({"ising", "potts"}));
  verify_cmd->add_option("--n", n, "sites for symmetry suite");
  verify_cmd->add_option("--q", q, "colors for symmetry suite");
  verify_cmd->add_option("--beta", beta, "temperature for symmetry suite");
  verify_cmd->add_option("--gap-tol", gap_tol, "symmetry gap tolerance");
  verify_cmd->add_option("--seed", seed, "randomized-check seed");
  verify_cmd->add_option("--output", output, "optional json summary file");

  CLI::App* landscape_cmd =
      app.add_subcommand("landscape", "landscape series as CSV");
  add_common(landscape_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (action_cmd->parsed())
      return cmd_action(model, n, q, beta, eps, grid_nodes, format, output);
    if (anneal_cmd->parsed())
      return cmd_anneal(model, n, q, beta, eps, mode, T_opt->count() > 0,
                        T_flag, N_flag, seed, replicates, grid_nodes, format,
                        output);
    if (verify_cmd->parsed())
      return cmd_verify(suite_name, model, n, q, beta, gap_tol, seed, output);
    if (landscape_cmd->parsed())
      return cmd_landscape(model, n, q, beta, output);
  } catch (const ota::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 2;
}
