#include "rrdo/lab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "rrdo/markov.hpp"
#include "rrdo/products.hpp"

namespace rrdo::lab {

namespace {

using nlohmann::json;

// Runs fn(i) for i in [0, n) on a pool; rethrows the lowest-index failure.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < count; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Partial {
  std::vector<double> rows;
  std::vector<Verdict> verdicts;
  json measurements = json::object();
};

void merge(RunReport& report, std::vector<Partial>& parts) {
  json per = json::array();
  for (auto& p : parts) {
    report.trace.values.insert(report.trace.values.end(), p.rows.begin(), p.rows.end());
    for (auto& v : p.verdicts) report.verdicts.push_back(std::move(v));
    per.push_back(std::move(p.measurements));
  }
  report.measurements["per_trajectory"] = std::move(per);
}

std::string indexed(const std::string& name, std::size_t t) { return name + "[" + std::to_string(t) + "]"; }

json complex_vector_json(const ComplexVector& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Complex parse_entry(const json& x) {
  if (x.is_array()) return {x.at(0).get<double>(), x.at(1).get<double>()};
  return {x.get<double>(), 0.0};
}

ComplexMatrix parse_matrix(const json& m) {
  const auto d = static_cast<Eigen::Index>(m.size());
  ComplexMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = parse_entry(m.at(i).at(j));
  }
  return out;
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kLogNormFloor; }

// --- decay -----------------------------------------------------------------

void run_decay(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  const std::size_t window = n / 2;
  const double r2_min = c.tolerances.at("r2_min");
  r.trace.columns = {"trajectory", "n", "log_mq_norm"};

  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    ProductTrajectory traj(e, RngStream(c.seed, t));
    traj.advance(n);
    const auto& logs = traj.mq_product_norm_log();
    for (std::size_t k = 0; k < n; ++k) p.rows.insert(p.rows.end(), {double(t), double(k + 1), logs[k]});
    const DecayFit fit = decay_fit(logs, window);
    const double alpha = -fit.slope;
    Verdict v = check(indexed("alpha-positive", t), "decay", alpha, ">", 0.0);
    if (fit.exact_annihilation) {
      v.passed = true;
      v.detail = "exact annihilation";
    } else if (fit.r_squared < r2_min) {
      v.passed = false;
      v.detail = "r2 " + std::to_string(fit.r_squared) + " below " + std::to_string(r2_min);
    }
    p.verdicts.push_back(v);
    p.measurements = {{"alpha_hat", alpha},       {"r_squared", fit.r_squared},
                      {"c_hat", fit.c_hat},       {"onset_n0", fit.onset_n0},
                      {"exact_annihilation", fit.exact_annihilation}};
    return p;
  });

  double mean_alpha = 0.0;
  for (const auto& p : parts) mean_alpha += p.measurements["alpha_hat"].get<double>();
  mean_alpha /= static_cast<double>(parts.size());
  merge(r, parts);
  r.measurements["alpha_hat"] = mean_alpha;
  r.measurements["window"] = window;

  if (e.support() == MatrixEnsemble::Support::kFiniteDiscrete) {
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < e.weights().size(); ++k) {
      if (e.weights()[k] > 0.0) live.push_back(k);
    }
    if (live.size() == 1) {
      const double sr = e.atoms()[live.front()]->decomposition.sr_mq;
      if (sr > 0.0 && sr < 1.0) {
        const double ref = -std::log(sr);
        r.measurements["alpha_reference"] = ref;
        r.verdicts.push_back(check("alpha-vs-spectral", "decay", std::abs(mean_alpha - ref) / ref, "<=",
                                   c.tolerances.at("alpha_rel"), "relative error against -ln sr(M_Q)"));
      }
    }
  }
}

// --- cesaro ----------------------------------------------------------------

void run_cesaro(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  const Eigen::Index d = e.dim();
  const ThetaLimit limit = e.theta_limit(e.cluster_tol());
  r.trace.columns = {"trajectory", "n"};
  for (Eigen::Index i = 0; i < d; ++i) {
    r.trace.columns.push_back("cesaro_re_" + std::to_string(i + 1));
    r.trace.columns.push_back("cesaro_im_" + std::to_string(i + 1));
  }
  const double band = c.tolerances.at("band_factor") / std::sqrt(static_cast<double>(n));

  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    ProductTrajectory traj(e, RngStream(c.seed, t));
    CompensatedSum sum(d, 1);
    ComplexVector avg;
    for (std::size_t k = 1; k <= n; ++k) {
      traj.step();
      sum.add(traj.theta_n());
      avg = sum.total().col(0) / static_cast<double>(k);
      p.rows.push_back(double(t));
      p.rows.push_back(double(k));
      for (Eigen::Index i = 0; i < d; ++i) {
        p.rows.push_back(avg(i).real());
        p.rows.push_back(avg(i).imag());
      }
    }
    const double dist = (avg - limit.theta).norm();
    p.verdicts.push_back(check(indexed("cesaro-vs-theta", t), "cesaro-limit", dist, "<=", band));
    p.measurements = {{"cesaro_mean", complex_vector_json(avg)}, {"distance", dist}};
    return p;
  });
  merge(r, parts);
  r.measurements["theta"] = complex_vector_json(limit.theta);
  r.measurements["mean_in_me"] = limit.mean_in_me;
  r.measurements["band"] = band;
  if (limit.residual_crosscheck) {
    r.measurements["closed_form_crosscheck"] = *limit.residual_crosscheck;
    r.verdicts.push_back(check("theta-closed-forms", "cesaro-limit", *limit.residual_crosscheck, "<=",
                               c.tolerances.at("crosscheck")));
  }
}

// --- forward-limit -----------------------------------------------------------

void run_forward_limit(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  const double tol = c.tolerances.at("converge");
  const double identity_tol = c.tolerances.at("identity");
  const bool constant = e.constant_psi();
  r.trace.columns = {"trajectory", "n", "log_mq_norm", "identity_residual", "rank_one_distance"};

  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    ProductTrajectory traj(e, RngStream(c.seed, t));
    double worst_ratio = 0.0;
    double rank_one = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      traj.step();
      const double id = check_decomposition(traj);
      worst_ratio = std::max(worst_ratio, id / static_cast<double>(k));
      rank_one = linalg::operator_norm(traj.psi_n() - linalg::outer(e.psi_s(), traj.theta_n()));
      p.rows.insert(p.rows.end(), {double(t), double(k), traj.mq_product_norm_log().back(), id, rank_one});
    }
    p.verdicts.push_back(check(indexed("decomposition-identity", t), "decomposition-identity", worst_ratio,
                               "<=", identity_tol, "max over n of residual / n"));
    p.verdicts.push_back(check(indexed("rank-one-approach", t), "forward-limit", rank_one, "<=", tol));
    p.measurements = {{"identity_ratio_max", worst_ratio}, {"rank_one_distance", rank_one}};
    if (constant) {
      try {
        const ForwardLimit fl = forward_limit(e, RngStream(c.seed, t), n, tol);
        double limit_gap = std::numeric_limits<double>::infinity();
        if (fl.limit && fl.rank_one_limit) limit_gap = linalg::operator_norm(*fl.limit - *fl.rank_one_limit);
        p.verdicts.push_back(check(indexed("trailing-sup", t), "forward-limit", fl.trailing_sup, "<=", tol));
        p.verdicts.push_back(check(indexed("limit-is-psi-projector", t), "forward-limit", limit_gap, "<=", tol));
        p.measurements["trailing_sup"] = fl.trailing_sup;
        p.measurements["alpha_hat"] = -fl.decay.slope;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kHypothesisViolated) throw;
        Verdict v = check(indexed("trailing-sup", t), "forward-limit", 1.0, "<=", 0.0, err.what());
        p.verdicts.push_back(v);
      }
    }
    return p;
  });
  merge(r, parts);
  r.measurements["constant_psi"] = constant;
}

// --- lyapunov ----------------------------------------------------------------

void run_lyapunov(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  r.trace.columns = {"trajectory", "n", "log_mq_norm"};

  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    const LyapunovReport lr = lyapunov(e, n, RngStream(c.seed, t));
    ProductTrajectory traj(e, RngStream(c.seed, t));
    traj.advance(n);
    const auto& logs = traj.mq_product_norm_log();
    for (std::size_t k = 0; k < n; ++k) p.rows.insert(p.rows.end(), {double(t), double(k + 1), logs[k]});
    const DecayFit fit = decay_fit(logs, n / 2);

    p.verdicts.push_back(check(indexed("top-exponent", t), "lyapunov", std::abs(lr.exponents.front()), "<=",
                               c.tolerances.at("top")));
    if (fit.alpha_hat) {
      p.verdicts.push_back(check(indexed("exponent-gap", t), "lyapunov", lr.top_multiplicity_gap, ">=",
                                 c.tolerances.at("gap_factor") * *fit.alpha_hat));
    } else if (fit.exact_annihilation) {
      p.verdicts.push_back(check(indexed("exponent-gap", t), "lyapunov", lr.top_multiplicity_gap, ">", 0.0,
                                 "exact annihilation"));
    } else {
      p.verdicts.push_back(check(indexed("exponent-gap", t), "lyapunov", fit.r_squared, ">=", 0.9,
                                 "no decay rate fitted"));
    }
    p.measurements = {{"exponents", lr.exponents},
                      {"gap", lr.top_multiplicity_gap},
                      {"alpha_hat", fit.alpha_hat ? json(*fit.alpha_hat) : json(nullptr)},
                      {"r_squared", fit.r_squared}};
    return p;
  });
  merge(r, parts);
}

// --- markov ------------------------------------------------------------------

void run_markov(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  const Eigen::Index d = e.dim();
  const ThetaLimit limit = e.theta_limit(e.cluster_tol());
  markov::ChainOptions opts;
  opts.record_history = true;

  r.trace.columns = {"trajectory", "n", "rank_one_residual"};
  for (Eigen::Index i = 1; i <= d; ++i) r.trace.columns.push_back("pi_" + std::to_string(i));
  struct Chain {
    markov::ChainResult result;
    std::vector<double> rows;
  };
  auto chains = parallel_map<Chain>(c.trajectories, threads, [&](std::size_t t) {
    Chain ch{markov::run_chain(e, n, RngStream(c.seed, t), opts), {}};
    for (std::size_t k = 0; k < n; ++k) {
      ch.rows.insert(ch.rows.end(), {double(t), double(k + 1), ch.result.rank_one_history[k]});
      const Eigen::VectorXd& pi = ch.result.limiting_row_history[k];
      ch.rows.insert(ch.rows.end(), pi.data(), pi.data() + d);
    }
    ch.result.rank_one_history.clear();
    ch.result.limiting_row_history.clear();
    return ch;
  });
  for (const auto& ch : chains) r.trace.values.insert(r.trace.values.end(), ch.rows.begin(), ch.rows.end());

  double sv2 = 0.0, spread = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  double imag = 0.0;
  for (const auto& ch : chains) {
    sv2 = std::max(sv2, ch.result.rank_one_residual);
    spread = std::max(spread, ch.result.row_spread);
    mean += ch.result.eta_inf.real();
    imag = std::max(imag, ch.result.eta_inf.imag().cwiseAbs().maxCoeff());
  }
  const auto m = static_cast<double>(chains.size());
  mean /= m;
  for (const auto& ch : chains) sq += (ch.result.eta_inf.real() - mean).cwiseAbs2();

  r.verdicts.push_back(check("rank-one-phi", "markov-chains", sv2, "<=", c.tolerances.at("sv2"),
                             "max over trajectories of sigma_2(Phi_n)"));
  r.verdicts.push_back(check("rows-agree", "markov-chains", spread, "<=", c.tolerances.at("rows"),
                             "max over trajectories of the largest row distance"));
  json se_json = json::array();
  if (chains.size() >= 2) {
    const Eigen::VectorXd se = (sq / (m - 1.0) / m).cwiseSqrt();
    for (Eigen::Index i = 0; i < d; ++i) {
      const double dev = std::abs(Complex(mean(i), 0.0) - limit.theta(i));
      r.verdicts.push_back(check("eta-mean-vs-theta[" + std::to_string(i) + "]", "markov-chains", dev, "<=",
                                 c.tolerances.at("se_factor") * se(i), "standard errors from trajectories"));
      se_json.push_back(se(i));
    }
  }
  r.measurements["theta"] = complex_vector_json(limit.theta);
  r.measurements["mean_eta_inf"] = std::vector<double>(mean.data(), mean.data() + d);
  r.measurements["eta_std_error"] = se_json;
  r.measurements["max_eta_imag"] = imag;
  r.measurements["max_sv2"] = sv2;
  r.measurements["max_row_spread"] = spread;
  const Eigen::VectorXd row0 = chains.front().result.limiting_row;
  r.measurements["limiting_row_0"] = std::vector<double>(row0.data(), row0.data() + d);
}

// --- spin-tau ----------------------------------------------------------------

void run_spin_tau(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  std::vector<std::pair<spin::SpinParams, double>> atoms;
  if (c.ensemble.type == EnsembleType::kSpin) {
    atoms = spin_atoms(c.ensemble);
  } else {
    atoms.emplace_back(spin_base(c.ensemble), 1.0);
  }
  const spin::LimitState target = spin::gibbs_limit(atoms.front().first);
  bool off_resonance = c.ensemble.type == EnsembleType::kSpinUniformTau;
  for (const auto& [p, w] : atoms) {
    if (std::abs(spin::gibbs_limit(p).beta_prime - target.beta_prime) > 1e-15) {
      throw Error(ErrorKind::kUsage, "spin-tau needs a common beta' = (e_e / e_s) beta across atoms");
    }
    if (w > 0.0 && spin::resonance_distance(p) > 1e-9 * spin::resonance_period(p)) off_resonance = true;
  }
  if (!off_resonance) throw Error(ErrorKind::kHypothesisViolated, "every interaction time is resonant");

  const double tol = c.tolerances.at("gibbs");
  r.trace.columns = {"trajectory", "n", "gibbs_residual", "log_gibbs_residual"};
  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    ProductTrajectory traj(e, RngStream(c.seed, t));
    std::vector<double> logs;
    logs.reserve(n);
    double res = 0.0;
    std::optional<std::size_t> reached;
    for (std::size_t k = 1; k <= n; ++k) {
      traj.step();
      res = linalg::operator_norm(traj.psi_n() - target.target_projector);
      logs.push_back(safe_log(res));
      if (!reached && res <= tol) reached = k;
      p.rows.insert(p.rows.end(), {double(t), double(k), res, logs.back()});
    }
    const DecayFit fit = decay_fit(logs, n / 2);
    p.verdicts.push_back(check(indexed("gibbs-residual", t), "gibbs-limit", res, "<=", tol));
    Verdict slope = check(indexed("log-residual-slope", t), "gibbs-limit", fit.slope, "<", 0.0);
    if (fit.r_squared < c.tolerances.at("r2_min")) {
      slope.passed = false;
      slope.detail = "r2 " + std::to_string(fit.r_squared) + " below " + std::to_string(c.tolerances.at("r2_min"));
    }
    p.verdicts.push_back(slope);
    p.measurements = {{"final_residual", res},
                      {"slope", fit.slope},
                      {"r_squared", fit.r_squared},
                      {"first_n_within_tolerance", reached ? json(*reached) : json(nullptr)}};
    return p;
  });
  merge(r, parts);
  r.measurements["beta_prime"] = target.beta_prime;
  r.measurements["target_vector"] = complex_vector_json(target.target_vector);
}

// --- spin-energy ---------------------------------------------------------------

void run_spin_energy(const ExperimentConfig& c, const MatrixEnsemble& e, unsigned threads, RunReport& r) {
  const std::size_t n = c.steps;
  const auto atoms = spin_atoms(c.ensemble);
  const spin::AsymptoticTemperature at = spin::asymptotic_temperature(atoms);
  const double e_s = atoms.front().first.e_s;
  const Complex gibbs = spin::gibbs_excited_population(at.beta_tilde, e_s);
  ComplexMatrix obs = ComplexMatrix::Zero(2, 2);
  obs(1, 1) = 1.0;
  const double band = c.tolerances.at("band_factor") / std::sqrt(static_cast<double>(n)) + c.tolerances.at("offset");

  r.trace.columns = {"trajectory", "n", "expectation_re", "expectation_im"};
  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    ProductTrajectory traj(e, RngStream(c.seed, t));
    CompensatedSum sum(4, 1);
    Complex value;
    for (std::size_t k = 1; k <= n; ++k) {
      traj.step();
      sum.add(traj.theta_n());
      const ComplexVector avg = sum.total().col(0) / static_cast<double>(k);
      value = spin::expectation(avg, obs);
      p.rows.insert(p.rows.end(), {double(t), double(k), value.real(), value.imag()});
    }
    p.verdicts.push_back(check(indexed("cesaro-vs-gibbs", t), "random-energies", std::abs(value - gibbs), "<=", band));
    p.measurements = {{"expectation", complex_json(value)}};
    return p;
  });
  merge(r, parts);

  double constant_beta = 0.0;
  json skipped = json::array();
  for (const auto& [p, w] : atoms) {
    try {
      const auto single = spin::asymptotic_temperature({{p, 1.0}});
      constant_beta = std::max(constant_beta, std::abs(single.beta_tilde - spin::gibbs_limit(p).beta_prime));
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kHypothesisViolated) throw;
      skipped.push_back(p.e_e);
    }
  }
  r.verdicts.push_back(check("constant-ensemble-beta", "random-energies", constant_beta, "<=", c.tolerances.at("constant_beta"),
                             "max over atoms of |beta_tilde - beta'| for the one-atom ensemble"));

  const ThetaLimit limit = e.theta_limit(e.cluster_tol());
  r.measurements["beta_tilde"] = complex_json(at.beta_tilde);
  r.measurements["bracket_x"] = complex_json(at.bracket_x);
  r.measurements["mean_e0"] = complex_json(at.mean_e0);
  r.measurements["gibbs_expectation"] = complex_json(gibbs);
  r.measurements["gibbs_crosscheck"] = at.gibbs_crosscheck;
  r.measurements["theta_expectation"] = complex_json(spin::expectation(limit.theta, obs));
  r.measurements["band"] = band;
  r.measurements["resonant_atoms_skipped"] = skipped;
}

// --- factorization -------------------------------------------------------------

ComplexMatrix random_operator(RngStream& rng) {
  ComplexMatrix a(2, 2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  return a;
}

void run_factorization(const ExperimentConfig& c, unsigned threads, RunReport& r) {
  const spin::SpinParams base = spin_base(c.ensemble);
  r.trace.columns = {"trajectory", "n", "factorization_residual", "kernel_residual", "intertwining_residual"};
  auto parts = parallel_map<Partial>(c.trajectories, threads, [&](std::size_t t) {
    Partial p;
    RngStream rng(c.seed, t);
    double worst_f = 0.0, worst_k = 0.0, worst_i = 0.0;
    for (std::size_t k = 1; k <= c.steps; ++k) {
      const spin::SpinParams p1 = perturbed_spin_params(base, rng);
      const spin::SpinParams p2 = perturbed_spin_params(base, rng);
      const double f = spin::factorization_check(p1, p2);
      const spin::GnsModel g = spin::build_gns(p1);
      const double kr = (g.k_gen * g.reference()).norm();
      const ComplexMatrix a_s = random_operator(rng);
      const ComplexMatrix a_e = random_operator(rng);
      const double ir = spin::intertwining_residual(g, a_s, a_e);
      worst_f = std::max(worst_f, f);
      worst_k = std::max(worst_k, kr);
      worst_i = std::max(worst_i, ir);
      p.rows.insert(p.rows.end(), {double(t), double(k), f, kr, ir});
    }
    p.verdicts.push_back(check(indexed("factorization", t), "spin-construction", worst_f, "<=", c.tolerances.at("residual")));
    p.verdicts.push_back(check(indexed("kernel", t), "spin-construction", worst_k, "<=", c.tolerances.at("kernel")));
    p.verdicts.push_back(check(indexed("intertwining", t), "spin-construction", worst_i, "<=", c.tolerances.at("intertwining")));
    p.measurements = {{"factorization_max", worst_f}, {"kernel_max", worst_k}, {"intertwining_max", worst_i}};
    return p;
  });
  merge(r, parts);
}

}  // namespace

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("RRDO_LAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MatrixEnsemble build_ensemble(const EnsembleSpec& spec) {
  const json& j = spec.json;
  try {
    switch (spec.type) {
      case EnsembleType::kStochastic: {
        std::vector<std::pair<markov::StochasticMatrix, double>> atoms;
        for (const auto& a : j.at("atoms")) {
          atoms.emplace_back(markov::StochasticMatrix(parse_matrix(a.at("matrix")).real()), a.at("weight").get<double>());
        }
        return markov::finite_ensemble(atoms);
      }
      case EnsembleType::kDirichlet:
        return markov::dirichlet_ensemble(j.at("dim").get<Eigen::Index>(), j.at("alpha").get<double>());
      case EnsembleType::kMatrix: {
        const json& ps = j.at("psi_s");
        ComplexVector psi(static_cast<Eigen::Index>(ps.size()));
        for (std::size_t i = 0; i < ps.size(); ++i) psi(static_cast<Eigen::Index>(i)) = parse_entry(ps.at(i));
        const std::string nk = j.at("norm").get<std::string>();
        const NormDescriptor norm = nk == "euclidean"     ? NormDescriptor::euclidean()
                                    : nk == "max-row-sum" ? NormDescriptor::max_row_sum()
                                                          : NormDescriptor::reference_induced(psi);
        std::vector<WeightedRrdo> atoms;
        for (const auto& a : j.at("atoms")) {
          atoms.push_back({Rrdo(parse_matrix(a.at("matrix")), psi, norm), a.at("weight").get<double>()});
        }
        for (const auto& a : atoms) {
          const ValidationReport rep = validate_rrdo(a.rrdo);
          if (!rep.passed()) throw Error(ErrorKind::kNotAnRrdo, rep.violations.front());
        }
        return MatrixEnsemble::finite(std::move(atoms));
      }
      case EnsembleType::kSpin:
        return spin::finite_ensemble(spin_atoms(spec));
      case EnsembleType::kSpinUniformTau:
        return spin::uniform_tau_ensemble(spin_base(spec), j.at("tau_min").get<double>(),
                                          j.at("tau_max").get<double>());
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUsage) throw;
    throw Error(ErrorKind::kUsage, std::string("ensemble: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kUsage, std::string("ensemble: ") + e.what());
  }
  throw Error(ErrorKind::kUsage, "ensemble: unknown type");
}

spin::SpinParams perturbed_spin_params(const spin::SpinParams& base, RngStream& rng) {
  spin::SpinParams p = base;
  p.e_s *= rng.uniform(0.5, 1.5);
  p.e_e *= rng.uniform(0.5, 1.5);
  p.beta *= rng.uniform(0.5, 1.5);
  p.lambda *= rng.uniform(0.5, 1.5);
  p.tau *= rng.uniform(0.5, 1.5);
  return p;
}

RunReport run(const ExperimentConfig& config, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.config = config;
  r.threads = threads;

  if (config.experiment == Experiment::kFactorization) {
    spin::sanitize(spin_base(config.ensemble), &r.warnings);
    run_factorization(config, threads, r);
  } else {
    if (config.ensemble.type == EnsembleType::kSpin) {
      for (const auto& [p, w] : spin_atoms(config.ensemble)) spin::sanitize(p, &r.warnings);
    }
    const MatrixEnsemble e = build_ensemble(config.ensemble);
    switch (config.experiment) {
      case Experiment::kDecay: run_decay(config, e, threads, r); break;
      case Experiment::kCesaro: run_cesaro(config, e, threads, r); break;
      case Experiment::kForwardLimit: run_forward_limit(config, e, threads, r); break;
      case Experiment::kLyapunov: run_lyapunov(config, e, threads, r); break;
      case Experiment::kMarkov: run_markov(config, e, threads, r); break;
      case Experiment::kSpinTau: run_spin_tau(config, e, threads, r); break;
      case Experiment::kSpinEnergy: run_spin_energy(config, e, threads, r); break;
      case Experiment::kFactorization: break;
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace rrdo::lab
