// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any check fails that is not listed as a known failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/config.hpp"
#include "bahadur_lab/kl_tilt.hpp"
#include "bahadur_lab/montecarlo.hpp"
#include "bahadur_lab/normal.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bl = bahadur_lab;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::vector<std::string> failures;
  std::vector<std::string> known;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void check_known(bool ok, const std::string& what) {
    if (!ok) known.push_back(what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

double bernoulli_kl(double q, double p) {
  double out = 0.0;
  if (q > 0.0) out += q * std::log(q / p);
  if (q < 1.0) out += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return out;
}

double dense_rate(double a) {
  const int m = 1000000;
  double best = INFINITY;
  for (int i = 1; i <= m; ++i) {
    const double t = (1.0 - a) * i / m;
    best = std::min(best, bernoulli_kl(a + t, t));
  }
  return best;
}

// ---------------------------------------------------------------------------

struct Reference {
  const char* label;
  std::size_t n;
  double values[5];  // L, CM, AD, SW, BHEP
};

// Target mean p-values (N = 10^4).
const Reference kTargets[] = {
    {"exponential(1)", 10, {.248325, .2065738, .1878327, .1621557, .1813481}},
    {"exponential(1)", 15, {.1601991, .1178508, .0946044, .07611985, .09569895}},
    {"exponential(1)", 20, {.1043946, .06510648, .05291726, .03304067, .05206452}},
    {"exponential(1)", 30, {.044566, .02152872, .0129459, .00750638, .01409681}},
    {"exponential(1)", 50, {.00818707, .00203949, .0009082, .00241882, .00121646}},
    {"uniform(0,1)", 50, {.2066687, .1359771, .0889871, .1007488, .08932786}},
};

void mean_pvalue_grid(Criterion& c) {
  bl::ExperimentConfig cfg;
  cfg.seed = 20240611;
  cfg.replications = 10000;
  cfg.sample_sizes = {10, 15, 20, 30, 50};
  cfg.tests = {bl::TestKind::lilliefors(), bl::TestKind::weighted_cvm(),
               bl::TestKind::weighted_cvm(bl::WeightFunction::anderson_darling()),
               bl::TestKind::shapiro_wilk(), bl::TestKind::bhep(1.0)};
  cfg.alternatives = bl::table_alternatives();
  const auto start = std::chrono::steady_clock::now();
  const auto result = bl::run_experiment(cfg, worker_count());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.notes.push_back("full grid of " + std::to_string(result.cells.size()) + " cells in " +
                    fmt("%.1f", secs) + " s");

  std::map<std::tuple<std::string, std::size_t, std::size_t>, double> got;
  for (const auto& cell : result.cells) {
    const auto t = static_cast<std::size_t>(
        std::find(cfg.tests.begin(), cfg.tests.end(), cell.test) - cfg.tests.begin());
    got[{cell.alternative.label(), cell.n, t}] = cell.estimate;
    c.check(!cell.failure, "cell failed: " + cell.alternative.label() + " " + cell.test.label());
  }

  const char* names[] = {"L", "CM", "AD", "SW", "BHEP"};
  for (const auto& ref : kTargets) {
    const bool uniform = std::string(ref.label) == "uniform(0,1)";
    for (std::size_t t = 0; t < 5; ++t) {
      const double expect = ref.values[t];
      const double value = got[{ref.label, ref.n, t}];
      double tol = t < 3 ? (expect < 0.05 ? 0.005 : 0.015) : (t == 3 ? 0.02 : 0.03);
      const bool asserted = !uniform || t < 3;
      std::ostringstream line;
      line << ref.label << " n=" << ref.n << " " << names[t] << ": " << fmt("%.5f", value)
           << " vs " << fmt("%.5f", expect);
      if (asserted) {
        line << " (tol " << tol << ")";
        c.check(std::fabs(value - expect) <= tol, line.str());
      } else {
        line << " (logged only)";
      }
      c.notes.push_back(line.str());
    }
  }

  // Decay diagnostic, logged only: -n^-1 ln p of the Lilliefors column next to
  // G at the plug-in discrepancy.
  for (const auto& spec : cfg.alternatives) {
    if (!spec.has_finite_variance()) continue;
    const double d = bl::lilliefors_discrepancy(spec, bl::WeightFunction::unit());
    std::ostringstream line;
    line << "decay " << spec.label() << " G(" << fmt("%.4f", d) << ")=" << fmt("%.4f", bl::ks_rate_G(d))
         << " -ln(p)/n:";
    for (std::size_t n : cfg.sample_sizes) {
      const double p = got[{spec.label(), n, 0}];
      line << " " << fmt("%.4f", p > 0.0 ? -std::log(p) / static_cast<double>(n) : INFINITY);
    }
    c.notes.push_back(line.str());
  }
  for (const auto& d : result.diagnostics) c.notes.push_back("diagnostic: " + d);
}

void null_calibration(Criterion& c) {
  const std::vector<bl::TestKind> tests = {
      bl::TestKind::ks(),          bl::TestKind::cvm(),
      bl::TestKind::ad(),          bl::TestKind::lilliefors(),
      bl::TestKind::weighted_cvm(), bl::TestKind::weighted_cvm(bl::WeightFunction::anderson_darling()),
      bl::TestKind::shapiro_wilk(), bl::TestKind::bhep(1.0)};
  const bl::RandomStream root(777);
  const bl::SimulationOptions opts{worker_count(), 100};
  const std::size_t reps = 100000;
  const auto ref = bl::simulate_battery(tests, bl::NullSource{}, 20, reps, root.split(0), opts);
  const auto alt = bl::simulate_battery(tests, bl::NullSource{}, 20, reps, root.split(1), opts);
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const double p = bl::mean_pvalue(ref.sorted[t], alt.sorted[t]);
    c.notes.push_back(tests[t].label() + " " + fmt("%.5f", p));
    c.check(p >= 0.49 && p <= 0.51, tests[t].label() + " null mean p-value " + fmt("%.5f", p));
  }
}

void estimator_exactness(Criterion& c) {
  const auto exp_spec = bl::AlternativeSpec::exponential();
  for (int inst = 0; inst < 50; ++inst) {
    const bl::RandomStream root(1000 + inst);
    const std::size_t n = 5 + inst % 10;
    auto null = bl::simulate_statistics(bl::TestKind::lilliefors(), bl::NullSource{}, n, 200,
                                        root.split(0));
    auto alt = bl::simulate_statistics(bl::TestKind::lilliefors(), exp_spec, n, 200, root.split(1));
    if (inst % 2 == 1) {
      // Coarsen so that ties across the two groups occur.
      for (auto& v : null) v = std::round(v * 50.0) / 50.0;
      for (auto& v : alt) v = std::round(v * 50.0) / 50.0;
    }
    std::uint64_t brute = 0;
    for (double a : alt) {
      for (double b : null) brute += b >= a;
    }
    const auto fast = bl::count_null_at_least(null, alt);
    c.check(fast == brute, "instance " + std::to_string(inst) + " count " + std::to_string(fast) +
                               " vs " + std::to_string(brute));
    c.check(bl::mean_pvalue(null, alt) == static_cast<double>(brute) / 40000.0,
            "instance " + std::to_string(inst) + " mean");
  }
}

void rate_function(Criterion& c) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> pick(0.001, 0.95);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = pick(gen);
    const double diff = std::fabs(bl::ks_rate_G(a) - dense_rate(a));
    worst = std::max(worst, diff);
    c.check(diff <= 1e-8, "G(" + fmt("%.6f", a) + ") off by " + fmt("%.3g", diff));
  }
  c.notes.push_back("max deviation from dense scan " + fmt("%.3g", worst));
  for (int i = 1; i <= 100; ++i) {
    const double a = 0.95 * i / 101.0;
    c.check(bl::ks_rate_G(a) >= 2.0 * a * a, "G(" + fmt("%.4f", a) + ") < 2a^2");
  }
  c.check(bl::ks_rate_G(0.0) == 0.0, "G(0) != 0");
  const double g999 = bl::ks_rate_G(0.999);
  c.notes.push_back("G(0.999) = " + fmt("%.10f", g999) + ", -ln(0.001) = " +
                    fmt("%.10f", -std::log(0.001)) +
                    "; at a = 0.999 the infimum sits at the endpoint t = 1 - a");
  c.check(std::fabs(g999 - dense_rate(0.999)) <= 1e-8, "G(0.999) disagrees with dense scan");
  c.check_known(g999 > 10.0, "G(0.999) = " + fmt("%.6f", g999) + " is not > 10");
}

void ks_composition(Criterion& c) {
  const auto spec = bl::AlternativeSpec::normal(0.1, 1.0);
  const bl::CdfFn f = [&](double x) { return spec.cdf(x); };
  const bl::CdfFn phi = [](double x) { return bl::std_normal_cdf(x); };
  const double closed = 2.0 * bl::std_normal_cdf(0.05) - 1.0;
  const double d = bl::sup_discrepancy_simple(f, phi);
  double scan = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double t = -8.0 + 16.0 * i / 1e6;
    scan = std::max(scan, std::fabs(f(t) - phi(t)));
  }
  c.notes.push_back("discrepancy " + fmt("%.12f", d) + " closed form " + fmt("%.12f", closed) +
                    " scan " + fmt("%.12f", scan));
  c.check(std::fabs(d - closed) <= 1e-8, "discrepancy vs closed form");
  c.check(std::fabs(scan - closed) <= 1e-8, "scan oracle vs closed form");
  const auto s = bl::ks_slope(f, phi);
  c.check(s.slope == 2.0 * bl::ks_rate_G(s.discrepancy), "slope != 2 G(discrepancy)");
  c.check(std::fabs(s.exponent - bl::ks_rate_G(closed)) <= 1e-9, "exponent vs G(closed form)");
}

bl::GridParams coarse_grid() {
  bl::GridParams g;
  g.reference.atoms = 201;
  g.t_points = 31;
  g.a_min = -0.5;
  g.a_max = 0.5;
  g.a_divisions = 2;
  g.b_min = 0.5;
  g.b_max = 1.5;
  g.b_divisions = 2;
  g.deviation_levels = 8;
  return g;
}

void variational(Criterion& c) {
  // (a)
  const bl::GaussianPartition part;
  const auto free = bl::min_kl_tilt(part.measure(), bl::ConstraintSet{});
  c.check(free.status == bl::TiltStatus::Converged && free.kl == 0.0, "(a) unconstrained KL");

  // (b)
  std::vector<double> s10(10);
  for (int i = 0; i < 10; ++i) s10[i] = i;
  bl::ConstraintSet one;
  one.tail_mass(s10, 4.5, bl::Relation::Equal, 0.9);
  const auto bern = bl::min_kl_tilt(bl::DiscreteMeasure::uniform(s10), one);
  const double bern_exact = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  c.notes.push_back("(b) " + fmt("%.12f", bern.kl) + " vs " + fmt("%.12f", bern_exact));
  c.check(std::fabs(bern.kl - bern_exact) <= 1e-6, "(b) Bernoulli entropy");

  // (c)
  std::vector<double> s(2001);
  std::vector<double> w(2001);
  double total = 0.0;
  for (int i = 0; i < 2001; ++i) {
    s[i] = -8.0 + 16.0 * i / 2000.0;
    w[i] = bl::std_normal_pdf(s[i]);
    total += w[i];
  }
  for (double& v : w) v /= total;
  bl::ConstraintSet mean1;
  mean1.mean(s, 1.0);
  const auto tilt = bl::min_kl_tilt(bl::DiscreteMeasure(s, w), mean1);
  bl::ConstraintSet pmean1;
  pmean1.equal(std::vector<double>(part.mean_coefficients().begin(), part.mean_coefficients().end()),
               1.0);
  const auto ptilt = bl::min_kl_tilt(part.measure(), pmean1);
  c.notes.push_back("(c) equally spaced grid " + fmt("%.10f", tilt.kl) +
                    ", equal-probability partition " + fmt("%.10f", ptilt.kl));
  c.check(std::fabs(tilt.kl - 0.5) <= 1e-4, "(c) mean tilt " + fmt("%.8f", tilt.kl));

  // (d)
  bl::GridParams pinned;
  pinned.moment_constraints = false;
  pinned.pinned_moments = std::make_pair(0.0, 1.0);
  for (double u : {0.05, 0.1, 0.2}) {
    const double b = bl::gli_upper_bound(u, bl::WeightFunction::unit(), pinned);
    const double g = bl::ks_rate_G(u);
    c.notes.push_back("(d) u=" + fmt("%.2f", u) + " bound " + fmt("%.8f", b) + " G " +
                      fmt("%.8f", g));
    c.check(std::fabs(b - g) <= 1e-3, "(d) u=" + fmt("%.2f", u));
  }

  // (e)
  const auto g0 = coarse_grid();
  const auto g1 = g0.refined();
  const auto g2 = g1.refined();
  for (double u : {0.03, 0.08}) {
    const double b0 = bl::gli_upper_bound(u, bl::WeightFunction::unit(), g0);
    const double b1 = bl::gli_upper_bound(u, bl::WeightFunction::unit(), g1);
    const double b2 = bl::gli_upper_bound(u, bl::WeightFunction::unit(), g2);
    c.notes.push_back("(e) gli u=" + fmt("%.2f", u) + ": " + fmt("%.8f", b0) + " " +
                      fmt("%.8f", b1) + " " + fmt("%.8f", b2));
    c.check(b1 <= b0 + 1e-9 && b2 <= b1 + 1e-9, "(e) gli refinement u=" + fmt("%.2f", u));
  }
  for (double u : {0.001, 0.004}) {
    const auto psi = bl::WeightFunction::anderson_darling();
    const double b0 = bl::gad_upper_bound(u, psi, g0);
    const double b1 = bl::gad_upper_bound(u, psi, g1);
    c.notes.push_back("(e) gad u=" + fmt("%.3f", u) + ": " + fmt("%.8f", b0) + " " +
                      fmt("%.8f", b1));
    c.check(b1 <= b0 + 1e-9, "(e) gad refinement u=" + fmt("%.3f", u));
  }
}

void statistic_identities(Criterion& c) {
  const auto alts = bl::table_alternatives();
  const std::vector<bl::TestKind> tests = {
      bl::TestKind::lilliefors(),
      bl::TestKind::lilliefors(bl::WeightFunction::table({-1.0, 1.0}, {2.0, 0.5})),
      bl::TestKind::weighted_cvm(),
      bl::TestKind::weighted_cvm(bl::WeightFunction::anderson_darling()),
      bl::TestKind::weighted_cvm(bl::WeightFunction::table({0.0, 0.5, 1.0}, {1.0, 3.0, 1.0})),
      bl::TestKind::shapiro_wilk(),
      bl::TestKind::bhep(1.0),
      bl::TestKind::bhep(0.3)};
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_cvm = 0.0;
  double worst_ad = 0.0;
  double worst_inv = 0.0;
  for (int i = 0; i < 100; ++i) {
    bl::RandomStream stream(5000 + i);
    const std::size_t n = 5 + static_cast<std::size_t>(unif(gen) * 60);
    const auto x = bl::draw(alts[i % alts.size()], n, stream);
    const bl::Sample sample(x);

    const auto z = sample.studentized();
    std::vector<double> u;
    std::vector<double> up;
    for (double v : z) {
      u.push_back(bl::std_normal_cdf(v));
      up.push_back(bl::std_normal_survival(v));
    }
    worst_cvm = std::max(worst_cvm, std::fabs(bl::weighted_cvm_statistic(sample) -
                                              bl::cvm_from_uniforms(u)));
    worst_ad = std::max(
        worst_ad,
        std::fabs(bl::weighted_cvm_statistic(sample, bl::WeightFunction::anderson_darling()) -
                  bl::ad_from_tails(u, up)));

    const double a = std::exp(6.0 * unif(gen) - 3.0);
    const double b = 20.0 * unif(gen) - 10.0;
    std::vector<double> y;
    for (double v : x) y.push_back(a * v + b);
    const bl::Sample moved(y);
    for (const auto& t : tests) {
      const double fx = bl::evaluate_statistic(t, sample);
      const double fy = bl::evaluate_statistic(t, moved);
      const double rel = std::fabs(fx - fy) / std::max({std::fabs(fx), std::fabs(fy), 1e-300});
      worst_inv = std::max(worst_inv, rel);
      c.check(rel <= 1e-10, t.label() + " not invariant on sample " + std::to_string(i) +
                                " (rel " + fmt("%.3g", rel) + ")");
    }
  }
  c.notes.push_back("cvm " + fmt("%.3g", worst_cvm) + ", ad " + fmt("%.3g", worst_ad) +
                    ", invariance " + fmt("%.3g", worst_inv));
  c.check(worst_cvm <= 1e-12, "unit weight vs closed form " + fmt("%.3g", worst_cvm));
  c.check(worst_ad <= 1e-10, "AD weight vs closed form " + fmt("%.3g", worst_ad));
}

void discrepancies(Criterion& c) {
  const auto uni = bl::AlternativeSpec::uniform();
  const double d = bl::lilliefors_discrepancy(uni, bl::WeightFunction::unit());
  const double sd = std::sqrt(1.0 / 12.0);
  double scan = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double t = -8.0 + 16.0 * i / 1e6;
    scan = std::max(scan, std::fabs(uni.cdf(0.5 + sd * t) - bl::std_normal_cdf(t)));
  }
  c.notes.push_back("uniform " + fmt("%.10f", d) + ", grid oracle " + fmt("%.10f", scan));
  c.check(std::fabs(d - 0.05714) <= 1e-4, "uniform discrepancy " + fmt("%.8f", d));
  c.check(std::fabs(d - scan) <= 1e-8, "grid oracle disagrees");
  for (const auto& [mu, sigma] : std::vector<std::pair<double, double>>{
           {0.0, 1.0}, {3.0, 0.5}, {-20.0, 7.0}}) {
    const double v = bl::lilliefors_discrepancy(bl::AlternativeSpec::normal(mu, sigma),
                                                bl::WeightFunction::unit());
    c.check(v <= 1e-12, "normal(" + fmt("%g", mu) + "," + fmt("%g", sigma) + ") gives " +
                            fmt("%.3g", v));
  }
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args;
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(Criterion& c, const std::string& cli, const fs::path& work) {
  if (cli.empty()) {
    c.check(false, "no --cli given");
    return;
  }
  const fs::path cfg = work / "determinism.toml";
  std::ofstream(cfg) << "[experiment]\nseed = 31337\nreplications = 2000\n"
                        "sample_sizes = [10, 25]\n\n"
                        "[[tests]]\nname = \"L\"\n\n[[tests]]\nname = \"CM\"\n\n"
                        "[[tests]]\nname = \"AD\"\n\n[[tests]]\nname = \"SW\"\n\n"
                        "[[tests]]\nname = \"bhep\"\n\n"
                        "[[alternatives]]\nfamily = \"exponential\"\n\n"
                        "[[alternatives]]\nfamily = \"cauchy\"\n\n"
                        "[[alternatives]]\nfamily = \"beta\"\nparams = [3.0, 3.0]\n";
  const fs::path a = work / "threads1.csv";
  const fs::path b = work / "threads8.csv";
  const int ra = run_cli(cli, "simulate --config \"" + cfg.string() + "\" --out \"" + a.string() +
                                  "\" --threads 1");
  const int rb = run_cli(cli, "simulate --config \"" + cfg.string() + "\" --out \"" + b.string() +
                                  "\" --threads 8");
  c.check(ra == 0 && rb == 0, "CLI exit status");
  const auto x = slurp(a);
  const auto y = slurp(b);
  c.check(!x.empty() && x == y, "CSV files differ");
  c.check(x.rfind("alternative,n,test,mean_pvalue,std_error,seed,N\n", 0) == 0, "CSV header");
  c.check(x.find('\r') == std::string::npos, "CSV has CR characters");
  c.notes.push_back(std::to_string(std::count(x.begin(), x.end(), '\n')) + " lines, " +
                    std::to_string(x.size()) + " bytes each");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = fs::temp_directory_path() / "bahadur_lab_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") cli = argv[i + 1];
    if (key == "--workdir") work = argv[i + 1];
  }
  fs::create_directories(work);

  std::vector<Criterion> all;
  auto run = [&](int id, auto&& body) {
    Criterion c{id, {}, {}, {}};
    const auto start = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = c.failures.empty() && c.known.empty();
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " ("
              << fmt("%.1f", secs) << " s)\n";
    for (const auto& f : c.failures) std::cout << "    failed: " << f << "\n";
    for (const auto& f : c.known) std::cout << "    failed (known): " << f << "\n";
    for (const auto& n : c.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    all.push_back(std::move(c));
  };

  run(1, mean_pvalue_grid);
  run(2, null_calibration);
  run(3, estimator_exactness);
  run(4, rate_function);
  run(5, ks_composition);
  run(6, variational);
  run(7, statistic_identities);
  run(8, discrepancies);
  run(9, [&](Criterion& c) { determinism(c, cli, work); });

  int unexpected = 0;
  int known = 0;
  for (const auto& c : all) {
    unexpected += static_cast<int>(c.failures.size());
    known += static_cast<int>(c.known.size());
  }
  std::cout << "summary: " << unexpected << " unexpected failures, " << known
            << " known failures\n";
  return unexpected == 0 ? 0 : 1;
}
