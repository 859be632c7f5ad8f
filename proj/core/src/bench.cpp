#include "mpe/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mpe/estimators.hpp"
#include "mpe/parallel.hpp"
#include "mpe/rng.hpp"

namespace mpe {

namespace {

struct BenchCase {
  EnvConfig env;
  std::string env_name;
  std::int64_t n = 0;
  int p = 0;
  int T = 0;
};

std::vector<BenchCase> expand_cases(const BenchConfig& cfg) {
  std::vector<BenchCase> cases;
  if (cfg.environment == "benchmark") {
    for (const auto& point : cfg.grid) {
      BenchmarkConfig bc = cfg.benchmark_base;
      bc.n = point.n;
      bc.p = point.p;
      bc.T = point.T;
      cases.push_back({bc, "benchmark", point.n, point.p, point.T});
    }
  } else if (cfg.environment == "pricing") {
    cases.push_back({cfg.pricing, "pricing", cfg.pricing.n, 6, cfg.pricing.T});
  } else if (cfg.environment == "tiny") {
    TinyCase tc{cfg.tiny, cfg.tiny_n, cfg.seed};
    cases.push_back({tc, "tiny", cfg.tiny_n, 1, 2});
  } else {
    throw std::invalid_argument("bench: unknown environment " + cfg.environment);
  }
  return cases;
}

EnvConfig reseed(const EnvConfig& env, std::uint64_t seed) {
  EnvConfig out = env;
  std::visit([seed](auto& c) { c.seed = seed; }, out);
  return out;
}

struct RepResult {
  bool ok = false;
  std::string error;
  // estimator -> (theta_hat, se)
  std::map<std::string, std::pair<double, double>> estimates;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void validate(const BenchConfig& cfg) {
  if (cfg.replications < 1) {
    throw std::invalid_argument("bench: replications must be >= 1");
  }
  if (cfg.estimators.empty()) {
    throw std::invalid_argument("bench: estimator list must be nonempty");
  }
  for (const auto& e : cfg.estimators) {
    if (e != "direct" && e != "srw" && e != "asrw" && e != "asrw_oracle") {
      throw std::invalid_argument("bench: unknown estimator " + e);
    }
  }
  if (cfg.folds < 2) throw std::invalid_argument("bench: folds must be >= 2");
  expand_cases(cfg);
}

MCSummary summarize(std::span<const double> estimates,
                    std::span<const double> ses, double theta_true) {
  if (estimates.size() != ses.size()) {
    throw std::invalid_argument("summarize: estimates/ses length mismatch");
  }
  if (estimates.empty()) {
    throw std::invalid_argument("summarize: need at least one replication");
  }
  const double r = static_cast<double>(estimates.size());
  double bias = 0.0;
  double mse = 0.0;
  double covered = 0.0;
  double mean_se = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double err = estimates[i] - theta_true;
    bias += err;
    mse += err * err;
    if (std::abs(err) <= 1.96 * ses[i]) covered += 1.0;
    mean_se += ses[i];
  }
  MCSummary row;
  row.bias = bias / r;
  row.rmse = std::sqrt(mse / r);
  row.coverage = covered / r;
  row.mean_se = mean_se / r;
  row.theta_true = theta_true;
  row.replications = static_cast<int>(estimates.size());
  return row;
}

std::vector<MCSummary> run_benchmark(const BenchConfig& cfg) {
  validate(cfg);
  const int workers = resolve_workers(cfg.workers);
  const auto cases = expand_cases(cfg);

  const bool wants_oracle_h =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "asrw_oracle") !=
      cfg.estimators.end();
  const bool wants_learned_h =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "srw") !=
          cfg.estimators.end() ||
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "asrw") !=
          cfg.estimators.end();

  std::vector<MCSummary> rows;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& bench_case = cases[ci];
    const std::uint64_t case_seed =
        mix64(cfg.seed, static_cast<std::uint64_t>(ci) + 101);
    const EnvironmentModel model = make_environment_model(bench_case.env);

    double theta_true = 0.0;
    if (bench_case.env_name == "tiny") {
      theta_true = exact_theta_tiny(cfg.tiny);
    } else {
      TruthSpec truth = cfg.truth;
      truth.seed = mix64(case_seed, 777);
      theta_true = crn_truth(bench_case.env, truth).theta;
    }

    std::vector<RepResult> results(
        static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, workers, [&](std::int64_t rep) {
      RepResult& slot = results[static_cast<std::size_t>(rep)];
      try {
        const std::uint64_t rep_seed =
            mix64(case_seed, static_cast<std::uint64_t>(rep) + 1);
        const EnvConfig env = reseed(bench_case.env, rep_seed);
        const Dataset ds = simulate(env, EpsilonShift{0.0});
        const FoldAssignment folds =
            make_folds(ds.size(), cfg.folds, mix64(rep_seed, 11));

        NuisanceSet learned;
        NuisanceSet oracle_h_set;
        if (bench_case.env_name == "tiny") {
          learned = make_tiny_oracle_nuisances(cfg.tiny, cfg.folds);
          oracle_h_set = learned;
        } else {
          NuisanceConfig ncfg = make_default_nuisance_config(model);
          ncfg.q_net = cfg.q_net;
          ncfg.h_net = cfg.h_net;
          ncfg.h_cap = cfg.h_cap_multiplier > 0.0
                           ? cfg.h_cap_multiplier / model.sigma_policy
                           : 0.0;
          ncfg.h_net.fd_step_riesz =
              cfg.riesz_step_multiplier * model.sigma_policy;
          ncfg.seed = mix64(rep_seed, 13);
          ncfg.workers = 1;  // replications already run in parallel
          ncfg.oracle_score = !wants_learned_h;
          learned = fit_nuisances(ds, folds, model, ncfg);
          if (wants_oracle_h) {
            oracle_h_set = learned;
            oracle_h_set.oracle_score = true;
            const StageFn oracle = oracle_score_fn(model);
            for (auto& per_fold : oracle_h_set.h) {
              std::fill(per_fold.begin(), per_fold.end(), oracle);
            }
          }
        }

        for (const auto& name : cfg.estimators) {
          EstimateReport report;
          if (name == "direct") {
            report = estimate_direct(ds, learned, folds, model.direction);
          } else if (name == "srw") {
            report = estimate_srw(ds, learned, folds, model.direction);
          } else if (name == "asrw") {
            report = estimate_asrw(ds, learned, folds, model.direction);
          } else {
            report = estimate_asrw(ds, oracle_h_set, folds, model.direction);
          }
          slot.estimates[name] = {report.theta_hat, report.se};
        }
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
    });

    int failed = 0;
    for (const auto& r : results) {
      if (!r.ok) {
        ++failed;
        std::cerr << "bench: replication aborted (" << r.error << ")\n";
      }
    }
    if (failed > 0) {
      std::cerr << "bench: case " << bench_case.env_name << " n=" << bench_case.n
                << " excluded " << failed << "/" << cfg.replications
                << " replications\n";
    }

    for (const auto& name : cfg.estimators) {
      std::vector<double> thetas;
      std::vector<double> ses;
      for (const auto& r : results) {
        if (!r.ok) continue;
        const auto it = r.estimates.find(name);
        if (it == r.estimates.end()) continue;
        thetas.push_back(it->second.first);
        ses.push_back(it->second.second);
      }
      if (thetas.empty()) {
        std::cerr << "bench: no successful replications for estimator " << name
                  << "\n";
        continue;
      }
      MCSummary row = summarize(thetas, ses, theta_true);
      row.environment = bench_case.env_name;
      row.n = bench_case.n;
      row.p = bench_case.p;
      row.T = bench_case.T;
      row.estimator = name;
      row.failed = failed;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void emit_report(const std::vector<MCSummary>& summaries,
                 const std::string& outdir) {
  std::filesystem::create_directories(outdir);

  {
    std::ofstream csv(outdir + "/summary.csv", std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + outdir + "/summary.csv");
    csv << "env,n,p,T,estimator,bias,rmse,coverage,theta_true,R\n";
    for (const auto& row : summaries) {
      csv << row.environment << ',' << row.n << ',' << row.p << ',' << row.T
          << ',' << row.estimator << ',' << format_double(row.bias) << ','
          << format_double(row.rmse) << ',' << format_double(row.coverage)
          << ',' << format_double(row.theta_true) << ',' << row.replications
          << '\n';
    }
  }

  // Scatter of comparator RMSE against ASRW RMSE, one point per
  // (configuration, comparator), with the 45-degree reference line.
  struct Point {
    double x, y;
    std::string comparator;
  };
  std::vector<Point> points;
  std::map<std::string, const MCSummary*> asrw_by_config;
  auto config_key = [](const MCSummary& row) {
    std::ostringstream key;
    key << row.environment << '|' << row.n << '|' << row.p << '|' << row.T;
    return key.str();
  };
  for (const auto& row : summaries) {
    if (row.estimator == "asrw") asrw_by_config[config_key(row)] = &row;
  }
  for (const auto& row : summaries) {
    if (row.estimator == "asrw") continue;
    const auto it = asrw_by_config.find(config_key(row));
    if (it == asrw_by_config.end()) continue;
    points.push_back({it->second->rmse, row.rmse, row.estimator});
  }

  double max_rmse = 0.0;
  for (const auto& pt : points) {
    max_rmse = std::max({max_rmse, pt.x, pt.y});
  }
  if (max_rmse <= 0.0) max_rmse = 1.0;
  const double pad = 1.1 * max_rmse;

  const int size = 480;
  const int margin = 56;
  const double scale = static_cast<double>(size - 2 * margin) / pad;
  auto sx = [&](double v) { return margin + v * scale; };
  auto sy = [&](double v) { return size - margin - v * scale; };

  const std::map<std::string, std::string> colors = {
      {"direct", "#d62728"}, {"srw", "#1f77b4"}, {"asrw_oracle", "#2ca02c"}};

  std::ofstream svg(outdir + "/rmse_scatter.svg", std::ios::trunc);
  if (!svg) throw std::runtime_error("cannot write " + outdir + "/rmse_scatter.svg");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
      << "\" height=\"" << size << "\">\n";
  svg << "<rect width=\"" << size << "\" height=\"" << size
      << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(pad)
      << "\" y2=\"" << sy(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(0)
      << "\" y2=\"" << sy(pad) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(pad)
      << "\" y2=\"" << sy(pad)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  svg << "<text x=\"" << size / 2 << "\" y=\"" << size - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">ASRW RMSE</text>\n";
  svg << "<text x=\"16\" y=\"" << size / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << size / 2 << ")\">comparator RMSE</text>\n";
  for (const auto& pt : points) {
    const auto color_it = colors.find(pt.comparator);
    const std::string color =
        color_it == colors.end() ? "#555555" : color_it->second;
    svg << "<circle cx=\"" << format_double(sx(pt.x)) << "\" cy=\""
        << format_double(sy(pt.y)) << "\" r=\"4\" fill=\"" << color
        << "\" fill-opacity=\"0.8\"/>\n";
  }
  int legend_y = margin;
  for (const auto& [name, color] : colors) {
    svg << "<circle cx=\"" << size - margin - 110 << "\" cy=\"" << legend_y
        << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << size - margin - 100 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"12\">" << name << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
}

std::vector<MCSummary> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": missing header");
  }
  if (line != "env,n,p,T,estimator,bias,rmse,coverage,theta_true,R") {
    throw std::runtime_error(path + ": unexpected header: " + line);
  }
  std::vector<MCSummary> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    MCSummary row;
    std::getline(ss, row.environment, ',');
    std::getline(ss, field, ',');
    row.n = std::stoll(field);
    std::getline(ss, field, ',');
    row.p = std::stoi(field);
    std::getline(ss, field, ',');
    row.T = std::stoi(field);
    std::getline(ss, row.estimator, ',');
    std::getline(ss, field, ',');
    row.bias = std::stod(field);
    std::getline(ss, field, ',');
    row.rmse = std::stod(field);
    std::getline(ss, field, ',');
    row.coverage = std::stod(field);
    std::getline(ss, field, ',');
    row.theta_true = std::stod(field);
    std::getline(ss, field, ',');
    row.replications = std::stoi(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mpe
