#include "mpe/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mpe {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no,
                            const std::string& what) {
  std::ostringstream msg;
  msg << path << ": line " << line_no << ": " << what;
  throw std::runtime_error(msg.str());
}

}  // namespace

void write_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  json meta = {{"type", "mpe.dataset"},
               {"horizon", ds.horizon},
               {"covariate_dim", ds.covariate_dim},
               {"gamma", ds.gamma}};
  out << meta.dump() << '\n';
  for (const auto& traj : ds.trajectories) {
    json rec = {{"unit_id", traj.unit_id},
                {"X", traj.covariates},
                {"A", traj.actions},
                {"R", traj.rewards}};
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

Dataset read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file (missing meta record)");
  }
  ++line_no;

  Dataset ds;
  try {
    json meta = json::parse(line);
    if (meta.value("type", "") != "mpe.dataset") {
      fail_line(path, line_no, "missing mpe.dataset meta record");
    }
    ds.horizon = meta.at("horizon").get<int>();
    ds.covariate_dim = meta.at("covariate_dim").get<int>();
    ds.gamma = meta.at("gamma").get<double>();
  } catch (const json::exception& e) {
    fail_line(path, line_no, std::string("meta parse error: ") + e.what());
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Trajectory traj;
    try {
      json rec = json::parse(line);
      traj.unit_id = rec.at("unit_id").get<std::int64_t>();
      traj.covariates = rec.at("X").get<std::vector<std::vector<double>>>();
      traj.actions = rec.at("A").get<std::vector<double>>();
      traj.rewards = rec.at("R").get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail_line(path, line_no, std::string("record parse error: ") + e.what());
    }
    try {
      validate_trajectory(traj);
      if (traj.horizon() != ds.horizon ||
          traj.covariate_dim() != ds.covariate_dim) {
        throw std::invalid_argument(
            "record shape does not match dataset horizon/covariate_dim");
      }
    } catch (const std::invalid_argument& e) {
      fail_line(path, line_no, e.what());
    }
    ds.trajectories.push_back(std::move(traj));
  }
  validate_dataset(ds);
  return ds;
}

Dataset dataset_roundtrip(const Dataset& ds, const std::string& path) {
  write_jsonl(ds, path);
  return read_jsonl(path);
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  out << "unit_id,t";
  for (int j = 1; j <= ds.covariate_dim; ++j) out << ",x_" << j;
  out << ",a,r\n";

  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  for (const auto& traj : ds.trajectories) {
    for (int t = 1; t <= ds.horizon + 1; ++t) {
      out << traj.unit_id << ',' << t;
      for (double x : traj.covariates[static_cast<std::size_t>(t - 1)]) {
        out << ',' << fmt(x);
      }
      if (t <= ds.horizon) {
        out << ',' << fmt(traj.actions[static_cast<std::size_t>(t - 1)]) << ','
            << fmt(traj.rewards[static_cast<std::size_t>(t - 1)]);
      } else {
        out << ",,";
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.horizon != b.horizon || a.covariate_dim != b.covariate_dim ||
      a.gamma != b.gamma || a.trajectories.size() != b.trajectories.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    const auto& ta = a.trajectories[i];
    const auto& tb = b.trajectories[i];
    if (ta.unit_id != tb.unit_id || ta.covariates != tb.covariates ||
        ta.actions != tb.actions || ta.rewards != tb.rewards) {
      return false;
    }
  }
  return true;
}

}  // namespace mpe
