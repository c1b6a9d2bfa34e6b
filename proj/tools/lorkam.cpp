// lorkam: command-line front end.
//
//   lorkam geodesic --metric minkowski2 --x 0,0 --v 1,0.5 --tmax 4 --csv out.csv
//   lorkam distance --metric cylinder --x 0,0 --y 4,3.141592653589793 --json
//   lorkam verify --suite all --seed 7
//
// Exit codes: 0 success, 1 failed verification, 2 domain error,
// 3 convergence failure, 64 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "lorkam/lorkam.hpp"
#include "lorkam/verify.hpp"

namespace {

using namespace lorkam;
using json = nlohmann::json;

struct RunConfig {
  std::string metric = "cylinder";
  json spacetime;  // overrides metric when set
  double integrator_tol = 1e-12;
  double residual_accept = 1e-9;
  double C0 = 10.0;
  double s_max = 0.1;
  double horizon = 1e3;
  int winding_bound = 8;
  unsigned seed = 0;
  std::string config_path;
  std::string out_path;

  void load(const std::string& path) {
    json j = io::read_json_file(path);
    if (j.contains("metric")) metric = j.at("metric").get<std::string>();
    if (j.contains("spacetime")) spacetime = j.at("spacetime");
    integrator_tol = j.value("integrator_tol", integrator_tol);
    residual_accept = j.value("residual_accept", residual_accept);
    C0 = j.value("C0", C0);
    s_max = j.value("s_max", s_max);
    horizon = j.value("horizon", horizon);
    winding_bound = j.value("winding_bound", winding_bound);
    seed = j.value("seed", seed);
  }

  void validate() const {
    for (double v : {integrator_tol, residual_accept, C0, s_max, horizon})
      if (!(v > 0.0)) throw ConfigError("tolerances, C0, s_max and horizon must be positive");
    if (winding_bound < 1) throw ConfigError("winding_bound must be at least 1");
  }

  [[nodiscard]] Spacetime spec() const {
    if (!spacetime.is_null()) {
      json j = spacetime;
      if (!j.contains("winding_bound")) j["winding_bound"] = winding_bound;
      return spacetime_from_json(j);
    }
    return spacetime_from_name(metric, winding_bound);
  }

  [[nodiscard]] ConnectOptions connect() const {
    ConnectOptions o;
    o.integrator_tol = integrator_tol;
    o.residual_accept = residual_accept;
    return o;
  }
  [[nodiscard]] CutOptions cut() const {
    CutOptions o;
    o.connect = connect();
    return o;
  }
  [[nodiscard]] LOOptions lo() const {
    LOOptions o;
    o.C0 = C0;
    o.s_max = s_max;
    o.seed = seed;
    o.connect = connect();
    return o;
  }
  [[nodiscard]] HomotopyOptions homotopy() const {
    HomotopyOptions o;
    o.horizon = horizon;
    o.cut = cut();
    o.lo = lo();
    return o;
  }
};

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(rc.out_path);
  if (!f) throw ConfigError("cannot write " + rc.out_path);
  f << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ChartPoint point_arg(const Spacetime& sp, const std::string& s, const char* what) {
  return ChartPoint(io::parse_vec(s, sp.dim, what));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentzian weak KAM toolkit on model spacetimes"};
  app.require_subcommand(1);
  RunConfig rc;
  if (const char* env = std::getenv("LORKAM_CONFIG")) rc.config_path = env;

  std::string metric_opt, x_s, y_s, v_s;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--metric", metric_opt,
                    "minkowski2, minkowski3, cylinder, warped-cosh, warped-2cos, warped-2cos-slab");
    sub->add_option("--config", rc.config_path, "JSON run configuration (default: $LORKAM_CONFIG)");
    sub->add_option("--out", rc.out_path, "write the main output here instead of stdout");
    sub->add_option("--seed", rc.seed, "seed for jittered searches");
  };

  // geodesic
  auto* geo = app.add_subcommand("geodesic", "integrate a geodesic, CSV of t, coords, velocity, energy");
  add_common(geo);
  double tmin = 0.0, tmax = 1.0;
  int samples = 101;
  std::string csv_path;
  geo->add_option("--x", x_s, "start point")->required();
  geo->add_option("--v", v_s, "initial velocity")->required();
  geo->add_option("--tmin", tmin, "lower parameter");
  geo->add_option("--tmax", tmax, "upper parameter")->required();
  geo->add_option("--samples", samples, "output rows")->check(CLI::PositiveNumber);
  geo->add_option("--csv", csv_path, "CSV file (default stdout)");

  // distance
  auto* dist = app.add_subcommand("distance", "Lorentzian distance and maximizers as JSON");
  add_common(dist);
  dist->add_option("--x", x_s)->required();
  dist->add_option("--y", y_s)->required();
  dist->add_flag("--json", "JSON output (the default)");

  // cutlocus
  auto* cut = app.add_subcommand("cutlocus", "cut times along a fan of directions");
  add_common(cut);
  int n_dirs = 33;
  cut->add_option("--x", x_s)->required();
  cut->add_option("--dirs", n_dirs, "number of directions")->check(CLI::Range(2, 100000));
  cut->add_option("--horizon", rc.horizon);
  cut->add_option("--csv", csv_path, "also write a CSV summary");

  // aubry
  auto* aub = app.add_subcommand("aubry", "Aubry-set membership with witness");
  add_common(aub);
  bool pair_mode = false;
  aub->add_option("--x", x_s)->required();
  aub->add_option("--y", y_s)->required();
  aub->add_option("--horizon", rc.horizon);
  aub->add_flag("--pair", pair_mode, "decide (x, y) in the pair Aubry set instead of y in A(x)");

  // lo
  auto* lo = app.add_subcommand("lo", "Lax-Oleinik evaluation or regularity probe");
  add_common(lo);
  double s = 0.05, t = 1.05;
  std::string grid_s;
  lo->add_option("--s", s)->required();
  lo->add_option("--t", t)->required();
  lo->add_option("--x", x_s)->required();
  lo->add_option("--y", y_s, "evaluation point");
  lo->add_option("--grid", grid_s, "t0,t1,theta0,theta1,n");
  lo->add_option("--csv", csv_path, "field dump for --grid");

  // retract
  auto* ret = app.add_subcommand("retract", "sample a retraction, CSV trace");
  add_common(ret);
  std::string mode = "point";
  int tau_samples = 11;
  double eps = 0.5;
  bool certify = false;
  ret->add_option("--mode", mode)->check(CLI::IsMember({"point", "pair", "cut2nu"}));
  ret->add_option("--x", x_s)->required();
  ret->add_option("--y", y_s)->required();
  ret->add_option("--tau-samples", tau_samples)->check(CLI::Range(2, 100000));
  ret->add_option("--eps", eps, "cut2nu neighbourhood size");
  ret->add_option("--horizon", rc.horizon);
  ret->add_flag("--certify", certify, "check every sample against the Aubry set");

  // verify
  auto* ver = app.add_subcommand("verify", "run the acceptance criteria");
  std::string suite = "all";
  unsigned vseed = 7;
  ver->add_option("--suite", suite, "all or a comma-separated list of criterion numbers");
  ver->add_option("--seed", vseed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 64;
  }

  try {
    if (ver->parsed()) {
      std::vector<int> ids;
      if (suite != "all")
        for (double v : io::parse_list(suite)) ids.push_back(static_cast<int>(v));
      verify::Options vo;
      vo.seed = vseed;
      bool all = true;
      verify::run(ids, vo, [&](const verify::CriterionResult& r) {
        std::cout << verify::format_line(r) << std::endl;
        all = all && r.pass;
      });
      return all ? 0 : 1;
    }

    const bool horizon_given = cut->count("--horizon") || aub->count("--horizon") || ret->count("--horizon");
    const double horizon_cli = rc.horizon;
    if (!rc.config_path.empty()) rc.load(rc.config_path);
    if (horizon_given) rc.horizon = horizon_cli;
    if (!metric_opt.empty()) {
      rc.metric = metric_opt;
      rc.spacetime = json();
    }
    rc.validate();
    const Spacetime sp = rc.spec();

    if (geo->parsed()) {
      ChartPoint x = point_arg(sp, x_s, "--x");
      TangentVector v(io::parse_vec(v_s, sp.dim, "--v"));
      if (!(tmax >= tmin)) throw ConfigError("--tmax must not be below --tmin");
      auto rec = integrate_geodesic(sp, x, v, {std::min(0.0, tmin), std::max(0.0, tmax)}, rc.integrator_tol);
      if (tmax > rec.t_max || tmin < rec.t_min)
        throw DomainExceeded(tmax > rec.t_max ? rec.t_max : rec.t_min,
                             "geodesic leaves the domain at parameter " + io::num(tmax > rec.t_max ? rec.t_max : rec.t_min));
      std::ostringstream os;
      io::write_geodesic_csv(os, sp, rec, tmin, tmax, samples);
      if (!csv_path.empty()) write_file(csv_path, os.str());
      else emit(rc, os.str());
    } else if (dist->parsed()) {
      auto ms = connect(sp, point_arg(sp, x_s, "--x"), point_arg(sp, y_s, "--y"), rc.connect());
      emit(rc, dump(io::to_json(sp, ms)));
    } else if (cut->parsed()) {
      auto recs = cut_locus_sample(sp, point_arg(sp, x_s, "--x"), n_dirs, rc.horizon, rc.cut());
      json a = json::array();
      for (const auto& r : recs) a.push_back(io::to_json(sp, r));
      if (!csv_path.empty()) {
        std::ostringstream os;
        io::write_cut_csv(os, recs);
        write_file(csv_path, os.str());
      }
      emit(rc, dump(a));
    } else if (aub->parsed()) {
      ChartPoint x = point_arg(sp, x_s, "--x"), y = point_arg(sp, y_s, "--y");
      auto v = pair_mode ? in_pair_aubry(sp, x, y, rc.horizon, rc.cut())
                         : in_future_aubry(sp, x, y, rc.horizon, rc.cut());
      emit(rc, dump(io::to_json(sp, v)));
    } else if (lo->parsed()) {
      ChartPoint x = point_arg(sp, x_s, "--x");
      if (!grid_s.empty()) {
        auto g = io::parse_list(grid_s);
        if (g.size() != 5) throw ConfigError("--grid expects t0,t1,theta0,theta1,n");
        GridSpec grid{g[0], g[1], g[2], g[3], static_cast<int>(g[4])};
        auto rep = regularity_probe(sp, s, t, x, grid, rc.lo());
        if (!csv_path.empty()) {
          std::ostringstream os;
          io::write_field_csv(os, rep);
          write_file(csv_path, os.str());
        }
        emit(rc, dump(io::to_json(rep)));
      } else {
        if (y_s.empty()) throw ConfigError("lo: give --y or --grid");
        auto ev = backward_forward(sp, s, t, x, point_arg(sp, y_s, "--y"), rc.lo());
        emit(rc, dump(io::to_json(sp, ev)));
      }
    } else if (ret->parsed()) {
      ChartPoint x = point_arg(sp, x_s, "--x"), y = point_arg(sp, y_s, "--y");
      auto ho = rc.homotopy();
      std::ostringstream os;
      if (mode == "cut2nu") {
        os << "tau";
        for (int i = 0; i < sp.dim; ++i) os << ",p" << i;
        for (int i = 0; i < sp.dim; ++i) os << ",q" << i;
        os << ",flow_time,nu\n";
        for (int k = 0; k < tau_samples; ++k) {
          const double tau = static_cast<double>(k) / (tau_samples - 1);
          auto st = cut_to_nu_step(sp, x, y, tau, eps, StepMode::Pair, ho);
          os << io::num(tau);
          for (int i = 0; i < sp.dim; ++i) os << ',' << io::num(st.first[i]);
          for (int i = 0; i < sp.dim; ++i) os << ',' << io::num(st.second[i]);
          os << ',' << io::num(st.flow_time) << ',' << int(st.nu) << '\n';
        }
      } else {
        auto tr = retraction_trace(sp, x, y, tau_samples, mode == "pair" ? TraceKind::Pair : TraceKind::Point,
                                   certify, ho);
        io::write_trace_csv(os, sp, tr);
      }
      emit(rc, os.str());
    }
  } catch (const Error& e) {
    std::cerr << "lorkam: " << e.what() << "\n";
    switch (e.category()) {
      case Error::Category::Domain: return 2;
      case Error::Category::Convergence: return 3;
      case Error::Category::Usage: std::cerr << app.help(); return 64;
    }
  }
  return 0;
}
