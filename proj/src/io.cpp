#include "dspec/io.hpp"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace dspec {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Eigen::MatrixXd rows_to_matrix(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw ConfigError(what + " must be a nonempty array of rows");
  const size_t cols = rows[0].size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols)
      throw ConfigError(what + " rows have inconsistent lengths");
    for (size_t c = 0; c < cols; ++c) m(i, c) = rows[i][c].get<double>();
  }
  return m;
}

json matrix_to_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd to_vector(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(what + " must be a nonempty array");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json ext_to_json(const ExtReal& x) {
  if (x.is_neg_inf()) return "-inf";
  if (x.is_pos_inf()) return "+inf";
  return x.value();
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

Subspace subspace_from_rows(const Eigen::MatrixXd& rows, const std::string& what) {
  try {
    return orthonormalize(rows.transpose());
  } catch (const RankDeficient&) {
    throw ConfigError(what + ": basis rows are not independent");
  }
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

json base_report(const RunConfig& config, const std::string& command) {
  json doc;
  doc["version"] = "1";
  doc["command"] = command;
  doc["timestamp"] = timestamp_utc();
  doc["config_echo"] = json::parse(config.raw_json);
  doc["config_echo"]["seed"] = config.seed;  // reflects any CLI override
  return doc;
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "structure error: " << e.what() << "\n";
    return kExitStructure;
  }
}

}  // namespace

CoefficientSequence RunConfig::build_system() const {
  json sys = json::parse(system_json);
  const std::string gen = generator;
  if (gen == "constant") return make_constant(rows_to_matrix(sys.at("matrix"), "matrix"), domain);
  if (gen == "periodic") {
    std::vector<Eigen::MatrixXd> ms;
    for (const auto& m : sys.at("matrices")) ms.push_back(rows_to_matrix(m, "matrices"));
    return make_periodic(ms, domain);
  }
  if (gen == "dyadic")
    return make_dyadic_switching(to_vector(sys.at("on_rate"), "on_rate"),
                                 to_vector(sys.at("off_rate"), "off_rate"), domain);
  if (gen == "block") {
    std::vector<Eigen::VectorXd> rates;
    for (const auto& r : sys.at("rates")) rates.push_back(to_vector(r, "rates"));
    std::vector<RateSegment> sched;
    for (const auto& seg : sys.value("schedule", json::array()))
      sched.push_back({seg.at("begin").get<long>(), seg.at("end").get<long>(),
                       seg.at("rate").get<int>()});
    return make_block_switching(rates, sched, sys.value("fallback", 0), domain, horizon);
  }
  if (gen == "random-bounded")
    return make_random_bounded(sys.at("d").get<int>(), seed,
                               sys.value("log_rate_max", 1.0), domain);
  if (gen == "random-block") {
    int d = sys.at("d").get<int>();
    Eigen::MatrixXd sim = sys.contains("similarity")
                              ? rows_to_matrix(sys["similarity"], "similarity")
                              : Eigen::MatrixXd::Identity(d, d);
    return make_random_block_dichotomous(d, sys.at("k").get<int>(),
                                         sys.value("alpha", 0.5), sys.value("b", 1.5),
                                         seed, sim, domain);
  }
  if (gen == "file") return load_sequence(sys.at("path").get<std::string>());
  throw ConfigError("unknown system generator: " + gen);
}

RunConfig load_config(const std::string& path) {
  json doc = parse_file(path);
  RunConfig cfg;
  cfg.raw_json = doc.dump();

  try {
    if (!doc.contains("system") || !doc["system"].is_object())
      throw ConfigError("config needs a \"system\" object");
    if (!doc["system"].contains("generator"))
      throw ConfigError("system needs a \"generator\" name");
    cfg.generator = doc["system"]["generator"].get<std::string>();
    cfg.system_json = doc["system"].dump();

    std::string dom = doc.value("domain", "two-sided");
    if (dom == "one-sided")
      cfg.domain = TimeDomain::OneSided;
    else if (dom == "two-sided")
      cfg.domain = TimeDomain::TwoSided;
    else
      throw ConfigError("domain must be \"one-sided\" or \"two-sided\"");

    cfg.horizon = doc.value("horizon", 512L);
    if (cfg.horizon < 2 || cfg.horizon > 1L << 20) throw ConfigError("horizon out of range");
    cfg.grid = WindowGrid::standard(cfg.horizon);
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      if (g.contains("floors")) {
        cfg.grid.window_floors.clear();
        for (const auto& f : g["floors"]) cfg.grid.window_floors.push_back(f.get<long>());
      }
      if (g.contains("stride")) cfg.grid.window_stride = g["stride"].get<long>();
    }

    cfg.seed = doc.value("seed", 0UL);
    if (doc.contains("budgets")) {
      const auto& b = doc["budgets"];
      cfg.budgets.outer_starts = b.value("outer_starts", cfg.budgets.outer_starts);
      cfg.budgets.inner_samples = b.value("inner_samples", cfg.budgets.inner_samples);
      cfg.budgets.refine_rounds = b.value("refine_rounds", cfg.budgets.refine_rounds);
      if (cfg.budgets.outer_starts < 1 || cfg.budgets.inner_samples < 1 ||
          cfg.budgets.refine_rounds < 0)
        throw ConfigError("search budgets must be positive");
    }
    cfg.budgets.seed = cfg.seed;
    cfg.output_dir = doc.value("output_dir", ".");
    cfg.format = doc.value("format", "both");
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "both")
      throw ConfigError("format must be json, csv or both");

    // Resolving J needs the state dimension; building the system also
    // validates the generator parameters up front.
    int d = cfg.build_system().dim();
    json jspec = doc.value("J", json("ed"));
    if (jspec.is_string()) {
      cfg.j_name = jspec.get<std::string>();
      if (cfg.j_name == "bd")
        cfg.j = j_bd(d);
      else if (cfg.j_name == "ed")
        cfg.j = j_ed(d);
      else
        throw ConfigError("J must be \"bd\", \"ed\" or an explicit pair list");
    } else {
      cfg.j_name = "explicit";
      for (const auto& p : jspec)
        cfg.j.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      try {
        validate_dimensions(d, cfg.j);
      } catch (const DimensionError& e) {
        throw ConfigError(e.what());
      }
    }

    if (doc.contains("subspace"))
      cfg.subspace_rows = rows_to_matrix(doc["subspace"], "subspace");
    if (doc.contains("gamma")) cfg.gamma = doc["gamma"].get<double>();
    if (doc.contains("splitting")) {
      cfg.l1_rows = rows_to_matrix(doc["splitting"].at("l1"), "splitting.l1");
      cfg.l2_rows = rows_to_matrix(doc["splitting"].at("l2"), "splitting.l2");
    }
    if (doc.contains("dims"))
      cfg.dims = {doc["dims"].at(0).get<int>(), doc["dims"].at(1).get<int>()};
    if (doc.contains("l1")) cfg.l1_rows = rows_to_matrix(doc["l1"], "l1");
    if (doc.contains("complements"))
      for (const auto& c : doc["complements"])
        cfg.complement_rows.push_back(rows_to_matrix(c, "complements"));
    if (doc.contains("conjecture")) {
      const auto& c = doc["conjecture"];
      ConjectureSearchConfig cc;
      cc.d = c.value("d", 2);
      cc.dim_l1 = c.value("dim_l1", 1);
      cc.num_systems = c.value("num_systems", 4);
      cc.num_complements = c.value("num_complements", 4);
      cc.horizon = c.value("horizon", cfg.horizon);
      cc.alpha = c.value("alpha", 0.5);
      cc.b = c.value("b", 1.5);
      cc.search = cfg.budgets;
      cc.seed = cfg.seed;
      cfg.conjecture = cc;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string report_to_json(const SpectrumReport& report, const RunConfig& config) {
  json doc = base_report(config, "spectrum");
  json intervals = json::array();
  for (const auto& iv : report.intervals) intervals.push_back({iv.lo, iv.hi});
  doc["intervals"] = intervals;

  json gaps = json::array();
  for (const auto& g : report.resolvent_gaps)
    gaps.push_back({{"k", g.k}, {"lo", ext_to_json(g.lo)}, {"hi", ext_to_json(g.hi)}});
  doc["resolvent_gaps"] = gaps;

  json filt = json::array();
  for (size_t i = 0; i < report.filtration.size(); ++i) {
    json entry;
    entry["dim"] = report.filtration[i].dim();
    entry["gamma_samples"] = report.filtration_gammas.size() > i
                                 ? json(report.filtration_gammas[i])
                                 : json::array();
    entry["basis"] = matrix_to_rows(report.filtration[i].basis.transpose());
    filt.push_back(entry);
  }
  doc["filtration"] = filt;

  if (!report.decomposition.empty()) {
    json dec = json::array();
    for (const auto& w : report.decomposition)
      dec.push_back(matrix_to_rows(w.basis.transpose()));
    doc["decomposition"] = dec;
  }

  json diag = json::array();
  for (const auto& e : report.diagnostics)
    diag.push_back({{"k", e.k},
                    {"direction", e.upper ? "upper" : "lower"},
                    {"value", ext_to_json(e.value)},
                    {"converged", e.converged}});
  doc["diagnostics"] = diag;
  return doc.dump(2) + "\n";
}

std::string plot_data_csv(const SpectrumReport& report, const SystemBounds& bounds) {
  double lo = -std::log(bounds.norm_a_inv) - 0.5;
  double hi = std::log(bounds.norm_a) + 0.5;
  std::ostringstream out;
  out << "gamma,in_spectrum\n";
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    double gamma = lo + (hi - lo) * i / n;
    int in = 0;
    for (const auto& iv : report.intervals)
      if (gamma >= iv.lo && gamma <= iv.hi) in = 1;
    out << gamma << "," << in << "\n";
  }
  return out.str();
}

std::string trace_csv(const std::vector<std::pair<std::string, BohlEstimate>>& estimates) {
  std::ostringstream out;
  out << "estimate,N,value\n";
  for (const auto& [name, est] : estimates)
    for (const auto& [n, v] : est.per_floor)
      out << name << "," << n << "," << ext_to_json(v).dump() << "\n";
  return out.str();
}

int cmd_spectrum(const RunConfig& config) {
  return run_guarded([&] {
    auto system = config.build_system();
    auto report = compute_spectrum(system, config.j, config.grid, config.budgets);
    if (config.format != "csv")
      write_text(config.output_dir, "spectrum_report.json", report_to_json(report, config));
    if (config.format != "json") {
      auto bounds = empirical_bounds(system, std::min<long>(config.horizon, 256));
      write_text(config.output_dir, "spectrum_plot.csv", plot_data_csv(report, bounds));
      std::vector<std::pair<std::string, BohlEstimate>> traces;
      // The per-gap endpoint estimates re-derived for the trace export.
      for (const auto& g : report.resolvent_gaps) {
        LimitingEstimate up = limiting_upper(system, g.k, config.j.pairs[g.k].first,
                                             config.grid, config.budgets);
        if (!up.estimate.per_floor.empty())
          traces.emplace_back("upper_k" + std::to_string(g.k), up.estimate);
      }
      write_text(config.output_dir, "spectrum_traces.csv", trace_csv(traces));
    }
    std::cout << "spectrum intervals:";
    for (const auto& iv : report.intervals)
      std::cout << " [" << iv.lo << ", " << iv.hi << "]";
    std::cout << "\n";
  });
}

int cmd_exponents(const RunConfig& config) {
  return run_guarded([&] {
    if (!config.subspace_rows) throw ConfigError("exponents needs a \"subspace\" entry");
    auto system = config.build_system();
    if (config.subspace_rows->cols() != system.dim())
      throw ConfigError("subspace rows must have length d");
    Subspace u = subspace_from_rows(*config.subspace_rows, "subspace");
    auto pair = bohl_both(system, u, config.grid);

    std::cout << "N,upper,lower\n";
    for (size_t i = 0; i < pair.upper.per_floor.size(); ++i)
      std::cout << pair.upper.per_floor[i].first << "," << pair.upper.per_floor[i].second
                << "," << pair.lower.per_floor[i].second << "\n";
    std::cout << "upper value " << pair.upper.value
              << (pair.upper.converged ? " (converged)" : " (not converged)") << "\n";
    std::cout << "lower value " << pair.lower.value
              << (pair.lower.converged ? " (converged)" : " (not converged)") << "\n";

    if (config.format != "csv") {
      json doc = base_report(config, "exponents");
      for (const auto& [key, est] :
           {std::pair<const char*, const BohlEstimate&>{"upper", pair.upper},
            {"lower", pair.lower}}) {
        json e;
        e["value"] = ext_to_json(est.value);
        e["converged"] = est.converged;
        e["spread"] = est.spread;
        json pf = json::array();
        for (const auto& [n, v] : est.per_floor) pf.push_back({{"N", n}, {"value", ext_to_json(v)}});
        e["per_floor"] = pf;
        doc[key] = e;
      }
      write_text(config.output_dir, "exponents_report.json", doc.dump(2) + "\n");
    }
    if (config.format != "json")
      write_text(config.output_dir, "exponents_traces.csv",
                 trace_csv({{"upper", pair.upper}, {"lower", pair.lower}}));
  });
}

int cmd_check(const RunConfig& config) {
  return run_guarded([&] {
    if (!config.gamma || !config.l1_rows || !config.l2_rows || !config.dims)
      throw ConfigError("check needs \"gamma\", \"splitting\" and \"dims\" entries");
    auto system = config.build_system();
    Splitting sp{config.l1_rows->size() == 0 ? Subspace::zero(system.dim())
                                             : subspace_from_rows(*config.l1_rows, "l1"),
                 subspace_from_rows(*config.l2_rows, "l2")};
    if (!is_splitting(sp.l1, sp.l2)) throw ConfigError("l1 and l2 do not form a splitting");

    DichotomyCertificate cert;
    try {
      cert = certify_dichotomy(system, *config.gamma, sp, config.dims->first,
                               config.dims->second, config.grid, config.budgets);
    } catch (const DimensionError& e) {
      throw ConfigError(e.what());
    }
    std::cout << "verdict " << verdict_name(cert.verdict) << " alpha " << cert.alpha
              << " c1_max " << cert.c1_max << " c2_min " << cert.c2_min << "\n";
    if (config.format != "csv") {
      json doc = base_report(config, "check");
      doc["verdict"] = verdict_name(cert.verdict);
      doc["alpha"] = cert.alpha;
      doc["c1_max"] = cert.c1_max;
      doc["c2_min"] = cert.c2_min;
      doc["samples"] = cert.samples;
      write_text(config.output_dir, "check_report.json", doc.dump(2) + "\n");
    }
  });
}

int cmd_explore_uniformity(const RunConfig& config) {
  return run_guarded([&] {
    if (!config.l1_rows || config.complement_rows.empty())
      throw ConfigError("explore-uniformity needs \"l1\" and \"complements\" entries");
    auto system = config.build_system();
    Subspace l1 = subspace_from_rows(*config.l1_rows, "l1");
    std::vector<Subspace> l2s;
    for (size_t i = 0; i < config.complement_rows.size(); ++i)
      l2s.push_back(subspace_from_rows(config.complement_rows[i],
                                       "complement " + std::to_string(i)));
    auto rep =
        uniformity_independence_check(system, l1, l2s, config.grid, config.budgets);

    std::cout << "orthogonal complement (u1,u2) = (" << rep.orthogonal.first << ","
              << rep.orthogonal.second << "); " << rep.findings.size() << " finding(s)\n";
    if (config.format != "csv") {
      json doc = base_report(config, "explore-uniformity");
      json per = json::array();
      for (const auto& [u1, u2] : rep.per_complement) per.push_back({u1, u2});
      doc["per_complement"] = per;
      doc["orthogonal"] = {rep.orthogonal.first, rep.orthogonal.second};
      doc["u1_consistent"] = rep.u1_consistent;
      doc["orthogonal_u2_maximal"] = rep.orthogonal_u2_maximal;
      doc["findings"] = rep.findings;
      write_text(config.output_dir, "uniformity_report.json", doc.dump(2) + "\n");
    }
  });
}

int cmd_conjecture_search(const RunConfig& config) {
  return run_guarded([&] {
    if (!config.conjecture) throw ConfigError("conjecture-search needs a \"conjecture\" entry");
    auto findings = conjecture_search(*config.conjecture);
    std::cout << findings.size() << " finding(s)\n";
    if (config.format != "csv") {
      json doc = base_report(config, "conjecture-search");
      json out = json::array();
      for (const auto& f : findings)
        out.push_back({{"system_seed", f.system_seed},
                       {"complement_a", f.complement_a},
                       {"complement_b", f.complement_b},
                       {"u2_a", f.u2_a},
                       {"u2_b", f.u2_b},
                       {"contradicts_remark", f.contradicts_remark}});
      doc["findings"] = out;
      write_text(config.output_dir, "conjecture_report.json", doc.dump(2) + "\n");
    }
  });
}

}  // namespace dspec
