#include "fracop/cli.hpp"

#include "fracop/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fracop {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
  if (!os) throw IoError("cannot write '" + name + "' in '" + dir + "'");
  os << body;
}

std::string scenario_label(const nlohmann::json& j, std::size_t i) {
  std::string label = "scenarios[" + std::to_string(i) + "]";
  if (j.is_object() && j.contains("name") && j["name"].is_string()) {
    label += " (" + j["name"].get<std::string>() + ")";
  }
  return label;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  cfg.text = text;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  try {
    cfg.version = j.at("version").get<std::string>();
    if (cfg.version.substr(0, cfg.version.find('.')) != kConfigMajorVersion) {
      throw ConfigError("config: unsupported version '" + cfg.version + "'");
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      cfg.thresholds.tau = t.value("tau", cfg.thresholds.tau);
      cfg.thresholds.tol = t.value("tol", cfg.thresholds.tol);
      cfg.thresholds.lhs_guard = t.value("lhs_guard", cfg.thresholds.lhs_guard);
      cfg.thresholds.certificate_cap = t.value("certificate_cap", cfg.thresholds.certificate_cap);
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("scenarios")) {
      for (const auto& s : j.at("scenarios")) cfg.scenarios.push_back(s);
    }
    if (j.contains("kernels")) {
      for (const auto& k : j.at("kernels")) cfg.kernels.push_back(k);
    }
    if (j.contains("sweep")) cfg.sweep = j.at("sweep");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<Scenario> RunConfig::build_scenarios() const {
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    try {
      out.push_back(Scenario::from_json(scenarios[i], thresholds, seeds));
    } catch (const ConfigError& e) {
      throw ConfigError(scenario_label(scenarios[i], i) + ": " + e.what());
    }
  }
  return out;
}

std::string resolve_output_dir(const RunConfig& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return cfg.output_dir;
}

int cmd_check_kernel(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  std::vector<nlohmann::json> specs = cfg.kernels;
  if (specs.empty()) {
    for (const auto& s : cfg.scenarios) {
      if (s.contains("operator") && s["operator"].is_object()) specs.push_back(s["operator"]);
    }
  }
  nlohmann::json report = nlohmann::json::array();
  bool all_ok = true;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& kj = specs[i];
    nlohmann::json entry = {{"kernel", kj}};
    const std::string label = "kernels[" + std::to_string(i) + "]";
    // Hypothesis (H) first, so a degenerate family is a failed certificate, not a config error.
    if (kj.contains("matrices")) {
      MatrixFamily family = [&] {
        try {
          return MatrixFamily::from_json(kj.at("matrices"));
        } catch (const std::exception& e) {
          throw ConfigError(label + ".matrices: " + e.what());
        }
      }();
      const auto h = check_hypothesis_h(family);
      entry["hypothesis_h"] = {{"pass", h.pass}, {"min_det", h.min_det}, {"message", h.message}};
      if (!h.pass) {
        log << label << ": " << h.message << '\n';
        all_ok = false;
        entry["pass"] = false;
        report.push_back(entry);
        continue;
      }
    }
    CompositeKernel k = [&] {
      try {
        return kernel_from_json(kj);
      } catch (const ConfigError& e) {
        throw ConfigError(label + ": " + e.what());
      }
    }();
    const auto h = check_hypothesis_h(k.matrices());
    entry["hypothesis_h"] = {{"pass", h.pass}, {"min_det", h.min_det}, {"message", h.message}};
    const int max_order = kj.value("order", 2);
    bool ok = h.pass;
    log << label << " " << k.name << ": " << h.message << ", alpha_total=" << k.alpha_total()
        << '\n';
    entry["factors"] = nlohmann::json::array();
    for (std::size_t f = 0; f < k.size(); ++f) {
      const auto& factor = k.factors()[f];
      const auto eff = factor.preset() == FactorPreset::Power
                           ? KernelFactor::power(factor.order(), factor.dim(), YoungFunction::linf())
                           : factor;
      const auto size = size_constant(eff, {0.125, 0.5, 2.0});
      nlohmann::json fj = {{"order", factor.order()}, {"psi", eff.psi().name()},
                           {"size_constant", size.constant}};
      const bool size_ok = std::isfinite(size.constant);
      ok = ok && size_ok;
      fj["hormander"] = nlohmann::json::array();
      log << "  factor " << f << ": size=" << fmt(size.constant);
      for (int order = 0; order <= max_order; ++order) {
        const auto hor = hormander_constant(eff, order, Point{1.0, 0.0}, 2.0, 16);
        const bool hok = std::isfinite(hor.partial_sum) && hor.tail_slope < -0.5;
        ok = ok && hok;
        fj["hormander"].push_back({{"k", order},
                                   {"partial_sum", hor.partial_sum},
                                   {"tail_slope", hor.tail_slope},
                                   {"ok", hok}});
        log << " H" << order << "=" << fmt(hor.partial_sum) << " (slope " << fmt(hor.tail_slope)
            << ")";
      }
      log << '\n';
      entry["factors"].push_back(fj);
    }
    entry["pass"] = ok;
    all_ok = all_ok && ok;
    report.push_back(entry);
  }
  write_file(out_dir, "kernels.json", report.dump(2) + "\n");
  return all_ok ? kExitPass : kExitFail;
}

int verify_exit_code(const std::vector<InequalityReport>& reports) {
  bool fail = false, gated = false;
  for (const auto& r : reports) {
    if (!r.pass) {
      gated = true;
    } else if (!*r.pass) {
      fail = true;
    }
  }
  if (fail) return kExitFail;
  if (gated) return kExitGated;
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const auto scenarios = cfg.build_scenarios();
  std::vector<InequalityReport> reports;
  for (const auto& s : scenarios) {
    reports.push_back(run_scenario(s));
    const auto& r = reports.back();
    log << r.scenario << " [" << to_string(r.kind) << "]: " << r.status;
    if (r.coarse && r.fine) {
      log << "  sup ratio N=" << r.coarse->n << " " << fmt(r.coarse->sup_ratio) << ", N="
          << r.fine->n << " " << fmt(r.fine->sup_ratio) << ", fine/coarse "
          << fmt(r.refinement_ratio);
    }
    for (const auto& c : r.certificates) {
      if (!c.ok) log << "\n  certificate failed: " << c.name << " = " << fmt(c.value);
    }
    log << '\n';
  }
  emit_report(reports, cfg.text, out_dir);
  return verify_exit_code(reports);
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::string& out_dir,
              std::ostream& out, std::ostream& log) {
  static const std::vector<std::string> axes = {"grid", "p", "alpha", "lambda"};
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  if (!cfg.sweep.contains(axis)) throw ConfigError("sweep." + axis + " is not listed in the config");
  const auto values = cfg.sweep.at(axis).get<std::vector<double>>();
  if (values.empty()) throw ConfigError("sweep." + axis + " is empty");
  if (cfg.scenarios.empty()) throw ConfigError("sweep needs at least one scenario");
  const std::string target = cfg.sweep.value("scenario", std::string());

  std::ostringstream csv;
  csv << "axis,value,scenario,N,status,sup_ratio,trend\n";
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    const auto& base = cfg.scenarios[i];
    if (!target.empty() && base.value("name", std::string()) != target) continue;
    double previous = std::nan("");
    for (double v : values) {
      nlohmann::json sj = base;
      if (axis == "grid") {
        auto g = sj.value("grid", nlohmann::json{{"dim", 1}, {"box", {-4.0, 4.0}}});
        g["N"] = static_cast<int>(v);
        sj["grid"] = g;
      } else if (axis == "p") {
        sj["p"] = v;
      } else if (axis == "alpha") {
        if (sj["operator"].is_object()) {
          sj["operator"]["alpha"] = v;
        } else {
          sj["alpha"] = v;
        }
      } else {
        sj["lambdas"] = {v};
      }
      Scenario s = [&] {
        try {
          return Scenario::from_json(sj, cfg.thresholds, cfg.seeds);
        } catch (const ConfigError& e) {
          throw ConfigError(scenario_label(base, i) + ": " + e.what());
        }
      }();
      const auto fam = instantiate(s.family, s.grid, s.balls);
      const auto certs = certify(s, fam);
      const bool gated =
          std::any_of(certs.begin(), certs.end(), [](const Certificate& c) { return !c.ok; });
      std::string status = "hypotheses not met", trend = "";
      double sup = std::nan("");
      if (!gated) {
        sup = run_resolution(s, fam).sup_ratio;
        status = "ok";
        if (std::isfinite(previous)) trend = sup > previous ? "up" : (sup < previous ? "down" : "flat");
        previous = sup;
      }
      csv << axis << ',' << fmt(v) << ',' << s.name << ',' << s.grid.n() << ',' << status << ','
          << (std::isnan(sup) ? std::string() : fmt(sup)) << ',' << trend << '\n';
      log << s.name << " " << axis << "=" << fmt(v) << ": " << status << '\n';
    }
  }
  out << csv.str();
  write_file(out_dir, "sweep_" + axis + ".csv", csv.str());
  return kExitPass;
}

}  // namespace fracop
