#pragma once

// Command-line front end. dispatch() parses argv, validates the flags of the
// chosen command, runs it, and writes one report.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ectd/constants.hpp"
#include "ectd/curves.hpp"
#include "ectd/family.hpp"
#include "ectd/galois.hpp"
#include "ectd/parallel.hpp"
#include "ectd/reduction.hpp"
#include "ectd/report.hpp"
#include "ectd/titchmarsh.hpp"

namespace ectd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDomain = 3 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::uint64_t cutoff = 100000;
  std::uint64_t x = 100000;
  std::int64_t A = 20;
  std::int64_t B = 20;
  unsigned n = 1;
  unsigned checkpoints = 12;
  double threshold = 0.95;
  std::string kind;
  std::string output = "json";
  std::string out_path;
  std::string records_path;
  std::string a = "1";
  std::string b = "1";
  std::uint64_t m_e = 0;
  std::uint64_t screen_x = 0;
  unsigned workers = 0;
};

inline Json to_json(const RunConfig& c) {
  Json j{{"command", c.command}, {"output", c.output}};
  const std::string& k = c.command;
  if (k == "constants") {
    j["cutoff"] = c.cutoff;
    j["a"] = c.a;
    if (c.m_e) j["m_e"] = c.m_e;
  } else if (k == "curve") {
    j["a"] = c.a;
    j["b"] = c.b;
    j["x"] = c.x;
    j["cutoff"] = c.cutoff;
    j["threshold"] = c.threshold;
  } else if (k == "verify") {
    j["a"] = c.a;
    j["b"] = c.b;
    j["x"] = c.x;
    j["checkpoints"] = c.checkpoints;
    j["cutoff"] = c.cutoff;
    j["threshold"] = c.threshold;
  } else {
    j["A"] = c.A;
    j["B"] = c.B;
    if (k == "family-moments") {
      j["n"] = c.n;
      j["kind"] = c.kind.empty() ? "tau_d1" : c.kind;
      j["cutoff"] = c.cutoff;
    }
    if (k == "family-average") {
      j["x"] = c.x;
      j["kind"] = c.kind.empty() ? Json(nullptr) : Json(c.kind);
    }
    if (k != "family-average") j["screen_x"] = c.screen_x ? Json(c.screen_x) : Json(nullptr);
  }
  j["workers"] = c.workers;
  if (!c.out_path.empty()) j["out"] = c.out_path;
  return j;
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

inline i128 parse_coefficient(const std::string& text, const char* name) {
  try {
    return parse_i128(text);
  } catch (const std::exception&) {
    throw UsageError(std::string("--") + name + " must be an integer");
  }
}

inline void validate(const RunConfig& c) {
  require(c.output == "json" || c.output == "csv", "--output must be csv or json");
  const std::string& k = c.command;
  if (k == "constants" || k == "curve" || k == "verify" || k == "family-moments") {
    require(c.cutoff >= 1000 && c.cutoff <= kMaxSieveLimit, "--cutoff must be in [1000, 1e9]");
  }
  if (k == "constants") {
    require(parse_coefficient(c.a, "a") != 0, "--a must be nonzero");
  }
  if (k == "curve" || k == "verify") {
    parse_coefficient(c.a, "a");
    parse_coefficient(c.b, "b");
    require(c.threshold > 0.0 && c.threshold <= 1.0, "--threshold must be in (0, 1]");
    require(c.x >= 2 && c.x < (std::uint64_t(1) << 32), "--x must be in [2, 2^32)");
  }
  if (k == "verify") {
    require(c.checkpoints >= 1 && c.checkpoints <= 1000, "--checkpoints must be in [1, 1000]");
  }
  if (k.rfind("family-", 0) == 0) {
    require(c.A > 2 && c.B > 2, "--A and --B must exceed 2");
  }
  if (k == "family-moments" || k == "family-average") {
    require(c.A <= kMaxFamilyArea / c.B, "--A times --B must not exceed 1e8");
  }
  if (k == "family-moments") {
    require(c.n >= 1 && c.n <= 4, "--n must be in [1, 4]");
  }
  if (!c.kind.empty()) {
    try {
      parse_kind(c.kind);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (k == "family-average") require(c.x < (std::uint64_t(1) << 32), "--x must be below 2^32");
}

inline Json envelope(const RunConfig& c) {
  return Json{{"tool", "ectd"}, {"version", kToolVersion}, {"schema", kSchemaVersion},
              {"config", to_json(c)}};
}

inline void emit_json(std::ostream& out, Json j) { out << j.dump(2) << '\n'; }

inline void run_constants(const RunConfig& c, std::ostream& out) {
  const PrimeTable primes = sieve(c.cutoff);
  const ConstantTriple t = idealized_constants(primes);
  const ConstantValue classical = classical_titchmarsh(parse_i128(c.a), primes);
  std::optional<SerreConstantReport> serre;
  if (c.m_e) serre = serre_constants(factorize(i128(c.m_e)), t);
  if (c.output == "csv") {
    out << "name,value,error_bound,cutoff\n";
    auto row = [&](const std::string& name, const ConstantValue& v) {
      out << name << ',' << format_double(v.value) << ',' << format_double(v.error_bound) << ','
          << v.cutoff << '\n';
    };
    row("c_d1", t.c_d1);
    row("c_tau_d1", t.c_tau_d1);
    row("c_d2", t.c_d2);
    row("classical", classical);
    if (serre) {
      row("serre_c_d1", serre->triple.c_d1);
      row("serre_c_tau_d1", serre->triple.c_tau_d1);
      row("serre_c_d2", serre->triple.c_d2);
    }
    return;
  }
  Json j = envelope(c);
  j["idealized"] = to_json(t);
  j["classical"] = to_json(classical);
  if (serre) j["serre"] = to_json(*serre);
  emit_json(out, j);
}

inline void run_curve(const RunConfig& c, std::ostream& out) {
  const Curve curve = curve_invariants(parse_i128(c.a), parse_i128(c.b));
  const auto cm = cm_class(curve);
  std::optional<SerreData> level;
  if (!cm) level = serre_level(curve);
  const SerreVerdict verdict = serre_heuristic(curve, c.x, default_serre_moduli(), c.threshold);
  std::optional<SerreConstantReport> serre;
  if (level && verdict.status == SerreStatus::likely_serre) {
    serre = serre_constants(factorize(i128(level->m_e)), c.cutoff);
  }
  if (c.output == "csv") {
    out << "field,value\n";
    out << "a," << to_string(curve.a) << "\nb," << to_string(curve.b) << "\ndelta,"
        << to_string(curve.delta) << "\nj," << to_string(curve.j_num)
        << (curve.j_den == 1 ? std::string() : "/" + to_string(curve.j_den)) << '\n';
    out << "cm_discriminant," << (cm ? std::to_string(*cm) : std::string()) << '\n';
    out << "m_E," << (level ? std::to_string(level->m_e) : std::string()) << '\n';
    out << "verdict," << to_string(verdict.status) << '\n';
    out << "witness_modulus,"
        << (verdict.witness_modulus ? std::to_string(*verdict.witness_modulus) : std::string())
        << '\n';
    out << "occupancy," << format_double(verdict.occupancy) << '\n';
    if (serre) {
      out << "serre_c_d1," << format_double(serre->triple.c_d1.value) << '\n';
      out << "serre_c_tau_d1," << format_double(serre->triple.c_tau_d1.value) << '\n';
      out << "serre_c_d2," << format_double(serre->triple.c_d2.value) << '\n';
    }
    return;
  }
  Json j = envelope(c);
  j["curve"] = to_json(curve);
  j["cm_discriminant"] = cm ? Json(*cm) : Json(nullptr);
  j["serre_level"] = level ? to_json(*level) : Json(nullptr);
  j["verdict"] = to_json(verdict);
  j["serre"] = serre ? to_json(*serre) : Json(nullptr);
  j["conditional_on_serre_hypothesis"] = serre.has_value();
  emit_json(out, j);
}

inline void run_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Curve curve = curve_invariants(parse_i128(c.a), parse_i128(c.b));
  const auto primes = good_primes(curve, c.x);
  err << "verify: " << primes.size() << " good primes up to " << c.x << '\n';
  const auto records = reduce_all_cached(curve, primes, c.workers, cache_dir_from_env());
  std::uint64_t violations = 0;
  for (const auto& r : records) violations += record_violations(r) != 0;
  if (violations) throw std::logic_error("record invariants violated " + std::to_string(violations) + " times");
  if (!c.records_path.empty()) {
    std::ofstream f(c.records_path);
    if (!f) throw std::runtime_error("cannot write " + c.records_path);
    write_records_csv(f, records);
  }
  const SerreVerdict verdict = serre_heuristic(curve, records, c.x, default_serre_moduli(), c.threshold);
  const ConjectureReport report =
      conjecture_report(curve, accumulate_checkpoints(records, checkpoint_bounds(c.x, c.checkpoints)),
                        verdict, idealized_constants(c.cutoff));
  if (c.output == "csv") {
    write_csv(out, report);
    return;
  }
  Json j = envelope(c);
  j["report"] = to_json(report);
  j["record_violations"] = violations;
  emit_json(out, j);
}

inline std::optional<std::uint64_t> screen(const RunConfig& c) {
  if (c.screen_x == 0) return std::nullopt;
  return c.screen_x;
}

inline void run_census(const RunConfig& c, std::ostream& out) {
  const FamilyCensus census = cm_census({c.A, c.B}, screen(c));
  if (c.output == "csv") {
    write_csv(out, census);
    return;
  }
  Json j = envelope(c);
  j["census"] = to_json(census);
  emit_json(out, j);
}

inline void run_moments(const RunConfig& c, std::ostream& out) {
  const ConstantKind kind = c.kind.empty() ? ConstantKind::tau_d1 : parse_kind(c.kind);
  const MomentReport m =
      constant_moments({c.A, c.B}, c.n, kind, idealized_constants(c.cutoff), screen(c));
  if (c.output == "csv") {
    write_csv(out, m);
    return;
  }
  Json j = envelope(c);
  j["moments"] = to_json(m);
  emit_json(out, j);
}

inline void run_average(const RunConfig& c, std::ostream& out, std::ostream& err) {
  err << "family-average: C(" << c.A << ", " << c.B << ") up to x = " << c.x << '\n';
  const FamilyAverage avg = family_empirical_averages({c.A, c.B}, c.x, c.workers);
  std::vector<ConstantKind> kinds(kAllKinds.begin(), kAllKinds.end());
  if (!c.kind.empty()) kinds = {parse_kind(c.kind)};
  if (c.output == "csv") {
    out << "kind,A,B,x,curves,raw_average,ratio\n";
    for (ConstantKind k : kinds) {
      const auto i = std::size_t(k);
      out << to_string(k) << ',' << c.A << ',' << c.B << ',' << c.x << ',' << avg.curves << ','
          << format_double(avg.raw_average[i]) << ',' << format_double(avg.ratio[i]) << '\n';
    }
    return;
  }
  Json j = envelope(c);
  j["curves"] = avg.curves;
  Json rows = Json::object();
  for (ConstantKind k : kinds) {
    const auto i = std::size_t(k);
    rows[to_string(k)] = Json{{"raw_average", avg.raw_average[i]}, {"ratio", avg.ratio[i]},
                              {"normalizer", k == ConstantKind::d2 ? "li(x^2)" : "li(x)"}};
  }
  j["averages"] = rows;
  emit_json(out, j);
}

inline void run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::string& k = c.command;
  if (k == "constants") return run_constants(c, out);
  if (k == "curve") return run_curve(c, out);
  if (k == "verify") return run_verify(c, out, err);
  if (k == "family-census") return run_census(c, out);
  if (k == "family-moments") return run_moments(c, out);
  if (k == "family-average") return run_average(c, out, err);
  throw UsageError("unknown command " + k);
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  RunConfig config;
  CLI::App app{"Divisor sums over reductions of elliptic curves", "ectd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--output", config.output, "csv or json")->capture_default_str();
    sub->add_option("--out", config.out_path, "write the report here instead of stdout");
    sub->add_option("--workers", config.workers, "worker threads (0: all cores)");
  };
  auto curve_flags = [&](CLI::App* sub) {
    sub->add_option("--a", config.a, "coefficient a")->required();
    sub->add_option("--b", config.b, "coefficient b")->required();
  };
  auto box_flags = [&](CLI::App* sub) {
    sub->add_option("--A", config.A, "bound on |a|")->capture_default_str();
    sub->add_option("--B", config.B, "bound on |b|")->capture_default_str();
  };

  auto* constants = app.add_subcommand("constants", "idealized, classical and Serre constants");
  constants->add_option("--cutoff", config.cutoff, "prime cutoff")->capture_default_str();
  constants->add_option("--a", config.a, "shift in the classical constant")->capture_default_str();
  constants->add_option("--m-e", config.m_e, "Serre level for exact corrections");
  common(constants);

  auto* curve = app.add_subcommand("curve", "invariants, level and Serre verdict of one curve");
  curve_flags(curve);
  curve->add_option("--x", config.x, "prime bound for the Serre heuristic")->capture_default_str();
  curve->add_option("--cutoff", config.cutoff, "prime cutoff")->capture_default_str();
  curve->add_option("--threshold", config.threshold, "occupancy threshold")->capture_default_str();
  common(curve);

  auto* verify = app.add_subcommand("verify", "divisor sums against the conjectured main terms");
  curve_flags(verify);
  verify->add_option("--x", config.x, "prime bound")->capture_default_str();
  verify->add_option("--checkpoints", config.checkpoints, "number of rows")->capture_default_str();
  verify->add_option("--cutoff", config.cutoff, "prime cutoff")->capture_default_str();
  verify->add_option("--threshold", config.threshold, "occupancy threshold")->capture_default_str();
  verify->add_option("--records", config.records_path, "also write per-prime records as CSV");
  common(verify);

  auto* census = app.add_subcommand("family-census", "CM census of C(A, B)");
  box_flags(census);
  census->add_option("--screen-x", config.screen_x, "screen non-CM curves with the Serre heuristic");
  common(census);

  auto* moments = app.add_subcommand("family-moments", "moments of Serre constants over C(A, B)");
  box_flags(moments);
  moments->add_option("--n", config.n, "moment order")->capture_default_str();
  moments->add_option("--kind", config.kind, "d1, tau_d1 or d2");
  moments->add_option("--cutoff", config.cutoff, "prime cutoff")->capture_default_str();
  moments->add_option("--screen-x", config.screen_x, "count curves the Serre heuristic rejects");
  common(moments);

  auto* average = app.add_subcommand("family-average", "averaged divisor sums over C(A, B)");
  box_flags(average);
  average->add_option("--x", config.x, "prime bound")->capture_default_str();
  average->add_option("--kind", config.kind, "d1, tau_d1 or d2 (default: all)");
  common(average);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }
  config.command = app.get_subcommands().front()->get_name();

  try {
    validate(config);
    if (config.workers == 0) config.workers = default_workers();
    if (config.out_path.empty()) {
      run(config, out, err);
    } else {
      std::ostringstream buffer;
      run(config, buffer, err);
      std::ofstream f(config.out_path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + config.out_path);
      f << buffer.str();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    err << "refused: " << e.what() << '\n';
    return kDomain;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace ectd::cli
