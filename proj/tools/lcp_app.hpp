#pragma once

// The `lcp` command line: gen, match, verify, bench. Kept in a header so the
// test suite can drive it in process.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lcp/lcp.hpp"

namespace lcp::app {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kValidation = 2, kAlgorithm = 3, kVerification = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::DegreeTooSmall:
      return kValidation;
    default:
      return kAlgorithm;
  }
}

/// FNV-1a over the compact JSON of eps, P and Q.
inline std::string instance_digest(const oracle::Instance& inst) {
  const std::string text = json{{"eps", inst.eps}, {"P", io::points_to_json(inst.P)}, {"Q", io::points_to_json(inst.Q)}}.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct MatchOptions {
  std::string instance;
  std::string p_file;
  std::string q_file;
  std::string algo = "da";
  std::string sampling = "all";
  double alpha = 4.0;
  std::size_t degree = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  double radius_factor = 0.0;  // 0 = algorithm default
  double tau = 1e-9;
  double motion_grid = 1e-6;
  unsigned threads = 0;
  std::string out;
};

inline sampling::PairSource pair_source(const MatchOptions& o, std::uint64_t seed) {
  if (o.sampling == "all") return sampling::PairSource::all();
  if (o.sampling == "pigeonhole") return sampling::PairSource::pigeonhole(o.alpha);
  if (o.degree == 0) throw Error(ErrorCode::InvalidArgument, "--sampling expander needs --degree");
  return sampling::PairSource::expander(o.degree, seed);
}

inline json result_to_json(const MatchResult& r) {
  json matched = json::array(), injective = json::array();
  for (const auto& c : r.matched) matched.push_back({c.q, c.p});
  for (const auto& c : r.injective) injective.push_back({c.q, c.p});
  return {{"size", r.size},
          {"raw_size", r.votes},
          {"dedup_size", r.dedup_size},
          {"residual", r.max_residual},
          {"radius", r.radius},
          {"motion", io::motion_to_json(r.motion)},
          {"base_q", r.base_q},
          {"base_p", r.base_p},
          {"angle", r.angle},
          {"tolerant", r.tolerant},
          {"matched", matched},
          {"injective", injective}};
}

/// Runs one algorithm. The report's "result" object depends only on the
/// instance, the options and the seed.
inline json run_match(const oracle::Instance& inst, const MatchOptions& o, std::uint64_t seed) {
  const double eps = o.eps.value_or(inst.eps);
  const auto src = pair_source(o, seed);
  exact::ExactParams xp;
  xp.tau = o.tau;
  xp.motion_grid = o.motion_grid;
  xp.threads = o.threads;

  const auto start = std::chrono::steady_clock::now();
  MatchResult r;
  if (o.algo == "da") {
    da::MatchParams mp;
    mp.eps = eps;
    mp.pair_source = src;
    if (o.radius_factor > 0.0) mp.report_factor = o.radius_factor;
    mp.threads = o.threads;
    r = da::da_match(inst.P, inst.Q, mp);
  } else if (o.algo == "da-exact") {
    r = da::da_exact(inst.P, inst.Q, {o.tau, 1e-6, o.threads}, src);
  } else if (o.algo == "expander-da") {
    if (o.degree == 0) throw Error(ErrorCode::InvalidArgument, "expander-da needs --degree");
    r = da::expander_da(inst.P, inst.Q, eps, o.degree, o.alpha, seed, o.threads);
  } else if (o.algo == "pose") {
    r = exact::pose_clustering(inst.P, inst.Q, xp);
  } else if (o.algo == "align") {
    r = exact::alignment(inst.P, inst.Q, xp);
  } else if (o.algo == "ght") {
    r = exact::ght(inst.P, inst.Q, xp);
  } else if (o.algo == "ghash") {
    r = exact::geometric_hashing(inst.P, inst.Q, xp);
  } else if (o.algo == "ght-pair") {
    const auto pairs = sampling::materialize(src, inst.Q.size());
    r = exact::ght_pair_based(inst.P, inst.Q, pairs, xp);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown --algo " + o.algo);
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  // independent certificate: every reported pair within the reported radius
  const auto check = oracle::verify_motion(inst.P, inst.Q, r.motion, r.radius);
  bool passed = check.matched.size() == r.matched.size();
  for (const auto& c : r.matched) passed = passed && c.residual <= r.radius;

  json params{{"eps", eps},          {"sampling", o.sampling}, {"alpha", o.alpha},
              {"degree", o.degree},  {"tau", o.tau},           {"motion_grid", o.motion_grid},
              {"radius_factor", o.radius_factor}};
  return {{"algorithm", o.algo},
          {"params", params},
          {"result", result_to_json(r)},
          {"certificate", {{"radius", r.radius}, {"passed", passed}, {"verified_size", check.matched.size()}}},
          {"time_ms", ms},
          {"instance_digest", instance_digest(inst)},
          {"seed", seed}};
}

struct VerifyOutcome {
  bool passed = true;
  json report;
};

/// Checks a claimed motion and matched list against a fresh verification.
inline VerifyOutcome verify_claim(const oracle::Instance& inst, const RigidMotion& mu,
                                  const std::vector<index::IndexPair>& claimed, double radius) {
  const auto v = oracle::verify_motion(inst.P, inst.Q, mu, radius);
  json violations = json::array();
  double worst = 0.0;
  for (const auto& [q, p] : claimed) {
    if (q >= inst.Q.size() || p >= inst.P.size()) {
      violations.push_back({{"q", q}, {"p", p}, {"reason", "index out of range"}});
      continue;
    }
    const double r = (mu(inst.Q[q]) - inst.P[p]).norm();
    worst = std::max(worst, r);
    if (r > radius) violations.push_back({{"q", q}, {"p", p}, {"residual", r}, {"reason", "residual above radius"}});
  }
  VerifyOutcome out;
  out.passed = violations.empty();
  out.report = {{"passed", out.passed},
                {"radius", radius},
                {"claimed", claimed.size()},
                {"verified_size", v.matched.size()},
                {"verified_dedup_size", v.injective.size()},
                {"max_claimed_residual", worst},
                {"violations", violations}};
  return out;
}

inline std::optional<std::uint64_t> env_seed() {
  if (const char* s = std::getenv("LCP_MATCH_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "LCP_MATCH_SEED is not an unsigned integer");
    }
  }
  return std::nullopt;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

inline oracle::Instance load_instance(const MatchOptions& o) {
  if (!o.instance.empty()) {
    if (!o.p_file.empty() || !o.q_file.empty())
      throw Error(ErrorCode::InvalidArgument, "use either --instance or --p-file/--q-file");
    return io::read_instance(o.instance);
  }
  if (o.p_file.empty() || o.q_file.empty())
    throw Error(ErrorCode::InvalidArgument, "need --instance or both --p-file and --q-file");
  oracle::Instance inst;
  inst.P = io::read_xyz_file(o.p_file);
  inst.Q = io::read_xyz_file(o.q_file);
  inst.eps = o.eps.value_or(0.0);
  return inst;
}

struct BenchOptions {
  std::string suite = "exact";
  std::vector<std::size_t> sizes;
  std::size_t seeds = 3;
  double alpha = 4.0;
  unsigned threads = 0;
  std::string out;
};

inline std::string run_bench(const BenchOptions& b, std::uint64_t base_seed) {
  std::ostringstream csv;
  csv << "algo,m,n,k,eps,sampling,time_ms,size,residual,seed\n";
  auto row = [&](const json& rep, std::size_t m, std::size_t n, std::size_t k, double eps, const std::string& sampling,
                 std::uint64_t seed) {
    csv << rep["algorithm"].get<std::string>() << ',' << m << ',' << n << ',' << k << ',' << eps << ',' << sampling
        << ',' << rep["time_ms"].get<double>() << ',' << rep["result"]["size"].get<std::size_t>() << ','
        << rep["result"]["residual"].get<double>() << ',' << seed << '\n';
  };
  if (b.suite == "exact") {
    const auto sizes = b.sizes.empty() ? std::vector<std::size_t>{8, 10, 12} : b.sizes;
    for (std::size_t sz : sizes)
      for (std::size_t s = 0; s < b.seeds; ++s) {
        const std::uint64_t seed = base_seed + s;
        oracle::InstanceSpec spec;
        spec.m = spec.n = sz;
        spec.k = sz / 2 + 1;
        spec.eps = 0.0;
        spec.noise = 0.0;
        spec.exact = true;
        const auto inst = oracle::generate_instance(spec, seed);
        for (const char* algo : {"pose", "align", "ght", "ghash", "ght-pair", "da-exact"}) {
          MatchOptions o;
          o.algo = algo;
          o.threads = b.threads;
          row(run_match(inst, o, seed), sz, sz, spec.k, 0.0, "all", seed);
        }
      }
  } else if (b.suite == "pigeonhole") {
    const auto sizes = b.sizes.empty() ? std::vector<std::size_t>{40} : b.sizes;
    for (std::size_t sz : sizes)
      for (std::size_t s = 0; s < b.seeds; ++s) {
        const std::uint64_t seed = base_seed + s;
        oracle::InstanceSpec spec;
        spec.m = spec.n = sz;
        spec.k = static_cast<std::size_t>(static_cast<double>(sz) / b.alpha) + 2;
        spec.eps = 0.0;
        spec.noise = 0.0;
        spec.exact = true;
        const auto inst = oracle::generate_instance(spec, seed);
        for (const char* sampling : {"all", "pigeonhole"}) {
          MatchOptions o;
          o.algo = "ght-pair";
          o.sampling = sampling;
          o.alpha = b.alpha;
          o.threads = b.threads;
          row(run_match(inst, o, seed), sz, sz, spec.k, 0.0, sampling, seed);
        }
      }
  } else if (b.suite == "da") {
    const auto sizes = b.sizes.empty() ? std::vector<std::size_t>{12, 16, 20} : b.sizes;
    for (std::size_t sz : sizes)
      for (std::size_t s = 0; s < b.seeds; ++s) {
        const std::uint64_t seed = base_seed + s;
        oracle::InstanceSpec spec;
        spec.m = sz + 4;
        spec.n = sz;
        spec.k = sz / 2;
        spec.eps = 0.5;
        spec.noise = 0.5;
        const auto inst = oracle::generate_instance(spec, seed);
        MatchOptions o;
        o.algo = "da";
        o.threads = b.threads;
        row(run_match(inst, o, seed), spec.m, sz, spec.k, spec.eps, "all", seed);
      }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown --suite " + b.suite);
  }
  return csv.str();
}

/// Entry point shared by main() and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Largest common point set matching under rigid motions"};
  app.require_subcommand(1);

  oracle::InstanceSpec gspec;
  std::optional<std::uint64_t> gseed;
  std::string gout;
  auto* gen = app.add_subcommand("gen", "generate a planted instance");
  gen->add_option("--m", gspec.m, "points in P")->check(CLI::PositiveNumber);
  gen->add_option("--n", gspec.n, "points in Q")->check(CLI::PositiveNumber);
  gen->add_option("--k", gspec.k, "planted common points");
  gen->add_option("--eps", gspec.eps, "tolerance")->check(CLI::NonNegativeNumber);
  gen->add_option("--noise", gspec.noise, "noise radius (<= eps)")->check(CLI::NonNegativeNumber);
  gen->add_option("--box", gspec.box, "cube side for P (0 = automatic)")->check(CLI::NonNegativeNumber);
  gen->add_option("--min-sep", gspec.min_separation, "minimum separation in P (0 = automatic)");
  gen->add_option("--seed", gseed, "random seed");
  gen->add_flag("--exact", gspec.exact, "integer grid, zero noise");
  gen->add_option("--out", gout, "output file (default stdout)");

  MatchOptions mo;
  auto* match = app.add_subcommand("match", "match Q against P");
  match->add_option("--instance", mo.instance, "instance JSON");
  match->add_option("--p-file", mo.p_file, "XYZ file for P");
  match->add_option("--q-file", mo.q_file, "XYZ file for Q");
  match->add_option("--algo", mo.algo)
      ->check(CLI::IsMember({"da", "da-exact", "expander-da", "pose", "align", "ght", "ghash", "ght-pair"}));
  match->add_option("--sampling", mo.sampling)->check(CLI::IsMember({"all", "pigeonhole", "expander"}));
  match->add_option("--alpha", mo.alpha)->check(CLI::Range(1.0, 1e9));
  match->add_option("--degree", mo.degree);
  match->add_option("--seed", mo.seed);
  match->add_option("--eps", mo.eps)->check(CLI::NonNegativeNumber);
  match->add_option("--radius-factor", mo.radius_factor)->check(CLI::NonNegativeNumber);
  match->add_option("--tau", mo.tau)->check(CLI::PositiveNumber);
  match->add_option("--motion-grid", mo.motion_grid)->check(CLI::PositiveNumber);
  match->add_option("--threads", mo.threads, "worker threads (0 = all cores)");
  match->add_option("--out", mo.out);

  std::string v_instance, v_report;
  std::optional<double> v_radius;
  auto* verify = app.add_subcommand("verify", "check a match report against an instance");
  verify->add_option("--instance", v_instance)->required();
  verify->add_option("--report", v_report)->required();
  verify->add_option("--radius", v_radius)->check(CLI::NonNegativeNumber);

  BenchOptions bo;
  std::optional<std::uint64_t> bseed;
  auto* bench = app.add_subcommand("bench", "time algorithms over a size grid (CSV)");
  bench->add_option("--suite", bo.suite)->check(CLI::IsMember({"exact", "pigeonhole", "da"}));
  bench->add_option("--sizes", bo.sizes)->delimiter(',');
  bench->add_option("--seeds", bo.seeds);
  bench->add_option("--alpha", bo.alpha)->check(CLI::Range(1.0, 1e9));
  bench->add_option("--threads", bo.threads);
  bench->add_option("--seed", bseed);
  bench->add_option("--out", bo.out);

  std::vector<const char*> argv{"lcp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "ParseError"}, {"message", e.what()}}.dump() << '\n';
    return kValidation;
  }

  try {
    if (*gen) {
      const auto seed = gseed ? gseed : env_seed();
      const auto inst = oracle::generate_instance(gspec, seed.value_or(0));
      emit(io::instance_to_json(inst).dump(2) + "\n", gout, out);
      return kOk;
    }
    if (*match) {
      const auto seed = (mo.seed ? mo.seed : env_seed()).value_or(0);
      const auto inst = load_instance(mo);
      const auto report = run_match(inst, mo, seed);
      emit(report.dump(2) + "\n", mo.out, out);
      return report["certificate"]["passed"].get<bool>() ? kOk : kVerification;
    }
    if (*verify) {
      const auto inst = io::read_instance(v_instance);
      const auto rep = io::read_json_file(v_report);
      RigidMotion mu;
      std::vector<index::IndexPair> claimed;
      double radius = 0.0;
      try {
        const auto& res = rep.at("result");
        mu = io::motion_from_json(res.at("motion"));
        for (const auto& pr : res.at("matched")) claimed.emplace_back(pr.at(0).get<Index>(), pr.at(1).get<Index>());
        radius = v_radius.value_or(res.at("radius").get<double>());
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad report: ") + e.what());
      }
      const auto outcome = verify_claim(inst, mu, claimed, radius);
      out << outcome.report.dump(2) << '\n';
      return outcome.passed ? kOk : kVerification;
    }
    if (*bench) {
      const auto seed = (bseed ? bseed : env_seed()).value_or(1);
      emit(run_bench(bo, seed), bo.out, out);
      return kOk;
    }
  } catch (const Error& e) {
    err << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return exit_code_for(e.code());
  }
  return kValidation;
}

}  // namespace lcp::app
