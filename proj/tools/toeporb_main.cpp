#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toeporb/acceptance.hpp"
#include "toeporb/arith.hpp"
#include "toeporb/averaging.hpp"
#include "toeporb/common.hpp"
#include "toeporb/constructions.hpp"
#include "toeporb/polyres.hpp"
#include "toeporb/sturmian.hpp"
#include "toeporb/toeplitz.hpp"

namespace {

using json = nlohmann::json;
using namespace toeporb;

bool g_verbose = false;

void progress(const std::string& msg) {
  if (g_verbose) std::cerr << "progress: " << msg << "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot open output file: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rat64 parse_rat_arg(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return Rat64(std::stoll(s));
  return Rat64(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::vector<std::int64_t> parse_int_list_arg(const std::string& s) {
  std::vector<std::int64_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stoll(item));
  if (out.empty()) throw ContractError("empty list argument");
  return out;
}

/// Flags win over config-file values; config values win over defaults.
class ConfigLayer {
 public:
  ConfigLayer(CLI::App* app, const std::string& config_path) : app_(app) {
    if (!config_path.empty()) values_ = json::parse(read_file(config_path));
    if (!values_.is_null() && !values_.is_object())
      throw ContractError("config file must hold a JSON object");
  }

  template <typename T>
  void apply(const std::string& flag, const std::string& key, T& var) {
    if (app_->count("--" + flag) > 0) return;
    if (values_.is_object() && values_.contains(key)) var = values_[key].get<T>();
  }

  void apply_rat(const std::string& flag, const std::string& key, Rat64& var) {
    if (app_->count("--" + flag) > 0) return;
    if (values_.is_object() && values_.contains(key))
      var = parse_rat_arg(values_[key].get<std::string>());
  }

 private:
  CLI::App* app_;
  json values_;
};

averaging::ObservableSpec load_observable(const std::string& spec, int alphabet) {
  if (spec.empty() || spec == "parity") return averaging::ObservableSpec::parity();
  if (spec.rfind("indicator:", 0) == 0)
    return averaging::ObservableSpec::indicator(std::stoi(spec.substr(10)), alphabet);
  if (spec.rfind("constant:", 0) == 0)
    return averaging::ObservableSpec::constant(std::stod(spec.substr(9)), alphabet);
  const json j = json::parse(read_file(spec));
  return averaging::ObservableSpec(j.at("radius").get<int>(), j.at("alphabet").get<int>(),
                                   j.at("table").get<std::vector<double>>());
}

std::string config_hash_of(const std::string& canonical) {
  std::ostringstream os;
  os << std::hex << fnv1a64(canonical);
  return os.str();
}

// --- subcommands -----------------------------------------------------------

struct ConstructArgs {
  std::string theorem = "A";
  std::int64_t c = 2;
  std::string q = "7/8";
  int stages = 3;
  std::int64_t modulus_budget = 100'000'000;
  std::string fill = "alternating-target";
  std::string oscillation_target = "1/2";
  std::uint64_t seed = 0;
  std::string support = "2,3,5";
  std::string out = "skeleton.txt";
  std::string certificates = "certificates.jsonl";
};

int cmd_construct(const ConstructArgs& a) {
  constructions::BuildConfig cfg;
  cfg.growth_constant = a.c;
  cfg.ratio_bound = parse_rat_arg(a.q);
  cfg.stage_budget = a.stages;
  cfg.modulus_budget = a.modulus_budget;
  cfg.fill_policy = a.fill == "seeded-random" ? constructions::FillPolicy::kSeededRandom
                                              : constructions::FillPolicy::kAlternatingTarget;
  cfg.oscillation_target = parse_rat_arg(a.oscillation_target);
  cfg.seed = a.seed;
  cfg.square_support = parse_int_list_arg(a.support);
  cfg.validate();

  const auto id = constructions::theorem_from_name(a.theorem);
  progress("building theorem " + constructions::theorem_name(id));
  constructions::BuildResult result = [&] {
    switch (id) {
      case constructions::TheoremId::kTheoremA:
        return constructions::build_theorem_a(cfg);
      case constructions::TheoremId::kSemiprime:
        return constructions::build_spnt_counterexample(cfg);
      case constructions::TheoremId::kSquares:
        return constructions::build_squares_counterexample(cfg);
    }
    throw ContractError("unreachable");
  }();

  write_file(a.out, result.skeleton.to_text());
  std::ostringstream certs;
  for (const auto& cert : result.certificates) certs << cert.to_json_lines();
  write_file(a.certificates, certs.str());

  std::cout << "built " << result.skeleton.stage_count() << " stages; periods";
  for (int t = 1; t <= result.skeleton.stage_count(); ++t)
    std::cout << " " << result.skeleton.period(t);
  std::cout << "; skeleton -> " << a.out << "; certificates -> " << a.certificates << "\n";
  return 0;
}

int cmd_validate(const std::string& skeleton_path, const std::string& theorem, int stage,
                 const std::string& certificates_out) {
  const auto sk = toeplitz::ToeplitzSkeleton::from_text(read_file(skeleton_path));
  const auto id = constructions::theorem_from_name(theorem);
  std::ostringstream certs;
  bool all_pass = true;
  std::string first_failure;
  const int lo = stage > 0 ? stage : 1;
  const int hi = stage > 0 ? stage : sk.stage_count();
  for (int t = lo; t <= hi; ++t) {
    const auto cert = constructions::validate_stage(sk, t, id);
    certs << cert.to_json_lines();
    if (!cert.all_pass() && all_pass) {
      all_pass = false;
      first_failure =
          cert.first_failure()->name + " at stage " + std::to_string(cert.stage);
    }
  }
  if (!certificates_out.empty()) write_file(certificates_out, certs.str());
  if (!all_pass) {
    json err;
    err["error"] = "validation failed";
    err["condition"] = first_failure;
    std::cerr << err.dump() << "\n";
    return 1;
  }
  std::cout << "all conditions pass\n";
  return 0;
}

struct AverageArgs {
  std::string skeleton;
  std::string kind = "primes";
  std::string poly = "m^2";
  std::string n_list = "1000000";
  std::string r_list = "0";
  std::string obs = "parity";
  int predict_stage = 0;
  std::string format = "csv";
  std::string out = "averages.csv";
};

int cmd_average(const AverageArgs& a, const std::string& canonical) {
  const auto sk = toeplitz::ToeplitzSkeleton::from_text(read_file(a.skeleton));
  const auto kind = averaging::index_kind_from_name(a.kind);
  const auto F = load_observable(a.obs, sk.alphabet_size());
  const auto Ns = parse_int_list_arg(a.n_list);
  const auto rs = parse_int_list_arg(a.r_list);
  for (std::int64_t N : Ns)
    if (N < 1) throw ContractError("average: every N must be >= 1");

  std::optional<polyres::PolynomialSpec> P;
  if (kind == averaging::IndexKind::kPolynomial) P = polyres::PolynomialSpec::parse(a.poly);
  std::int64_t max_n = 1;
  for (std::int64_t N : Ns) max_n = std::max(max_n, N);
  std::optional<arith::PrimeTable> table;
  if (kind != averaging::IndexKind::kPolynomial)
    table.emplace(std::max<std::int64_t>(max_n, 64));

  std::vector<averaging::AverageReport> reports;
  for (std::int64_t N : Ns) {
    for (std::int64_t r : rs) {
      progress("averaging N=" + std::to_string(N) + " r=" + std::to_string(r));
      averaging::AverageReport rep;
      switch (kind) {
        case averaging::IndexKind::kPrimes:
          rep = averaging::prime_average(sk, F, *table, N, r);
          break;
        case averaging::IndexKind::kSemiprimes:
          rep = averaging::semiprime_average(sk, F, *table, N, r);
          break;
        case averaging::IndexKind::kPolynomial:
          rep = averaging::poly_average(sk, *P, F, N, r);
          break;
      }
      if (a.predict_stage > 0) {
        const auto pred =
            kind == averaging::IndexKind::kPolynomial
                ? averaging::predicted_poly_limit(sk, *P, a.predict_stage, F, r)
                : averaging::predicted_prime_limit(sk, a.predict_stage, F, r);
        rep.predicted = pred.value;
        rep.error_bound = pred.error_bound;
      }
      reports.push_back(rep);
    }
  }
  std::ostringstream body;
  if (a.format == "jsonl") {
    for (const auto& rep : reports) body << averaging::report_to_json(rep) << "\n";
  } else if (a.format == "csv") {
    averaging::write_reports_csv(body, reports, config_hash_of(canonical));
  } else {
    throw ContractError("average: --format must be csv or jsonl");
  }
  write_file(a.out, body.str());
  std::cout << "wrote " << reports.size() << " averages -> " << a.out << "\n";
  return 0;
}

int cmd_oscillate(const std::string& skeleton_path, const std::string& kind_name,
                  const std::string& stages_arg, std::int64_t r, const std::string& out,
                  const std::string& canonical) {
  const auto sk = toeplitz::ToeplitzSkeleton::from_text(read_file(skeleton_path));
  const auto kind = averaging::index_kind_from_name(kind_name);
  std::vector<int> stages;
  if (stages_arg.empty()) {
    for (int t = 1; t <= sk.stage_count(); ++t) stages.push_back(t);
  } else {
    for (std::int64_t v : parse_int_list_arg(stages_arg)) stages.push_back(static_cast<int>(v));
  }
  std::int64_t max_scale = 64;
  for (int t : stages) max_scale = std::max(max_scale, sk.period(t));
  const arith::PrimeTable table(max_scale);
  const auto points = averaging::oscillation_witness(sk, kind, stages,
                                                     averaging::ObservableSpec::parity(), table, r);
  std::ostringstream csv;
  csv << "stage,scale,value,gap\n";
  for (const auto& pt : points) {
    csv << pt.stage << "," << pt.scale << ",";
    csv.precision(17);
    csv << pt.value << ",";
    if (pt.gap) csv << *pt.gap;
    csv << "\n";
  }
  csv << "# config_hash=" << config_hash_of(canonical) << "\n";
  csv << "# toeporb_version=" << kVersion << "\n";
  write_file(out, csv.str());
  std::cout << "wrote " << points.size() << " stage averages -> " << out << "\n";
  return 0;
}

int cmd_residues(const std::string& poly, std::int64_t n_min, std::int64_t n_max,
                 const std::string& out, const std::string& canonical) {
  if (n_min < 2 || n_max < n_min) throw ContractError("residues: need 2 <= n-min <= n-max");
  const auto P = polyres::PolynomialSpec::parse(poly);
  const bool is_square = P == polyres::PolynomialSpec::square();
  std::ostringstream csv;
  csv << "n,psi,rho_max,albis_ok" << (is_square ? ",tilde_psi" : "") << "\n";
  for (std::int64_t n = n_min; n <= n_max; ++n) {
    const auto profile = polyres::residue_profile(P, n);
    csv << n << "," << profile.psi() << "," << profile.rho_max << ","
        << (polyres::albis_bound_check(P, n) ? 1 : 0);
    if (is_square) csv << "," << polyres::tilde_psi(n);
    csv << "\n";
  }
  csv << "# config_hash=" << config_hash_of(canonical) << "\n";
  csv << "# toeporb_version=" << kVersion << "\n";
  write_file(out, csv.str());
  std::cout << "wrote residue profiles for n in [" << n_min << "," << n_max << "] -> " << out
            << "\n";
  return 0;
}

int cmd_sturmian(std::int64_t N, const std::string& which, int radius, const std::string& out,
                 const std::string& canonical) {
  const auto spec = which == "conjugate" ? sturmian::RotationSpec::golden_conjugate()
                                         : sturmian::RotationSpec::golden();
  const arith::PrimeTable table(std::max<std::int64_t>(N, 64));
  std::ostringstream csv;
  csv << "quantity,N,value,prediction,bound\n";
  const auto F = radius == 0 ? averaging::ObservableSpec::indicator(0)
                             : averaging::ObservableSpec(
                                   radius, 2,
                                   [&] {
                                     std::vector<double> t(
                                         static_cast<std::size_t>(1) << (2 * radius + 1), 0.0);
                                     t[0] = 1.0;  // indicator of the all-zeros window
                                     return t;
                                   }());
  const auto rep = sturmian::prime_orbit_average(spec, F, table, N);
  csv.precision(17);
  csv << "prime_orbit_average," << N << "," << rep.value << "," << *rep.predicted << ","
      << *rep.error_bound << "\n";
  const double vin = sturmian::vinogradov_sum(spec.alpha, table, N);
  csv << "vinogradov_sum," << N << "," << vin << ",0,\n";
  csv << "# spec=" << spec.description << "\n";
  csv << "# config_hash=" << config_hash_of(canonical) << "\n";
  csv << "# toeporb_version=" << kVersion << "\n";
  write_file(out, csv.str());
  std::cout << "prime-orbit average " << rep.value << " (prediction " << *rep.predicted
            << "), vinogradov " << vin << " -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz orbit-average laboratory"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "cap on worker threads (results are identical)");
  app.add_flag("--verbose", g_verbose, "progress records on stderr");

  // construct
  auto* construct = app.add_subcommand("construct", "run a stage-wise builder");
  ConstructArgs ca;
  std::string construct_config;
  construct->add_option("--config", construct_config, "JSON config file");
  construct->add_option("--theorem", ca.theorem, "A | SPNT | SQUARES");
  construct->add_option("--c", ca.c, "growth constant (paper value 100)");
  construct->add_option("--q", ca.q, "totient-ratio bound per stage, e.g. 7/8");
  construct->add_option("--stages", ca.stages, "stage budget");
  construct->add_option("--modulus-budget", ca.modulus_budget, "largest allowed period");
  construct->add_option("--fill-policy", ca.fill, "alternating-target | seeded-random");
  construct->add_option("--oscillation-target", ca.oscillation_target, "gap target, e.g. 1/2");
  construct->add_option("--seed", ca.seed, "fill seed");
  construct->add_option("--support", ca.support, "prime support for SQUARES, e.g. 2,3,5");
  construct->add_option("--out", ca.out, "skeleton output path");
  construct->add_option("--certificates", ca.certificates, "certificate JSONL path");

  // validate
  auto* validate = app.add_subcommand("validate", "recompute stage certificates");
  std::string v_skeleton, v_theorem = "A", v_certs;
  int v_stage = 0;
  validate->add_option("--skeleton", v_skeleton, "skeleton file")->required();
  validate->add_option("--theorem", v_theorem, "A | SPNT | SQUARES");
  validate->add_option("--stage", v_stage, "only this stage (default: all)");
  validate->add_option("--certificates", v_certs, "certificate JSONL path");

  // average
  auto* average = app.add_subcommand("average", "orbit averages over an index set");
  AverageArgs aa;
  std::string average_config;
  average->add_option("--config", average_config, "JSON config file");
  average->add_option("--skeleton", aa.skeleton, "skeleton file");
  average->add_option("--kind", aa.kind, "primes | semiprimes | polynomial");
  average->add_option("--poly", aa.poly, "polynomial for kind=polynomial");
  average->add_option("--N", aa.n_list, "comma list of scales");
  average->add_option("--r", aa.r_list, "comma list of shifts");
  average->add_option("--obs", aa.obs, "parity | indicator:K | constant:C | JSON file");
  average->add_option("--predict-stage", aa.predict_stage, "attach the stage-k predicted limit");
  average->add_option("--format", aa.format, "csv | jsonl");
  average->add_option("--out", aa.out, "output path");

  // oscillate
  auto* oscillate = app.add_subcommand("oscillate", "stage-scale averages and gaps");
  std::string o_skeleton, o_kind = "primes", o_stages;
  std::int64_t o_r = 0;
  std::string o_out = "oscillation.csv";
  oscillate->add_option("--skeleton", o_skeleton, "skeleton file")->required();
  oscillate->add_option("--kind", o_kind, "primes | semiprimes | polynomial");
  oscillate->add_option("--stages", o_stages, "comma list of stages (default: all)");
  oscillate->add_option("--r", o_r, "shift");
  oscillate->add_option("--out", o_out, "CSV output path");

  // residues
  auto* residues = app.add_subcommand("residues", "attainable residue tables");
  std::string res_poly = "m^2", res_out = "residues.csv";
  std::int64_t res_min = 2, res_max = 100;
  residues->add_option("--poly", res_poly, "polynomial");
  residues->add_option("--n-min", res_min, "first modulus");
  residues->add_option("--n-max", res_max, "last modulus");
  residues->add_option("--out", res_out, "CSV output path");

  // sturmian
  auto* sturm = app.add_subcommand("sturmian", "rotation-coding diagnostics");
  std::int64_t st_N = 10'000'000;
  std::string st_spec = "golden", st_out = "sturmian.csv";
  int st_radius = 0;
  sturm->add_option("--N", st_N, "prime budget");
  sturm->add_option("--spec", st_spec, "golden | conjugate");
  sturm->add_option("--radius", st_radius, "observable window radius");
  sturm->add_option("--out", st_out, "CSV output path");

  // acceptance
  auto* acc = app.add_subcommand("acceptance", "run the full acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  averaging::set_thread_cap(threads);

  try {
    if (construct->parsed()) {
      ConfigLayer layer(construct, construct_config);
      layer.apply(std::string("theorem"), "theorem", ca.theorem);
      layer.apply(std::string("c"), "c", ca.c);
      layer.apply(std::string("q"), "q", ca.q);
      layer.apply(std::string("stages"), "stages", ca.stages);
      layer.apply(std::string("modulus-budget"), "modulus_budget", ca.modulus_budget);
      layer.apply(std::string("fill-policy"), "fill_policy", ca.fill);
      layer.apply(std::string("oscillation-target"), "oscillation_target", ca.oscillation_target);
      layer.apply(std::string("seed"), "seed", ca.seed);
      layer.apply(std::string("support"), "support", ca.support);
      layer.apply(std::string("out"), "out", ca.out);
      layer.apply(std::string("certificates"), "certificates", ca.certificates);
      return cmd_construct(ca);
    }
    if (validate->parsed()) return cmd_validate(v_skeleton, v_theorem, v_stage, v_certs);
    if (average->parsed()) {
      ConfigLayer layer(average, average_config);
      layer.apply(std::string("skeleton"), "skeleton", aa.skeleton);
      layer.apply(std::string("kind"), "kind", aa.kind);
      layer.apply(std::string("poly"), "poly", aa.poly);
      layer.apply(std::string("N"), "N", aa.n_list);
      layer.apply(std::string("r"), "r", aa.r_list);
      layer.apply(std::string("obs"), "obs", aa.obs);
      layer.apply(std::string("predict-stage"), "predict_stage", aa.predict_stage);
      layer.apply(std::string("format"), "format", aa.format);
      layer.apply(std::string("out"), "out", aa.out);
      if (aa.skeleton.empty()) throw ContractError("average: --skeleton is required");
      const std::string canonical = "average;" + aa.kind + ";" + aa.poly + ";" + aa.n_list + ";" +
                                    aa.r_list + ";" + aa.obs + ";" +
                                    std::to_string(aa.predict_stage);
      return cmd_average(aa, canonical);
    }
    if (oscillate->parsed())
      return cmd_oscillate(o_skeleton, o_kind, o_stages, o_r, o_out,
                           "oscillate;" + o_kind + ";" + o_stages + ";" + std::to_string(o_r));
    if (residues->parsed())
      return cmd_residues(res_poly, res_min, res_max, res_out,
                          "residues;" + res_poly + ";" + std::to_string(res_min) + ";" +
                              std::to_string(res_max));
    if (sturm->parsed())
      return cmd_sturmian(st_N, st_spec, st_radius, st_out,
                          "sturmian;" + st_spec + ";" + std::to_string(st_N) + ";" +
                              std::to_string(st_radius));
    if (acc->parsed()) {
      const int failures = acceptance::run_acceptance(std::cout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const BuildError& e) {
    nlohmann::json err{{"error", "build failed"}, {"condition", e.condition()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const ResourceError& e) {
    nlohmann::json err{{"error", "resource budget exceeded"}, {"budget", e.budget()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  } catch (const ContractError& e) {
    nlohmann::json err{{"error", "invalid input"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", "failure"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 4;
  }
  return 0;
}
