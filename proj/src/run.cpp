#include "tailbound/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "tailbound/bounds.hpp"
#include "tailbound/entropy.hpp"
#include "tailbound/error.hpp"
#include "tailbound/fields.hpp"
#include "tailbound/io.hpp"
#include "tailbound/parallel.hpp"
#include "tailbound/stats.hpp"
#include "tailbound/phispace.hpp"
#include "tailbound/young.hpp"

namespace tailbound {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"conjugate", "entropy", "bound", "sum-bound", "verify"};

json section_defaults(const std::string& name) {
  if (name == "phi")
    return {{"id", "quadratic"}, {"dim", 1},          {"B", nullptr},         {"path", nullptr},
            {"radius", nullptr}, {"lambda_max", 6.0}, {"lambda_count", 241}, {"replicates", 100000},
            {"seed", nullptr},   {"t_count", 16}};
  if (name == "conjugate")
    return {{"x_max", nullptr}, {"x_count", nullptr}, {"lambda_max", 10.0}, {"lambda_count", nullptr}};
  if (name == "entropy")
    return {{"kind", "zero"},    {"w", 0.0},          {"kappa", 0.0},        {"nu", 0.5},
            {"C", 1.0},          {"alpha", 1.0},      {"m_dim", 1},            {"c1", nullptr},
            {"c2", nullptr},     {"closed_form", false}, {"delta_hi", 1.0},  {"delta_lo", 0.05},
            {"delta_count", 40}, {"replicates", 20000}, {"seed", nullptr},   {"lag_count", 64},
            {"lambda_points", 96}, {"probe_resolution", 33}};
  if (name == "p_grid") return {{"count", 512}, {"lo", 1e-6}, {"hi", 1.0 - 1e-4}, {"refine", true}};
  if (name == "g_curve") return {{"lo", 0.01}, {"hi", 0.99}, {"count", 99}};
  if (name == "sum")
    return {{"n", 1}, {"n_cutoff", 100}, {"lambda_max", 20.0}, {"lambda_count", 2001}, {"mc_n", nullptr}};
  if (name == "field") return {{"model", "constant_gaussian"}, {"mu", 5.0}, {"dim", 1}, {"n", 100}};
  if (name == "mc")
    return {{"replicates", 100000}, {"seed", nullptr}, {"confidence", 0.99}, {"grid_resolution", 65},
            {"two_sided", false}};
  if (name == "lower") return {{"c", 2.0}, {"t0", 1.0}};
  return json::object();
}

json merged(const std::string& name, const json& user) {
  json out = section_defaults(name);
  if (user.is_null()) return out;
  if (!user.is_object()) throw Error(ErrorCode::config, "config section '" + name + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!out.contains(it.key()))
      throw Error(ErrorCode::config, "unknown key '" + name + "." + it.key() + "'");
    out[it.key()] = it.value();
  }
  return out;
}

template <typename T>
T get(const json& j, const std::string& section, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, "config value '" + section + "." + key + "' is missing or has the wrong type");
  }
}

double positive(const json& j, const std::string& section, const std::string& key) {
  const double v = get<double>(j, section, key);
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::config, "config value '" + section + "." + key + "' must be positive");
  return v;
}

std::size_t count_at_least(const json& j, const std::string& section, const std::string& key, std::size_t lo) {
  long long v = 0;
  try {
    v = j.at(key).get<long long>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, "config value '" + section + "." + key + "' must be an integer");
  }
  if (v < static_cast<long long>(lo))
    throw Error(ErrorCode::config, "config value '" + section + "." + key + "' must be >= " + std::to_string(lo));
  return static_cast<std::size_t>(v);
}

std::vector<double> geometric_desc(double hi, double lo, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * static_cast<double>(i) /
                                         static_cast<double>(count - 1));
  out.front() = hi;
  out.back() = lo;
  return out;
}

std::optional<std::uint64_t> seed_of(const json& j) {
  if (j.at("seed").is_null()) return std::nullopt;
  try {
    return j.at("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, "seed must be a nonnegative integer");
  }
}

// ------------------------------------------------------------- builders

struct Context {
  const json& cfg;
  unsigned threads;
  std::ostream& log;
};

FieldModel build_field(const json& f) {
  const auto id = get<std::string>(f, "field", "model");
  const auto dim = count_at_least(f, "field", "dim", 1);
  FieldModel m;
  if (id == "constant_gaussian")
    m = FieldModel::constant_gaussian(dim);
  else if (id == "constant_poisson")
    m = FieldModel::constant_poisson(positive(f, "field", "mu"), dim);
  else if (id == "compound_poisson")
    m = FieldModel::compound_poisson(positive(f, "field", "mu"), dim);
  else if (id == "empirical_process")
    m = FieldModel::empirical_process(count_at_least(f, "field", "n", 1), dim);
  else
    throw Error(ErrorCode::config, "unknown field model '" + id + "'");
  m.validate();
  return m;
}

std::uint64_t natural_seed(const Context& ctx, const json& section) {
  if (auto s = seed_of(section)) return *s;
  if (ctx.cfg.contains("mc"))
    if (auto s = seed_of(ctx.cfg.at("mc"))) return *s;
  throw Error(ErrorCode::config, "field-derived quantities need a seed (section seed or mc.seed)");
}

YoungFunction build_phi(const Context& ctx) {
  const json& p = ctx.cfg.at("phi");
  const auto id = get<std::string>(p, "phi", "id");
  YoungFunction phi = YoungFunction::quadratic();
  if (id == "quadratic") {
    const auto dim = count_at_least(p, "phi", "dim", 1);
    if (dim > 4) throw Error(ErrorCode::config, "phi.dim must be at most 4");
    phi = YoungFunction::quadratic(dim);
  } else if (id == "quadratic_form") {
    const auto rows = get<std::vector<std::vector<double>>>(p, "phi", "B");
    const auto d = static_cast<Eigen::Index>(rows.size());
    if (d < 1 || d > 4) throw Error(ErrorCode::config, "phi.B must be a square matrix of size 1..4");
    Eigen::MatrixXd b(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != d)
        throw Error(ErrorCode::config, "phi.B must be square");
      for (Eigen::Index j = 0; j < d; ++j) b(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    phi = YoungFunction::quadratic_form(b);
  } else if (id == "poissonian") {
    phi = YoungFunction::poissonian();
  } else if (id == "tabulated") {
    const auto path = get<std::string>(p, "phi", "path");
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open tabulated phi '" + path + "'");
    phi = read_tabulated_csv(in);
  } else if (id == "natural") {
    if (!ctx.cfg.contains("field")) throw Error(ErrorCode::config, "phi.id 'natural' needs a field section");
    const FieldModel model = build_field(ctx.cfg.at("field"));
    if (model.dimension != 1) throw Error(ErrorCode::config, "phi.id 'natural' supports 1-d fields only");
    const auto t_count = count_at_least(p, "phi", "t_count", 1);
    std::vector<double> ts;
    for (std::size_t k = 1; k <= t_count; ++k) ts.push_back(static_cast<double>(k) / static_cast<double>(t_count));
    const auto samples = field_point_samples(model, ts, count_at_least(p, "phi", "replicates", 100),
                                             natural_seed(ctx, p), ctx.threads);
    NaturalFunctionOptions opts;
    opts.threads = ctx.threads;
    const auto axis = linspace(0.0, positive(p, "phi", "lambda_max"), count_at_least(p, "phi", "lambda_count", 3));
    const auto est = natural_function_family(samples, {axis}, opts);
    phi = est.to_young();
    ctx.log << "natural phi: " << est.unreliable_points() << " Kramer-flagged lambda points, radius "
            << io::format_double(phi.radius()) << '\n';
  } else {
    throw Error(ErrorCode::config, "unknown phi id '" + id + "'");
  }
  if (!p.at("radius").is_null()) phi = phi.with_radius(positive(p, "phi", "radius"));
  return phi;
}

ConjugateTable build_conjugate(const Context& ctx, const YoungFunction& phi, double default_x_max) {
  const json& c = ctx.cfg.at("conjugate");
  const double x_max = c.at("x_max").is_null() ? default_x_max : positive(c, "conjugate", "x_max");
  const bool multi = phi.dimension() > 1;
  const std::size_t x_count =
      c.at("x_count").is_null() ? (multi ? 61 : 4001) : count_at_least(c, "conjugate", "x_count", 2);
  LambdaGridSpec spec;
  spec.max_lambda = positive(c, "conjugate", "lambda_max");
  spec.count = c.at("lambda_count").is_null() ? (multi ? 601 : 10001)
                                              : count_at_least(c, "conjugate", "lambda_count", 3);
  const auto xs = linspace(0.0, x_max, x_count);
  if (multi) return conjugate_nd(phi, std::vector<std::vector<double>>(phi.dimension(), xs), spec);
  return conjugate_1d(phi, xs, spec);
}

struct EntropySetup {
  EntropyFunction m = EntropyFunction::zero();
  std::optional<EntropyProfile> profile;
  std::vector<double> delta;
};

EntropySetup build_entropy(const Context& ctx, const std::optional<YoungFunction>& phi, std::size_t summands) {
  const json& e = ctx.cfg.at("entropy");
  const auto kind = get<std::string>(e, "entropy", "kind");
  EntropySetup s;
  const double hi = positive(e, "entropy", "delta_hi");
  const double lo = positive(e, "entropy", "delta_lo");
  if (!(lo < hi)) throw Error(ErrorCode::config, "entropy.delta_lo must be below entropy.delta_hi");
  s.delta = geometric_desc(hi, lo, count_at_least(e, "entropy", "delta_count", 2));
  EntropyOptions eo;
  eo.probe_resolution = count_at_least(e, "entropy", "probe_resolution", 2);

  if (kind == "zero") {
    s.m = EntropyFunction::zero();
  } else if (kind == "log") {
    s.m = EntropyFunction::log_law(get<double>(e, "entropy", "w"), get<double>(e, "entropy", "kappa"));
  } else if (kind == "power") {
    s.m = EntropyFunction::power_law(get<double>(e, "entropy", "nu"));
  } else if (kind == "holder") {
    const double c = positive(e, "entropy", "C");
    const double alpha = positive(e, "entropy", "alpha");
    const auto dim = count_at_least(e, "entropy", "m_dim", 1);
    s.m = EntropyFunction::holder(c, alpha, dim);
    s.profile = entropy_profile(HolderModel(c, alpha, dim), s.delta, eo);
  } else if (kind == "empirical") {
    if (!phi) throw Error(ErrorCode::config, "empirical entropy needs a phi section");
    if (!ctx.cfg.contains("field")) throw Error(ErrorCode::config, "empirical entropy needs a field section");
    const FieldModel model = build_field(ctx.cfg.at("field"));
    IncrementNormOptions io_opts;
    io_opts.norm.lambda_points = count_at_least(e, "entropy", "lambda_points", 2);
    io_opts.summands = summands;
    const auto reps = count_at_least(e, "entropy", "replicates", 10000);
    const auto seed = natural_seed(ctx, e);
    if (model.kind == FieldModel::Kind::compound_poisson && model.dimension == 1) {
      const LagIncrementModel inc(model, *phi, reps, seed, count_at_least(e, "entropy", "lag_count", 2),
                                  1.0 / 131072.0, io_opts);
      s.profile = entropy_profile(inc, s.delta, eo);
    } else {
      const EmpiricalIncrementModel inc(model, *phi, reps, seed, io_opts);
      s.profile = entropy_profile(inc, s.delta, eo);
    }
    s.m = EntropyFunction::from_profile(*s.profile);
  } else {
    throw Error(ErrorCode::config, "unknown entropy kind '" + kind + "'");
  }
  return s;
}

PGridSpec build_pgrid(const json& cfg) {
  const json& p = cfg.at("p_grid");
  PGridSpec s;
  s.count = count_at_least(p, "p_grid", "count", 3);
  s.lo = get<double>(p, "p_grid", "lo");
  s.hi = get<double>(p, "p_grid", "hi");
  s.refine = get<bool>(p, "p_grid", "refine");
  if (!(s.lo > 0.0 && s.lo < s.hi && s.hi < 1.0)) throw Error(ErrorCode::config, "p_grid needs 0 < lo < hi < 1");
  return s;
}

std::vector<double> u_grid(const json& cfg) {
  if (!cfg.contains("u_grid")) throw Error(ErrorCode::config, "u_grid is required for this command");
  std::vector<double> u;
  try {
    u = cfg.at("u_grid").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, "u_grid must be an array of numbers");
  }
  if (u.empty()) throw Error(ErrorCode::config, "u_grid must not be empty");
  for (double v : u)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::config, "u_grid values must be finite and >= 0");
  return u;
}

std::optional<ClosedFormKind> closed_kind(const json& e) {
  if (!get<bool>(e, "entropy", "closed_form")) return std::nullopt;
  const auto kind = get<std::string>(e, "entropy", "kind");
  if (kind == "log") return ClosedFormKind::log_law;
  if (kind == "power") return ClosedFormKind::power_law;
  throw Error(ErrorCode::config, "entropy.closed_form needs entropy.kind 'log' or 'power'");
}

ClosedBoundParams closed_params(const json& e) {
  ClosedBoundParams p;
  p.w = get<double>(e, "entropy", "w");
  p.kappa = get<double>(e, "entropy", "kappa");
  p.nu = get<double>(e, "entropy", "nu");
  if (!e.at("c1").is_null()) p.c1 = get<double>(e, "entropy", "c1");
  if (!e.at("c2").is_null()) p.c2 = get<double>(e, "entropy", "c2");
  return p;
}

struct BoundsOutcome {
  std::vector<BoundReport> reports;
  std::optional<SumEnvelope> envelope;
};

BoundsOutcome compute_bounds(const Context& ctx, bool sums) {
  const auto us = u_grid(ctx.cfg);
  const double u_max = *std::max_element(us.begin(), us.end());
  const YoungFunction phi = build_phi(ctx);
  if (phi.dimension() != 1) throw Error(ErrorCode::config, "bound commands need a 1-d phi");
  const PGridSpec pspec = build_pgrid(ctx.cfg);
  BoundsOutcome out;

  if (!sums) {
    const ConjugateTable conj = build_conjugate(ctx, phi, std::max(u_max, 1.0));
    const EntropySetup es = build_entropy(ctx, phi, 1);
    const GFunction g = make_g(es.m);
    const auto ck = closed_kind(ctx.cfg.at("entropy"));
    for (double u : us) {
      BoundReport r = theorem_a_bound(conj, g, u, pspec);
      if (ck && u > 0.0) {
        try {
          r.closed_form = example_closed_bounds(*ck, closed_params(ctx.cfg.at("entropy")), conj, u).bound;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::domain) throw;
        }
      }
      out.reports.push_back(std::move(r));
    }
    return out;
  }

  const json& s = ctx.cfg.at("sum");
  std::optional<std::size_t> n;
  if (s.at("n").is_string()) {
    if (s.at("n").get<std::string>() != "uniform")
      throw Error(ErrorCode::config, "sum.n must be a positive integer or \"uniform\"");
  } else {
    n = count_at_least(s, "sum", "n", 1);
  }
  const auto lambda = linspace(0.0, positive(s, "sum", "lambda_max"), count_at_least(s, "sum", "lambda_count", 2));
  SumEnvelope env = sum_envelope(phi, n, lambda, count_at_least(s, "sum", "n_cutoff", 2));
  std::size_t summands = n.value_or(1);
  if (!n && !env.monotone_certified && get<std::string>(ctx.cfg.at("entropy"), "entropy", "kind") == "empirical")
    throw Error(ErrorCode::config, "empirical entropy needs a fixed sum.n or a certified uniform envelope");
  const EntropySetup es = build_entropy(ctx, env.as_young(), summands);
  const GFunction g = make_g(es.m);
  LambdaGridSpec lspec;
  lspec.max_lambda = positive(ctx.cfg.at("conjugate"), "conjugate", "lambda_max");
  for (double u : us) out.reports.push_back(theorem_b_bound(env, g, u, pspec, lspec));
  out.envelope = std::move(env);
  return out;
}

// -------------------------------------------------------------- outputs

class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto path = dir_ / name;
    result_.files.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
  }

 private:
  std::filesystem::path dir_;
  RunResult& result_;
};

void write_json(OutputSet& outputs, const std::string& name, const json& doc) {
  outputs.write(name, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

int command_conjugate(const Context& ctx, OutputSet& outputs) {
  const YoungFunction phi = build_phi(ctx);
  const ConjugateTable conj = build_conjugate(ctx, phi, 5.0);
  outputs.write("conjugate.csv", [&](std::ostream& o) { io::write_conjugate_csv(o, conj); });
  return 0;
}

int command_entropy(const Context& ctx, OutputSet& outputs) {
  std::optional<YoungFunction> phi;
  if (get<std::string>(ctx.cfg.at("entropy"), "entropy", "kind") == "empirical") phi = build_phi(ctx);
  const EntropySetup es = build_entropy(ctx, phi, 1);
  const GFunction g = make_g(es.m);
  const json& gc = ctx.cfg.at("g_curve");
  const double lo = get<double>(gc, "g_curve", "lo");
  const double hi = get<double>(gc, "g_curve", "hi");
  if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw Error(ErrorCode::config, "g_curve needs 0 < lo < hi < 1");
  const auto ps = linspace(lo, hi, count_at_least(gc, "g_curve", "count", 2));
  std::vector<double> gs;
  for (double p : ps) gs.push_back(g(p));
  outputs.write("entropy_profile.csv", [&](std::ostream& o) {
    if (es.profile)
      io::write_profile_csv(o, *es.profile);
    else
      io::write_entropy_csv(o, es.m, es.delta);
  });
  outputs.write("g_curve.csv", [&](std::ostream& o) { io::write_g_curve_csv(o, ps, gs); });
  return 0;
}

json envelope_json(const SumEnvelope& env) {
  json j;
  j["n"] = env.n ? json(*env.n) : json("uniform");
  j["n_cutoff"] = env.n_cutoff;
  j["monotone_certified"] = env.monotone_certified;
  return j;
}

int command_bound(const Context& ctx, OutputSet& outputs, bool sums) {
  const BoundsOutcome b = compute_bounds(ctx, sums);
  outputs.write("bounds.csv", [&](std::ostream& o) { io::write_bounds_csv(o, b.reports); });
  json doc;
  doc["config"] = ctx.cfg;
  doc["reports"] = json::array();
  for (const auto& r : b.reports) doc["reports"].push_back(io::to_json(r));
  if (b.envelope) doc["envelope"] = envelope_json(*b.envelope);
  write_json(outputs, "bounds.json", doc);
  return 0;
}

int command_verify(const Context& ctx, OutputSet& outputs) {
  const json& mcj = ctx.cfg.at("mc");
  const auto seed = seed_of(mcj);
  if (!seed) throw Error(ErrorCode::config, "verify needs mc.seed");
  const FieldModel model = build_field(ctx.cfg.at("field"));
  const bool sums = ctx.cfg.contains("sum");
  const bool two_sided = get<bool>(mcj, "mc", "two_sided");
  if (two_sided && get<std::string>(ctx.cfg.at("phi"), "phi", "id") == "natural")
    throw Error(ErrorCode::config, "two-sided verification needs an even analytic phi");

  BoundsOutcome b = compute_bounds(ctx, sums);
  if (two_sided)
    for (auto& r : b.reports) r.upper = abs_value_bound(r, r);

  McOptions mo;
  mo.u_grid = u_grid(ctx.cfg);
  mo.replicates = count_at_least(mcj, "mc", "replicates", 1000);
  mo.grid_resolution = count_at_least(mcj, "mc", "grid_resolution", 2);
  mo.confidence = get<double>(mcj, "mc", "confidence");
  if (!(mo.confidence > 0.0 && mo.confidence < 1.0)) throw Error(ErrorCode::config, "mc.confidence must be in (0,1)");
  mo.seed = *seed;
  mo.threads = ctx.threads;
  mo.two_sided = two_sided;
  std::size_t summands = 1;
  if (sums) {
    const json& s = ctx.cfg.at("sum");
    if (!s.at("mc_n").is_null())
      summands = count_at_least(s, "sum", "mc_n", 1);
    else if (b.envelope && b.envelope->n)
      summands = *b.envelope->n;
    else
      throw Error(ErrorCode::config, "uniform sum verification needs sum.mc_n");
  }
  const McReport mc = mc_sum_sup_tail(model, summands, mo);

  std::optional<SampleMatrix> point;
  double t0 = 1.0;
  double c = 2.0;
  if (ctx.cfg.contains("lower")) {
    const json& l = ctx.cfg.at("lower");
    c = positive(l, "lower", "c");
    t0 = get<double>(l, "lower", "t0");
    if (!(t0 >= 0.0 && t0 <= 1.0)) throw Error(ErrorCode::config, "lower.t0 must lie in [0,1]");
    point = field_point_samples(model, {t0}, mo.replicates, *seed, ctx.threads).front();
  }

  std::vector<io::Verdict> verdicts;
  bool all_pass = true;
  for (std::size_t i = 0; i < b.reports.size(); ++i) {
    BoundReport& r = b.reports[i];
    r.mc = McEstimate{mc.estimate[i], mc.ci_lo[i], mc.ci_hi[i]};
    io::Verdict v{r.u, mc.estimate[i], mc.ci_lo[i], mc.ci_hi[i], r.upper, std::nullopt, false};
    v.pass = mc.ci_hi[i] <= r.upper;
    if (point) {
      const auto col = point->column_values(0);
      const auto mom = stats::moments(col);
      SandwichInput in{*r.mc, mom.variance, col.size(), std::nullopt};
      const auto sw = lower_bound_sandwich(in, r.u, c, r);
      r.lower = sw.lower;
      v.lower = sw.lower;
      v.pass = v.pass && sw.lower <= mc.ci_hi[i] && !sw.inverted;
    }
    all_pass = all_pass && v.pass;
    verdicts.push_back(v);
  }

  outputs.write("bounds.csv", [&](std::ostream& o) { io::write_bounds_csv(o, b.reports); });
  outputs.write("verdict.csv", [&](std::ostream& o) { io::write_verdict_csv(o, verdicts); });
  json doc;
  doc["config"] = ctx.cfg;
  doc["reports"] = json::array();
  for (const auto& r : b.reports) doc["reports"].push_back(io::to_json(r));
  doc["mc"] = io::to_json(mc);
  if (b.envelope) doc["envelope"] = envelope_json(*b.envelope);
  doc["verdict"] = all_pass ? "PASS" : "FAIL";
  write_json(outputs, "verify.json", doc);
  for (const auto& v : verdicts)
    ctx.log << "u=" << io::format_double(v.u) << " mc_ci_hi=" << io::format_double(v.mc_ci_hi)
            << " upper=" << io::format_double(v.upper) << ' ' << (v.pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace

bool is_command(const std::string& command) {
  return std::find(kCommands.begin(), kCommands.end(), command) != kCommands.end();
}

json resolve_config(const std::string& command, const json& config) {
  if (!is_command(command)) throw Error(ErrorCode::config, "unknown command '" + command + "'");
  if (!config.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
  static const std::set<std::string> top = {"command", "phi",   "conjugate", "entropy", "p_grid", "g_curve",
                                            "u_grid",  "sum",   "field",     "mc",      "lower"};
  for (auto it = config.begin(); it != config.end(); ++it)
    if (!top.contains(it.key())) throw Error(ErrorCode::config, "unknown config key '" + it.key() + "'");
  if (config.contains("command") && config.at("command") != command)
    throw Error(ErrorCode::config, "config command does not match the requested command '" + command + "'");

  json out;
  out["command"] = command;
  for (const char* name : {"phi", "conjugate", "entropy", "p_grid", "g_curve", "mc"})
    out[name] = merged(name, config.contains(name) ? config.at(name) : json());
  const bool needs_field = command == "verify" || config.contains("field");
  if (needs_field) out["field"] = merged("field", config.contains("field") ? config.at("field") : json());
  if (command == "sum-bound" || config.contains("sum"))
    out["sum"] = merged("sum", config.contains("sum") ? config.at("sum") : json());
  if (config.contains("lower")) out["lower"] = merged("lower", config.at("lower"));
  if (config.contains("u_grid")) out["u_grid"] = config.at("u_grid");
  if (command == "bound" || command == "sum-bound" || command == "verify") u_grid(out);
  return out;
}

RunResult run(const std::string& command, const json& config, const RunOptions& options, std::ostream& log) {
  RunResult result;
  try {
    const json cfg = resolve_config(command, config);
    const Context ctx{cfg, options.threads > 0 ? options.threads : default_thread_count(), log};
    OutputSet outputs(options.out_dir, result);
    if (command == "conjugate")
      result.status = command_conjugate(ctx, outputs);
    else if (command == "entropy")
      result.status = command_entropy(ctx, outputs);
    else if (command == "bound")
      result.status = command_bound(ctx, outputs, false);
    else if (command == "sum-bound")
      result.status = command_bound(ctx, outputs, true);
    else
      result.status = command_verify(ctx, outputs);
    return result;
  } catch (const Error& e) {
    result.status = exit_status(e.code());
    result.error_line = "error[" + std::string(code_name(e.code())) + "]: " + e.what();
  } catch (const std::exception& e) {
    result.status = 1;
    result.error_line = std::string("error[INTERNAL]: ") + e.what();
  }
  for (const auto& f : result.files) {
    std::error_code ec;
    std::filesystem::remove(f, ec);
  }
  result.files.clear();
  return result;
}

RunResult run_file(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
                   std::ostream& log) {
  std::ifstream in(config_path);
  if (!in) {
    RunResult r;
    r.status = exit_status(ErrorCode::io);
    r.error_line = "error[IO]: cannot open config '" + config_path.string() + "'";
    return r;
  }
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    RunResult r;
    r.status = exit_status(ErrorCode::config);
    r.error_line = std::string("error[CONFIG]: malformed JSON config: ") + e.what();
    return r;
  }
  return run(command, config, options, log);
}

}  // namespace tailbound
