#include "specsolve/harness.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace specsolve {

using msuq::ConfigError;
using nlohmann::json;

namespace {

// Object view that records which keys were read and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  // Marks the key as known; true when it is present and not null.
  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  bool explicit_null(const char* key) const { return j_.contains(key) && j_.at(key).is_null(); }

  const json& raw(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key) + ": missing");
    return j_.at(key);
  }

  template <class T>
  T req(const char* key) {
    return convert<T>(raw(key), path(key));
  }

  template <class T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(j_.at(key), path(key));
  }

  Section sub(const char* key) { return Section(raw(key), path(key)); }

  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path(it.key().c_str()) + ": unknown key");
  }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(where + ": expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    }
    return v.get<T>();
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> list_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Section::convert<T>(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Integer or per-axis array.
std::array<Index, 2> axes(const json& v, int dim, const std::string& where) {
  std::array<Index, 2> out{1, 1};
  if (v.is_number()) {
    const auto n = Section::convert<Index>(v, where);
    out[0] = n;
    if (dim == 2) out[1] = n;
  } else {
    const auto list = list_of<Index>(v, where);
    if (static_cast<int>(list.size()) != dim) throw ConfigError(where + ": expected " + std::to_string(dim) + " entries");
    for (int a = 0; a < dim; ++a) out[static_cast<std::size_t>(a)] = list[static_cast<std::size_t>(a)];
  }
  for (int a = 0; a < dim; ++a)
    if (out[static_cast<std::size_t>(a)] < 2) throw ConfigError(where + ": need at least 2 cells per axis");
  return out;
}

double coord(const json& v, int axis, int dim, const std::string& where) {
  if (v.is_number()) return Section::convert<double>(v, where);
  const auto list = list_of<double>(v, where);
  if (static_cast<int>(list.size()) != dim) throw ConfigError(where + ": expected " + std::to_string(dim) + " entries");
  return list[static_cast<std::size_t>(axis)];
}

bool integral(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

void check_nested(const std::array<Index, 2>& coarse, const std::array<Index, 2>& fine, int dim, const std::string& where) {
  for (int a = 0; a < dim; ++a) {
    const auto ac = coarse[static_cast<std::size_t>(a)];
    const auto af = fine[static_cast<std::size_t>(a)];
    if (af % ac != 0 || af / ac < 2)
      throw ConfigError(where + ": fine cells " + std::to_string(af) + " are not an integer multiple (>= 2) of coarse cells " +
                        std::to_string(ac));
  }
}

msuq::BasePotential parse_v0(Section v) {
  const auto kind = v.req<std::string>("kind");
  msuq::BasePotential b;
  if (kind == "constant") {
    b = msuq::BasePotential::constant_value(v.get("value", 1.0));
  } else if (kind == "double_well") {
    b = msuq::BasePotential::double_well_1d();
  } else if (kind == "checkerboard") {
    b = msuq::BasePotential::checkerboard_2d(v.get("square_size", 0.0625), v.get("lo", 0.0), v.get("hi", 2.0));
    if (!(b.square_size > 0.0)) throw ConfigError(v.path("square_size") + ": must be positive");
  } else {
    throw ConfigError(v.path("kind") + ": unknown base potential '" + kind + "' (expected constant | double_well | checkerboard)");
  }
  v.finish();
  return b;
}

void check_checkerboard(const msuq::UqConfig& uq) {
  const auto& v0 = uq.potential.v0;
  if (v0.kind != msuq::BaseKind::checkerboard) return;
  if (uq.mesh.dim != 2) throw ConfigError("potential.v0: checkerboard requires mesh.dim = 2");
  for (int a = 0; a < 2; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double lo = uq.mesh.domain.lo[ua];
    const double len = uq.mesh.domain.hi[ua] - lo;
    const double squares = len / v0.square_size;
    if (!integral(squares) || std::lround(squares) % 2 != 0)
      throw ConfigError("potential.v0.square_size: domain length must be an even multiple of the square size");
    if (!integral(lo / v0.square_size))
      throw ConfigError("potential.v0.square_size: domain origin must lie on a square boundary");
    const double per_square = v0.square_size / (len / static_cast<double>(uq.mesh.fine[ua]));
    if (!integral(per_square))
      throw ConfigError("mesh.fine: fine mesh does not align with the checkerboard squares");
  }
}

msuq::ScalarField parse_functional(Section f, int dim) {
  const auto kind = f.req<std::string>("kind");
  msuq::ScalarField g;
  if (kind == "constant") {
    const double c = f.get("value", 1.0);
    g = [c](const msuq::Point&) { return c; };
  } else if (kind == "gaussian") {
    const auto& cj = f.raw("center");
    const double cx = coord(cj, 0, dim, f.path("center"));
    const double cy = dim == 2 ? coord(cj, 1, dim, f.path("center")) : 0.0;
    const double width = f.req<double>("width");
    const double amp = f.get("amplitude", 1.0);
    if (!(width > 0.0)) throw ConfigError(f.path("width") + ": must be positive");
    g = [=](const msuq::Point& x) {
      const double dx = x[0] - cx;
      const double dy = dim == 2 ? x[1] - cy : 0.0;
      return amp * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    };
  } else {
    throw ConfigError(f.path("kind") + ": unknown functional '" + kind + "' (expected constant | gaussian)");
  }
  f.finish();
  return g;
}

std::vector<std::array<Index, 2>> parse_levels(const json& v, int dim, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<std::array<Index, 2>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(axes(v[i], dim, where + "[" + std::to_string(i) + "]"));
  return out;
}

void parse_params(Section p, ExperimentConfig& cfg) {
  const int dim = cfg.uq.mesh.dim;
  switch (cfg.study) {
    case Study::solve_evp:
      cfg.coarse_levels = parse_levels(p.raw("coarse_levels"), dim, p.path("coarse_levels"));
      cfg.coarse_fem = p.get("coarse_fem", true);
      if (p.has("omega")) cfg.omega = list_of<double>(p.raw("omega"), p.path("omega"));
      break;
    case Study::uq:
      if (p.has("reference")) cfg.reference = list_of<double>(p.raw("reference"), p.path("reference"));
      break;
    case Study::h_study:
      cfg.coarse_levels = parse_levels(p.raw("coarse_levels"), dim, p.path("coarse_levels"));
      break;
    case Study::s_study:
      cfg.s_values = list_of<std::size_t>(p.raw("s_values"), p.path("s_values"));
      break;
    case Study::n_study: {
      cfg.n_values = list_of<std::uint64_t>(p.raw("n_values"), p.path("n_values"));
      if (p.has("samplers")) {
        cfg.n_samplers.clear();
        for (const auto& name : list_of<std::string>(p.raw("samplers"), p.path("samplers")))
          cfg.n_samplers.push_back(msuq::sampler_kind_from_string(name));
      }
      cfg.reference_n = p.get<std::uint64_t>("reference_n", 0);
      if (p.has("reference")) cfg.reference = list_of<double>(p.raw("reference"), p.path("reference"));
      if (cfg.reference_n == 0 && cfg.reference.empty())
        throw ConfigError(p.path("reference_n") + ": n-study needs reference_n or reference");
      break;
    }
    case Study::q_study:
      cfg.q_values = list_of<Index>(p.raw("q_values"), p.path("q_values"));
      break;
    case Study::localization:
      if (p.has("omega")) cfg.omega = list_of<double>(p.raw("omega"), p.path("omega"));
      cfg.ipr = p.get("ipr", true);
      break;
  }
  p.finish();
}

}  // namespace

std::string to_string(Study study) {
  switch (study) {
    case Study::solve_evp: return "solve-evp";
    case Study::uq: return "uq";
    case Study::h_study: return "h-study";
    case Study::s_study: return "s-study";
    case Study::n_study: return "n-study";
    case Study::q_study: return "q-study";
    case Study::localization: return "localization";
  }
  return "unknown";
}

Study study_from_string(const std::string& name) {
  for (auto s : {Study::solve_evp, Study::uq, Study::h_study, Study::s_study, Study::n_study, Study::q_study,
                 Study::localization})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown study '" + name + "'");
}

ExperimentConfig parse_config(const json& doc, Study study) {
  Section top(doc, "");
  ExperimentConfig cfg;
  cfg.study = study;
  cfg.source = doc;
  if (top.has("study")) {
    const auto named = study_from_string(top.req<std::string>("study"));
    if (named != study)
      throw ConfigError("study: config is for '" + to_string(named) + "' but the command is '" + to_string(study) + "'");
  }

  auto& uq = cfg.uq;
  uq.eps = top.get("eps", 1.0);
  if (!(uq.eps > 0.0)) throw ConfigError("eps: must be positive");
  uq.k = top.get<Index>("k", 1);
  if (uq.k < 1) throw ConfigError("k: must be at least 1");

  {
    auto m = top.sub("mesh");
    uq.mesh.dim = m.get("dim", 1);
    const int dim = uq.mesh.dim;
    if (dim != 1 && dim != 2) throw ConfigError("mesh.dim: must be 1 or 2");
    const auto& lo = m.raw("lo");
    const auto& hi = m.raw("hi");
    for (int a = 0; a < dim; ++a) {
      uq.mesh.domain.lo[static_cast<std::size_t>(a)] = coord(lo, a, dim, "mesh.lo");
      uq.mesh.domain.hi[static_cast<std::size_t>(a)] = coord(hi, a, dim, "mesh.hi");
      if (!(uq.mesh.domain.hi[static_cast<std::size_t>(a)] > uq.mesh.domain.lo[static_cast<std::size_t>(a)]))
        throw ConfigError("mesh: hi must exceed lo on every axis");
    }
    uq.mesh.fine = axes(m.raw("fine"), dim, "mesh.fine");
    if (m.has("coarse")) {
      uq.mesh.coarse = axes(m.raw("coarse"), dim, "mesh.coarse");
      check_nested(uq.mesh.coarse, uq.mesh.fine, dim, "mesh.coarse");
    } else {
      uq.mesh.coarse = uq.mesh.fine;
      for (int a = 0; a < dim; ++a) uq.mesh.coarse[static_cast<std::size_t>(a)] /= 2;
    }
    m.finish();
  }

  {
    auto p = top.sub("potential");
    uq.potential.v0 = parse_v0(p.sub("v0"));
    uq.potential.form = msuq::mode_form_from_string(p.get<std::string>("form", uq.mesh.dim == 2 ? "power_2d" : "rational_1d"));
    uq.potential.s = p.get<std::size_t>("s", 0);
    uq.potential.sigma = p.get("sigma", 1.0);
    uq.potential.q = p.get("q", 2.0);
    if ((uq.potential.form == msuq::ModeForm::power_2d) != (uq.mesh.dim == 2))
      throw ConfigError("potential.form: power_2d is the only 2D form and cannot be used in 1D");
    p.finish();
  }
  check_checkerboard(uq);

  if (top.has("sampler")) {
    auto s = top.sub("sampler");
    uq.sampler.kind = msuq::sampler_kind_from_string(s.get<std::string>("kind", "qmc"));
    if (uq.sampler.kind == msuq::SamplerKind::online) throw ConfigError("sampler.kind: 'online' is only valid for offline.sampler");
    uq.sampler.n = s.get<std::uint64_t>("n", uq.sampler.n);
    uq.sampler.shifts = s.get<std::size_t>("shifts", uq.sampler.shifts);
    uq.sampler.seed = s.get<std::uint64_t>("seed", uq.sampler.seed);
    uq.sampler.weight_decay = s.get("weight_decay", uq.sampler.weight_decay);
    if (s.has("generating_vector_file")) {
      const auto path = s.req<std::string>("generating_vector_file");
      auto [n, z] = msuq::read_generating_vector(path);
      if (n != uq.sampler.n) throw ConfigError("sampler.generating_vector_file: N = " + std::to_string(n) + " but sampler.n = " +
                                               std::to_string(uq.sampler.n));
      uq.sampler.generating_vector = std::move(z);
    }
    if (uq.sampler.n < 1) throw ConfigError("sampler.n: must be positive");
    if (uq.sampler.shifts < 1) throw ConfigError("sampler.shifts: must be positive");
    s.finish();
  }

  const char* default_solver = study == Study::localization ? "msfem-pod" : "msfem";
  uq.solver = msuq::solver_kind_from_string(top.get<std::string>("solver", default_solver));

  if (top.has("offline")) {
    auto o = top.sub("offline");
    uq.offline.q = o.get<Index>("q", uq.offline.q);
    if (o.has("m")) uq.offline.m = o.req<Index>("m");
    else if (o.explicit_null("m")) uq.offline.m.reset();  // null selects the rho rule
    uq.offline.rho = o.get("rho", uq.offline.rho);
    uq.offline.sampler = msuq::sampler_kind_from_string(o.get<std::string>("sampler", "qmc"));
    uq.offline.seed = o.get<std::uint64_t>("seed", uq.offline.seed);
    if (uq.offline.q < 2) throw ConfigError("offline.q: need at least 2 snapshots");
    if (uq.offline.m && *uq.offline.m < 0) throw ConfigError("offline.m: must be non-negative");
    if (!(uq.offline.rho >= 0.0 && uq.offline.rho < 1.0)) throw ConfigError("offline.rho: must lie in [0, 1)");
    o.finish();
  }

  if (top.has("functional")) uq.functional = parse_functional(top.sub("functional"), uq.mesh.dim);

  if (top.has("admissibility")) {
    auto a = top.sub("admissibility");
    uq.admissibility_cap = a.get("cap", uq.admissibility_cap);
    uq.admissibility_hard_fail = a.get("hard_fail", false);
    a.finish();
  }

  if (top.has("truncation")) uq.truncation = top.req<std::size_t>("truncation");
  uq.keep_samples = top.get("keep_samples", false);
  uq.threads = top.get<unsigned>("threads", 1);
  uq.basis.truncation = top.get("basis_truncation", 0.0);

  if (top.has("emit")) {
    auto e = top.sub("emit");
    cfg.emit.csv = e.get("csv", cfg.emit.csv);
    cfg.emit.fields = e.get("fields", cfg.emit.fields);
    cfg.emit.json_summary = e.get("json_summary", cfg.emit.json_summary);
    cfg.emit.pod_modes = e.get("pod_modes", cfg.emit.pod_modes);
    e.finish();
  }
  if (top.has("out")) cfg.out_dir = top.req<std::string>("out");

  if (top.has("params")) {
    parse_params(top.sub("params"), cfg);
  } else {
    if (study != Study::uq && study != Study::localization)
      throw ConfigError("params: required for study '" + to_string(study) + "'");
  }
  top.finish();

  for (const auto& level : cfg.coarse_levels) check_nested(level, uq.mesh.fine, uq.mesh.dim, "params.coarse_levels");
  for (auto s : cfg.s_values)
    if (s > uq.potential.s) throw ConfigError("params.s_values: entries must not exceed potential.s");
  if (!cfg.omega.empty() && cfg.omega.size() != uq.potential.s)
    throw ConfigError("params.omega: expected " + std::to_string(uq.potential.s) + " components");
  if (!cfg.reference.empty() && static_cast<Index>(cfg.reference.size()) != uq.k)
    throw ConfigError("params.reference: expected k = " + std::to_string(uq.k) + " values");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, Study study) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc, study);
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& overrides, const char* env_threads) {
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.seed) cfg.uq.sampler.seed = *overrides.seed;
  if (overrides.threads) {
    cfg.uq.threads = *overrides.threads;
  } else if (env_threads && *env_threads) {
    std::istringstream is(env_threads);
    unsigned n = 0;
    if (!(is >> n) || !is.eof()) throw ConfigError(std::string("SPECSOLVE_THREADS: not a thread count: '") + env_threads + "'");
    cfg.uq.threads = n;
  }
  if (cfg.uq.threads == 0) throw ConfigError("threads: must be at least 1");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const msuq::AdmissibilityError*>(&e)) return 4;
  if (dynamic_cast<const msuq::NumericalError*>(&e)) return 3;
  if (dynamic_cast<const msuq::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 2;
  return 3;
}

}  // namespace specsolve
