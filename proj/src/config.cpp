#include "qflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qflow/errors.hpp"

namespace qflow {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

double parse_double(const std::string& s, int line, const std::string& key) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a number", line);
  }
}

long parse_long(const std::string& s, int line, const std::string& key) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer", line);
  return v;
}

bool parse_bool(const std::string& s, int line, const std::string& key) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean", line);
}

struct ModeRow {
  TrigMode mode;
  int line = 0;
};

TrigMode parse_mode(const std::vector<std::string>& value, int line,
                    const std::string& key) {
  TrigMode m;
  size_t pos = 0;
  if (pos < value.size() && (value[pos] == "cos" || value[pos] == "sin")) {
    m.is_sin = value[pos] == "sin";
    ++pos;
  }
  if (value.size() < pos + 2)
    throw ConfigError("key '" + key + "': mode row needs frequencies and an amplitude",
                      line);
  const size_t nfreq = value.size() - pos - 1;
  if (nfreq % 2 != 0)
    throw ConfigError("key '" + key + "': frequency vector must have 2n entries", line);
  m.freq.resize(static_cast<Eigen::Index>(nfreq));
  for (size_t q = 0; q < nfreq; ++q) {
    const long f = parse_long(value[pos + q], line, key);
    if (std::abs(f) > 3)
      throw ConfigError("key '" + key + "': |frequency| must be <= 3", line);
    m.freq[static_cast<Eigen::Index>(q)] = static_cast<int>(f);
  }
  m.amp = parse_double(value.back(), line, key);
  return m;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::vector<ModeRow> rho_rows, ustar_rows, ubar_rows, psi_rows;
  bool ubar_zero = false;
  bool have_psi = false;

  const std::set<std::string> known_scalars = {
      "n", "N", "k", "l", "a", "toy", "cfl", "stop_osc", "t_max",
      "max_steps", "snapshot_every", "seed", "out", "psi"};
  const std::set<std::string> known_lists = {"rho", "u_star", "u_bar", "psi_mode"};

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() < 3 || toks[1] != "=")
      throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
    const std::string& key = toks[0];
    const std::vector<std::string> value(toks.begin() + 2, toks.end());

    if (known_lists.count(key)) {
      if (key == "u_bar" && value.size() == 1 && value[0] == "zero") {
        if (ubar_zero || !ubar_rows.empty())
          throw ConfigError("'u_bar = zero' must be the only u_bar row", lineno);
        ubar_zero = true;
        continue;
      }
      ModeRow row{parse_mode(value, lineno, key), lineno};
      if (key == "rho") rho_rows.push_back(row);
      else if (key == "u_star") ustar_rows.push_back(row);
      else if (key == "psi_mode") psi_rows.push_back(row);
      else {
        if (ubar_zero)
          throw ConfigError("'u_bar = zero' must be the only u_bar row", lineno);
        ubar_rows.push_back(row);
      }
      continue;
    }

    if (!known_scalars.count(key)) throw ConfigError("unknown key '" + key + "'", lineno);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", lineno);

    if (key == "psi") {
      have_psi = true;
      const std::string& kind = value[0];
      if (kind == "constant" || kind == "shift" || kind == "modes") {
        if (value.size() != 2)
          throw ConfigError("key 'psi': '" + kind + "' takes one parameter", lineno);
        cfg.psi.parameter = parse_double(value[1], lineno, key);
        cfg.psi.kind = kind == "constant" ? PsiKind::constant
                      : kind == "shift"   ? PsiKind::shift
                                          : PsiKind::modes;
        if (cfg.psi.kind == PsiKind::constant && !(cfg.psi.parameter > 0.0))
          throw ConfigError("key 'psi': constant value must be positive", lineno);
      } else if (kind == "manufactured") {
        if (value.size() != 1)
          throw ConfigError("key 'psi': 'manufactured' takes no parameter", lineno);
        cfg.psi.kind = PsiKind::manufactured;
      } else {
        throw ConfigError("key 'psi': unknown form '" + kind + "'", lineno);
      }
      continue;
    }

    if (value.size() != 1)
      throw ConfigError("key '" + key + "': expected a single value", lineno);
    const std::string& v = value[0];
    if (key == "n") cfg.n = static_cast<int>(parse_long(v, lineno, key));
    else if (key == "N") cfg.N = static_cast<int>(parse_long(v, lineno, key));
    else if (key == "k") cfg.k = static_cast<int>(parse_long(v, lineno, key));
    else if (key == "l") cfg.l = static_cast<int>(parse_long(v, lineno, key));
    else if (key == "a") cfg.a = parse_double(v, lineno, key);
    else if (key == "toy") cfg.toy = parse_bool(v, lineno, key);
    else if (key == "cfl") cfg.cfl = parse_double(v, lineno, key);
    else if (key == "stop_osc") cfg.stop_osc = parse_double(v, lineno, key);
    else if (key == "t_max") cfg.t_max = parse_double(v, lineno, key);
    else if (key == "max_steps") cfg.max_steps = parse_long(v, lineno, key);
    else if (key == "snapshot_every")
      cfg.snapshot_every = static_cast<int>(parse_long(v, lineno, key));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(parse_long(v, lineno, key));
    else if (key == "out") cfg.out = v;
  }

  // Required keys and cross-field validity, before any grid allocation.
  for (const char* req : {"n", "N", "k", "l", "a"})
    if (!seen.count(req))
      throw ConfigError(std::string("missing required key '") + req + "'");
  if (!have_psi) throw ConfigError("missing required key 'psi'");

  if (cfg.n < 2 || cfg.n > 3) throw ConfigError("key 'n': must be 2 or 3");
  if (cfg.N < 8 || cfg.N % 2 != 0) throw ConfigError("key 'N': must be even and >= 8");
  if (cfg.k < 1 || cfg.k > cfg.n)
    throw ConfigError("key 'k': must satisfy 1 <= k <= n");
  if (cfg.l < 0 || cfg.l >= cfg.k)
    throw ConfigError("key 'l': must satisfy 0 <= l < k");
  if (!(cfg.a > 0.0)) throw ConfigError("key 'a': must be positive");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw ConfigError("key 'cfl': must lie in (0, 1]");
  if (!(cfg.stop_osc > 0.0)) throw ConfigError("key 'stop_osc': must be positive");
  if (!(cfg.t_max > 0.0)) throw ConfigError("key 't_max': must be positive");
  if (cfg.max_steps < 1) throw ConfigError("key 'max_steps': must be >= 1");
  if (cfg.snapshot_every < 1) throw ConfigError("key 'snapshot_every': must be >= 1");

  auto collect = [&](const std::vector<ModeRow>& rows, const char* what) {
    std::vector<TrigMode> modes;
    for (const ModeRow& r : rows) {
      if (r.mode.freq.size() != 2 * cfg.n)
        throw ConfigError(std::string("key '") + what + "': frequency vector needs " +
                              std::to_string(2 * cfg.n) + " entries",
                          r.line);
      if (cfg.toy)
        for (Eigen::Index q = 2; q < r.mode.freq.size(); ++q)
          if (r.mode.freq[q] != 0)
            throw ConfigError(std::string("key '") + what +
                                  "': toy mode allows only (x^1, y^1) frequencies",
                              r.line);
      modes.push_back(r.mode);
    }
    return TrigPoly(modes);
  };

  cfg.rho = collect(rho_rows, "rho");
  cfg.u_star = collect(ustar_rows, "u_star");
  if (ubar_zero) {
    cfg.u_bar = TrigPoly{};
  } else if (!ubar_rows.empty()) {
    cfg.u_bar = collect(ubar_rows, "u_bar");
  }
  const TrigPoly psi_modes = collect(psi_rows, "psi_mode");
  if (cfg.psi.kind != PsiKind::modes && !psi_modes.empty())
    throw ConfigError("psi_mode rows require 'psi = modes <base>'", psi_rows.front().line);
  if (cfg.psi.kind == PsiKind::modes) cfg.psi_table = psi_modes;

  if (cfg.psi.kind == PsiKind::manufactured && !ustar_rows.empty() &&
      cfg.toy && !cfg.u_star.toy_compatible())
    throw ConfigError("u_star uses coordinates beyond the toy plane");

  (void)origin;
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

GeomPtr build_geometry(const RunConfig& config) {
  TorusGeometry::Params params;
  params.n = config.n;
  params.N = config.N;
  params.toy = config.toy;
  params.a = config.a;
  params.rho = config.rho;
  params.cone_k = config.k;
  return TorusGeometry::create(std::move(params));
}

ScalarField build_psi(const RunConfig& config, const GeomPtr& geom) {
  const int n = geom->n();
  ScalarField psi = ScalarField::zeros(geom);
  switch (config.psi.kind) {
    case PsiKind::constant:
      psi.values.setConstant(config.psi.parameter);
      break;
    case PsiKind::shift: {
      double ck = 0.0, cl = 0.0;
      {
        const ScalarField ones = ScalarField::constant(geom, 1.0);
        ck = integrate(ones, ScalarField{geom, geom->chi_density(config.k)});
        cl = integrate(ones, ScalarField{geom, geom->chi_density(config.l)});
      }
      psi.values.setConstant(ck / cl * std::exp(config.psi.parameter));
      break;
    }
    case PsiKind::manufactured: {
      for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
        HermMatrix x = geom->chi_at(p);
        if (!config.u_star.empty()) x += config.u_star.hessian(geom->point(p));
        const EigenTuple lam = hermitian_eigenvalues(x);
        const EigenTuple e = detail::sym_prefix(lam, n);
        const double linf = lam.cwiseAbs().maxCoeff();
        for (int j = 1; j <= config.k; ++j)
          if (!(e[j] > detail::cone_eps(linf, j)))
            throw ConfigError("manufactured psi: chi + ddbar(u_star) leaves Gamma^k at point " +
                              std::to_string(p));
        psi.values[p] =
            (e[config.k] / binom(n, config.k)) / (e[config.l] / binom(n, config.l));
      }
      break;
    }
    case PsiKind::modes: {
      psi = ScalarField::sample(geom, config.psi_table);
      psi.values += config.psi.parameter;
      break;
    }
  }
  for (Eigen::Index p = 0; p < geom->num_points(); ++p)
    if (!(psi.values[p] > 0.0))
      throw ConfigError("psi is not positive at grid point " + std::to_string(p));
  return psi;
}

ScalarField build_u_bar(const RunConfig& config, const GeomPtr& geom) {
  if (!config.u_bar)
    throw ConfigError("no subsolution configured (add u_bar rows or 'u_bar = zero')");
  if (config.u_bar->empty()) return ScalarField::zeros(geom);
  return ScalarField::sample(geom, *config.u_bar);
}

FlowConfig build_flow_config(const RunConfig& config, const GeomPtr& geom) {
  FlowConfig fc;
  fc.k = config.k;
  fc.l = config.l;
  fc.psi = build_psi(config, geom);
  fc.cfl = config.cfl;
  fc.stop_osc = config.stop_osc;
  fc.t_max = config.t_max;
  fc.max_steps = config.max_steps;
  fc.snapshot_every = config.snapshot_every;
  return fc;
}

}  // namespace qflow
