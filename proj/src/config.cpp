#include "rmps/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rmps {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKnownKeys = {
    "model.kind",          "model.N",           "model.J",          "model.h",
    "model.g",             "sampler.chi",       "sampler.E",        "sampler.u",
    "sampler.sigma",       "sampler.iterations", "sampler.samples", "sampler.compress_tol",
    "sampler.record_every", "sampler.checkpoints", "sampler.max_sweeps", "sampler.track_truncation",
    "run.seed",            "run.output_dir",    "run.threads"};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(field + ": expected a number, got '" + text + "'");
  if (!std::isfinite(value)) throw ConfigError(field + ": must be finite");
  return value;
}

template <typename Int>
Int parse_int(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(field + ": expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(field + ": expected true or false, got '" + text + "'");
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
  return std::nullopt;
}

std::string require(const pt::ptree& tree, const std::string& key) {
  auto v = get(tree, key);
  if (!v) throw ConfigError(key + ": missing");
  return *v;
}

}  // namespace

RunConfig parse_run_config(const std::string& ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section + ": key outside of a section");
    for (const auto& [key, value] : body)
      if (!kKnownKeys.contains(section + "." + key)) throw ConfigError(section + "." + key + ": unknown key");
  }

  RunConfig rc;
  auto& c = rc.sampler;
  try {
    c.model.kind = parse_model_kind(trim(require(tree, "model.kind")));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("model.kind: ") + e.what());
  }
  c.model.sites = parse_int<Index>("model.N", require(tree, "model.N"));
  if (c.model.sites < 2) throw ConfigError("model.N: must be >= 2");
  if (auto j = get(tree, "model.J")) c.model.coupling = parse_real("model.J", *j);
  const char* field_key = c.model.kind == ModelKind::heisenberg ? "model.h" : "model.g";
  const char* wrong_key = c.model.kind == ModelKind::heisenberg ? "model.g" : "model.h";
  if (get(tree, wrong_key)) throw ConfigError(std::string(wrong_key) + ": not a parameter of this model kind");
  if (auto f = get(tree, field_key)) c.model.field = parse_real(field_key, *f);

  const auto e = get(tree, "sampler.E");
  const auto u = get(tree, "sampler.u");
  if (e && u) throw ConfigError("sampler.E: E and u are mutually exclusive");
  if (!e && !u) throw ConfigError("sampler.E: one of E or u is required");
  if (e) c.energy = parse_real("sampler.E", *e);
  if (u) c.energy_density = parse_real("sampler.u", *u);

  if (auto s = get(tree, "sampler.sigma")) {
    const auto t = trim(*s);
    if (t == "auto" || t == "bound" || t == "paper" || t == "paper-coeff" || t == "paper_coeff") {
      c.sigma_mode = parse_sigma_mode(t);
    } else {
      c.sigma_mode = SigmaMode::fixed;
      c.sigma = parse_real("sampler.sigma", t);
      if (!(*c.sigma > 0.0)) throw ConfigError("sampler.sigma: must be positive");
    }
  }
  if (auto v = get(tree, "sampler.chi")) c.chi = parse_int<Index>("sampler.chi", *v);
  if (auto v = get(tree, "sampler.iterations")) c.iterations = parse_int<int>("sampler.iterations", *v);
  if (auto v = get(tree, "sampler.samples")) c.samples = parse_int<int>("sampler.samples", *v);
  if (auto v = get(tree, "sampler.compress_tol")) c.compress_tol = parse_real("sampler.compress_tol", *v);
  if (auto v = get(tree, "sampler.record_every")) c.record_every = parse_int<int>("sampler.record_every", *v);
  if (auto v = get(tree, "sampler.max_sweeps")) c.max_sweeps = parse_int<int>("sampler.max_sweeps", *v);
  if (auto v = get(tree, "sampler.track_truncation")) c.track_truncation = parse_bool("sampler.track_truncation", *v);
  if (auto v = get(tree, "sampler.checkpoints")) {
    std::istringstream list(*v);
    std::string item;
    while (std::getline(list, item, ','))
      if (!trim(item).empty()) c.checkpoints.push_back(parse_int<int>("sampler.checkpoints", item));
  }

  if (auto v = get(tree, "run.seed")) c.seed = parse_int<std::uint64_t>("run.seed", *v);
  if (auto v = get(tree, "run.output_dir")) rc.output_dir = trim(*v);
  if (auto v = get(tree, "run.threads")) {
    const auto t = parse_int<unsigned>("run.threads", *v);
    if (t == 0) throw ConfigError("run.threads: must be >= 1");
    rc.threads = t;
  }

  // Field-specific messages come from the sampler's own validation.
  try {
    c.validate();
  } catch (const InvalidParameter& ex) {
    throw ConfigError(ex.what());
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto text = trim(spec);
  if (text.empty()) throw ConfigError("h-grid: empty grid");
  std::vector<double> grid;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    const auto a = text.find(':'), b = text.find(':', a + 1);
    const double start = parse_real("h-grid", text.substr(0, a));
    const double stop = parse_real("h-grid", text.substr(a + 1, b - a - 1));
    const double step = parse_real("h-grid", text.substr(b + 1));
    if (!(step > 0.0)) throw ConfigError("h-grid: step must be positive");
    if (stop < start) throw ConfigError("h-grid: stop below start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 0.5));
    if (count > 100000) throw ConfigError("h-grid: too many points");
    for (long i = 0; i <= count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  } else {
    std::istringstream list(text);
    std::string item;
    while (std::getline(list, item, ','))
      if (!trim(item).empty()) grid.push_back(parse_real("h-grid", item));
  }
  if (grid.empty()) throw ConfigError("h-grid: empty grid");
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::vector<Index> parse_index_list(const std::string& spec) {
  const auto text = trim(spec);
  std::vector<Index> out;
  for (const char* sep : {"..", ":"}) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) continue;
    const auto a = parse_int<Index>("corr", text.substr(0, pos));
    const auto b = parse_int<Index>("corr", text.substr(pos + std::string(sep).size()));
    if (a < 1 || b < a) throw ConfigError("corr: bad range '" + spec + "'");
    for (Index j = a; j <= b; ++j) out.push_back(j);
    return out;
  }
  std::istringstream list(text);
  std::string item;
  while (std::getline(list, item, ','))
    if (!trim(item).empty()) {
      const auto j = parse_int<Index>("corr", item);
      if (j < 1) throw ConfigError("corr: distances must be >= 1");
      out.push_back(j);
    }
  if (out.empty()) throw ConfigError("corr: empty distance list");
  return out;
}

}  // namespace rmps
