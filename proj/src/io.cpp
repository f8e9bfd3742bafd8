#include "semisar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "semisar/errors.hpp"

namespace semisar::io {

using nlohmann::json;

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto rec = split_record(line);
    for (auto& f : rec) f = trim(f);
    if (first) {
      t.header = std::move(rec);
      first = false;
    } else {
      if (rec.size() != t.header.size())
        throw ValidationError("csv: row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(rec.size()) +
                              " fields, expected " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(rec));
    }
  }
  if (first) throw ValidationError("csv: missing header row");
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_report(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_double(const std::string& field, const std::string& context) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  if (!field.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw ValidationError(context + ": missing or invalid value '" + field + "'");
  return v;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

LoadedObservations load_observations(const std::filesystem::path& path, const LoadOptions& opts) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.column(opts.coords.first), cy = t.column(opts.coords.second), cr = t.column(opts.response);
  const bool has_id = t.has_column(opts.id_column);
  std::vector<std::string> covs = opts.covariates;
  if (covs.empty()) {
    for (const auto& h : t.header)
      if (h != opts.coords.first && h != opts.coords.second && h != opts.response && h != opts.id_column) covs.push_back(h);
  }
  if (covs.empty()) throw ValidationError("covariates: no covariate columns selected");
  std::vector<std::size_t> cc;
  for (const auto& c : covs) cc.push_back(t.column(c));

  // Validate everything first so every bad row is reported at once.
  std::vector<std::size_t> bad_rows;
  struct Raw {
    long id;
    double x, y, resp;
    std::vector<double> cov;
  };
  std::vector<Raw> raw;
  raw.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      Raw v;
      v.id = has_id ? static_cast<long>(parse_double(row[t.column(opts.id_column)], "site_id")) : static_cast<long>(r);
      v.x = parse_double(row[cx], opts.coords.first);
      v.y = parse_double(row[cy], opts.coords.second);
      v.resp = parse_double(row[cr], opts.response);
      for (std::size_t j = 0; j < cc.size(); ++j) v.cov.push_back(parse_double(row[cc[j]], covs[j]));
      raw.push_back(std::move(v));
    } catch (const ValidationError&) {
      bad_rows.push_back(r + 1);
    }
  }
  if (!bad_rows.empty()) {
    std::string msg = "missing or invalid values in data rows:";
    for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i) msg += " " + std::to_string(bad_rows[i]);
    if (bad_rows.size() > 20) msg += " ...";
    throw ValidationError(msg);
  }
  if (raw.empty()) throw ValidationError("csv: no data rows");

  // Collapse duplicated coordinates by averaging, keeping first-seen order.
  std::map<std::pair<double, double>, std::size_t> slot;
  std::vector<Raw> merged;
  std::vector<int> counts;
  for (auto& v : raw) {
    const auto key = std::make_pair(v.x, v.y);
    const auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, merged.size());
      merged.push_back(v);
      counts.push_back(1);
    } else {
      auto& m = merged[it->second];
      m.resp += v.resp;
      for (std::size_t j = 0; j < m.cov.size(); ++j) m.cov[j] += v.cov[j];
      ++counts[it->second];
    }
  }
  for (std::size_t i = 0; i < merged.size(); ++i)
    if (counts[i] > 1) {
      merged[i].resp /= counts[i];
      for (auto& c : merged[i].cov) c /= counts[i];
    }

  LoadedObservations out;
  out.meta.rows_read = raw.size();
  out.meta.collapsed_duplicates = static_cast<int>(raw.size() - merged.size());

  double xmin = merged[0].x, xmax = xmin, ymin = merged[0].y, ymax = ymin;
  for (const auto& m : merged) {
    xmin = std::min(xmin, m.x), xmax = std::max(xmax, m.x);
    ymin = std::min(ymin, m.y), ymax = std::max(ymax, m.y);
  }
  if (xmin < 0.0 || ymin < 0.0 || xmax > 1.0 || ymax > 1.0) {
    const double span = std::max(xmax - xmin, ymax - ymin);
    if (!(span > 0.0)) throw ValidationError("coordinates: all sites coincide");
    out.meta.rescaled = true;
    out.meta.x_offset = xmin;
    out.meta.y_offset = ymin;
    out.meta.scale = span;
  }

  auto& obs = out.obs;
  const auto n = static_cast<Eigen::Index>(merged.size());
  obs.sites.design = Design::Irregular;
  obs.Y.resize(n);
  obs.X.resize(n, static_cast<Eigen::Index>(covs.size()));
  obs.covariate_names = covs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = merged[static_cast<std::size_t>(i)];
    Site s;
    s.index = m.id;
    s.x = out.meta.rescaled ? (m.x - out.meta.x_offset) / out.meta.scale : m.x;
    s.y = out.meta.rescaled ? (m.y - out.meta.y_offset) / out.meta.scale : m.y;
    obs.sites.sites.push_back(s);
    obs.Y(i) = m.resp;
    for (std::size_t j = 0; j < covs.size(); ++j) obs.X(i, static_cast<Eigen::Index>(j)) = m.cov[j];
  }
  obs.validate();
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts, int k) {
  auto lo = load_observations(path, opts);
  return {SpatialDataset::build(std::move(lo.obs), k), lo.meta};
}

std::string observations_csv(const Observations& obs) {
  std::string s = "site_id,x,y,Y";
  for (Eigen::Index j = 0; j < obs.p(); ++j)
    s += "," + (static_cast<std::size_t>(j) < obs.covariate_names.size() ? obs.covariate_names[static_cast<std::size_t>(j)]
                                                                        : "X" + std::to_string(j + 1));
  s += '\n';
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const auto& site = obs.sites[static_cast<std::size_t>(i)];
    s += std::to_string(site.index) + ',' + format_exact(site.x) + ',' + format_exact(site.y) + ',' + format_exact(obs.Y(i));
    for (Eigen::Index j = 0; j < obs.p(); ++j) s += ',' + format_exact(obs.X(i, j));
    s += '\n';
  }
  return s;
}

std::string sites_csv(const SiteSet& sites) {
  std::string s = "site_id,x,y\n";
  for (const auto& site : sites.sites)
    s += std::to_string(site.index) + ',' + format_exact(site.x) + ',' + format_exact(site.y) + '\n';
  return s;
}

json sidecar_json(const SimulatedData& data, const SimConfig& cfg) {
  json j;
  j["design"] = to_string(cfg.design);
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["rho"] = cfg.rho;
  j["beta_sd"] = cfg.beta_sd;
  j["v_bandwidth"] = cfg.v_bandwidth;
  j["parent_count"] = cfg.parent_count;
  j["seed"] = cfg.seed;
  j["beta_true"] = std::vector<double>(data.beta_true.data(), data.beta_true.data() + data.beta_true.size());
  j["solve_residual"] = data.solve_residual;
  j["exact_count"] = data.obs.sites.exact_count;
  json models = json::array();
  for (const auto& m : data.covariates) {
    json c;
    c["model"] = to_string(m.model);
    c["mean"] = m.mean;
    c["partner"] = m.partner >= 0 ? json("X" + std::to_string(m.partner + 1)) : json(nullptr);
    c["pair_rho"] = m.pair_rho;
    c["jitter"] = m.jitter;
    models.push_back(c);
  }
  j["covariates"] = models;
  return j;
}

void save_simulation(const std::filesystem::path& csv_path, const SimulatedData& data, const SimConfig& cfg) {
  write_file_atomic(csv_path, observations_csv(data.obs));
  auto side = csv_path;
  side.replace_extension(".json");
  write_file_atomic(side, sidecar_json(data, cfg).dump(2) + "\n");
}

json to_json(const BandwidthConfig& cfg) {
  return json{{"variant", to_string(cfg.variant)}, {"h1", cfg.h1},
              {"h2", cfg.h2},                      {"k", cfg.k},
              {"kernel1", to_string(cfg.kernel1)}, {"kernel2", to_string(cfg.kernel2)}};
}

BandwidthConfig bandwidth_from_json(const json& j) {
  BandwidthConfig c;
  try {
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.h1 = j.at("h1").get<double>();
    c.h2 = j.at("h2").get<double>();
    c.k = j.at("k").get<int>();
    if (j.contains("kernel1")) c.kernel1 = parse_kernel(j.at("kernel1").get<std::string>());
    if (j.contains("kernel2")) c.kernel2 = parse_kernel(j.at("kernel2").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("cfg: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const FitResult& fr, const Observations& obs) {
  json j;
  j["beta_hat"] = std::vector<double>(fr.beta_hat.data(), fr.beta_hat.data() + fr.beta_hat.size());
  j["covariates"] = obs.covariate_names;
  j["cfg"] = to_json(fr.cfg);
  j["cond"] = fr.cond;
  j["fallback_rows"] = fr.fallback_rows.size();
  json sites = json::array();
  for (Eigen::Index i = 0; i < fr.r_hat.size(); ++i)
    sites.push_back({{"site_id", obs.sites[static_cast<std::size_t>(i)].index}, {"r_hat", fr.r_hat(i)}});
  j["r_hat"] = sites;
  return j;
}

FitResult fit_result_from_json(const json& j) {
  FitResult fr;
  try {
    const auto beta = j.at("beta_hat").get<std::vector<double>>();
    fr.beta_hat = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    fr.cfg = bandwidth_from_json(j.at("cfg"));
    fr.cond = j.at("cond").get<double>();
    const auto& r = j.at("r_hat");
    fr.r_hat.resize(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) fr.r_hat(static_cast<Eigen::Index>(i)) = r[i].at("r_hat").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("fit result: ") + e.what());
  }
  return fr;
}

std::string score_table_csv(const SelectionResult& sel) {
  std::string s = "variant,h1,h2,k,cv_rmse\n";
  for (const auto& e : sel.score_table)
    s += to_string(e.cfg.variant) + ',' + format_report(e.cfg.h1) + ',' + format_report(e.cfg.h2) + ',' +
         std::to_string(e.cfg.k) + ',' + (e.feasible ? format_report(e.cv_rmse) : std::string("inf")) + '\n';
  return s;
}

std::string weights_csv(const WeightMatrix& W) {
  std::string s;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.values.cols(); ++j) {
      if (j) s += ',';
      s += format_report(W.values(i, j));
    }
    s += '\n';
  }
  return s;
}

std::string replications_csv(const ExperimentSummary& sm) {
  std::string s = "method,rep,rmse,mae_beta,h1,h2,k\n";
  for (const auto& r : sm.records) {
    if (!r.ok) continue;
    s += to_string(r.method) + ',' + std::to_string(r.rep) + ',' + format_report(r.rmse) + ',' + format_report(r.mae_beta);
    if (is_kernel_method(r.method))
      s += ',' + format_report(r.cfg.h1) + ',' + format_report(r.cfg.h2) + ',' + std::to_string(r.cfg.k);
    else
      s += ",,,";
    s += '\n';
  }
  return s;
}

std::string summary_csv(const ExperimentSummary& sm) {
  std::string s = "rho,design,n,method,mae_mean,mae_sd,rmse_mean,rmse_sd\n";
  for (const auto& a : sm.aggregates)
    s += format_report(sm.cfg.sim.rho) + ',' + to_string(sm.cfg.sim.design) + ',' + std::to_string(sm.cfg.sim.n) + ',' +
         to_string(a.method) + ',' + format_report(a.mae_mean) + ',' + format_report(a.mae_sd) + ',' +
         format_report(a.rmse_mean) + ',' + format_report(a.rmse_sd) + '\n';
  return s;
}

std::string boxplot_csv(const ExperimentSummary& sm) {
  std::string s = "rho,design,n,method,rep,metric,value\n";
  const std::string prefix = format_report(sm.cfg.sim.rho) + ',' + to_string(sm.cfg.sim.design) + ',' + std::to_string(sm.cfg.sim.n) + ',';
  for (const char* metric : {"rmse", "mae_beta"})
    for (const auto& r : sm.records) {
      if (!r.ok) continue;
      const double v = std::string(metric) == "rmse" ? r.rmse : r.mae_beta;
      s += prefix + to_string(r.method) + ',' + std::to_string(r.rep) + ',' + metric + ',' + format_report(v) + '\n';
    }
  return s;
}

}  // namespace semisar::io
