#include "padmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace padmm {

namespace {

constexpr const char* kCsvHeader =
    "iter,objective,constraint_inf,constraint_sq,auglag,lyapunov,primal_step,dual_step,kkt_stat,wall_ms";

// Decimal with 17 significant digits round-trips IEEE doubles exactly.
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const std::vector<IterationRecord>& records, const std::filesystem::path& path, bool zero_wall_times) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw Error("write_csv: cannot open " + path.string());
  out << kCsvHeader << "\n";
  for (const IterationRecord& r : records) {
    out << r.iteration << ',' << fmt17(r.objective) << ',' << fmt17(r.constraint_inf) << ','
        << fmt17(r.constraint_sq) << ',' << fmt17(r.auglag) << ',' << fmt17(r.lyapunov) << ','
        << fmt17(r.primal_step_inf) << ',' << fmt17(r.dual_step_inf) << ',' << fmt17(r.kkt_stationarity) << ','
        << fmt17(zero_wall_times ? 0.0 : r.wall_ms) << '\n';
  }
  if (!out) throw Error("write_csv: failed writing " + path.string());
}

std::vector<IterationRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("read_csv: empty file " + path.string());
  if (line != kCsvHeader) throw Error("read_csv: unexpected header in " + path.string());
  std::vector<IterationRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw Error("read_csv: malformed row '" + line + "'");
    IterationRecord r;
    r.iteration = std::stoi(fields[0]);
    r.objective = std::strtod(fields[1].c_str(), nullptr);
    r.constraint_inf = std::strtod(fields[2].c_str(), nullptr);
    r.constraint_sq = std::strtod(fields[3].c_str(), nullptr);
    r.auglag = std::strtod(fields[4].c_str(), nullptr);
    r.lyapunov = std::strtod(fields[5].c_str(), nullptr);
    r.primal_step_inf = std::strtod(fields[6].c_str(), nullptr);
    r.dual_step_inf = std::strtod(fields[7].c_str(), nullptr);
    r.kkt_stationarity = std::strtod(fields[8].c_str(), nullptr);
    r.wall_ms = std::strtod(fields[9].c_str(), nullptr);
    records.push_back(std::move(r));
  }
  return records;
}

RateReport rate_report(const std::vector<IterationRecord>& records, const Eigen::ArrayXd& c,
                       const Eigen::ArrayXd& c_tilde) {
  if (records.size() < 2) throw ParameterError("rate_report: need at least two records");
  RateReport report;
  report.weighted_step_sq.reserve(records.size());
  report.running_min.reserve(records.size());
  report.k_times_min.reserve(records.size());

  double running = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const Eigen::ArrayXd& steps = records[k].primal_step_blocks_sq;
    if (steps.size() != c.size() || steps.size() != c_tilde.size()) {
      throw DimensionError("rate_report: coefficient length does not match blockwise step norms",
                           static_cast<int>(k));
    }
    const double s = ((c + c_tilde) * steps).sum();
    running = std::min(running, s);
    report.weighted_step_sq.push_back(s);
    report.running_min.push_back(running);
    report.k_times_min.push_back(static_cast<double>(k + 1) * running);
  }

  // Least-squares slope of k * m_k against k.
  const std::size_t m = report.k_times_min.size();
  double mean_k = 0.0, mean_v = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mean_k += static_cast<double>(k + 1);
    mean_v += report.k_times_min[k];
  }
  mean_k /= static_cast<double>(m);
  mean_v /= static_cast<double>(m);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dk = static_cast<double>(k + 1) - mean_k;
    num += dk * (report.k_times_min[k] - mean_v);
    den += dk * dk;
  }
  report.trend_slope = den > 0.0 ? num / den : 0.0;
  return report;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto ltrim = [](std::string& s) { s.erase(0, s.find_first_not_of(" \t\r")); };
    const auto rtrim = [](std::string& s) { s.erase(s.find_last_not_of(" \t\r") + 1); };
    ltrim(line);
    rtrim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    rtrim(key);
    ltrim(value);
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("config: key '" + key + "' is not a number: " + s);
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError("config: key '" + key + "' is not an integer");
  return i;
}

int Config::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get_string(key);
  return std::stoull(s);
}

std::string Config::to_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
  return out.str();
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_manifest: cannot open " + path.string());
  const auto escape = [](const std::string& s) {
    std::string r;
    r.reserve(s.size());
    for (char ch : s) {
      switch (ch) {
        case '"': r += "\\\""; break;
        case '\\': r += "\\\\"; break;
        case '\n': r += "\\n"; break;
        case '\t': r += "\\t"; break;
        case '\r': r += "\\r"; break;
        default: r += ch;
      }
    }
    return r;
  };
  out << "{\n";
  out << "  \"config\": \"" << escape(manifest.config_text) << "\",\n";
  out << "  \"seed\": " << manifest.seed << ",\n";
  out << "  \"certificate\": " << (manifest.certificate_json.empty() ? "null" : manifest.certificate_json) << ",\n";
  out << "  \"source_revision\": \"" << escape(manifest.source_revision) << "\",\n";
  out << "  \"started_at\": \"" << escape(manifest.started_at) << "\",\n";
  out << "  \"finished_at\": \"" << escape(manifest.finished_at) << "\"\n";
  out << "}\n";
}

namespace {

struct Series {
  std::string title;
  std::vector<double> y;
  bool log_scale = false;
};

void append_panel(std::ostringstream& svg, const Series& series, double x_origin) {
  const double width = 420.0, height = 320.0, ml = 60.0, mb = 40.0, mt = 30.0, mr = 15.0;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  std::vector<double> y;
  y.reserve(series.y.size());
  for (double v : series.y) {
    if (series.log_scale) {
      y.push_back(std::log10(std::max(v, 1e-300)));
    } else {
      y.push_back(v);
    }
  }
  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  if (hi - lo < 1e-12) {
    hi += 1.0;
    lo -= 1.0;
  }
  const double n = static_cast<double>(y.size());

  svg << "<g transform=\"translate(" << x_origin << ",0)\">\n";
  svg << "  <rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "  <text x=\"" << ml + plot_w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << series.title
      << "</text>\n";
  svg << "  <text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "iteration</text>\n";
  svg << "  <text x=\"12\" y=\"" << mt - 8 << "\" font-size=\"11\">" << (series.log_scale ? "log10" : "") << "</text>\n";
  svg << "  <text x=\"" << ml - 6 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt17(hi).substr(0, 9)
      << "</text>\n";
  svg << "  <text x=\"" << ml - 6 << "\" y=\"" << mt + plot_h << "\" text-anchor=\"end\" font-size=\"11\">"
      << fmt17(lo).substr(0, 9) << "</text>\n";
  svg << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double px = ml + (n > 1 ? plot_w * static_cast<double>(k) / (n - 1) : 0.0);
    const double py = mt + plot_h * (1.0 - (y[k] - lo) / (hi - lo));
    svg << px << ',' << py << ' ';
  }
  svg << "\"/>\n</g>\n";
}

}  // namespace

void write_svg_convergence(const std::vector<IterationRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw ParameterError("write_svg_convergence: no records");
  Series objective{"objective", {}, false};
  Series constraint{"constraint error (inf-norm)", {}, true};
  for (const IterationRecord& r : records) {
    objective.y.push_back(r.objective);
    constraint.y.push_back(r.constraint_inf);
  }
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"860\" height=\"330\" "
         "viewBox=\"0 0 860 330\">\n";
  append_panel(svg, objective, 0.0);
  append_panel(svg, constraint, 430.0);
  svg << "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_svg_convergence: cannot open " + path.string());
  out << svg.str();
}

}  // namespace padmm
