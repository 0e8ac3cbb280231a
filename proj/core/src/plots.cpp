#include "gfl/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>

#include "gfl/errors.hpp"

namespace gfl {

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kMetricsCsvHeader << '\n';
  os.precision(17);
  for (const auto& r : rows) {
    os << r.step << ',' << r.loss << ',' << r.ema_loss << ',' << r.theta_norm << ',' << r.grad_norm
       << ',' << r.seed << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsCsvHeader) {
    throw SchemaMismatch("metrics CSV header must be '" + std::string(kMetricsCsvHeader) + "'");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricsRow r{};
    char c[5] = {};
    ls >> r.step >> c[0] >> r.loss >> c[1] >> r.ema_loss >> c[2] >> r.theta_norm >> c[3] >>
        r.grad_norm >> c[4] >> r.seed;
    if (!ls || std::any_of(std::begin(c), std::end(c), [](char ch) { return ch != ','; })) {
      throw SchemaMismatch("malformed metrics row on line " + std::to_string(lineno));
    }
    if (!rows.empty() && r.step <= rows.back().step) {
      throw SchemaMismatch("steps must strictly increase (line " + std::to_string(lineno) + ")");
    }
    rows.push_back(r);
  }
  return rows;
}

std::string metric_name(MetricField field) {
  switch (field) {
    case MetricField::Loss:
      return "loss";
    case MetricField::EmaLoss:
      return "ema_loss";
    case MetricField::ThetaNorm:
      return "theta_norm";
    case MetricField::GradNorm:
      break;
  }
  return "grad_norm";
}

namespace {

double field_of(const MetricsRow& r, MetricField f) {
  switch (f) {
    case MetricField::Loss:
      return r.loss;
    case MetricField::EmaLoss:
      return r.ema_loss;
    case MetricField::ThetaNorm:
      return r.theta_norm;
    case MetricField::GradNorm:
      break;
  }
  return r.grad_norm;
}

}  // namespace

Curve seed_average(const std::string& label, const std::vector<std::vector<MetricsRow>>& seeds,
                   MetricField field) {
  if (seeds.empty()) throw SchemaMismatch("no seeds to average for '" + label + "'");
  const auto& first = seeds.front();
  Curve c;
  c.label = label;
  for (const auto& s : seeds) {
    if (s.size() != first.size()) throw SchemaMismatch("seeds of '" + label + "' log different step counts");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].step != first[i].step) throw SchemaMismatch("seeds of '" + label + "' log different steps");
    }
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    double acc = 0.0;
    for (const auto& s : seeds) acc += field_of(s[i], field);
    c.x.push_back(static_cast<double>(first[i].step));
    c.y.push_back(acc / static_cast<double>(seeds.size()));
  }
  return c;
}

std::string render_svg(const std::vector<Curve>& curves, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool log_y) {
  constexpr double W = 720, H = 440, L = 80, R = 150, T = 40, B = 60;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin, ypos = xmin;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      ymin = std::min(ymin, c.y[i]);
      ymax = std::max(ymax, c.y[i]);
      if (c.y[i] > 0) ypos = std::min(ypos, c.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = ypos = 1;
    ymax = 2;
  }
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, ypos)) : y; };
  double y0 = log_y ? ty(ypos) : ymin;
  double y1 = ty(ymax);
  if (xmax == xmin) xmax = xmin + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = px(fx);
    const double gy = H - B - (fy - y0) / (y1 - y0) * (H - T - B);
    os << "<text x=\"" << gx << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fx << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
       << (log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << gy << "\" x2=\"" << W - R << "\" y2=\"" << gy
       << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (T + H - B) / 2 << ")\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = palette[ci % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" data-label=\"" << c.label
       << "\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      os << (i ? " " : "") << px(c.x[i]) << ',' << py(c.y[i]);
    }
    os << "\"/>\n";
    const double ly = T + 16 + 18.0 * static_cast<double>(ci);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << c.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(
    const std::map<std::string, std::vector<std::filesystem::path>>& csvs_by_label,
    const std::filesystem::path& out_dir) {
  if (csvs_by_label.empty()) throw SchemaMismatch("no metrics CSVs to plot");
  std::vector<Curve> loss, norm;
  for (const auto& [label, files] : csvs_by_label) {
    std::vector<std::vector<MetricsRow>> seeds;
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw Error("cannot open " + f.string());
      try {
        seeds.push_back(read_metrics_csv(in));
      } catch (const SchemaMismatch& e) {
        throw SchemaMismatch(f.string() + ": " + e.what());
      }
    }
    loss.push_back(seed_average(label, seeds, MetricField::EmaLoss));
    norm.push_back(seed_average(label, seeds, MetricField::ThetaNorm));
  }
  std::filesystem::create_directories(out_dir);
  const auto loss_path = out_dir / "loss.svg";
  const auto norm_path = out_dir / "theta_norm.svg";
  std::ofstream(loss_path) << render_svg(loss, "Training loss (EMA, seed mean)", "step", "loss", true);
  std::ofstream(norm_path) << render_svg(norm, "Parameter norm (seed mean)", "step", "||theta||", false);
  return {loss_path, norm_path};
}

std::map<std::string, std::vector<std::filesystem::path>> find_metrics_csvs(
    const std::filesystem::path& dir) {
  static const std::regex pattern(R"(metrics_(.+)_seed(\d+)\.csv)");
  std::map<std::string, std::vector<std::filesystem::path>> out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::smatch m;
    const std::string name = f.filename().string();
    if (std::regex_match(name, m, pattern)) out[m[1].str()].push_back(f);
  }
  return out;
}

}  // namespace gfl
