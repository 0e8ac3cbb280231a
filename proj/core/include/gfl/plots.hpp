#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gfl {

struct MetricsRow {
  std::uint64_t step;
  double loss;
  double ema_loss;
  double theta_norm;
  double grad_norm;
  std::uint64_t seed;
};

inline constexpr const char* kMetricsCsvHeader = "step,loss,ema_loss,theta_norm,grad_norm,seed";

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
/// Throws SchemaMismatch on a different header, malformed rows, or steps that do not
/// strictly increase.
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

enum class MetricField { Loss, EmaLoss, ThetaNorm, GradNorm };
std::string metric_name(MetricField field);

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Pointwise mean of `field` over seeds. All seeds must log the same steps.
/// Throws SchemaMismatch for an empty seed set or mismatched steps.
Curve seed_average(const std::string& label, const std::vector<std::vector<MetricsRow>>& seeds,
                   MetricField field);

/// Self-contained SVG line chart, one polyline per curve (vertex count = point count).
/// With log_y, nonpositive values are clamped to the smallest positive value present.
std::string render_svg(const std::vector<Curve>& curves, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool log_y);

/// For each label (typically an activation), averages its CSVs over seeds and writes
/// loss.svg (EMA loss, log scale) and theta_norm.svg into `out_dir`. Returns the files.
std::vector<std::filesystem::path> emit_plots(
    const std::map<std::string, std::vector<std::filesystem::path>>& csvs_by_label,
    const std::filesystem::path& out_dir);

/// Groups metrics_<label>_seed<N>.csv files in `dir` by label.
std::map<std::string, std::vector<std::filesystem::path>> find_metrics_csvs(
    const std::filesystem::path& dir);

}  // namespace gfl
