#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semisar/estimator.hpp"
#include "semisar/evaluation.hpp"
#include "semisar/selection.hpp"
#include "semisar/simgen.hpp"

namespace semisar::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position; throws ValidationError naming the column when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_exact(double v);
/// 12 significant digits, for reports.
std::string format_report(double v);
double parse_double(const std::string& field, const std::string& context);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

struct LoadOptions {
  std::string response = "Y";
  std::vector<std::string> covariates;  // empty: every column except id, coordinates and response
  std::pair<std::string, std::string> coords = {"x", "y"};
  std::string id_column = "site_id";   // optional in the file
};

struct DatasetMeta {
  std::size_t rows_read = 0;
  int collapsed_duplicates = 0;
  bool rescaled = false;
  double x_offset = 0.0, y_offset = 0.0, scale = 1.0;  // unit = (raw - offset) / scale
};

struct LoadedObservations {
  Observations obs;
  DatasetMeta meta;
};

struct LoadedDataset {
  SpatialDataset data;
  DatasetMeta meta;
};

/// Reads a CSV of observations. Rows sharing coordinates are averaged into one
/// site. Coordinates outside the unit square are shifted by their minima and
/// divided by the larger of the two ranges, which keeps distances isotropic.
LoadedObservations load_observations(const std::filesystem::path& path, const LoadOptions& opts);
LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts, int k);

/// site_id,x,y,Y,X1..Xp with exact number formatting.
std::string observations_csv(const Observations& obs);
std::string sites_csv(const SiteSet& sites);

nlohmann::json sidecar_json(const SimulatedData& data, const SimConfig& cfg);
void save_simulation(const std::filesystem::path& csv_path, const SimulatedData& data, const SimConfig& cfg);

nlohmann::json to_json(const BandwidthConfig& cfg);
BandwidthConfig bandwidth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitResult& fr, const Observations& obs);
FitResult fit_result_from_json(const nlohmann::json& j);

std::string score_table_csv(const SelectionResult& sel);
std::string weights_csv(const WeightMatrix& W);

/// method,rep,rmse,mae_beta,h1,h2,k
std::string replications_csv(const ExperimentSummary& s);
/// rho,design,n,method,mae_mean,mae_sd,rmse_mean,rmse_sd
std::string summary_csv(const ExperimentSummary& s);
/// Long format: rho,design,n,method,rep,metric,value
std::string boxplot_csv(const ExperimentSummary& s);

}  // namespace semisar::io
