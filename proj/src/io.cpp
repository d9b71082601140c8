#include "sokl/io.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sokl {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  require(out.good(), "write_csv: cannot open " + path);
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << columns[i] << (i + 1 < columns.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : rows) {
    require(row.size() == columns.size(), "write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << format_g17(row[i]) << (i + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
  require(out.good(), "write_csv: write failed for " + path);
}

void write_snapshot_csv(const std::string& path, const KineticField& field, double t) {
  validate_kinetic_field(field);
  std::ofstream out(path);
  require(out.good(), "write_snapshot_csv: cannot open " + path);
  out << "# t=" << format_g17(t) << " dim=" << field.xgrid.dim << " nx0=" << field.xgrid.n[0]
      << " nx1=" << field.xgrid.n[1] << " na=" << field.agrid.n
      << " L0=" << format_g17(field.xgrid.length[0])
      << " L1=" << format_g17(field.xgrid.length[1]) << " eps=" << format_g17(field.eps)
      << " eta0=" << format_g17(field.eta0) << " d=" << format_g17(field.d)
      << " k=" << format_g17(field.k)
      << " mode=" << (field.mode == SokMode::Nonlinear ? "nonlinear" : "linearized") << "\n";
  for (int ix = 0; ix < field.f.nx; ++ix) {
    const double* row = field.f.row(ix);
    for (int j = 0; j < field.f.na; ++j) {
      out << format_g17(row[j]) << (j + 1 < field.f.na ? "," : "");
    }
    out << "\n";
  }
  require(out.good(), "write_snapshot_csv: write failed for " + path);
}

SnapshotData read_snapshot_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_snapshot_csv: cannot open " + path);
  std::string header;
  std::getline(in, header);
  require(header.rfind("# ", 0) == 0, "read_snapshot_csv: missing metadata line");

  SnapshotData snap;
  int dim = 1, nx0 = 0, nx1 = 1, na = 0;
  double L0 = 1.0, L1 = 1.0;
  std::string mode = "nonlinear";
  std::istringstream meta(header.substr(2));
  std::string token;
  while (meta >> token) {
    const auto eq = token.find('=');
    require(eq != std::string::npos, "read_snapshot_csv: malformed metadata token " + token);
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    if (key == "t") snap.t = std::stod(val);
    else if (key == "dim") dim = std::stoi(val);
    else if (key == "nx0") nx0 = std::stoi(val);
    else if (key == "nx1") nx1 = std::stoi(val);
    else if (key == "na") na = std::stoi(val);
    else if (key == "L0") L0 = std::stod(val);
    else if (key == "L1") L1 = std::stod(val);
    else if (key == "eps") snap.field.eps = std::stod(val);
    else if (key == "eta0") snap.field.eta0 = std::stod(val);
    else if (key == "d") snap.field.d = std::stod(val);
    else if (key == "k") snap.field.k = std::stod(val);
    else if (key == "mode") mode = val;
    else require(false, "read_snapshot_csv: unknown metadata key " + key);
  }
  snap.field.xgrid = TorusGrid(dim, {nx0, dim == 2 ? nx1 : 1}, {L0, L1});
  snap.field.agrid = AngularGrid(na);
  snap.field.mode = (mode == "linearized") ? SokMode::Linearized : SokMode::Nonlinear;
  const int nx = snap.field.xgrid.total_cells();
  snap.field.f = Field2(nx, na);
  std::string line;
  for (int ix = 0; ix < nx; ++ix) {
    require(static_cast<bool>(std::getline(in, line)), "read_snapshot_csv: truncated file");
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < na; ++j) {
      require(static_cast<bool>(std::getline(ls, cell, ',')), "read_snapshot_csv: short row");
      snap.field.f.at(ix, j) = std::stod(cell);
    }
  }
  validate_kinetic_field(snap.field);
  return snap;
}

std::string resolve_output_dir(const std::string& cli_flag) {
  std::string dir = cli_flag;
  if (dir.empty()) {
    const char* env = std::getenv("SOKL_OUTPUT_DIR");
    if (env && *env) dir = env;
  }
  if (dir.empty()) dir = "./sokl_out";
  std::filesystem::create_directories(dir);
  return dir;
}

nlohmann::json version_info() {
  nlohmann::json v;
  v["sokl"] = "1.0.0";
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
  v["compiler"] = __VERSION__;
  return v;
}

void write_manifest(const std::string& path, const nlohmann::json& config_echo,
                    const std::vector<std::string>& outputs, double wall_seconds) {
  nlohmann::json m;
  m["config"] = config_echo;
  m["outputs"] = outputs;
  m["versions"] = version_info();
  m["wall_time_seconds"] = wall_seconds;
  std::ofstream out(path);
  require(out.good(), "write_manifest: cannot open " + path);
  out << m.dump(2) << "\n";
  require(out.good(), "write_manifest: write failed for " + path);
}

}  // namespace sokl
