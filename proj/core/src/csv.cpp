#include "crw/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace crw {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) *out_ << ',';
    *out_ << csv_field(fields[i]);
  }
  *out_ << "\r\n";
  ++rows_;
}

void write_trajectory_csv(std::ostream& out, std::span<const CrwTrajectory> runs, std::span<const Vertex> sites) {
  CsvWriter csv(out);
  std::vector<std::string> fields{"replicate", "t", "xi_size", "N_t"};
  for (Vertex v : sites) fields.push_back("occ_" + std::to_string(v));
  csv.row(fields);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const CrwTrajectory& run = runs[r];
    for (std::size_t j = 0; j < run.t.size(); ++j) {
      fields.clear();
      fields.push_back(std::to_string(r));
      fields.push_back(format_real(run.t[j]));
      fields.push_back(std::to_string(run.xi_size[j]));
      fields.push_back(run.n_t.empty() ? std::string() : std::to_string(run.n_t[j]));
      for (std::size_t s = 0; s < sites.size(); ++s) fields.push_back(run.occupancy[j][s] ? "1" : "0");
      csv.row(fields);
    }
  }
}

void write_voter_csv(std::ostream& out, std::span<const VoterTrajectory> runs) {
  CsvWriter csv(out);
  csv.row({"replicate", "t", "nhat"});
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (std::size_t j = 0; j < runs[r].t.size(); ++j)
      csv.row({std::to_string(r), format_real(runs[r].t[j]), std::to_string(runs[r].nhat[j])});
}

}  // namespace crw
