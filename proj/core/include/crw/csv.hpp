#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crw/crw_sim.hpp"
#include "crw/voter.hpp"

namespace crw {

// Shortest round-trip is not required; every real is written with 17
// significant digits and '.' as decimal separator.
std::string format_real(double x);

// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are
// wrapped in quotes with embedded quotes doubled.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(&out) {}
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) { row(std::span<const std::string>(fields.begin(), fields.size())); }
  std::size_t rows() const { return rows_; }

 private:
  std::ostream* out_;
  std::size_t rows_ = 0;
};

// replicate,t,xi_size,N_t,occ_<v>...; replicate-major, time-minor.
void write_trajectory_csv(std::ostream& out, std::span<const CrwTrajectory> runs, std::span<const Vertex> sites);
// replicate,t,nhat
void write_voter_csv(std::ostream& out, std::span<const VoterTrajectory> runs);

}  // namespace crw
