#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ahc/mobility.hpp"

namespace ahc {

/// Header: tick,ue_id,x,y,v,a,j,bearing_rate,mode_label
void write_traces_csv(std::ostream& out, const std::vector<Trace>& traces);
void write_traces_csv(const std::filesystem::path& path, const std::vector<Trace>& traces);

/// Reads a trace CSV back; rows are grouped by ue_id in ascending order and
/// sorted by tick. Throws std::runtime_error on malformed input.
std::vector<Trace> read_traces_csv(std::istream& in);
std::vector<Trace> read_traces_csv(const std::filesystem::path& path);

}  // namespace ahc
