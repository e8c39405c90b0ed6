#include "ahc/trace_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ahc/csv.hpp"

namespace ahc {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error("invalid number '" + std::string(field) + "'");
  return v;
}

long long parse_int(std::string_view field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error("invalid integer '" + std::string(field) + "'");
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
constexpr std::string_view kHeader = "tick,ue_id,x,y,v,a,j,bearing_rate,mode_label";
}

void write_traces_csv(std::ostream& out, const std::vector<Trace>& traces) {
  out << kHeader << '\n';
  for (const auto& trace : traces) {
    for (const auto& s : trace.samples) {
      out << s.tick << ',' << trace.ue_id << ',' << format_double(s.position.x) << ','
          << format_double(s.position.y) << ',' << format_double(s.kin.speed) << ','
          << format_double(s.kin.accel) << ',' << format_double(s.kin.jerk) << ','
          << format_double(s.kin.bearing_rate) << ',' << mode_name(s.mode) << '\n';
    }
  }
}

void write_traces_csv(const std::filesystem::path& path, const std::vector<Trace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_traces_csv(out, traces);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<Trace> read_traces_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw std::runtime_error("unexpected trace CSV header: " + line);

  std::map<int, Trace> by_ue;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9)
      throw std::runtime_error("trace CSV line " + std::to_string(line_no) + ": expected 9 fields");
    TraceSample s;
    s.tick = static_cast<int>(parse_int(f[0]));
    const int ue = static_cast<int>(parse_int(f[1]));
    s.position = {parse_double(f[2]), parse_double(f[3])};
    s.kin = {parse_double(f[4]), parse_double(f[5]), parse_double(f[6]), parse_double(f[7])};
    s.mode = parse_mode(f[8]);
    auto& trace = by_ue[ue];
    trace.ue_id = ue;
    trace.mode = s.mode;
    trace.samples.push_back(s);
  }
  std::vector<Trace> out;
  out.reserve(by_ue.size());
  for (auto& [ue, trace] : by_ue) {
    std::stable_sort(trace.samples.begin(), trace.samples.end(),
                     [](const TraceSample& a, const TraceSample& b) { return a.tick < b.tick; });
    out.push_back(std::move(trace));
  }
  return out;
}

std::vector<Trace> read_traces_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_traces_csv(in);
}

}  // namespace ahc
