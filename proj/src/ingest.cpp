#include "tnpar/ingest.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tnpar {

double CountTensor::total() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

CountTensor discretize(const std::vector<EventRecord>& events, double delta, double horizon,
                       int type_count, int node_count) {
  if (delta <= 0.0) throw std::invalid_argument("discretize: delta must be > 0");
  if (horizon < 0.0) throw std::invalid_argument("discretize: horizon must be >= 0");
  int bins = static_cast<int>(std::ceil(horizon / delta));
  if (bins < 1) bins = 1;
  CountTensor out(bins, type_count, node_count, delta);
  for (size_t idx = 0; idx < events.size(); ++idx) {
    const EventRecord& e = events[idx];
    auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << "discretize: record " << idx << " (type=" << e.event_type << ", node=" << e.node
          << ", t=" << e.timestamp << "): " << what;
      throw std::invalid_argument(msg.str());
    };
    if (e.event_type < 0 || e.event_type >= type_count) fail("event_type out of range");
    if (e.node < 0 || e.node >= node_count) fail("node out of range");
    if (e.timestamp < 0.0 || e.timestamp > horizon) fail("timestamp outside [0, horizon]");
    // bin t covers ((t-1)*delta, t*delta]; a timestamp of exactly 0 goes to bin 1
    int bin = static_cast<int>(std::ceil(e.timestamp / delta));
    if (bin < 1) bin = 1;
    if (bin > bins) bin = bins;
    out.at(bin - 1, e.event_type, e.node) += 1.0;
  }
  return out;
}

std::vector<WindowSample> make_windows(const CountTensor& tensor, int omega) {
  if (omega < 1) throw std::invalid_argument("make_windows: omega must be >= 1");
  std::vector<WindowSample> out;
  out.reserve(tensor.bin_count);
  const Mat zero(tensor.type_count, tensor.node_count);
  for (int t = 1; t <= tensor.bin_count; ++t) {
    WindowSample s;
    s.t_index = t;
    s.target = Mat(tensor.type_count, tensor.node_count);
    for (int v = 0; v < tensor.type_count; ++v)
      for (int n = 0; n < tensor.node_count; ++n) s.target(v, n) = tensor.at(t - 1, v, n);
    s.history.reserve(omega);
    for (int w = 1; w <= omega; ++w) {
      int bin = t - w;
      if (bin < 1) {
        s.history.push_back(zero);
      } else {
        Mat h(tensor.type_count, tensor.node_count);
        for (int v = 0; v < tensor.type_count; ++v)
          for (int n = 0; n < tensor.node_count; ++n) h(v, n) = tensor.at(bin - 1, v, n);
        s.history.push_back(std::move(h));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

CountTensor merge_nodes(const CountTensor& tensor) {
  CountTensor out(tensor.bin_count, tensor.type_count, 1, tensor.delta);
  for (int t = 0; t < tensor.bin_count; ++t)
    for (int v = 0; v < tensor.type_count; ++v) {
      double s = 0.0;
      for (int n = 0; n < tensor.node_count; ++n) s += tensor.at(t, v, n);
      out.at(t, v, 0) = s;
    }
  return out;
}

std::vector<EventRecord> load_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("event_type,node,timestamp", 0) != 0)
    throw std::runtime_error("events file missing event_type,node,timestamp header: " + path);
  std::vector<EventRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    EventRecord e;
    char c1, c2;
    if (!(ss >> e.event_type >> c1 >> e.node >> c2 >> e.timestamp) || c1 != ',' || c2 != ',')
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(lineno));
    out.push_back(e);
  }
  return out;
}

void save_events_csv(const std::vector<EventRecord>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write events file: " + path);
  out << "event_type,node,timestamp\n";
  out << std::setprecision(17);
  for (const EventRecord& e : events)
    out << e.event_type << "," << e.node << "," << e.timestamp << "\n";
}

}  // namespace tnpar
