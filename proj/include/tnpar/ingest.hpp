#pragma once

// Event ingestion: raw (type, node, timestamp) records, their discretization
// into per-bin count tensors, and sliding-window training samples.

#include <string>
#include <vector>

#include "tnpar/graph.hpp"

namespace tnpar {

struct EventRecord {
  int event_type = 0;
  int node = 0;
  double timestamp = 0.0;

  bool operator==(const EventRecord&) const = default;
};

// Occurrence numbers O_t^{v,n} on a (bin x type x node) grid. Bins cover the
// half-open intervals ((t-1)*delta, t*delta]; timestamp 0 lands in bin 1.
// Bin t is stored at index t-1.
struct CountTensor {
  int bin_count = 0;
  int type_count = 0;
  int node_count = 0;
  double delta = 1.0;
  std::vector<double> counts;  // bin-major, then type, then node

  CountTensor() = default;
  CountTensor(int bins, int types, int nodes, double d)
      : bin_count(bins), type_count(types), node_count(nodes), delta(d),
        counts(static_cast<size_t>(bins) * types * nodes, 0.0) {}

  double& at(int bin, int type, int node) {
    return counts[(static_cast<size_t>(bin) * type_count + type) * node_count + node];
  }
  double at(int bin, int type, int node) const {
    return counts[(static_cast<size_t>(bin) * type_count + type) * node_count + node];
  }
  double total() const;
};

// One auto-regressive training sample: the bin-t counts plus the Omega most
// recent history slices, most-recent-first, zero-padded before bin 1.
struct WindowSample {
  int t_index = 0;          // 1-based bin index of the target
  Mat target;               // type_count x node_count
  std::vector<Mat> history; // omega slices, [0] = bin t-1
};

CountTensor discretize(const std::vector<EventRecord>& events, double delta, double horizon,
                       int type_count, int node_count);

std::vector<WindowSample> make_windows(const CountTensor& tensor, int omega);

// Node-sum of all sequences; output has node_count 1.
CountTensor merge_nodes(const CountTensor& tensor);

// CSV with header event_type,node,timestamp.
std::vector<EventRecord> load_events_csv(const std::string& path);
void save_events_csv(const std::vector<EventRecord>& events, const std::string& path);

}  // namespace tnpar
