#pragma once

// Scoring of a predicted causal graph against ground truth: precision/recall/
// F1, structural Hamming distance and structural intervention distance.
// Self-loops are excluded from all comparisons.

#include <string>

#include "tnpar/graph.hpp"

namespace tnpar {

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int shd = 0;
  int sid = 0;
  bool dag_repair_applied = false;
};

struct Prf {
  double precision, recall, f1;
};

Prf prf(const CausalGraph& pred, const CausalGraph& truth);

int shd(const CausalGraph& pred, const CausalGraph& truth);

// Counts ordered pairs (i,j) for which pred's parent set of i is not a valid
// adjustment set for the effect of i on j in truth (generalized backdoor
// criterion). truth must be a DAG; pred must be a DAG (see dag_repair).
int sid(const CausalGraph& pred, const CausalGraph& truth);

// Removes the weakest cycle edge (lowest max-over-k posterior, ties broken by
// lexicographic edge order) until the graph is acyclic.
CausalGraph dag_repair(const CausalGraph& pred, const CausalTensor& posterior);

// Full report; runs dag_repair on pred before SID if needed.
MetricReport evaluate(const CausalGraph& pred, const CausalGraph& truth,
                      const CausalTensor* posterior = nullptr);

void save_metrics_json(const MetricReport& report, const std::string& path);
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& run_id, const MetricReport& report);

}  // namespace tnpar
