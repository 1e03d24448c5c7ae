// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "mathesis/error.hpp"

namespace mathesis::bench {

double success_rate_at_k(int correct, int k) {
  if (k < 1) {
    throw Error(Errc::InvalidCounts, "k must be at least 1");
  }
  if (correct < 0 || correct > k) {
    throw Error(Errc::InvalidCounts, "correct count must lie in [0, k]");
  }
  const double miss = 1.0 - static_cast<double>(correct) / static_cast<double>(k);
  return 1.0 - std::pow(miss, k);
}

namespace {

struct SliceAccumulator {
  int problems = 0;
  double lc_sum = 0.0;
  double lsc_sum = 0.0;
  int proved = 0;

  SliceMetrics finish(std::string label) const {
    SliceMetrics m;
    m.label = std::move(label);
    m.problems = problems;
    if (problems > 0) {
      m.lc_at_k = lc_sum / problems;
      m.lsc_at_k = lsc_sum / problems;
      m.proved_fraction = static_cast<double>(proved) / problems;
    }
    return m;
  }
};

}  // namespace

EvalReport aggregate_report(const std::vector<pipeline::AttemptRecord>& records,
                            const std::vector<Problem>& problems,
                            std::optional<int> k) {
  std::map<std::string, const Problem*> by_id;
  for (const Problem& p : problems) {
    by_id.emplace(p.id, &p);
  }
  for (const auto& record : records) {
    if (by_id.find(record.problem_id) == by_id.end()) {
      throw Error(Errc::UnknownProblemId,
                  "ledger references unknown problem '" + record.problem_id + "'");
    }
  }

  int effective_k = k.value_or(0);
  if (!k) {
    for (const auto& record : records) {
      effective_k = std::max(effective_k, static_cast<int>(record.candidates.size()));
    }
    if (effective_k == 0) {
      effective_k = 1;
    }
  }
  if (effective_k < 1) {
    throw Error(Errc::InvalidCounts, "k must be at least 1");
  }

  std::map<std::string, const pipeline::AttemptRecord*> record_by_id;
  for (const auto& record : records) {
    record_by_id[record.problem_id] = &record;
  }

  EvalReport report;
  report.k = effective_k;
  SliceAccumulator overall;
  std::map<std::string, SliceAccumulator> per_category;

  for (const Problem& problem : problems) {
    SliceAccumulator& slice = per_category[problem.category];
    ++overall.problems;
    ++slice.problems;

    auto it = record_by_id.find(problem.id);
    if (it == record_by_id.end()) {
      continue;
    }
    const pipeline::AttemptRecord& record = *it->second;

    int compiled = 0;
    int validated = 0;
    for (const auto& candidate : record.candidates) {
      if (candidate.lean_check.passed()) {
        ++compiled;
      }
      if (candidate.validation_passed()) {
        ++validated;
      }
    }
    compiled = std::min(compiled, effective_k);
    validated = std::min(validated, effective_k);

    const double lc = success_rate_at_k(compiled, effective_k);
    const double lsc = success_rate_at_k(validated, effective_k);
    overall.lc_sum += lc;
    overall.lsc_sum += lsc;
    slice.lc_sum += lc;
    slice.lsc_sum += lsc;
    if (record.outcome == pipeline::ProblemOutcome::Proved) {
      ++overall.proved;
      ++slice.proved;
    }
  }

  report.overall = overall.finish("overall");
  for (std::string_view category : problem_categories()) {
    auto it = per_category.find(std::string(category));
    if (it != per_category.end()) {
      report.per_category.push_back(it->second.finish(it->first));
    }
  }
  return report;
}

namespace {

nlohmann::ordered_json slice_to_json(const SliceMetrics& slice) {
  return nlohmann::ordered_json{
      {"label", slice.label},
      {"problems", slice.problems},
      {"lc_at_k", slice.lc_at_k},
      {"lsc_at_k", slice.lsc_at_k},
      {"proved_fraction", slice.proved_fraction},
  };
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json categories = nlohmann::ordered_json::array();
  for (const SliceMetrics& slice : report.per_category) {
    categories.push_back(slice_to_json(slice));
  }
  return nlohmann::ordered_json{
      {"schema", "mathesis-eval-report/1"},
      {"k", report.k},
      {"overall", slice_to_json(report.overall)},
      {"per_category", std::move(categories)},
  };
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "Evaluation report (k=" << report.k << ")\n";
  os << "-------------------------------------------------------------------------\n";
  os << std::left << std::setw(34) << "slice" << std::right << std::setw(6) << "n"
     << std::setw(10) << "LC@k" << std::setw(10) << "LSC@k" << std::setw(12)
     << "proved" << '\n';

  auto row = [&os](const SliceMetrics& slice) {
    os << std::left << std::setw(34) << slice.label << std::right << std::setw(6)
       << slice.problems << std::setw(10) << slice.lc_at_k << std::setw(10)
       << slice.lsc_at_k << std::setw(12) << slice.proved_fraction << '\n';
  };
  row(report.overall);
  os << "-------------------------------------------------------------------------\n";
  for (const SliceMetrics& slice : report.per_category) {
    row(slice);
  }
  return os.str();
}

CheckerAgreement checker_agreement(const std::vector<bool>& predictions,
                                   const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) {
    throw Error(Errc::LengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) {
    throw Error(Errc::InvalidCounts, "agreement requires at least one sample");
  }

  CheckerAgreement out;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool p = predictions[i];
    const bool l = labels[i];
    if (p && l) {
      ++out.true_positive;
    } else if (p && !l) {
      ++out.false_positive;
    } else if (!p && l) {
      ++out.false_negative;
    } else {
      ++out.true_negative;
    }
  }

  const int total = static_cast<int>(predictions.size());
  out.accuracy = static_cast<double>(out.true_positive + out.true_negative) / total;
  const int predicted_positive = out.true_positive + out.false_positive;
  if (predicted_positive > 0) {
    out.precision = static_cast<double>(out.true_positive) / predicted_positive;
  }
  const int actual_positive = out.true_positive + out.false_negative;
  if (actual_positive > 0) {
    out.recall = static_cast<double>(out.true_positive) / actual_positive;
  }
  return out;
}

}  // namespace mathesis::bench
