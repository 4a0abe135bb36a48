#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "smpc/simulation.hpp"

namespace smpc {

inline constexpr const char* kCsvHeader =
    "seed,T,discounted_cost,discounted_constraint,avg_undiscounted_cost,infeasible_count";

void write_csv(std::ostream& out, const std::vector<TrialResult>& trials);

/// Reference quantities printed next to the Monte Carlo means.
struct BoundBlock {
  std::optional<double> J0;
  std::optional<double> epsilon;
  std::optional<double> trZ1Xbar;
  std::optional<double> sigma;
};

/// JSON object with means, stderrs, bounds and named pass/fail verdicts.
std::string summary_json(const AggregateReport& report, const BoundBlock& bounds,
                         const std::map<std::string, bool>& verdicts,
                         const std::optional<AggregateReport>& comparison = std::nullopt);

}  // namespace smpc
