#include "smpc/report.hpp"

#include <iomanip>

#include "json.hpp"

namespace smpc {

namespace {

using nlohmann::json;

json stats_json(const Stats& s) { return {{"mean", s.mean}, {"stderr", s.stderr_}}; }

json report_json(const AggregateReport& r) {
  return {{"controller", std::string(to_string(r.controller))},
          {"trials", r.n},
          {"T", r.T},
          {"seed0", r.seed0},
          {"discounted_cost", stats_json(r.discounted_cost)},
          {"discounted_constraint", stats_json(r.discounted_constraint)},
          {"avg_undiscounted_cost", stats_json(r.avg_undiscounted_cost)},
          {"infeasible_count", stats_json(r.infeasible_count)},
          {"total_infeasible", r.total_infeasible}};
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << kCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& t : trials) {
    out << t.seed << ',' << t.T << ',' << t.discounted_cost << ',' << t.discounted_constraint
        << ',' << t.avg_undiscounted_cost << ',' << t.infeasible_count << '\n';
  }
}

std::string summary_json(const AggregateReport& report, const BoundBlock& bounds,
                         const std::map<std::string, bool>& verdicts,
                         const std::optional<AggregateReport>& comparison) {
  json root = report_json(report);
  json b = json::object();
  if (bounds.J0) b["J0"] = *bounds.J0;
  if (bounds.epsilon) b["epsilon"] = *bounds.epsilon;
  if (bounds.trZ1Xbar) b["trZ1Xbar"] = *bounds.trZ1Xbar;
  if (bounds.sigma) b["sigma"] = *bounds.sigma;
  root["bounds"] = b;
  if (comparison) root["comparison"] = report_json(*comparison);
  root["verdicts"] = verdicts;
  return root.dump(2);
}

}  // namespace smpc
