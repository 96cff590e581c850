#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chaining/error.hpp"
#include "chaining/functionals.hpp"
#include "chaining/gaussian.hpp"
#include "chaining/metric_space.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/vlc.hpp"
#include "chaining/weights.hpp"

namespace chaining {

using json = nlohmann::json;

/// Unreadable or malformed input file. Parse failures carry "source:line:column".
class InputError : public Error {
 public:
  using Error::Error;
};

json parse_json(std::string_view text, const std::string& source = "<input>");
json read_json(const std::string& path);
/// "-" writes to stdout.
void write_text(const std::string& path, const std::string& content);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

/// {"labels", "dist"} or {"kind": "euclidean", "points", ["labels"]}.
MetricSpace metric_from_json(const json& j);
json metric_to_json(const MetricSpace& space);

/// {"labels", "cov"} or {"kind": "rbf", "points", "lengthscale", ["labels"]}.
GaussianModel model_from_json(const json& j);
json model_to_json(const GaussianModel& model);

/// {"labels", "weights"}, matched to the space by label; or the string "uniform".
ProbabilityMeasure measure_from_json(const json& j, const std::vector<std::string>& labels);
json measure_to_json(const ProbabilityMeasure& mu, const std::vector<std::string>& labels);

/// "dyadic", a bare list, or {"p": [...], "tail": {"mass", "ratio"}}.
WeightSequence weights_from_json(const json& j);
json weights_to_json(const WeightSequence& p);

json tree_to_json(const PartitionTree& tree, const std::vector<std::string>& labels);
PartitionTree tree_from_json(const json& j, const std::vector<std::string>& labels);

/// The tree plus, per level, (cell id, representative, integer length, ideal length).
json vlc_to_json(const VlcSequence& vlc, const std::vector<std::string>& labels);
VlcSequence vlc_from_json(const json& j, const std::vector<std::string>& labels);

json report_to_json(const BoundReport& report);
/// Columns point, functional, value, tail_bound.
std::string report_to_csv(const BoundReport& report);
/// Bar chart of the per-point values.
std::string report_to_svg(const BoundReport& report);

/// Columns iteration, objective.
std::string trace_to_csv(const std::vector<double>& trace);

}  // namespace chaining
