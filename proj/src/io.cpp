#include "chaining/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace chaining {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field \"") + key + "\": " + e.what());
  }
}

std::vector<std::string> optional_labels(const json& j, std::size_t n, const char* prefix) {
  if (j.contains("labels")) return field<std::vector<std::string>>(j, "labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Eigen::MatrixXd square_matrix(const json& j, const char* key) {
  const auto rows = field<std::vector<std::vector<double>>>(j, key);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n)
      throw InputError(std::string("\"") + key + "\" is not a square matrix");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t lookup(const std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw LookupError("unknown label \"" + label + "\"");
  return static_cast<std::size_t>(it - labels.begin());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << column << ": malformed JSON (" << e.what() << ")";
    throw InputError(os.str());
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

std::string format_double(double x) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

MetricSpace metric_from_json(const json& j) {
  if (!j.is_object()) throw InputError("metric space must be a JSON object");
  if (j.contains("kind")) {
    const auto kind = field<std::string>(j, "kind");
    if (kind != "euclidean") throw InputError("unknown metric generator \"" + kind + "\"");
    const auto points = field<std::vector<std::vector<double>>>(j, "points");
    return MetricSpace::euclidean(points, optional_labels(j, points.size(), "p"));
  }
  Eigen::MatrixXd dist = square_matrix(j, "dist");
  return MetricSpace(field<std::vector<std::string>>(j, "labels"), std::move(dist));
}

json metric_to_json(const MetricSpace& space) {
  return {{"labels", space.labels()}, {"dist", matrix_rows(space.matrix())}};
}

GaussianModel model_from_json(const json& j) {
  if (!j.is_object()) throw InputError("covariance must be a JSON object");
  if (j.contains("kind")) {
    const auto kind = field<std::string>(j, "kind");
    if (kind != "rbf") throw InputError("unknown covariance generator \"" + kind + "\"");
    const auto points = field<std::vector<std::vector<double>>>(j, "points");
    return GaussianModel::rbf(points, field<double>(j, "lengthscale"),
                              optional_labels(j, points.size(), "p"));
  }
  Eigen::MatrixXd cov = square_matrix(j, "cov");
  return GaussianModel(field<std::vector<std::string>>(j, "labels"), std::move(cov));
}

json model_to_json(const GaussianModel& model) {
  return {{"labels", model.labels()}, {"cov", matrix_rows(model.covariance())}};
}

ProbabilityMeasure measure_from_json(const json& j, const std::vector<std::string>& labels) {
  if (j.is_string() && j.get<std::string>() == "uniform") return ProbabilityMeasure::uniform(labels.size());
  const auto names = field<std::vector<std::string>>(j, "labels");
  const auto weights = field<std::vector<double>>(j, "weights");
  if (names.size() != weights.size()) throw InputError("measure labels and weights differ in length");
  std::vector<double> w(labels.size(), 0.0);
  std::vector<bool> seen(labels.size(), false);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::size_t at = lookup(labels, names[i]);
    if (seen[at]) throw InputError("measure lists \"" + names[i] + "\" twice");
    seen[at] = true;
    w[at] = weights[i];
  }
  return ProbabilityMeasure(std::move(w));
}

json measure_to_json(const ProbabilityMeasure& mu, const std::vector<std::string>& labels) {
  return {{"labels", labels}, {"weights", mu.weights()}};
}

WeightSequence weights_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "dyadic") return WeightSequence::dyadic();
    throw InputError("unknown weight sequence \"" + j.get<std::string>() + "\"");
  }
  if (j.is_array()) return WeightSequence::from_list(j.get<std::vector<double>>());
  const auto prefix = j.contains("p") ? field<std::vector<double>>(j, "p") : std::vector<double>{};
  if (!j.contains("tail")) return WeightSequence::from_list(prefix);
  const json& tail = j.at("tail");
  return WeightSequence(prefix, field<double>(tail, "mass"), field<double>(tail, "ratio"));
}

json weights_to_json(const WeightSequence& p) {
  json j{{"p", p.prefix()}};
  if (p.has_tail()) j["tail"] = {{"mass", p.tail_mass()}, {"ratio", p.tail_ratio()}};
  return j;
}

json tree_to_json(const PartitionTree& tree, const std::vector<std::string>& labels) {
  json levels = json::array();
  for (const auto& level : tree.levels()) {
    json cells = json::array();
    for (const Cell& c : level) {
      json members = json::array();
      for (std::size_t p : c.members) members.push_back(labels.at(p));
      cells.push_back({{"members", members},
                       {"representative", labels.at(c.representative)},
                       {"parent", c.parent == kNoParent ? json(nullptr) : json(c.parent)},
                       {"child_index", c.child_index}});
    }
    levels.push_back(std::move(cells));
  }
  return {{"r", tree.ratio()},
          {"terminal", tree.terminal()},
          {"root_diameter", tree.root_diameter()},
          {"labels", labels},
          {"levels", levels}};
}

PartitionTree tree_from_json(const json& j, const std::vector<std::string>& labels) {
  std::vector<std::vector<Cell>> levels;
  if (!j.contains("levels") || !j.at("levels").is_array()) throw InputError("tree needs a \"levels\" array");
  for (const json& level : j.at("levels")) {
    std::vector<Cell> cells;
    for (const json& c : level) {
      Cell cell;
      for (const auto& m : field<std::vector<std::string>>(c, "members"))
        cell.members.push_back(lookup(labels, m));
      std::sort(cell.members.begin(), cell.members.end());
      cell.representative = lookup(labels, field<std::string>(c, "representative"));
      cell.parent = c.contains("parent") && !c.at("parent").is_null() ? field<std::size_t>(c, "parent")
                                                                       : kNoParent;
      cell.child_index = c.contains("child_index") ? field<std::size_t>(c, "child_index") : 0;
      cells.push_back(std::move(cell));
    }
    levels.push_back(std::move(cells));
  }
  return PartitionTree(field<double>(j, "r"), labels.size(), std::move(levels),
                       j.value("terminal", false), j.value("root_diameter", 1.0));
}

json vlc_to_json(const VlcSequence& vlc, const std::vector<std::string>& labels) {
  const PartitionTree& tree = vlc.tree();
  json levels = json::array();
  for (std::size_t k = 0; k <= tree.depth(); ++k) {
    json rows = json::array();
    const auto& cells = tree.levels()[k];
    for (std::size_t b = 0; b < cells.size(); ++b)
      rows.push_back({{"cell", b},
                      {"representative", labels.at(cells[b].representative)},
                      {"length", vlc.level_lengths(k)[b]},
                      {"ideal", vlc.level_ideal(k)[b]}});
    levels.push_back(std::move(rows));
  }
  return {{"construction", vlc.construction()},
          {"tail_increment", vlc.tail_increment()},
          {"tree", tree_to_json(tree, labels)},
          {"levels", levels}};
}

VlcSequence vlc_from_json(const json& j, const std::vector<std::string>& labels) {
  if (!j.contains("tree")) throw InputError("code sequence needs a \"tree\"");
  auto tree = std::make_shared<const PartitionTree>(tree_from_json(j.at("tree"), labels));
  std::vector<std::vector<int>> lengths;
  std::vector<std::vector<double>> ideal;
  if (!j.contains("levels") || !j.at("levels").is_array()) throw InputError("code sequence needs \"levels\"");
  for (const json& level : j.at("levels")) {
    std::vector<int> ls(level.size());
    std::vector<double> is(level.size());
    for (const json& row : level) {
      const auto b = field<std::size_t>(row, "cell");
      if (b >= ls.size()) throw InputError("cell id out of range");
      ls[b] = field<int>(row, "length");
      is[b] = row.contains("ideal") ? field<double>(row, "ideal") : ls[b];
    }
    lengths.push_back(std::move(ls));
    ideal.push_back(std::move(is));
  }
  return VlcSequence(std::move(tree), std::move(lengths), std::move(ideal),
                     j.value("tail_increment", 0), j.value("construction", std::string("custom")));
}

json report_to_json(const BoundReport& report) {
  json rows = json::array();
  for (std::size_t i = 0; i < report.points.size(); ++i)
    rows.push_back({{"point", report.points[i]},
                    {"value", report.values[i]},
                    {"tail_bound", report.tail_bounds[i]}});
  return {{"functional", report.functional}, {"construction", report.construction},
          {"r", report.r},                   {"depth", report.depth},
          {"sup", report.sup},               {"tail_bound", report.tail_bound},
          {"rows", rows}};
}

std::string report_to_csv(const BoundReport& report) {
  std::ostringstream os;
  os << "point,functional,value,tail_bound\n";
  for (std::size_t i = 0; i < report.points.size(); ++i)
    os << report.points[i] << ',' << report.functional << ',' << format_double(report.values[i])
       << ',' << format_double(report.tail_bounds[i]) << '\n';
  return os.str();
}

std::string report_to_svg(const BoundReport& report) {
  const std::size_t n = report.points.size();
  const double bar = 28.0, gap = 8.0, left = 60.0, top = 40.0, height = 240.0;
  const double width = left + static_cast<double>(n) * (bar + gap) + 20.0;
  double scale = 0.0;
  for (double v : report.values)
    if (std::isfinite(v)) scale = std::max(scale, v);
  if (!(scale > 0.0)) scale = 1.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << top + height + 60 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(report.functional)
     << (report.construction.empty() ? "" : " (" + xml_escape(report.construction) + ")")
     << ", sup = " << format_double(report.sup)
     << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << width - 10
     << "\" y2=\"" << top + height << "\" stroke=\"black\"/>\n";
  os << "<text x=\"4\" y=\"" << top + 4 << "\">" << format_double(scale) << "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::isfinite(report.values[i]) ? report.values[i] : scale;
    const double h = height * std::max(0.0, v) / scale;
    const double x = left + static_cast<double>(i) * (bar + gap);
    os << "<rect x=\"" << x << "\" y=\"" << top + height - h << "\" width=\"" << bar
       << "\" height=\"" << h << "\" fill=\"" << (i == report.argmax() ? "#c0392b" : "#4a78b5")
       << "\"><title>" << xml_escape(report.points[i]) << ": " << format_double(report.values[i])
       << "</title></rect>\n";
    os << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + height + 14
       << "\" text-anchor=\"middle\">" << xml_escape(report.points[i]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string trace_to_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "iteration,objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << format_double(trace[i]) << '\n';
  return os.str();
}

}  // namespace chaining
