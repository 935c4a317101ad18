#include "advsim/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "advsim/errors.hpp"
#include "advsim/nearest_neighbor.hpp"

namespace advsim {

namespace {

double mean_nearest(const PointCloud& from, const PointCloud& to) {
  const NearestNeighborIndex index(to.points);
  double sum = 0.0;
  for (const Vec3& p : from.points) sum += index.nearest(p).squared_distance;
  return sum / static_cast<double>(from.size());
}

int type_rank(const std::string& type) {
  static const std::array<const char*, 3> order{"perturb", "detach", "attach"};
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (type == order[i]) return static_cast<int>(i);
  }
  return static_cast<int>(order.size());
}

std::string display_name(const ReportRow& row) {
  std::string name = row.attack_type == "perturb"  ? "Point Perturbation"
                     : row.attack_type == "detach" ? "Point Detachment"
                     : row.attack_type == "attach" ? "Point Attachment"
                                                   : row.attack_type;
  if (!row.parameter_unit.empty()) name += " (" + row.parameter_unit + ")";
  return name;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

double chamfer(const PointCloud& p, const PointCloud& q) {
  if (p.empty() || q.empty()) throw UndefinedMetricError("chamfer distance of an empty cloud is undefined");
  return mean_nearest(p, q) + mean_nearest(q, p);
}

double average_precision(std::span<const FrameDetections> detections, std::span<const FrameBoxes> gts,
                         double iou_threshold) {
  std::size_t total_gt = 0;
  for (const auto& g : gts) total_gt += g.size();
  if (total_gt == 0) throw UndefinedMetricError("average precision is undefined without ground truth");

  struct Ref {
    std::size_t frame;
    std::size_t index;
    double score;
  };
  std::vector<Ref> pool;
  for (std::size_t f = 0; f < detections.size() && f < gts.size(); ++f) {
    for (std::size_t i = 0; i < detections[f].size(); ++i) pool.push_back({f, i, detections[f][i].score});
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Ref& a, const Ref& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });

  std::vector<std::vector<unsigned char>> matched(gts.size());
  for (std::size_t f = 0; f < gts.size(); ++f) matched[f].assign(gts[f].size(), 0);

  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const Ref& r = pool[k];
    const BBox3D& box = detections[r.frame][r.index].box;
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < gts[r.frame].size(); ++g) {
      if (matched[r.frame][g]) continue;
      const double iou = bev_iou(box, gts[r.frame][g]);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best >= iou_threshold) {
      matched[r.frame][best_gt] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
  }

  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double map_ratio(std::span<const FrameDetections> clean, std::span<const FrameDetections> adversarial,
                 std::span<const FrameBoxes> gts, double iou_threshold) {
  const double clean_ap = average_precision(clean, gts, iou_threshold);
  if (clean_ap <= 0.0) throw UndefinedMetricError("mAP ratio is undefined when clean mAP is 0");
  return 100.0 * average_precision(adversarial, gts, iou_threshold) / clean_ap;
}

EvalReport build_report(std::vector<ReportRow> rows, std::vector<std::string> datasets,
                        nlohmann::ordered_json detector, double iou_threshold) {
  if (rows.empty()) throw ParameterError("a report needs at least one row");
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    const int ra = type_rank(a.attack_type);
    const int rb = type_rank(b.attack_type);
    if (ra != rb) return ra < rb;
    if (a.attack_type != b.attack_type) return a.attack_type < b.attack_type;
    return a.parameter < b.parameter;
  });
  return {std::move(rows), std::move(datasets), std::move(detector), iou_threshold};
}

std::string render_table(const EvalReport& report) {
  const std::array<std::string, 4> header{"Attack Type", "Parameter", "mAP Ratio (%)", "Chamfer Distance (CD)"};
  std::vector<std::array<std::string, 4>> cells;
  for (const auto& row : report.rows) {
    cells.push_back({display_name(row), fmt("%g", row.parameter), fmt("%.2f", row.map_ratio),
                     std::isfinite(row.mean_cd) ? fmt("%.5f", row.mean_cd) : std::string("n/a")});
  }
  std::array<std::size_t, 4> width{};
  for (std::size_t c = 0; c < 4; ++c) {
    width[c] = header[c].size();
    for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  const auto line = [&](const std::array<std::string, 4>& r) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << r[c] << std::string(width[c] - r[c].size(), ' ');
      } else {
        out << std::string(width[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 6;
  for (std::size_t w : width) total += w;
  out << std::string(total, '-') << '\n';
  for (const auto& r : cells) line(r);
  return out.str();
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"attack_type", r.attack_type},
                    {"parameter", r.parameter},
                    {"parameter_unit", r.parameter_unit},
                    {"map_clean", r.map_clean},
                    {"map_adv", r.map_adv},
                    {"map_ratio", r.map_ratio},
                    {"mean_cd", std::isfinite(r.mean_cd) ? nlohmann::ordered_json(r.mean_cd) : nlohmann::ordered_json()},
                    {"frames", r.frames}});
  }
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  std::istringstream lines(render_table(report));
  for (std::string l; std::getline(lines, l);) table.push_back(l);
  return {{"datasets", report.datasets},
          {"iou_threshold", report.iou_threshold},
          {"detector", report.detector},
          {"rows", rows},
          {"table", table}};
}

}  // namespace advsim
