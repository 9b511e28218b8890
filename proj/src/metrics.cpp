#include "ptrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "ptrack/assignment.hpp"
#include "ptrack/error.hpp"
#include "ptrack/io.hpp"

namespace ptrack {

namespace {

constexpr double kBoxHalf = 10.0;
constexpr double kTrackletAcceptance = 0.5;

void check_counts(std::span<const double> gt, std::span<const double> pred) {
  if (gt.size() != pred.size()) throw Error(Errc::InvalidInput, "count lists differ in length");
  if (gt.empty()) throw Error(Errc::InvalidInput, "count lists are empty");
  for (double y : gt) {
    if (!(y >= 0.0)) throw Error(Errc::InvalidInput, "ground-truth counts must be >= 0");
  }
}

using FrameIndex = std::map<std::int64_t, std::vector<std::pair<std::uint64_t, Point>>>;

FrameIndex by_frame(const TrajectorySet& set) {
  FrameIndex index;
  for (const auto& [id, pts] : set.tracks) {
    for (const TrajectoryPoint& p : pts) index[p.frame].emplace_back(id, p.position);
  }
  return index;
}

/// Distances on frames both tracklets share, plus the size of their frame union.
struct PairOverlap {
  std::vector<double> distances;
  std::size_t union_frames = 0;
};

PairOverlap overlap(const std::vector<TrajectoryPoint>& a, const std::vector<TrajectoryPoint>& b) {
  PairOverlap o;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    ++o.union_frames;
    if (j == b.size() || (i < a.size() && a[i].frame < b[j].frame)) {
      ++i;
    } else if (i == a.size() || b[j].frame < a[i].frame) {
      ++j;
    } else {
      o.distances.push_back(distance(a[i].position, b[j].position));
      ++i;
      ++j;
    }
  }
  return o;
}

/// All-point interpolated AP of a ranked TP/FP list against `positives`.
double average_precision(const std::vector<char>& is_tp, std::size_t positives) {
  if (positives == 0) return is_tp.empty() ? 1.0 : 0.0;
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < is_tp.size(); ++k) {
    if (is_tp[k]) ++tp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  // Monotone precision envelope, then area under the recall steps.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

}  // namespace

void TrajectorySet::add(std::uint64_t id, const TrajectoryPoint& point) {
  std::vector<TrajectoryPoint>& pts = tracks[id];
  if (!pts.empty() && point.frame <= pts.back().frame) {
    throw Error(Errc::InvalidInput, "frames must be strictly increasing within trajectory " +
                                        std::to_string(id));
  }
  pts.push_back(point);
}

double tr_mae(std::span<const double> gt_counts, std::span<const double> pred_counts) {
  check_counts(gt_counts, pred_counts);
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_counts.size(); ++i) sum += std::abs(gt_counts[i] - pred_counts[i]);
  return sum / static_cast<double>(gt_counts.size());
}

double tr_nmae(std::span<const double> gt_counts, std::span<const double> pred_counts) {
  check_counts(gt_counts, pred_counts);
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_counts.size(); ++i) {
    if (gt_counts[i] == 0.0) {
      throw Error(Errc::DivisionDomain, "Tr-nMAE is undefined for a zero ground-truth count");
    }
    sum += std::abs(gt_counts[i] - pred_counts[i]) / gt_counts[i];
  }
  return sum / static_cast<double>(gt_counts.size());
}

std::size_t id_switches(const TrajectorySet& gt, const TrajectorySet& pred, double gate) {
  const FrameIndex gt_frames = by_frame(gt);
  const FrameIndex pred_frames = by_frame(pred);
  std::map<std::uint64_t, std::uint64_t> last_match;
  std::size_t switches = 0;
  for (const auto& [frame, gt_pts] : gt_frames) {
    const auto it = pred_frames.find(frame);
    if (it == pred_frames.end()) continue;
    const auto& pred_pts = it->second;
    std::vector<Point> a, b;
    for (const auto& [id, p] : gt_pts) a.push_back(p);
    for (const auto& [id, p] : pred_pts) b.push_back(p);
    const AssignmentResult res = solve_assignment(build_cost_matrix(a, b), gate);
    for (const Match& m : res.matches) {
      const std::uint64_t gt_id = gt_pts[m.track].first;
      const std::uint64_t pred_id = pred_pts[m.detection].first;
      const auto prev = last_match.find(gt_id);
      if (prev != last_match.end() && prev->second != pred_id) ++switches;
      last_match[gt_id] = pred_id;
    }
  }
  return switches;
}

std::vector<double> t_map_thresholds() {
  std::vector<double> taus(25);
  std::iota(taus.begin(), taus.end(), 1.0);
  return taus;
}

std::vector<double> t_ap_curve(const TrajectorySet& gt, const TrajectorySet& pred,
                               std::span<const double> taus) {
  struct Ranked {
    std::uint64_t id;
    double mean_conf;
  };
  std::vector<Ranked> ranked;
  for (const auto& [id, pts] : pred.tracks) {
    double sum = 0.0;
    for (const TrajectoryPoint& p : pts) {
      if (!p.confidence) {
        throw Error(Errc::InvalidInput, "predicted trajectory " + std::to_string(id) +
                                            " lacks confidences");
      }
      sum += *p.confidence;
    }
    ranked.push_back({id, pts.empty() ? 0.0 : sum / static_cast<double>(pts.size())});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.mean_conf > b.mean_conf; });

  std::vector<std::uint64_t> gt_ids;
  for (const auto& [id, pts] : gt.tracks) gt_ids.push_back(id);

  // Overlaps are threshold independent; only the hit counts change.
  std::vector<std::vector<PairOverlap>> overlaps(ranked.size());
  for (std::size_t p = 0; p < ranked.size(); ++p) {
    const auto& pp = pred.tracks.at(ranked[p].id);
    overlaps[p].reserve(gt_ids.size());
    for (std::uint64_t g : gt_ids) overlaps[p].push_back(overlap(pp, gt.tracks.at(g)));
  }

  std::vector<double> result;
  for (double tau : taus) {
    if (!(tau > 0.0)) throw Error(Errc::InvalidInput, "tau must be > 0");
    std::vector<char> gt_taken(gt_ids.size(), 0);
    std::vector<char> is_tp;
    for (std::size_t p = 0; p < ranked.size(); ++p) {
      double best = -1.0;
      std::size_t best_g = 0;
      for (std::size_t g = 0; g < gt_ids.size(); ++g) {
        if (gt_taken[g]) continue;
        const PairOverlap& o = overlaps[p][g];
        const auto hits = std::count_if(o.distances.begin(), o.distances.end(),
                                        [tau](double d) { return d <= tau; });
        const double score =
            o.union_frames == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(o.union_frames);
        if (score > best) {
          best = score;
          best_g = g;
        }
      }
      const bool tp = best >= kTrackletAcceptance;
      if (tp) gt_taken[best_g] = 1;
      is_tp.push_back(tp ? 1 : 0);
    }
    result.push_back(average_precision(is_tp, gt_ids.size()));
  }
  return result;
}

double t_ap(const TrajectorySet& gt, const TrajectorySet& pred, double tau) {
  const double taus[] = {tau};
  return t_ap_curve(gt, pred, taus).front();
}

double t_map(const TrajectorySet& gt, const TrajectorySet& pred) {
  const std::vector<double> curve = t_ap_curve(gt, pred, t_map_thresholds());
  return std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(Errc::InvalidInput, "pearson inputs differ in length");
  if (xs.size() < 2) throw Error(Errc::InvalidInput, "pearson needs at least two samples");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(Errc::UndefinedCorrelation, "pearson is undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double SequenceMetrics::t_map() const {
  if (t_ap.empty()) return 0.0;
  return std::accumulate(t_ap.begin(), t_ap.end(), 0.0) / static_cast<double>(t_ap.size());
}

SequenceMetrics evaluate_sequence(std::string name, const TrajectorySet& gt, const TrajectorySet& pred,
                                  double idsw_gate) {
  SequenceMetrics m;
  m.name = std::move(name);
  m.gt_count = gt.count();
  m.pred_count = pred.count();
  const double y[] = {static_cast<double>(m.gt_count)};
  const double yhat[] = {static_cast<double>(m.pred_count)};
  m.tr_ae = tr_mae(y, yhat);
  m.tr_nae = tr_nmae(y, yhat);
  m.id_sw = id_switches(gt, pred, idsw_gate);
  m.t_ap = t_ap_curve(gt, pred, t_map_thresholds());
  return m;
}

MetricsReport aggregate(std::vector<SequenceMetrics> sequences) {
  if (sequences.empty()) throw Error(Errc::InvalidInput, "no sequences to aggregate");
  MetricsReport r;
  r.sequences = std::move(sequences);
  const double n = static_cast<double>(r.sequences.size());
  std::vector<double> y, yhat;
  for (const SequenceMetrics& s : r.sequences) {
    y.push_back(static_cast<double>(s.gt_count));
    yhat.push_back(static_cast<double>(s.pred_count));
    r.id_sw_total += s.id_sw;
    r.t_map += s.t_map();
    r.t_ap10 += s.t_ap_at10();
  }
  r.tr_mae = tr_mae(y, yhat);
  r.tr_nmae = tr_nmae(y, yhat);
  double var = 0.0;
  for (const SequenceMetrics& s : r.sequences) var += (s.tr_nae - r.tr_nmae) * (s.tr_nae - r.tr_nmae);
  r.tr_nmae_std = std::sqrt(var / n);
  r.id_sw_mean = static_cast<double>(r.id_sw_total) / n;
  r.t_map /= n;
  r.t_ap10 /= n;
  return r;
}

std::string to_key_value(const MetricsReport& r) {
  std::ostringstream os;
  os << "sequences = " << r.sequences.size() << '\n'
     << "tr_mae = " << format_number(r.tr_mae) << '\n'
     << "tr_nmae = " << format_number(r.tr_nmae) << '\n'
     << "tr_nmae_std = " << format_number(r.tr_nmae_std) << '\n'
     << "id_sw_total = " << r.id_sw_total << '\n'
     << "id_sw_mean = " << format_number(r.id_sw_mean) << '\n'
     << "t_ap10 = " << format_number(r.t_ap10) << '\n'
     << "t_map = " << format_number(r.t_map) << '\n';
  for (std::size_t i = 0; i < r.sequences.size(); ++i) {
    const SequenceMetrics& s = r.sequences[i];
    const std::string p = "seq." + std::to_string(i) + ".";
    os << p << "name = " << s.name << '\n'
       << p << "gt_count = " << s.gt_count << '\n'
       << p << "pred_count = " << s.pred_count << '\n'
       << p << "tr_ae = " << format_number(s.tr_ae) << '\n'
       << p << "tr_nae = " << format_number(s.tr_nae) << '\n'
       << p << "id_sw = " << s.id_sw << '\n'
       << p << "t_ap10 = " << format_number(s.t_ap_at10()) << '\n'
       << p << "t_map = " << format_number(s.t_map()) << '\n';
  }
  return os.str();
}

std::string to_table(const MetricsReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %6s %6s %8s %8s %7s %8s %8s\n", "sequence", "y", "y_hat",
                "Tr-AE", "Tr-nAE", "ID-SW", "T-AP@10", "T-mAP");
  os << line;
  for (const SequenceMetrics& s : r.sequences) {
    std::snprintf(line, sizeof line, "%-24s %6zu %6zu %8.2f %8.3f %7zu %8.2f %8.2f\n",
                  s.name.substr(0, 24).c_str(), s.gt_count, s.pred_count, s.tr_ae, s.tr_nae, s.id_sw,
                  100.0 * s.t_ap_at10(), 100.0 * s.t_map());
    os << line;
  }
  std::snprintf(line, sizeof line, "%-24s %6s %6s %8.2f %8.3f %7.1f %8.2f %8.2f\n", "mean", "", "",
                r.tr_mae, r.tr_nmae, r.id_sw_mean, 100.0 * r.t_ap10, 100.0 * r.t_map);
  os << line;
  return os.str();
}

std::string export_interchange(const TrajectorySet& pred) {
  std::vector<std::tuple<std::int64_t, std::uint64_t, const TrajectoryPoint*>> rows;
  for (const auto& [id, pts] : pred.tracks) {
    for (const TrajectoryPoint& p : pts) rows.emplace_back(p.frame, id, &p);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::string out = "frame,id,bb_left,bb_top,bb_width,bb_height,conf\n";
  for (const auto& [frame, id, p] : rows) {
    out += std::to_string(frame) + ',' + std::to_string(id) + ',' +
           format_number(p->position.x - kBoxHalf) + ',' + format_number(p->position.y - kBoxHalf) + ',' +
           format_number(2.0 * kBoxHalf) + ',' + format_number(2.0 * kBoxHalf) + ',' +
           (p->confidence ? format_number(*p->confidence) : std::string("-1")) + '\n';
  }
  return out;
}

TrajectorySet parse_interchange(std::string_view text) {
  const CsvTable table = parse_csv(text, {"frame", "id", "bb_left", "bb_top", "bb_width", "bb_height", "conf"});
  std::vector<std::tuple<std::uint64_t, std::int64_t, TrajectoryPoint>> rows;
  for (const CsvRow& row : table.rows) {
    TrajectoryPoint p;
    p.frame = row.frame(0);
    const std::uint64_t id = row.id(1);
    const double w = row.number(4);
    const double h = row.number(5);
    p.position = {quantize(row.number(2) + 0.5 * w), quantize(row.number(3) + 0.5 * h)};
    const double conf = row.number(6);
    if (conf >= 0.0) p.confidence = conf;
    rows.emplace_back(id, p.frame, p);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  TrajectorySet set;
  for (const auto& [id, frame, p] : rows) set.add(id, p);
  return set;
}

}  // namespace ptrack
