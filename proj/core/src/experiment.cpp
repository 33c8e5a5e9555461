#include "maglocate/experiment.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "maglocate/random.hpp"

namespace maglocate {

SensorArray ArraySource::build() const {
  switch (kind) {
    case Kind::kFamily:
      return reference_layout(family, size, layout);
    case Kind::kGrid:
      return make_grid(grid);
    case Kind::kFile:
      return load_array(file);
  }
  throw ConfigError("unknown array source");
}

std::string ArraySource::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kFamily:
      os << to_string(family) << ":" << size;
      break;
    case Kind::kGrid:
      os << "grid:" << grid.rows << "x" << grid.cols;
      break;
    case Kind::kFile:
      os << "file:" << file;
      break;
  }
  return os.str();
}

std::vector<LabeledPose> sample_poses(const PoseSampler& sampler, std::uint64_t seed) {
  if (sampler.count < 1) throw ConfigError("pose sampler count must be >= 1");
  if ((sampler.upper.array() < sampler.lower.array()).any()) {
    throw ConfigError("pose sampler upper bound lies below the lower bound");
  }
  Rng rng(mix64(seed ^ 0x706f736573ULL));
  std::vector<LabeledPose> poses;
  poses.reserve(static_cast<std::size_t>(sampler.count));
  for (int i = 0; i < sampler.count; ++i) {
    Vec3 position;
    for (int k = 0; k < 3; ++k) position[k] = rng.uniform(sampler.lower[k], sampler.upper[k]);
    Vec3 direction = sampler.orientation;
    if (sampler.random_orientation) {
      do {
        direction = Vec3(rng.normal(), rng.normal(), rng.normal());
      } while (direction.norm() < 1e-12);
    }
    poses.push_back({"P" + std::to_string(i), make_pose(position, direction)});
  }
  return poses;
}

void Scenario::validate() const {
  if (trials < 1) throw ConfigError("scenario '" + name + "': trials must be >= 1");
  if (poses.empty()) throw ConfigError("scenario '" + name + "': no poses");
  std::set<std::string> labels;
  for (const auto& p : poses) {
    if (!labels.insert(p.label).second) {
      throw ConfigError("scenario '" + name + "': duplicate pose label '" + p.label + "'");
    }
    p.pose.validate();
  }
  magnet.validate();
  sensor.validate();
  solver.validate();
  if (filter.window < 1) throw ConfigError("filter window must be >= 1");
  if (filter.groups < 1) throw ConfigError("filter groups must be >= 1");
}

const AggregateRow& ResultTable::overall() const { return group(kAllGroup); }

const AggregateRow& ResultTable::group(const std::string& label) const {
  for (const auto& a : aggregates) {
    if (a.group == label) return a;
  }
  throw InvalidArgument("no aggregate group '" + label + "' in " + scenario);
}

PoseError to_report_units(const PoseError& e) {
  return PoseError{e.position / kMillimeter, e.orientation, e.angle * kRadToDeg};
}

namespace {

AggregateRow summarize(const std::string& scenario, const std::string& group,
                       const std::vector<const ResultRow*>& rows) {
  AggregateRow out;
  out.scenario = scenario;
  out.group = group;
  std::vector<PoseError> errors;
  for (const ResultRow* r : rows) {
    if (r->ok) {
      errors.push_back(to_report_units(r->error));
    } else {
      ++out.n_failed;
    }
  }
  out.n_ok = errors.size();
  if (!errors.empty()) out.summary = aggregate(errors);
  return out;
}

}  // namespace

std::vector<AggregateRow> aggregate_rows(const std::string& scenario, const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  std::vector<std::vector<const ResultRow*>> groups;
  std::vector<const ResultRow*> all;
  for (const auto& r : rows) {
    auto it = std::find(order.begin(), order.end(), r.pose_label);
    if (it == order.end()) {
      order.push_back(r.pose_label);
      groups.emplace_back();
      it = order.end() - 1;
    }
    groups[static_cast<std::size_t>(it - order.begin())].push_back(&r);
    all.push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (std::size_t i = 0; i < order.size(); ++i) out.push_back(summarize(scenario, order[i], groups[i]));
  out.push_back(summarize(scenario, kAllGroup, all));
  return out;
}

namespace {

struct TrialContext {
  const Scenario& scenario;
  const SensorArray& array;
};

// Raw stream after warmup trim.
ReadingStream trial_stream(const TrialContext& ctx, std::size_t pose_index, int trial) {
  const Scenario& s = ctx.scenario;
  const std::uint64_t seed = trial_seed(s.seed, s.name, pose_index, static_cast<std::uint64_t>(trial));
  const ReadingStream stream =
      simulate_stream(ctx.array, s.poses[pose_index].pose, s.magnet, s.sensor, seed, s.filter.frame_count());
  return warmup_trim(stream, s.filter.warmup);
}

ResultRow score(const TrialContext& ctx, const std::string& table_name, std::size_t pose_index, int trial,
                const ReadingSet& frame) {
  const Scenario& s = ctx.scenario;
  ResultRow row;
  row.scenario = table_name;
  row.pose_index = pose_index;
  row.pose_label = s.poses[pose_index].label;
  row.trial = trial;
  try {
    const EstimateReport report = localize(frame, ctx.array, s.magnet, s.solver);
    row.termination = report.termination;
    row.converged = report.converged;
    row.iterations = report.iterations;
    row.final_cost = report.final_cost;
    row.estimate = report.pose;
    if (report.termination == TerminationReason::kNoSignal) {
      row.failure = "no magnetic signal in readings";
    } else {
      row.error = pose_error(report.pose, s.poses[pose_index].pose);
      row.ok = true;
    }
  } catch (const std::exception& e) {
    row.failure = e.what();
  }
  return row;
}

ResultRow failed_row(const Scenario& s, const std::string& table_name, std::size_t pose_index, int trial,
                     const std::string& what) {
  ResultRow row;
  row.scenario = table_name;
  row.pose_index = pose_index;
  row.pose_label = s.poses[pose_index].label;
  row.trial = trial;
  row.failure = what;
  return row;
}

ResultTable finalize(std::string name, std::vector<ResultRow> rows) {
  ResultTable table;
  table.scenario = std::move(name);
  table.rows = std::move(rows);
  table.aggregates = aggregate_rows(table.scenario, table.rows);
  return table;
}

}  // namespace

ResultTable run_scenario(const Scenario& s) {
  s.validate();
  const SensorArray array = s.array.build();
  const TrialContext ctx{s, array};
  const bool filtered = s.filter.enabled && s.filter.window > 1;

  std::vector<ResultRow> rows;
  rows.reserve(s.poses.size() * static_cast<std::size_t>(s.trials));
  for (std::size_t p = 0; p < s.poses.size(); ++p) {
    for (int t = 0; t < s.trials; ++t) {
      try {
        ReadingStream stream = trial_stream(ctx, p, t);
        if (filtered) stream = moving_average_filter(stream, s.filter.window);
        rows.push_back(score(ctx, s.name, p, t, stream.frames.back()));
      } catch (const std::exception& e) {
        rows.push_back(failed_row(s, s.name, p, t, e.what()));
      }
    }
  }
  return finalize(s.name, std::move(rows));
}

std::vector<SizedResult> experiment_sensor_count(LayoutFamily family, const std::vector<int>& sizes,
                                                 const Scenario& base) {
  if (sizes.empty()) throw ConfigError("sensor count experiment needs at least one size");
  std::vector<SizedResult> out;
  for (int size : sizes) {
    Scenario s = base;
    s.array.kind = ArraySource::Kind::kFamily;
    s.array.family = family;
    s.array.size = size;
    s.name = base.name + "/" + (family == LayoutFamily::kTwoByN ? "2x" : "4x") + std::to_string(size);
    out.push_back({size, run_scenario(s)});
  }
  return out;
}

std::string to_string(GeometryAxis axis) {
  return axis == GeometryAxis::kVerticalHeight ? "vertical_height" : "horizontal_distance";
}

GeometryAxis parse_geometry_axis(const std::string& text) {
  if (text == "vertical_height" || text == "vertical") return GeometryAxis::kVerticalHeight;
  if (text == "horizontal_distance" || text == "horizontal") return GeometryAxis::kHorizontalDistance;
  throw ConfigError("unknown geometry axis '" + text + "' (expected vertical_height or horizontal_distance)");
}

namespace {

std::string mm_label(const char* prefix, double meters) {
  std::ostringstream os;
  os << prefix << meters / kMillimeter << "mm";
  return os.str();
}

}  // namespace

std::vector<LabeledPose> geometry_poses(GeometryAxis axis, const std::vector<double>& offsets,
                                        const SensorArray& array, const Vec3& orientation, double lateral_height) {
  if (offsets.empty()) throw ConfigError("geometry sweep needs at least one offset");
  const Vec3 center = array.centroid();
  const double edge_x = array.max_corner().x();
  std::vector<LabeledPose> poses;
  for (double offset : offsets) {
    if (!(offset > 0.0)) throw ConfigError("geometry offsets must be positive");
    if (axis == GeometryAxis::kVerticalHeight) {
      poses.push_back({mm_label("h=", offset), make_pose(center + offset * Vec3::UnitZ(), orientation)});
    } else {
      poses.push_back({mm_label("d=", offset),
                       make_pose(Vec3(edge_x + offset, center.y(), center.z() + lateral_height), orientation)});
    }
  }
  return poses;
}

ResultTable experiment_geometry(GeometryAxis axis, const std::vector<double>& offsets, const Scenario& base,
                                const Vec3& orientation) {
  Scenario s = base;
  s.poses = geometry_poses(axis, offsets, base.array.build(), orientation);
  return run_scenario(s);
}

std::vector<LabeledPose> canonical_positions(const SensorArray& array, double height, double margin,
                                             const Vec3& orientation) {
  const Vec3 lo = array.min_corner();
  const Vec3 hi = array.max_corner();
  const Vec3 c = array.centroid();
  const double z = hi.z() + height;
  return {
      {"No.1", make_pose(Vec3(lo.x() - margin, c.y(), z), orientation)},
      {"No.2", make_pose(Vec3(c.x(), lo.y() - margin, z), orientation)},
      {"No.3", make_pose(Vec3(c.x(), c.y(), z), orientation)},
      {"No.4", make_pose(Vec3(c.x(), hi.y() + margin, z), orientation)},
      {"No.5", make_pose(Vec3(hi.x() + margin, c.y(), z), orientation)},
  };
}

ResultTable experiment_positions(const std::vector<LabeledPose>& positions, const Scenario& base) {
  Scenario s = base;
  s.poses = positions.empty() ? canonical_positions(base.array.build()) : positions;
  return run_scenario(s);  // validate() rejects duplicate labels
}

FilterComparison experiment_filter_comparison(const Scenario& base) {
  base.validate();
  const SensorArray array = base.array.build();
  const TrialContext ctx{base, array};
  const std::string raw_name = base.name + "/raw";
  const std::string filtered_name = base.name + "/filtered";

  std::vector<ResultRow> raw_rows, filtered_rows;
  FilterComparison out;
  Vec3 overall = Vec3::Zero();
  std::size_t overall_count = 0;
  for (std::size_t p = 0; p < base.poses.size(); ++p) {
    Vec3 pose_sum = Vec3::Zero();
    std::size_t pose_count = 0;
    for (int t = 0; t < base.trials; ++t) {
      ReadingStream raw;
      ReadingStream smooth;
      try {
        raw = trial_stream(ctx, p, t);
        smooth = moving_average_filter(raw, base.filter.window);
      } catch (const std::exception& e) {
        raw_rows.push_back(failed_row(base, raw_name, p, t, e.what()));
        filtered_rows.push_back(failed_row(base, filtered_name, p, t, e.what()));
        continue;
      }
      pose_sum += noise_residual_stats(raw, smooth);
      ++pose_count;
      raw_rows.push_back(score(ctx, raw_name, p, t, raw.frames.back()));
      filtered_rows.push_back(score(ctx, filtered_name, p, t, smooth.frames.back()));
    }
    out.residual_per_pose.push_back(pose_count ? Vec3(pose_sum / static_cast<double>(pose_count)) : Vec3::Zero());
    overall += pose_sum;
    overall_count += pose_count;
  }
  out.residual_overall = overall_count ? Vec3(overall / static_cast<double>(overall_count)) : Vec3::Zero();
  out.raw = finalize(raw_name, std::move(raw_rows));
  out.filtered = finalize(filtered_name, std::move(filtered_rows));
  return out;
}

}  // namespace maglocate
