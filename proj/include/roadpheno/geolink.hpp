#pragma once

// Four-step linking of street-level images and in-situ observations to
// parcels: transpose capture points perpendicular to the driving direction,
// intersect with parcel polygons, drop stationary duplicates, then attach the
// nearest-in-time observation of the same parcel.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadpheno/geometry.hpp"
#include "roadpheno/taxonomy.hpp"

namespace roadpheno::geo {

struct SurveyImage {
  std::string image_id;
  GeoPoint position;      // GPS fix on the road
  std::int64_t timestamp = 0;  // UTC seconds
  CameraSide side = CameraSide::left;
  int campaign = 0;
  std::string file_path;
};

struct FieldObservation {
  std::string obs_id;
  GeoPoint position;  // roadside stop
  std::int64_t timestamp = 0;
  tax::ClassLabel label;
  int campaign = 0;
};

struct LinkedImage {
  std::string image_id;
  std::string parcel_id;
  tax::ClassLabel label;
  int campaign = 0;
  double distance_to_centroid = 0.0;  // from the transposed point, m
  double centroid_ratio = 0.0;
  std::int64_t obs_time_delta = 0;  // |image ts - observation ts|, s
};

struct LinkOptions {
  double offset_m = 30.0;       // perpendicular transposition
  double stationary_eps = 1.0;  // dedup displacement threshold
  // d_i/d_max (default) marks near-edge images with ratios close to 1;
  // the inverse reading d_max/d_i is kept available behind this switch.
  bool ratio_inverse = false;
  std::function<void(const std::string&)> warn = [](const std::string&) {};
};

// Funnel counts for the census report; images that drop out of the labeled
// set stay visible here.
struct LinkCensus {
  std::size_t images_total = 0;
  std::size_t images_linked = 0;
  std::size_t images_on_observed_parcels = 0;
  std::size_t images_after_dedup = 0;
  std::size_t images_labeled = 0;
  std::size_t observations_total = 0;
  std::size_t observations_linked = 0;
};

// Heading per track position: bearing from the previous to the next GPS fix;
// endpoints use their single neighbor. Stationary gaps reuse the last valid
// bearing (or the first valid one when the track starts at a stop).
inline std::vector<std::optional<double>> track_headings(
    const std::vector<GeoPoint>& pts) {
  std::size_t n = pts.size();
  std::vector<std::optional<double>> out(n);
  auto try_bearing = [&](std::size_t a, std::size_t b) -> std::optional<double> {
    if (pts[a] == pts[b]) return std::nullopt;
    return bearing(pts[a], pts[b]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (n < 2) break;
    if (i == 0)
      out[i] = try_bearing(0, 1);
    else if (i + 1 == n)
      out[i] = try_bearing(n - 2, n - 1);
    else
      out[i] = try_bearing(i - 1, i + 1);
  }
  std::optional<double> last;
  for (std::size_t i = 0; i < n; ++i) {
    if (out[i])
      last = out[i];
    else
      out[i] = last;
  }
  std::optional<double> next;
  for (std::size_t i = n; i-- > 0;) {
    if (out[i])
      next = out[i];
    else
      out[i] = next;
  }
  return out;
}

// Keep the first image of every stationary run: a run extends while the
// displacement from the run's first image stays below eps.
template <class Item>
std::vector<Item> dedup_stationary(const std::vector<Item>& images, double eps,
                                   const std::function<GeoPoint(const Item&)>& pos) {
  std::vector<Item> kept;
  std::optional<GeoPoint> anchor;
  for (const auto& img : images) {
    GeoPoint p = pos(img);
    if (anchor && distance(*anchor, p) < eps) continue;
    anchor = p;
    kept.push_back(img);
  }
  return kept;
}

inline std::int64_t utc_day(std::int64_t ts) {
  // floor division keeps pre-epoch timestamps on the right day
  return ts >= 0 ? ts / 86400 : (ts - 86399) / 86400;
}

// Nearest-in-time observation of the same parcel, restricted to the same
// calendar day (surveys are monthly; wider windows would mislabel phenology).
// Ties on |dt| resolve to the earlier observation, then lower obs_id.
inline std::optional<std::size_t> attach_observation(
    std::int64_t image_ts, const std::string& parcel_id,
    const std::vector<FieldObservation>& obs,
    const std::vector<std::string>& obs_parcel) {
  std::optional<std::size_t> best;
  std::int64_t best_dt = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs_parcel[i] != parcel_id) continue;
    if (utc_day(obs[i].timestamp) != utc_day(image_ts)) continue;
    std::int64_t dt = std::llabs(obs[i].timestamp - image_ts);
    if (!best || dt < best_dt ||
        (dt == best_dt &&
         std::tie(obs[i].timestamp, obs[i].obs_id) <
             std::tie(obs[*best].timestamp, obs[*best].obs_id)))
      best = i, best_dt = dt;
  }
  return best;
}

struct LinkResult {
  std::vector<LinkedImage> linked;  // labeled images, sorted by image_id
  LinkCensus census;
};

inline LinkResult link_survey(const std::vector<SurveyImage>& images,
                              const std::vector<FieldObservation>& observations,
                              const ParcelIndex& parcels,
                              const LinkOptions& opt = {}) {
  LinkResult res;
  res.census.images_total = images.size();
  res.census.observations_total = observations.size();

  // step 2: observations link at their recorded roadside position
  std::vector<std::string> obs_parcel(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    auto hit = parcels.locate(observations[i].position);
    if (hit) {
      if (hit->overlap)
        opt.warn("observation " + observations[i].obs_id +
                 " in overlapping parcels; smallest-area parcel chosen");
      obs_parcel[i] = parcels.parcel(hit->index).parcel_id;
      ++res.census.observations_linked;
    }
  }
  std::map<std::string, bool> parcel_observed;
  for (const auto& pid : obs_parcel)
    if (!pid.empty()) parcel_observed[pid] = true;

  // step 1: transpose image positions and intersect with parcels, walking
  // each camera track (campaign, side) in timestamp order
  struct Candidate {
    const SurveyImage* img;
    GeoPoint field_point;
    std::string parcel_id;
  };
  std::map<std::pair<int, int>, std::vector<const SurveyImage*>> tracks;
  for (const auto& img : images)
    tracks[{img.campaign, static_cast<int>(img.side)}].push_back(&img);

  std::vector<Candidate> candidates;
  for (auto& [key, track] : tracks) {
    std::stable_sort(track.begin(), track.end(),
                     [](const SurveyImage* a, const SurveyImage* b) {
                       return a->timestamp < b->timestamp;
                     });
    std::vector<GeoPoint> pts;
    pts.reserve(track.size());
    for (const auto* img : track) pts.push_back(img->position);
    auto headings = track_headings(pts);

    std::vector<Candidate> linked_track;
    for (std::size_t i = 0; i < track.size(); ++i) {
      if (!headings[i]) {
        opt.warn("image " + track[i]->image_id +
                 ": no usable bearing on track; image skipped");
        continue;
      }
      GeoPoint fp = transpose_point(track[i]->position, *headings[i],
                                    track[i]->side, opt.offset_m);
      auto hit = parcels.locate(fp);
      if (!hit) continue;
      if (hit->overlap)
        opt.warn("image " + track[i]->image_id +
                 " in overlapping parcels; smallest-area parcel chosen");
      linked_track.push_back(
          Candidate{track[i], fp, parcels.parcel(hit->index).parcel_id});
    }
    res.census.images_linked += linked_track.size();

    // step 3: restrict to observed parcels, then drop stationary duplicates
    std::vector<Candidate> observed;
    for (const auto& c : linked_track)
      if (parcel_observed.count(c.parcel_id)) observed.push_back(c);
    res.census.images_on_observed_parcels += observed.size();

    auto deduped = dedup_stationary<Candidate>(
        observed, opt.stationary_eps,
        [](const Candidate& c) { return c.img->position; });
    res.census.images_after_dedup += deduped.size();
    candidates.insert(candidates.end(), deduped.begin(), deduped.end());
  }

  // step 4: append the in-situ observation
  for (const auto& c : candidates) {
    auto oi = attach_observation(c.img->timestamp, c.parcel_id, observations,
                                 obs_parcel);
    if (!oi) continue;
    const FieldObservation& o = observations[*oi];
    LinkedImage li;
    li.image_id = c.img->image_id;
    li.parcel_id = c.parcel_id;
    li.label = o.label;
    li.campaign = c.img->campaign;
    const Parcel* parcel = parcels.find(c.parcel_id);
    li.distance_to_centroid = distance(c.field_point, parcel->polygon.centroid());
    li.obs_time_delta = std::llabs(c.img->timestamp - o.timestamp);
    res.linked.push_back(li);
  }
  res.census.images_labeled = res.linked.size();

  compute_centroid_ratios(res.linked, opt.ratio_inverse);
  std::sort(res.linked.begin(), res.linked.end(),
            [](const LinkedImage& a, const LinkedImage& b) {
              return a.image_id < b.image_id;
            });
  return res;
}

// ratio_i = d_i / max_j d_j within one (parcel, campaign) group, in (0, 1];
// values near 1 are near the parcel edge. The inverse flag flips the
// normalization to d_max / d_i, in [1, inf).
inline void compute_centroid_ratios(std::vector<LinkedImage>& linked,
                                    bool inverse = false) {
  std::map<std::pair<std::string, int>, double> group_max;
  for (const auto& li : linked) {
    auto key = std::make_pair(li.parcel_id, li.campaign);
    auto [it, fresh] = group_max.emplace(key, li.distance_to_centroid);
    if (!fresh) it->second = std::max(it->second, li.distance_to_centroid);
  }
  for (auto& li : linked) {
    double d_max = group_max.at({li.parcel_id, li.campaign});
    if (d_max == 0.0) {
      li.centroid_ratio = 1.0;  // all images exactly at the centroid
    } else if (inverse) {
      li.centroid_ratio = li.distance_to_centroid == 0.0
                              ? std::numeric_limits<double>::infinity()
                              : d_max / li.distance_to_centroid;
    } else {
      li.centroid_ratio = li.distance_to_centroid / d_max;
    }
  }
}

}  // namespace roadpheno::geo
