#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/tensor.hpp"
#include "evlogic/world.hpp"

namespace evlogic {

// Half-open frame ranges partitioning [0, T).
struct Segmentation {
  std::vector<std::pair<int, int>> segments;
};

inline double default_segment_threshold(double noise, int feature_dim) {
  return 3.0 * noise * std::sqrt(static_cast<double>(feature_dim)) + 0.25;
}
inline constexpr int kDefaultMinSegmentLen = 2;

// Change-point segmentation: a boundary lands between t and t+1 wherever
// |S_{t+1} - S_t| exceeds the threshold; segments shorter than min_len are
// then merged forward (the trailing one merges backward). Degenerate
// streams yield a single segment.
inline Segmentation segment_stream(const Mat& frames, double threshold, int min_len) {
  const int t_total = static_cast<int>(frames.rows);
  Segmentation seg;
  if (t_total <= 0) return seg;
  if (t_total < 2 * min_len) {
    seg.segments.push_back({0, t_total});
    return seg;
  }

  std::vector<int> cuts;
  for (int t = 0; t + 1 < t_total; ++t) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < frames.cols; ++c) {
      const double diff = frames(t + 1, c) - frames(t, c);
      d2 += diff * diff;
    }
    if (std::sqrt(d2) > threshold) cuts.push_back(t + 1);
  }

  auto& segs = seg.segments;
  int start = 0;
  for (int cut : cuts) {
    segs.push_back({start, cut});
    start = cut;
  }
  segs.push_back({start, t_total});

  std::size_t i = 0;
  while (i < segs.size()) {
    const int len = segs[i].second - segs[i].first;
    if (len >= min_len || segs.size() == 1) {
      ++i;
      continue;
    }
    if (i + 1 < segs.size()) {
      segs[i + 1].first = segs[i].first;
      segs.erase(segs.begin() + i);
    } else {
      segs[i - 1].second = segs[i].second;
      segs.erase(segs.begin() + i);
      --i;
    }
  }
  return seg;
}

struct EventifyCounters {
  std::uint64_t prototype_comparisons = 0;
};

// Per-label mean feature vectors from a labeled calibration split. One bank
// per label component; only labels actually observed get a prototype.
class Prototypes {
 public:
  struct Entry {
    int label = 0;
    Vec mean;
  };

  static Prototypes estimate(const std::vector<Scenario>& calibration) {
    Prototypes p;
    for (int comp = 0; comp < 3; ++comp) {
      std::vector<Vec> sums;
      std::vector<int> counts;
      for (const Scenario& sc : calibration) {
        for (const Event& e : sc.events) {
          const int label = comp == 0   ? e.label.premise
                            : comp == 1 ? e.label.action
                                        : e.label.object;
          if (static_cast<int>(sums.size()) <= label) {
            sums.resize(label + 1);
            counts.resize(label + 1, 0);
          }
          if (sums[label].size() == 0) sums[label] = Vec(e.feature.size());
          axpy(1.0, e.feature, sums[label]);
          ++counts[label];
        }
      }
      for (int label = 0; label < static_cast<int>(sums.size()); ++label)
        if (counts[label] > 0)
          p.banks_[comp].push_back({label, scaled(sums[label], 1.0 / counts[label])});
    }
    require(!p.banks_[0].empty() && !p.banks_[1].empty() && !p.banks_[2].empty(),
            "prototypes: empty calibration split");
    return p;
  }

  // Nearest prototype by cosine similarity; ties resolve to the lowest
  // label index (banks are stored in index order, strict > keeps the first).
  int classify(int component, const Vec& feature, EventifyCounters* counters) const {
    const auto& bank = banks_[component];
    int best_label = bank.front().label;
    double best = -2.0;
    for (const Entry& entry : bank) {
      if (counters) ++counters->prototype_comparisons;
      const double c = cosine(entry.mean, feature);
      if (c > best) {
        best = c;
        best_label = entry.label;
      }
    }
    return best_label;
  }

  const std::vector<Entry>& bank(int component) const { return banks_[component]; }

 private:
  std::vector<Entry> banks_[3];
};

// Proposal-then-classify lifting: one event per segment, feature = mean of
// the segment's frames, support = the segment bounds, label = nearest
// prototypes. Output is ordered by support start because segments are.
inline std::vector<Event> eventify(const Mat& frames, const Segmentation& seg,
                                   const Prototypes& prototypes,
                                   EventifyCounters* counters = nullptr) {
  std::vector<Event> events;
  for (const auto& [s, e] : seg.segments) {
    Event ev;
    ev.feature = Vec(frames.cols);
    for (int t = s; t < e; ++t)
      for (std::size_t c = 0; c < frames.cols; ++c) ev.feature[c] += frames(t, c);
    if (e > s) ev.feature = scaled(ev.feature, 1.0 / (e - s));
    ev.support.start = s;
    ev.support.end = e - 1;
    ev.label.premise = prototypes.classify(0, ev.feature, counters);
    ev.label.action = prototypes.classify(1, ev.feature, counters);
    ev.label.object = prototypes.classify(2, ev.feature, counters);
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace evlogic
