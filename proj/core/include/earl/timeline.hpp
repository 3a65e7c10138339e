#pragma once

#include <vector>

namespace earl {

// Original frame axis of one synthetic video. Indices run 0..frame_count-1.
struct VideoTimeline {
    int frame_count = 0;           // M
    std::vector<double> signals;   // one per frame, each in [0, 1]

    void validate() const;  // throws std::invalid_argument on a broken invariant
};

// The ordered set of original-frame indices currently visible to the policy.
struct VisualContext {
    std::vector<int> frames;  // strictly increasing, no duplicates

    int size() const { return static_cast<int>(frames.size()); }
    bool contains(int frame) const;
    // position of `frame` in frames, or -1
    int index_of(int frame) const;
};

// Index interval anchored at a selected key frame; lo < hi, one endpoint is the key.
struct Interval {
    int lo = 0;
    int hi = 0;

    int length() const { return hi - lo; }
    // number of indices strictly between lo and hi
    int interior_capacity() const { return hi - lo - 1; }
    bool covers_interior(int frame) const { return lo < frame && frame < hi; }
};

// Budgeted uniform pre-sampling: all indices when frame_count <= budget,
// otherwise floor(k*M/budget) for k = 0..budget-1.
std::vector<int> uniform_sample_indices(int frame_count, int budget);
VisualContext uniform_sample(const VideoTimeline& timeline, int budget);

// Interval between `key` and its nearest temporally adjacent context frame.
// Equidistant neighbors resolve to the later one.
Interval nearest_neighbor_interval(const VisualContext& context, int key);

// One interval per selected key, overlapping interiors merged, sorted by lo.
// Intervals that share only an endpoint stay separate.
std::vector<Interval> selection_intervals(const VisualContext& context,
                                          const std::vector<int>& selected);

// Largest-remainder proportional split of min(n_max, total interior capacity)
// slots across intervals, weighted by interval length. Every interval with
// room gets at least one slot when the budget allows; none exceeds its
// interior capacity.
std::vector<int> allocate_slots(const std::vector<Interval>& intervals, int n_max);

// `slots` interior indices of `iv`: lo + round((j+1)*L/(slots+1)), j = 0..slots-1.
std::vector<int> interior_points(const Interval& iv, int slots);

// The localized re-sampling step: replaces the visual context with the
// interval samples plus the selected key frames.
VisualContext localized_resample(const VideoTimeline& timeline, const VisualContext& context,
                                 const std::vector<int>& selected, int n_max);

}  // namespace earl
