#include "earl/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "earl/errors.hpp"

namespace earl {

void VideoTimeline::validate() const {
    if (frame_count < 2)
        throw std::invalid_argument("VideoTimeline: frame_count must be >= 2, got " +
                                    std::to_string(frame_count));
    if (static_cast<int>(signals.size()) != frame_count)
        throw std::invalid_argument("VideoTimeline: signals size " +
                                    std::to_string(signals.size()) + " != frame_count " +
                                    std::to_string(frame_count));
    for (double s : signals)
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("VideoTimeline: signal outside [0,1]");
}

bool VisualContext::contains(int frame) const {
    return std::binary_search(frames.begin(), frames.end(), frame);
}

int VisualContext::index_of(int frame) const {
    auto it = std::lower_bound(frames.begin(), frames.end(), frame);
    if (it == frames.end() || *it != frame) return -1;
    return static_cast<int>(it - frames.begin());
}

std::vector<int> uniform_sample_indices(int frame_count, int budget) {
    if (budget < 1) throw std::invalid_argument("uniform_sample: budget must be >= 1");
    if (frame_count < 1) throw std::invalid_argument("uniform_sample: frame_count must be >= 1");

    std::vector<int> out;
    if (frame_count <= budget) {
        out.resize(frame_count);
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    out.reserve(budget);
    for (int k = 0; k < budget; ++k) {
        const int idx = static_cast<int>((static_cast<long long>(k) * frame_count) / budget);
        if (out.empty() || out.back() != idx) out.push_back(idx);
    }
    return out;
}

VisualContext uniform_sample(const VideoTimeline& timeline, int budget) {
    return VisualContext{uniform_sample_indices(timeline.frame_count, budget)};
}

Interval nearest_neighbor_interval(const VisualContext& context, int key) {
    if (context.size() < 2)
        throw ContextTooSmall("nearest_neighbor_interval: context has " +
                              std::to_string(context.size()) + " frame(s), need >= 2");
    const int pos = context.index_of(key);
    if (pos < 0)
        throw KeyNotInContext("nearest_neighbor_interval: frame " + std::to_string(key) +
                              " not in context");

    const bool has_prev = pos > 0;
    const bool has_next = pos + 1 < context.size();
    if (!has_prev) return Interval{key, context.frames[pos + 1]};
    if (!has_next) return Interval{context.frames[pos - 1], key};

    const int prev = context.frames[pos - 1];
    const int next = context.frames[pos + 1];
    // ties go to the later neighbor
    if (next - key <= key - prev) return Interval{key, next};
    return Interval{prev, key};
}

std::vector<Interval> selection_intervals(const VisualContext& context,
                                          const std::vector<int>& selected) {
    std::vector<int> keys = selected;
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<Interval> raw;
    raw.reserve(keys.size());
    for (int key : keys) raw.push_back(nearest_neighbor_interval(context, key));
    std::sort(raw.begin(), raw.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });

    // merge intervals whose interiors overlap; a shared endpoint is not overlap
    std::vector<Interval> merged;
    for (const Interval& iv : raw) {
        if (!merged.empty() && iv.lo < merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    return merged;
}

std::vector<int> allocate_slots(const std::vector<Interval>& intervals, int n_max) {
    if (n_max < 1) throw std::invalid_argument("allocate_slots: n_max must be >= 1");
    const int count = static_cast<int>(intervals.size());
    std::vector<int> alloc(count, 0);
    if (count == 0) return alloc;

    long long total_capacity = 0;
    int with_room = 0;
    for (const Interval& iv : intervals) {
        total_capacity += iv.interior_capacity();
        if (iv.interior_capacity() > 0) ++with_room;
    }
    int slots = static_cast<int>(std::min<long long>(n_max, total_capacity));
    if (slots == 0) return alloc;

    // guarantee one slot per non-degenerate interval when the budget allows
    int remaining = slots;
    if (slots >= with_room) {
        for (int i = 0; i < count; ++i) {
            if (intervals[i].interior_capacity() > 0) {
                alloc[i] = 1;
                --remaining;
            }
        }
    }

    // largest-remainder proportional split of the rest, weighted by length
    while (remaining > 0) {
        long long weight_total = 0;
        for (int i = 0; i < count; ++i)
            if (alloc[i] < intervals[i].interior_capacity()) weight_total += intervals[i].length();
        std::vector<int> add(count, 0);
        std::vector<std::pair<double, int>> fractions;  // (remainder, index)
        int handed = 0;
        for (int i = 0; i < count; ++i) {
            if (alloc[i] >= intervals[i].interior_capacity()) continue;
            const double ideal =
                static_cast<double>(remaining) * intervals[i].length() / static_cast<double>(weight_total);
            add[i] = static_cast<int>(ideal);
            fractions.emplace_back(ideal - add[i], i);
            handed += add[i];
        }
        std::sort(fractions.begin(), fractions.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return intervals[a.second].lo < intervals[b.second].lo;
        });
        for (const auto& [frac, i] : fractions) {
            if (handed >= remaining) break;
            ++add[i];
            ++handed;
        }
        // cap at interior capacity; anything clipped goes around again
        int placed = 0;
        for (int i = 0; i < count; ++i) {
            const int room = intervals[i].interior_capacity() - alloc[i];
            const int take = std::min(add[i], room);
            alloc[i] += take;
            placed += take;
        }
        remaining -= placed;
    }
    return alloc;
}

std::vector<int> interior_points(const Interval& iv, int slots) {
    std::vector<int> pts;
    if (slots <= 0) return pts;
    if (slots > iv.interior_capacity())
        throw std::invalid_argument("interior_points: slots exceed interior capacity");
    pts.reserve(slots);
    const double length = static_cast<double>(iv.length());
    for (int j = 0; j < slots; ++j) {
        const int offset = static_cast<int>(std::llround((j + 1) * length / (slots + 1)));
        pts.push_back(iv.lo + offset);
    }
    return pts;
}

VisualContext localized_resample(const VideoTimeline& timeline, const VisualContext& context,
                                 const std::vector<int>& selected, int n_max) {
    if (selected.empty()) throw EmptySelection("localized_resample: empty selection");
    if (context.size() < 2)
        throw ContextTooSmall("localized_resample: context has fewer than 2 frames");
    if (n_max < 1) throw std::invalid_argument("localized_resample: n_max must be >= 1");
    for (int key : selected) {
        if (!context.contains(key))
            throw SelectionOutsideContext("localized_resample: frame " + std::to_string(key) +
                                          " not in current context");
        if (key < 0 || key >= timeline.frame_count)
            throw SelectionOutsideContext("localized_resample: frame " + std::to_string(key) +
                                          " outside timeline");
    }

    const std::vector<Interval> intervals = selection_intervals(context, selected);
    const std::vector<int> slots = allocate_slots(intervals, n_max);

    std::vector<int> frames(selected.begin(), selected.end());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const std::vector<int> pts = interior_points(intervals[i], slots[i]);
        frames.insert(frames.end(), pts.begin(), pts.end());
    }
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    return VisualContext{std::move(frames)};
}

}  // namespace earl
