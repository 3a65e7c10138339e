#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "earl/rng.hpp"
#include "earl/synth.hpp"
#include "earl/timeline.hpp"

namespace earl::test {

// plain set IoU, the independent oracle for frame_iou at w=0
inline double brute_iou(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> sa(a.begin(), a.end());
    std::set<int> sb(b.begin(), b.end());
    std::size_t both = 0;
    for (int v : sa) both += sb.count(v);
    const std::size_t uni = sa.size() + sb.size() - both;
    if (uni == 0) return 0.0;
    return static_cast<double>(both) / static_cast<double>(uni);
}

inline VideoTimeline flat_timeline(int frame_count, double value = 0.0) {
    VideoTimeline t;
    t.frame_count = frame_count;
    t.signals.assign(static_cast<std::size_t>(frame_count), value);
    return t;
}

inline std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// random strictly increasing context of size n within [0, m)
inline VisualContext random_context(Rng& rng, int m, int n) {
    std::vector<int> pool(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i;
    VisualContext ctx;
    ctx.frames = rng.sample_without_replacement(pool, static_cast<std::size_t>(n));
    std::sort(ctx.frames.begin(), ctx.frames.end());
    return ctx;
}

// scratch directory removed on destruction
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::uint64_t counter = 0;
        const auto base = std::filesystem::temp_directory_path();
        do {
            path = base / ("earl-test-" + std::to_string(++counter) + "-" +
                           std::to_string(static_cast<unsigned>(::getpid())));
        } while (std::filesystem::exists(path));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace earl::test
