#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ekramers/error.hpp"
#include "ekramers/linalg.hpp"

namespace ekramers {

enum class PathKind { relaxation, fluctuation, instanton, generic };

constexpr const char* to_string(PathKind k) noexcept {
    switch (k) {
        case PathKind::relaxation: return "relaxation";
        case PathKind::fluctuation: return "fluctuation";
        case PathKind::instanton: return "instanton";
        case PathKind::generic: return "generic";
    }
    return "generic";
}

struct Path {
    std::vector<double> times;
    std::vector<Vec> points;
    PathKind kind = PathKind::generic;

    std::size_t size() const { return times.size(); }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
    double duration() const { return times.back() - times.front(); }
    const Vec& front() const { return points.front(); }
    const Vec& back() const { return points.back(); }

    /// Throws InvalidArgument unless the path has >= 2 finite samples on a
    /// strictly increasing time grid.
    void validate() const {
        if (times.size() != points.size()) fail(ErrorKind::InvalidArgument, "path times/points length mismatch");
        if (times.size() < 2) fail(ErrorKind::InvalidArgument, "path needs at least 2 samples");
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (!std::isfinite(times[k]) || !points[k].allFinite())
                fail(ErrorKind::InvalidArgument, "path sample " + std::to_string(k) + " is not finite");
            if (points[k].size() != points.front().size())
                fail(ErrorKind::InvalidArgument, "path samples have inconsistent dimension");
            if (k > 0 && !(times[k] > times[k - 1]))
                fail(ErrorKind::InvalidArgument, "path times must be strictly increasing");
        }
    }

    /// Same points in reverse order, re-timed so the result starts at the
    /// original start time.
    Path reversed(PathKind new_kind) const {
        Path r;
        r.kind = new_kind;
        const double t0 = times.front(), t1 = times.back();
        for (std::size_t k = times.size(); k-- > 0;) {
            r.times.push_back(t0 + (t1 - times[k]));
            r.points.push_back(points[k]);
        }
        return r;
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header t,x1,...,xd and one row per sample.
inline void write_csv(std::ostream& os, const Path& p) {
    os << 't';
    for (int i = 0; i < p.dim(); ++i) os << ",x" << (i + 1);
    os << '\n';
    for (std::size_t k = 0; k < p.size(); ++k) {
        os << format_double(p.times[k]);
        for (int i = 0; i < p.dim(); ++i) os << ',' << format_double(p.points[k][i]);
        os << '\n';
    }
}

/// Distance from a point to a path viewed as a polyline.
inline double distance_to_polyline(const Vec& x, const Path& q) {
    if (q.size() == 1) return (x - q.points[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < q.size(); ++k) {
        const Vec seg = q.points[k + 1] - q.points[k];
        const double len2 = seg.squaredNorm();
        const double s = len2 > 0.0 ? std::clamp((x - q.points[k]).dot(seg) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (x - q.points[k] - s * seg).norm());
    }
    return best;
}

/// Hausdorff distance between two paths viewed as polylines.
inline double hausdorff_distance(const Path& a, const Path& b) {
    auto directed = [](const Path& p, const Path& q) {
        double worst = 0.0;
        for (const auto& x : p.points) worst = std::max(worst, distance_to_polyline(x, q));
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace ekramers
