#include <dsurf/geometry.hpp>
#include <dsurf/parallel.hpp>
#include <dsurf/sif.hpp>

#include <nlohmann/json.hpp>

#include <numeric>

namespace dsurf {

namespace {

constexpr double kEps = 1e-12;

using Vec2 = Eigen::Vector2d;

double orient2(const Vec2& p, const Vec2& q, const Vec2& r)
{
    const double o = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    return std::abs(o) < kEps ? 0.0 : o;
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r)
{
    // r collinear with pq: inside the closed box of pq
    return r.x() >= std::min(p.x(), q.x()) - kEps && r.x() <= std::max(p.x(), q.x()) + kEps &&
           r.y() >= std::min(p.y(), q.y()) - kEps && r.y() <= std::max(p.y(), q.y()) + kEps;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
    const double o1 = orient2(p1, p2, q1);
    const double o2 = orient2(p1, p2, q2);
    const double o3 = orient2(q1, q2, p1);
    const double o4 = orient2(q1, q2, p2);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    if (o1 == 0.0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0.0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0.0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0.0 && on_segment(q1, q2, p2)) return true;
    return false;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c)
{
    const double d1 = orient2(a, b, p);
    const double d2 = orient2(b, c, p);
    const double d3 = orient2(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

bool coplanar_intersect(const Vec3& n, const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b)
{
    int drop = 0;
    const Vec3 an = n.cwiseAbs();
    if (an.y() > an[drop]) drop = 1;
    if (an.z() > an[drop]) drop = 2;
    const int i0 = drop == 0 ? 1 : 0;
    const int i1 = drop == 2 ? 1 : 2;
    std::array<Vec2, 3> p, q;
    for (int k = 0; k < 3; ++k) {
        p[k] = Vec2(a[k][i0], a[k][i1]);
        q[k] = Vec2(b[k][i0], b[k][i1]);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_intersect(p[i], p[(i + 1) % 3], q[j], q[(j + 1) % 3])) return true;
    return point_in_triangle(p[0], q[0], q[1], q[2]) || point_in_triangle(q[0], p[0], p[1], p[2]);
}

/// Interval of a triangle on the intersection line, given projections and plane distances.
void line_interval(const std::array<double, 3>& proj, const std::array<double, 3>& d, double& lo, double& hi)
{
    auto isect = [&](int lone, int o1, int o2) {
        const double t1 = proj[lone] + (proj[o1] - proj[lone]) * d[lone] / (d[lone] - d[o1]);
        const double t2 = proj[lone] + (proj[o2] - proj[lone]) * d[lone] / (d[lone] - d[o2]);
        lo = std::min(t1, t2);
        hi = std::max(t1, t2);
    };
    if (d[0] * d[1] > 0.0) {
        isect(2, 0, 1);
    } else if (d[0] * d[2] > 0.0) {
        isect(1, 0, 2);
    } else if (d[1] * d[2] > 0.0 || d[0] != 0.0) {
        isect(0, 1, 2);
    } else if (d[1] != 0.0) {
        isect(1, 0, 2);
    } else {
        isect(2, 0, 1);
    }
}

bool same_side(const std::array<double, 3>& d)
{
    return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
}

} // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                         const Vec3& b2)
{
    Vec3 lo = a0.cwiseMin(a1).cwiseMin(a2).cwiseMin(b0).cwiseMin(b1).cwiseMin(b2);
    Vec3 hi = a0.cwiseMax(a1).cwiseMax(a2).cwiseMax(b0).cwiseMax(b1).cwiseMax(b2);
    const Vec3 centre = 0.5 * (lo + hi);
    const double extent = (hi - lo).maxCoeff();
    if (!(extent > 0.0)) return true; // all six points coincide
    const double inv = 1.0 / extent;
    const std::array<Vec3, 3> a{(a0 - centre) * inv, (a1 - centre) * inv, (a2 - centre) * inv};
    const std::array<Vec3, 3> b{(b0 - centre) * inv, (b1 - centre) * inv, (b2 - centre) * inv};

    Vec3 n1 = (a[1] - a[0]).cross(a[2] - a[0]);
    Vec3 n2 = (b[1] - b[0]).cross(b[2] - b[0]);
    const double l1 = n1.norm(), l2 = n2.norm();
    if (!(l1 > kEps) || !(l2 > kEps)) return false; // degenerate triangle: no area to intersect
    n1 /= l1;
    n2 /= l2;

    std::array<double, 3> da, db;
    for (int k = 0; k < 3; ++k) {
        da[k] = n2.dot(a[k] - b[0]);
        if (std::abs(da[k]) < kEps) da[k] = 0.0;
        db[k] = n1.dot(b[k] - a[0]);
        if (std::abs(db[k]) < kEps) db[k] = 0.0;
    }
    if (same_side(da) || same_side(db)) return false;
    if (da[0] == 0.0 && da[1] == 0.0 && da[2] == 0.0) return coplanar_intersect(n1, a, b);

    const Vec3 dir = n1.cross(n2);
    std::array<double, 3> pa, pb;
    for (int k = 0; k < 3; ++k) {
        pa[k] = dir.dot(a[k]);
        pb[k] = dir.dot(b[k]);
    }
    double alo, ahi, blo, bhi;
    line_interval(pa, da, alo, ahi);
    line_interval(pb, db, blo, bhi);
    return std::max(alo, blo) <= std::min(ahi, bhi) + kEps;
}

namespace {

struct Box
{
    Vec3 lo, hi;
    bool overlaps(const Box& o) const
    {
        return lo.x() <= o.hi.x() && o.lo.x() <= hi.x() && lo.y() <= o.hi.y() && o.lo.y() <= hi.y() &&
               lo.z() <= o.hi.z() && o.lo.z() <= hi.z();
    }
};

struct Node
{
    Box box;
    std::uint32_t left = 0, right = 0; ///< children; leaf when count > 0
    std::uint32_t first = 0, count = 0;
};

class AabbTree
{
public:
    AabbTree(const std::vector<Box>& boxes)
        : m_boxes(boxes)
        , m_order(boxes.size())
    {
        std::iota(m_order.begin(), m_order.end(), 0u);
        m_centres.resize(boxes.size());
        for (std::size_t i = 0; i < boxes.size(); ++i) m_centres[i] = 0.5 * (boxes[i].lo + boxes[i].hi);
        if (!boxes.empty()) build(0, static_cast<std::uint32_t>(boxes.size()));
    }

    template <typename F>
    void query(const Box& q, F&& visit) const
    {
        if (m_nodes.empty()) return;
        std::uint32_t stack[128];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = m_nodes[stack[--top]];
            if (!n.box.overlaps(q)) continue;
            if (n.count > 0) {
                for (std::uint32_t k = n.first; k < n.first + n.count; ++k) {
                    if (m_boxes[m_order[k]].overlaps(q)) visit(m_order[k]);
                }
            } else {
                stack[top++] = n.left;
                stack[top++] = n.right;
            }
        }
    }

private:
    std::uint32_t build(std::uint32_t first, std::uint32_t last)
    {
        const auto id = static_cast<std::uint32_t>(m_nodes.size());
        m_nodes.emplace_back();
        Box box{m_boxes[m_order[first]].lo, m_boxes[m_order[first]].hi};
        Vec3 clo = m_centres[m_order[first]], chi = clo;
        for (std::uint32_t k = first; k < last; ++k) {
            const auto f = m_order[k];
            box.lo = box.lo.cwiseMin(m_boxes[f].lo);
            box.hi = box.hi.cwiseMax(m_boxes[f].hi);
            clo = clo.cwiseMin(m_centres[f]);
            chi = chi.cwiseMax(m_centres[f]);
        }
        m_nodes[id].box = box;
        if (last - first <= 4) {
            m_nodes[id].first = first;
            m_nodes[id].count = last - first;
            return id;
        }
        int axis = 0;
        const Vec3 ext = chi - clo;
        if (ext.y() > ext[axis]) axis = 1;
        if (ext.z() > ext[axis]) axis = 2;
        const std::uint32_t mid = first + (last - first) / 2;
        std::nth_element(m_order.begin() + first, m_order.begin() + mid, m_order.begin() + last,
                         [&](std::uint32_t x, std::uint32_t y) {
                             const double cx = m_centres[x][axis], cy = m_centres[y][axis];
                             return cx < cy || (cx == cy && x < y);
                         });
        const auto left = build(first, mid);
        const auto right = build(mid, last);
        m_nodes[id].left = left;
        m_nodes[id].right = right;
        return id;
    }

    const std::vector<Box>& m_boxes;
    std::vector<std::uint32_t> m_order;
    std::vector<Vec3> m_centres;
    std::vector<Node> m_nodes;
};

bool share_vertex(const Face& a, const Face& b)
{
    for (auto x : a)
        for (auto y : b)
            if (x == y) return true;
    return false;
}

} // namespace

SifResult count_sif(const TriangleMesh& mesh, SifMode mode)
{
    const auto& v = mesh.vertices();
    const auto& faces = mesh.faces();
    const std::size_t nf = faces.size();
    SifResult result;
    if (nf < 2) return result;

    // margin comfortably above the predicate tolerance so box culling never
    // hides a pair the predicate would accept
    const double margin = 1e-9 * std::max(bounding_box(v).diagonal(), 1e-300);
    std::vector<Box> boxes(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& t = faces[f];
        boxes[f].lo = v[t[0]].cwiseMin(v[t[1]]).cwiseMin(v[t[2]]).array() - margin;
        boxes[f].hi = v[t[0]].cwiseMax(v[t[1]]).cwiseMax(v[t[2]]).array() + margin;
    }
    auto test = [&](std::uint32_t f, std::uint32_t g) {
        // f < g always: the predicate sees every pair in one fixed order
        const Face& a = faces[f];
        const Face& b = faces[g];
        return triangles_intersect(v[a[0]], v[a[1]], v[a[2]], v[b[0]], v[b[1]], v[b[2]]);
    };

    std::vector<std::vector<std::uint32_t>> partners(nf);
    if (mode == SifMode::BruteForce) {
        parallel_for(nf, [&](std::size_t fi) {
            const auto f = static_cast<std::uint32_t>(fi);
            for (std::uint32_t g = f + 1; g < nf; ++g) {
                if (!boxes[f].overlaps(boxes[g]) || share_vertex(faces[f], faces[g])) continue;
                if (test(f, g)) partners[f].push_back(g);
            }
        }, 16);
    } else {
        const AabbTree tree(boxes);
        parallel_for(nf, [&](std::size_t fi) {
            const auto f = static_cast<std::uint32_t>(fi);
            tree.query(boxes[f], [&](std::uint32_t g) {
                if (g <= f || share_vertex(faces[f], faces[g])) return;
                if (test(f, g)) partners[f].push_back(g);
            });
        }, 64);
    }

    std::vector<char> hit(nf, 0);
    for (std::size_t f = 0; f < nf; ++f) {
        if (!partners[f].empty()) hit[f] = 1;
        for (auto g : partners[f]) hit[g] = 1;
    }
    for (std::size_t f = 0; f < nf; ++f) {
        if (hit[f]) result.faces.push_back(static_cast<std::uint32_t>(f));
    }
    result.count = result.faces.size();
    return result;
}

nlohmann::json to_json(const SifResult& r)
{
    return {{"count", r.count}, {"faces", r.faces}};
}

} // namespace dsurf
