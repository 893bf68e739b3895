#include "ymlab/geom.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <unordered_map>

namespace ymlab {

CurvatureSamples curvature_finite_difference(const ConicCylinder<double>& c, int nodes) {
    if (nodes < 5) throw GeometryError("need at least 5 nodes");
    const double h = 2.0 / (nodes - 1);
    std::vector<double> rho(nodes);
    for (int k = 0; k < nodes; ++k) rho[k] = metric_rho(c, -1.0 + k * h);
    CurvatureSamples out;
    for (int k = 1; k + 1 < nodes; ++k) {
        out.x.push_back(-1.0 + k * h);
        out.k.push_back(-(rho[k + 1] - 2.0 * rho[k] + rho[k - 1]) / (h * h * rho[k]));
    }
    return out;
}

Eigen::Vector2d SurfaceComplex::vertex_xy(int v) const {
    const Chart& c = charts[vertex_chart[v]];
    return {c.x0 + vertex_i[v] * c.hx(), c.y0 + vertex_j[v] * c.hy()};
}

int SurfaceComplex::euler_characteristic() const {
    return num_vertices - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
}

int SurfaceComplex::punctured_euler_characteristic() const {
    return euler_characteristic() - static_cast<int>(punctures.size());
}

int SurfaceComplex::path_end(const Path& p) const {
    int v = p.start;
    for (const DirEdge& d : p.steps) {
        const Edge& e = edges[d.e];
        v = d.s > 0 ? e.v1 : e.v0;
    }
    return v;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

class Builder {
public:
    SurfaceComplex s;

    int add_chart(Chart c) {
        c.hole.assign(static_cast<std::size_t>(c.nx) * c.ny, 0);
        s.charts.push_back(std::move(c));
        return static_cast<int>(s.charts.size()) - 1;
    }

    void open() {
        offsets_.clear();
        int total = 0;
        for (const Chart& c : s.charts) {
            offsets_.push_back(total);
            total += (c.nx + 1) * (c.ny + 1);
        }
        uf_ = std::make_unique<UnionFind>(total);
    }

    int local(int chart, int i, int j) const {
        const Chart& c = s.charts[chart];
        return offsets_[chart] + j * (c.nx + 1) + i;
    }

    void glue(int ca, int ia, int ja, int cb, int ib, int jb) {
        uf_->unite(local(ca, ia, ja), local(cb, ib, jb));
    }

    void periodic_x(int chart) {
        const Chart& c = s.charts[chart];
        for (int j = 0; j <= c.ny; ++j) glue(chart, 0, j, chart, c.nx, j);
    }
    void periodic_y(int chart) {
        const Chart& c = s.charts[chart];
        for (int i = 0; i <= c.nx; ++i) glue(chart, i, 0, chart, i, c.ny);
    }

    void close() {
        std::unordered_map<int, int> root_to_global;
        int next = 0;
        // Vertices strictly inside excised holes belong to no cell and are dropped.
        std::vector<std::uint8_t> used(uf_->parent.size(), 0);
        for (std::size_t ci = 0; ci < s.charts.size(); ++ci) {
            const Chart& c = s.charts[ci];
            for (int j = 0; j < c.ny; ++j)
                for (int i = 0; i < c.nx; ++i)
                    if (!c.is_hole(i, j))
                        for (int dj = 0; dj < 2; ++dj)
                            for (int di = 0; di < 2; ++di) used[local(static_cast<int>(ci), i + di, j + dj)] = 1;
        }
        for (std::size_t ci = 0; ci < s.charts.size(); ++ci) {
            Chart& c = s.charts[ci];
            c.vert.assign(static_cast<std::size_t>(c.nx + 1) * (c.ny + 1), -1);
            for (int j = 0; j <= c.ny; ++j)
                for (int i = 0; i <= c.nx; ++i) {
                    if (!used[local(static_cast<int>(ci), i, j)]) continue;
                    const int r = uf_->find(local(static_cast<int>(ci), i, j));
                    auto it = root_to_global.find(r);
                    int g;
                    if (it == root_to_global.end()) {
                        g = next++;
                        root_to_global.emplace(r, g);
                        s.vertex_chart.push_back(static_cast<int>(ci));
                        s.vertex_i.push_back(i);
                        s.vertex_j.push_back(j);
                    } else {
                        g = it->second;
                    }
                    c.vert[static_cast<std::size_t>(j) * (c.nx + 1) + i] = g;
                }
        }
        s.num_vertices = next;
        adj_.assign(next, {});

        for (std::size_t ci = 0; ci < s.charts.size(); ++ci) {
            Chart& c = s.charts[ci];
            c.face.assign(static_cast<std::size_t>(c.nx) * c.ny, -1);
            for (int j = 0; j < c.ny; ++j)
                for (int i = 0; i < c.nx; ++i) {
                    if (c.is_hole(i, j)) continue;
                    Face f;
                    f.chart = static_cast<int>(ci);
                    f.i = i;
                    f.j = j;
                    f.v = {c.vid(i, j), c.vid(i + 1, j), c.vid(i + 1, j + 1), c.vid(i, j + 1)};
                    const int eb = edge(f.v[0], f.v[1], static_cast<int>(ci), i, j, true);
                    const int er = edge(f.v[1], f.v[2], static_cast<int>(ci), i + 1, j, false);
                    const int et = edge(f.v[3], f.v[2], static_cast<int>(ci), i, j + 1, true);
                    const int el = edge(f.v[0], f.v[3], static_cast<int>(ci), i, j, false);
                    f.e = {eb, er, et, el};
                    // Traversal: v0->v1, v1->v2, v2->v3, v3->v0.
                    const std::array<std::pair<int, int>, 4> trav = {
                        std::pair{f.v[0], f.v[1]}, std::pair{f.v[1], f.v[2]},
                        std::pair{f.v[2], f.v[3]}, std::pair{f.v[3], f.v[0]}};
                    for (int k = 0; k < 4; ++k) {
                        const Edge& e = s.edges[f.e[k]];
                        f.s[k] = (e.v0 == trav[k].first && e.v1 == trav[k].second) ? 1 : -1;
                    }
                    c.face[static_cast<std::size_t>(j) * c.nx + i] = static_cast<int>(s.faces.size());
                    s.faces.push_back(f);
                }
        }
        s.edge_faces.assign(s.edges.size(), {-1, -1});
        for (std::size_t fi = 0; fi < s.faces.size(); ++fi)
            for (int k = 0; k < 4; ++k) {
                auto& ef = s.edge_faces[s.faces[fi].e[k]];
                if (ef[0] < 0)
                    ef[0] = static_cast<int>(fi);
                else if (ef[1] < 0)
                    ef[1] = static_cast<int>(fi);
                else
                    throw GeometryError("edge shared by more than two faces");
            }
    }

    int find_edge(int a, int b) const {
        for (int e : adj_[a]) {
            const Edge& ed = s.edges[e];
            if ((ed.v0 == a && ed.v1 == b) || (ed.v0 == b && ed.v1 == a)) return e;
        }
        throw GeometryError("path step between non-adjacent vertices");
    }

    Path path(const std::vector<int>& verts) const {
        Path p;
        p.start = verts.front();
        for (std::size_t k = 1; k < verts.size(); ++k) {
            const int e = find_edge(verts[k - 1], verts[k]);
            p.steps.push_back({e, s.edges[e].v0 == verts[k - 1] ? 1 : -1});
        }
        return p;
    }

private:
    int edge(int a, int b, int chart, int i, int j, bool along_x) {
        for (int e : adj_[a]) {
            const Edge& ed = s.edges[e];
            if ((ed.v0 == a && ed.v1 == b) || (ed.v0 == b && ed.v1 == a)) return e;
        }
        Edge ed;
        ed.v0 = a;
        ed.v1 = b;
        ed.chart = chart;
        ed.i = i;
        ed.j = j;
        ed.along_x = along_x;
        const int id = static_cast<int>(s.edges.size());
        s.edges.push_back(ed);
        adj_[a].push_back(id);
        adj_[b].push_back(id);
        return id;
    }

    std::vector<int> offsets_;
    std::unique_ptr<UnionFind> uf_;
    std::vector<std::vector<int>> adj_;
};

Chart torus_chart(const std::string& name, int n) {
    Chart c;
    c.name = name;
    c.kind = ChartKind::torus;
    c.nx = c.ny = n;
    c.x0 = c.y0 = 0.0;
    c.x1 = c.y1 = 1.0;
    return c;
}

Chart cylinder_chart(const std::string& name, int nx, int ny) {
    Chart c;
    c.name = name;
    c.kind = ChartKind::cylinder;
    c.nx = nx;
    c.ny = ny;
    c.x0 = -1.0;
    c.x1 = 1.0;
    c.y0 = 0.0;
    c.y1 = 2.0 * M_PI;
    return c;
}

// Vertices around an m x m hole at the chart corner, counterclockwise.
std::vector<std::pair<int, int>> hole_cycle(int m) {
    std::vector<std::pair<int, int>> cyc;
    for (int k = 0; k < m; ++k) cyc.emplace_back(k, 0);
    for (int k = 0; k < m; ++k) cyc.emplace_back(m, k);
    for (int k = 0; k < m; ++k) cyc.emplace_back(m - k, m);
    for (int k = 0; k < m; ++k) cyc.emplace_back(0, m - k);
    return cyc;
}

std::vector<int> row_loop(const Chart& c, int j, int i_start) {
    std::vector<int> v;
    for (int i = i_start; i <= c.nx; ++i) v.push_back(c.vid(i, j));
    for (int i = 1; i <= i_start; ++i) v.push_back(c.vid(i, j));
    return v;
}

std::vector<int> col_loop(const Chart& c, int i, int j_start) {
    std::vector<int> v;
    for (int j = j_start; j <= c.ny; ++j) v.push_back(c.vid(i, j));
    for (int j = 1; j <= j_start; ++j) v.push_back(c.vid(i, j));
    return v;
}

// Base vertex (ib, jb) -> lower-left corner of cell (i0, j0) -> around the cell -> back.
std::vector<int> cell_loop(const Chart& c, int ib, int jb, int i0, int j0) {
    std::vector<int> go;
    for (int i = ib; i <= i0; ++i) go.push_back(c.vid(i, jb));
    for (int j = jb + 1; j <= j0; ++j) go.push_back(c.vid(i0, j));
    std::vector<int> v = go;
    v.push_back(c.vid(i0 + 1, j0));
    v.push_back(c.vid(i0 + 1, j0 + 1));
    v.push_back(c.vid(i0, j0 + 1));
    v.push_back(c.vid(i0, j0));
    for (auto it = go.rbegin() + 1; it != go.rend(); ++it) v.push_back(*it);
    return v;
}

std::vector<int> conjugated(const std::vector<int>& arc, const std::vector<int>& loop) {
    std::vector<int> v = arc;
    v.insert(v.end(), loop.begin() + 1, loop.end());
    for (auto it = arc.rbegin() + 1; it != arc.rend(); ++it) v.push_back(*it);
    return v;
}

void add_puncture(SurfaceComplex& s, int chart, int i0, int j0) {
    const Chart& c = s.charts[chart];
    Puncture p;
    p.chart = chart;
    p.face = c.fid(i0, j0);
    p.cx = c.x0 + (i0 + 0.5) * c.hx();
    p.cy = c.y0 + (j0 + 0.5) * c.hy();
    s.punctures.push_back(p);
}

SurfaceComplex build_torus(int n, bool punctured) {
    if (n < 4 || n % 2 != 0) throw GeometryError("torus resolution must be even and >= 4");
    Builder b;
    const int t = b.add_chart(torus_chart("T", n));
    b.open();
    b.periodic_x(t);
    b.periodic_y(t);
    b.close();
    SurfaceComplex& s = b.s;
    const Chart& c = s.charts[t];
    s.genus = 1;
    s.base_vertex = c.vid(0, 0);
    s.loops["a"] = b.path(row_loop(c, 0, 0));
    s.loops["b"] = b.path(col_loop(c, 0, 0));
    s.generators = {"a", "b"};
    if (punctured) {
        add_puncture(s, t, n / 2, n / 2);
        s.loops["p"] = b.path(cell_loop(c, 0, 0, n / 2, n / 2));
        s.topology = "one_holed_torus_punctured";
        s.component_loops = {{"a", "b", "p"}};
    } else {
        s.topology = "torus";
        s.component_loops = {{"a", "b"}};
    }
    return std::move(b.s);
}

SurfaceComplex build_genus2(int n, int m, int cnx) {
    if (n < 8 || n % 2 != 0) throw GeometryError("torus chart resolution must be even and >= 8");
    if (m < 1 || 6 * m > n) throw GeometryError("hole side must satisfy 1 <= 6*hole <= n");
    if (cnx < 4 || cnx % 2 != 0) throw GeometryError("cylinder x resolution must be even and >= 4");
    const int ny = 4 * m;
    Builder b;
    const int t1 = b.add_chart(torus_chart("T1", n));
    const int cy = b.add_chart(cylinder_chart("C", cnx, ny));
    const int t2 = b.add_chart(torus_chart("T2", n));
    for (int chart : {t1, t2}) {
        Chart& c = b.s.charts[chart];
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) c.hole[static_cast<std::size_t>(j) * n + i] = 1;
    }
    b.open();
    b.periodic_x(t1);
    b.periodic_y(t1);
    b.periodic_x(t2);
    b.periodic_y(t2);
    b.periodic_y(cy);
    const auto cyc = hole_cycle(m);
    for (int j = 0; j < ny; ++j) {
        const auto [ia, ja] = cyc[(ny - j) % ny];
        b.glue(cy, 0, j, t1, ia, ja);
        const auto [ib, jb] = cyc[j];
        b.glue(cy, cnx, j, t2, ib, jb);
    }
    b.close();
    SurfaceComplex& s = b.s;
    s.topology = "genus2_separating_pinch";
    s.genus = 2;
    s.cylinder_chart = cy;
    const Chart& c1 = s.charts[t1];
    const Chart& cc = s.charts[cy];
    const Chart& c2 = s.charts[t2];

    s.base_vertex = c1.vid(m, m);
    std::vector<int> gamma0;
    for (int i = 0; i <= cnx; ++i) gamma0.push_back(cc.vid(i, 2 * m));
    if (gamma0.front() != s.base_vertex || gamma0.back() != c2.vid(m, m))
        throw GeometryError("cylinder gluing does not match the hole corners");

    s.loops["a1"] = b.path(row_loop(c1, m, m));
    s.loops["b1"] = b.path(col_loop(c1, m, m));
    s.loops["a2"] = b.path(conjugated(gamma0, row_loop(c2, m, m)));
    s.loops["b2"] = b.path(conjugated(gamma0, col_loop(c2, m, m)));
    add_puncture(s, t1, n / 2, n / 2);
    s.loops["p"] = b.path(cell_loop(c1, m, m, n / 2, n / 2));

    std::vector<int> half(gamma0.begin(), gamma0.begin() + cnx / 2 + 1);
    std::vector<int> ring;
    for (int j = 2 * m; j <= ny; ++j) ring.push_back(cc.vid(cnx / 2, j));
    for (int j = 1; j <= 2 * m; ++j) ring.push_back(cc.vid(cnx / 2, j));
    s.loops["c"] = b.path(conjugated(half, ring));
    s.generators = {"a1", "b1", "a2", "b2"};
    s.component_loops = {{"a1", "b1", "p"}, {"a2", "b2"}};

    std::vector<int> core;
    for (int j = 0; j <= ny; ++j) core.push_back(cc.vid(cnx / 2, j));
    s.pinching_curves.push_back(b.path(core));
    for (int j : {0, ny / 4, ny / 2, 3 * ny / 4}) {
        std::vector<int> arc;
        for (int i = 0; i <= cnx; ++i) arc.push_back(cc.vid(i, j));
        s.transverse_arcs.push_back(b.path(arc));
    }
    return std::move(b.s);
}

}  // namespace

SurfaceComplex build_surface(const SurfaceSpec& spec) {
    if (spec.topology == "torus") return build_torus(spec.n, false);
    if (spec.topology == "one_holed_torus_punctured") return build_torus(spec.n, true);
    if (spec.topology == "genus2_separating_pinch") return build_genus2(spec.n, spec.hole, spec.cyl_nx);
    throw GeometryError("unknown topology: " + spec.topology);
}

SurfaceComplex build_cylinder(int nx, int ny) {
    if (nx < 4 || ny < 4 || nx % 2 != 0) throw GeometryError("cylinder resolution must be even and >= 4");
    Builder b;
    const int cy = b.add_chart(cylinder_chart("C", nx, ny));
    b.open();
    b.periodic_y(cy);
    b.close();
    SurfaceComplex& s = b.s;
    s.topology = "cylinder";
    s.cylinder_chart = cy;
    const Chart& c = s.charts[cy];
    s.base_vertex = c.vid(0, 0);
    std::vector<int> core;
    for (int j = 0; j <= ny; ++j) core.push_back(c.vid(nx / 2, j));
    s.pinching_curves.push_back(b.path(core));
    std::vector<int> arc;
    for (int i = 0; i <= nx; ++i) arc.push_back(c.vid(i, 0));
    s.transverse_arcs.push_back(b.path(arc));
    return std::move(b.s);
}

bool is_pinch_cell(const SurfaceComplex& s, int face) {
    const Face& f = s.faces[face];
    if (f.chart != s.cylinder_chart) return false;
    const int half = s.charts[f.chart].nx / 2;
    return f.i == half - 1 || f.i == half;
}

double inverse_rho_integral(double ell, double kappa, double a, double b) {
    if (!(a < b)) throw GeometryError("empty interval");
    if (ell == 0.0) {
        if (a < 0.0 && b > 0.0) return std::numeric_limits<double>::infinity();
        if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
        return std::log(std::abs(b) / std::abs(a)) * (b > 0.0 ? 1.0 : -1.0) / kappa;
    }
    const double s = std::sqrt((1.0 - ell) / ell), rs = std::sqrt(ell);
    auto prim = [&](double t) { return t * detail::asinh_over(t * s) / rs; };
    return (prim(b) - prim(a)) / kappa;
}

MetricGrid metric_for(const SurfaceComplex& s, double ell, double kappa) {
    if (!(ell >= 0.0 && ell <= 1.0)) throw GeometryError("ell must lie in [0,1]");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw GeometryError("kappa must lie in (0,1]");
    const ConicCylinder<double> cyl{kappa, ell, 4, 4};
    MetricGrid g;
    g.ell = ell;
    g.kappa = kappa;
    const std::size_t nf = s.faces.size();
    g.cell_area.assign(nf, 0.0);
    g.conformal.assign(nf, 1.0);
    g.edge_weight.assign(s.edges.size(), 0.0);
    g.vertex_mass.assign(s.num_vertices, 0.0);
    g.face_active.assign(nf, 0);
    g.face_wx.assign(nf, 0.0);
    g.face_wy.assign(nf, 0.0);
    const double gq = 0.5 / std::sqrt(3.0);

    std::vector<std::uint8_t> excised(nf, 0);
    for (const Puncture& p : s.punctures) excised[p.face] = 1;

    for (std::size_t fi = 0; fi < nf; ++fi) {
        if (excised[fi]) continue;  // cone cell: holonomy tracked on its ring only
        const Face& f = s.faces[fi];
        const Chart& c = s.charts[f.chart];
        const double hx = c.hx(), hy = c.hy();
        double area, wx, wy;
        if (c.kind == ChartKind::torus) {
            area = hx * hy;
            wx = 0.5 * hy / hx;
            wy = 0.5 * hx / hy;
        } else {
            if (ell == 0.0 && is_pinch_cell(s, static_cast<int>(fi))) continue;
            const double xm = c.x0 + (f.i + 0.5) * hx;
            const double xa = xm - gq * hx, xb = xm + gq * hx;
            const double int_rho = 0.5 * hx * (metric_rho(cyl, xa) + metric_rho(cyl, xb));
            const double int_inv = inverse_rho_integral(ell, kappa, c.x0 + f.i * hx, c.x0 + (f.i + 1) * hx);
            area = hy * int_rho;
            // Series resistance across the cell: exact for x-only variation and
            // vanishing continuously as the pinch closes.
            wx = 0.5 * hy / int_inv;
            wy = 0.5 * int_inv / hy;
            g.conformal[fi] = metric_factor(cyl, xm);
        }
        g.cell_area[fi] = area;
        g.face_active[fi] = area > 0.0 ? 1 : 0;
        g.face_wx[fi] = wx;
        g.face_wy[fi] = wy;
        g.edge_weight[f.e[0]] += wx;
        g.edge_weight[f.e[2]] += wx;
        g.edge_weight[f.e[1]] += wy;
        g.edge_weight[f.e[3]] += wy;
        for (int k = 0; k < 4; ++k) g.vertex_mass[f.v[k]] += 0.25 * area;
        g.total_area += area;
    }

    UnionFind uf(s.num_vertices);
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const Edge& ed = s.edges[e];
        if (g.edge_weight[e] > 0.0 && g.vertex_mass[ed.v0] > 0.0 && g.vertex_mass[ed.v1] > 0.0)
            uf.unite(ed.v0, ed.v1);
    }
    g.component.assign(s.num_vertices, -1);
    std::unordered_map<int, int> label;
    for (int v = 0; v < s.num_vertices; ++v) {
        if (g.vertex_mass[v] <= 0.0) continue;
        const int r = uf.find(v);
        auto it = label.find(r);
        if (it == label.end()) it = label.emplace(r, static_cast<int>(label.size())).first;
        g.component[v] = it->second;
    }
    g.num_components = static_cast<int>(label.size());
    return g;
}

}  // namespace ymlab
