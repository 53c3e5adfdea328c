#include "cohevo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cohevo {

namespace {

bool on_grid(double value, double origin, double spacing, int count, int& index) {
    const double raw = (value - origin) / spacing;
    const double rounded = std::round(raw);
    index = static_cast<int>(rounded);
    return std::fabs(raw - rounded) <= 1e-9 && index >= 0 && index <= count;
}

void finalize_element_data(Mesh& mesh) {
    const std::size_t ne = mesh.n_elements();
    const std::size_t npe = mesh.nodes_per_elem();
    mesh.elem_volume.assign(ne, 0.0);
    mesh.elem_grad.assign(ne * npe * static_cast<std::size_t>(mesh.dimension), 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        const std::size_t* nd = mesh.element(e);
        double* g = &mesh.elem_grad[e * npe * static_cast<std::size_t>(mesh.dimension)];
        if (mesh.dimension == 1) {
            const double h = mesh.node_coord(nd[1], 0) - mesh.node_coord(nd[0], 0);
            mesh.elem_volume[e] = std::fabs(h);
            g[0] = -1.0 / h;
            g[1] = 1.0 / h;
        } else {
            const double x0 = mesh.node_coord(nd[0], 0), y0 = mesh.node_coord(nd[0], 1);
            const double x1 = mesh.node_coord(nd[1], 0), y1 = mesh.node_coord(nd[1], 1);
            const double x2 = mesh.node_coord(nd[2], 0), y2 = mesh.node_coord(nd[2], 1);
            const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
            mesh.elem_volume[e] = 0.5 * std::fabs(det);
            // hat gradients of the P1 triangle
            g[0] = (y1 - y2) / det;
            g[1] = (x2 - x1) / det;
            g[2] = (y2 - y0) / det;
            g[3] = (x0 - x2) / det;
            g[4] = (y0 - y1) / det;
            g[5] = (x1 - x0) / det;
        }
    }
}

// In 2d the cracked domain must stay connected (the crack may not span the
// body). A 1d rod is always cut in two by its interface point, so there the
// requirement is that every component is anchored by a Dirichlet node.
void check_connected(const Mesh& mesh) {
    const std::size_t n = mesh.n_nodes();
    if (n == 0) throw std::runtime_error("mesh: no nodes");
    std::vector<std::vector<std::size_t>> adj(n);
    const std::size_t npe = mesh.nodes_per_elem();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const std::size_t* nd = mesh.element(e);
        for (std::size_t a = 0; a < npe; ++a)
            for (std::size_t b = a + 1; b < npe; ++b) {
                adj[nd[a]].push_back(nd[b]);
                adj[nd[b]].push_back(nd[a]);
            }
    }
    std::vector<int> component(n, -1);
    int n_components = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (component[root] >= 0) continue;
        const int id = n_components++;
        std::queue<std::size_t> q;
        q.push(root);
        component[root] = id;
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop();
            for (std::size_t w : adj[v])
                if (component[w] < 0) {
                    component[w] = id;
                    q.push(w);
                }
        }
    }
    if (mesh.dimension == 2 && n_components != 1)
        throw std::runtime_error("mesh: cracked domain is disconnected (crack spans the body)");
    std::vector<char> anchored(static_cast<std::size_t>(n_components), 0);
    for (std::size_t d : mesh.dirichlet_nodes) anchored[static_cast<std::size_t>(component[d])] = 1;
    for (char a : anchored)
        if (!a) throw std::runtime_error("mesh: a component has no Dirichlet node");
}

}  // namespace

double Mesh::interface_measure() const {
    double s = 0.0;
    for (const auto& p : interface) s += p.weight;
    return s;
}

bool Mesh::is_dirichlet(std::size_t node) const {
    return std::binary_search(dirichlet_nodes.begin(), dirichlet_nodes.end(), node);
}

Mesh build_rod_mesh(double length, int n_elements, double interface_position, int field_dim) {
    if (length <= 0.0) throw std::invalid_argument("rod mesh: length must be positive");
    if (n_elements < 2) throw std::invalid_argument("rod mesh: need at least 2 elements");
    if (field_dim != 1) throw std::invalid_argument("rod mesh: field_dim must be 1");
    if (!(interface_position > 0.0 && interface_position < length))
        throw std::invalid_argument("rod mesh: interface must be strictly inside the rod");

    const double h = length / n_elements;
    int k = 0;
    if (!on_grid(interface_position, 0.0, h, n_elements, k) || k == 0 || k == n_elements)
        throw std::invalid_argument(
            "rod mesh: interface_position does not coincide with an interior grid node");

    Mesh mesh;
    mesh.dimension = 1;
    mesh.field_dim = field_dim;
    // grid nodes 0..n_elements, the node at index k keeps the minus copy,
    // the plus copy is appended at the end
    for (int i = 0; i <= n_elements; ++i) mesh.coords.push_back(i * h);
    mesh.coords.push_back(k * h);
    const std::size_t minus_node = static_cast<std::size_t>(k);
    const std::size_t plus_node = static_cast<std::size_t>(n_elements) + 1;

    // elements to the right of the interface reference the plus copy
    for (int e = 0; e < n_elements; ++e) {
        std::size_t left = static_cast<std::size_t>(e);
        const std::size_t right = static_cast<std::size_t>(e) + 1;
        if (e >= k && left == minus_node) left = plus_node;
        mesh.elem_nodes.push_back(left);
        mesh.elem_nodes.push_back(right);
    }

    mesh.dirichlet_nodes = {0, static_cast<std::size_t>(n_elements)};
    std::sort(mesh.dirichlet_nodes.begin(), mesh.dirichlet_nodes.end());

    InterfacePair pair;
    pair.plus_node = plus_node;
    pair.minus_node = minus_node;
    pair.weight = 1.0;  // H^0 measure of a point
    pair.normal = {1.0, 0.0};
    mesh.interface.push_back(pair);

    finalize_element_data(mesh);
    validate_mesh(mesh);
    return mesh;
}

Mesh build_rect_mesh_with_crack(double width, double height, int nx, int ny, double crack_x0,
                                double crack_x1, const RectMeshOptions& opts) {
    if (width <= 0.0 || height <= 0.0) throw std::invalid_argument("rect mesh: bad dimensions");
    if (nx < 2 || ny < 2) throw std::invalid_argument("rect mesh: need nx, ny >= 2");
    if (ny % 2 != 0)
        throw std::invalid_argument("rect mesh: ny must be even so the midline y=0 is a grid line");
    if (opts.field_dim != 1 && opts.field_dim != 2)
        throw std::invalid_argument("rect mesh: field_dim must be 1 or 2");
    if (!(crack_x0 < crack_x1))
        throw std::invalid_argument("rect mesh: crack range must be nonempty");
    if (crack_x0 < 0.0 || crack_x1 > width)
        throw std::invalid_argument("rect mesh: crack range outside the domain");
    if (crack_x0 <= 0.0 && crack_x1 >= width)
        throw std::invalid_argument("rect mesh: crack must not span the full width");

    const double dx = width / nx;
    const double dy = height / ny;
    int i0 = 0, i1 = 0;
    if (!on_grid(crack_x0, 0.0, dx, nx, i0) || !on_grid(crack_x1, 0.0, dx, nx, i1))
        throw std::invalid_argument("rect mesh: crack endpoints must lie on grid nodes");

    const int jmid = ny / 2;  // grid row at y = 0
    const auto grid = [nx](int i, int j) {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) +
               static_cast<std::size_t>(i);
    };

    Mesh mesh;
    mesh.dimension = 2;
    mesh.field_dim = opts.field_dim;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            mesh.coords.push_back(i * dx);
            mesh.coords.push_back(j * dy - height / 2.0);
        }

    // crack nodes: grid nodes on y=0 with i in [i0, i1]; interior tips keep a
    // single node, the rest get a plus copy used by elements above the crack
    std::map<std::size_t, std::size_t> plus_copy;  // minus node -> plus node
    std::vector<std::size_t> crack_idx;            // column indices on the crack
    for (int i = i0; i <= i1; ++i) crack_idx.push_back(static_cast<std::size_t>(i));
    const auto is_interior_tip = [&](int i) {
        const bool is_endpoint = (i == i0 || i == i1);
        const bool on_boundary = (i == 0 || i == nx);
        return is_endpoint && !on_boundary;
    };
    for (int i = i0; i <= i1; ++i) {
        if (is_interior_tip(i)) continue;
        const std::size_t minus = grid(i, jmid);
        const std::size_t plus = mesh.n_nodes();
        mesh.coords.push_back(mesh.node_coord(minus, 0));
        mesh.coords.push_back(mesh.node_coord(minus, 1));
        plus_copy[minus] = plus;
    }

    const auto node_for = [&](int i, int j, bool above) -> std::size_t {
        const std::size_t g = grid(i, j);
        if (above && j == jmid) {
            const auto it = plus_copy.find(g);
            if (it != plus_copy.end()) return it->second;
        }
        return g;
    };

    for (int j = 0; j < ny; ++j) {
        const bool above = j >= jmid;  // cell strictly above y=0 iff its bottom row is >= jmid
        for (int i = 0; i < nx; ++i) {
            const std::size_t a = node_for(i, j, above);
            const std::size_t b = node_for(i + 1, j, above);
            const std::size_t c = node_for(i + 1, j + 1, above);
            const std::size_t d = node_for(i, j + 1, above);
            mesh.elem_nodes.insert(mesh.elem_nodes.end(), {a, b, c});
            mesh.elem_nodes.insert(mesh.elem_nodes.end(), {a, c, d});
        }
    }

    // boundary classification
    const auto side_nodes = [&](Side s) {
        std::vector<std::size_t> out;
        switch (s) {
            case Side::Bottom:
                for (int i = 0; i <= nx; ++i) out.push_back(grid(i, 0));
                break;
            case Side::Top:
                for (int i = 0; i <= nx; ++i) out.push_back(grid(i, ny));
                break;
            case Side::Left:
                for (int j = 0; j <= ny; ++j) out.push_back(node_for(0, j, j >= jmid));
                if (plus_copy.count(grid(0, jmid))) out.push_back(grid(0, jmid));
                break;
            case Side::Right:
                for (int j = 0; j <= ny; ++j) out.push_back(node_for(nx, j, j >= jmid));
                if (plus_copy.count(grid(nx, jmid))) out.push_back(grid(nx, jmid));
                break;
        }
        return out;
    };

    std::set<Side> dirichlet(opts.dirichlet_sides.begin(), opts.dirichlet_sides.end());
    if (dirichlet.empty())
        throw std::invalid_argument("rect mesh: at least one Dirichlet side is required");
    std::set<std::size_t> dnodes;
    for (Side s : dirichlet)
        for (std::size_t n : side_nodes(s)) dnodes.insert(n);
    mesh.dirichlet_nodes.assign(dnodes.begin(), dnodes.end());

    // Neumann facets: vertical boundary edges must respect the crack-mouth
    // duplication, horizontal sides cannot meet the crack
    for (Side s : {Side::Bottom, Side::Right, Side::Top, Side::Left}) {
        if (dirichlet.count(s)) continue;
        if (s == Side::Bottom || s == Side::Top) {
            const int j = (s == Side::Bottom) ? 0 : ny;
            for (int i = 0; i < nx; ++i) {
                BoundaryFacet f;
                f.nodes = {grid(i, j), grid(i + 1, j)};
                f.node_count = 2;
                f.measure = dx;
                mesh.neumann_facets.push_back(f);
            }
        } else {
            const int i = (s == Side::Left) ? 0 : nx;
            for (int j = 0; j < ny; ++j) {
                const bool above = j >= jmid;
                BoundaryFacet f;
                f.nodes = {node_for(i, j, above), node_for(i, j + 1, above)};
                f.node_count = 2;
                f.measure = dy;
                mesh.neumann_facets.push_back(f);
            }
        }
    }

    // interface pairs with lumped edge-length weights; tips included so the
    // weights partition |M|
    for (std::size_t idx = 0; idx < crack_idx.size(); ++idx) {
        const int i = static_cast<int>(crack_idx[idx]);
        double w = 0.0;
        if (idx > 0) w += dx / 2.0;
        if (idx + 1 < crack_idx.size()) w += dx / 2.0;
        const std::size_t minus = grid(i, jmid);
        InterfacePair pair;
        pair.minus_node = minus;
        pair.plus_node = plus_copy.count(minus) ? plus_copy.at(minus) : minus;
        pair.weight = w;
        pair.normal = {0.0, 1.0};
        mesh.interface.push_back(pair);
    }

    finalize_element_data(mesh);
    validate_mesh(mesh);
    return mesh;
}

Vec jump(const Mesh& mesh, std::span<const double> u) {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    if (u.size() != mesh.n_dofs())
        throw std::invalid_argument("jump: field length does not match mesh dofs");
    Vec out(mesh.interface.size() * m, 0.0);
    for (std::size_t e = 0; e < mesh.interface.size(); ++e) {
        const auto& p = mesh.interface[e];
        if (p.tied()) continue;
        for (std::size_t c = 0; c < m; ++c)
            out[e * m + c] = u[p.plus_node * m + c] - u[p.minus_node * m + c];
    }
    return out;
}

Vec jump_magnitudes(const Mesh& mesh, std::span<const double> u) {
    const std::size_t m = static_cast<std::size_t>(mesh.field_dim);
    Vec j = jump(mesh, u);
    Vec out(mesh.interface.size(), 0.0);
    for (std::size_t e = 0; e < mesh.interface.size(); ++e) {
        double s = 0.0;
        for (std::size_t c = 0; c < m; ++c) s += j[e * m + c] * j[e * m + c];
        out[e] = std::sqrt(s);
    }
    return out;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.dirichlet_nodes.empty())
        throw std::runtime_error("mesh: Dirichlet node set is empty");
    for (const auto& p : mesh.interface) {
        if (!(p.weight > 0.0))
            throw std::runtime_error("mesh: interface weight must be strictly positive");
        const double nn = std::sqrt(p.normal[0] * p.normal[0] + p.normal[1] * p.normal[1]);
        if (std::fabs(nn - 1.0) > 1e-14)
            throw std::runtime_error("mesh: interface normal is not unit");
        for (int axis = 0; axis < mesh.dimension; ++axis)
            if (mesh.node_coord(p.plus_node, axis) != mesh.node_coord(p.minus_node, axis))
                throw std::runtime_error("mesh: duplicated interface nodes are not coincident");
    }
    check_connected(mesh);
}

std::string mesh_to_json(const Mesh& mesh) {
    nlohmann::json j;
    j["dimension"] = mesh.dimension;
    j["field_dim"] = mesh.field_dim;
    j["nodes"] = nlohmann::json::array();
    for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
        nlohmann::json node = nlohmann::json::array();
        for (int c = 0; c < mesh.dimension; ++c) node.push_back(mesh.node_coord(n, c));
        j["nodes"].push_back(node);
    }
    j["elements"] = nlohmann::json::array();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        nlohmann::json el = nlohmann::json::array();
        for (std::size_t a = 0; a < mesh.nodes_per_elem(); ++a) el.push_back(mesh.element(e)[a]);
        j["elements"].push_back(el);
    }
    j["dirichlet_nodes"] = mesh.dirichlet_nodes;
    j["interface"] = nlohmann::json::array();
    for (const auto& p : mesh.interface)
        j["interface"].push_back({{"plus", p.plus_node},
                                  {"minus", p.minus_node},
                                  {"weight", p.weight},
                                  {"normal", {p.normal[0], p.normal[1]}},
                                  {"tied", p.tied()}});
    return j.dump(2);
}

}  // namespace cohevo
