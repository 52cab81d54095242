// dimer: command-line front end for the header library.
//
// Exit codes: 0 success, 1 parse error, 2 infeasible input (untileable
// region, slope outside the Newton polygon), 3 tolerance failure.

#include "dimer/amoeba.hpp"
#include "dimer/enumerate.hpp"
#include "dimer/fluctuations.hpp"
#include "dimer/graph.hpp"
#include "dimer/heights.hpp"
#include "dimer/kasteleyn.hpp"
#include "dimer/limitshape.hpp"
#include "dimer/sampler.hpp"
#include "dimer/torus.hpp"
#include "dimer/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace dimer;
using nlohmann::json;

namespace {

struct ToleranceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string version_line() { return std::string("# dimer ") + kVersion; }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::vector<Rational> parse_rationals(const std::string& csv, size_t want, const char* what) {
    std::vector<Rational> out;
    for (const std::string& t : split(csv, ',')) out.push_back(rational_from_string(t));
    if (out.size() != want)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) +
                                    " comma-separated weights");
    for (const Rational& q : out)
        if (q <= 0) throw std::invalid_argument(std::string(what) + ": weights must be positive");
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    return f;
}

// ---------------------------------------------------------------- regions

struct RegionSpec {
    std::string lattice;                    // "square" | "honeycomb"
    std::vector<std::array<int, 3>> cells;  // square (x,y,0); honeycomb (u,v,up)
    std::vector<std::string> weights;       // 2 (square) or 3 (honeycomb) rationals

    bool operator==(const RegionSpec&) const = default;
};

struct RegionOpts {
    std::vector<int> rect;     // M N
    std::vector<int> hexagon;  // A B C
    std::vector<std::string> removed;
    std::string file;
    std::string weights;
};

void add_region_options(CLI::App* cmd, RegionOpts& R) {
    auto* rect = cmd->add_option("--rect", R.rect, "square-grid M x N rectangle")->expected(2);
    auto* hex =
        cmd->add_option("--hexagon", R.hexagon, "honeycomb A x B x C hexagon")->expected(3);
    auto* file = cmd->add_option("--region", R.file, "region JSON file");
    cmd->add_option("--remove", R.removed, "cell x,y to delete (square only, repeatable)");
    cmd->add_option("--weights", R.weights,
                    "comma-separated edge weights: square h,v / honeycomb a,b,c");
    rect->excludes(hex)->excludes(file);
    hex->excludes(file);
}

json region_to_json(const RegionSpec& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        if (r.lattice == "square")
            cells.push_back({c[0], c[1]});
        else
            cells.push_back({c[0], c[1], c[2]});
    }
    return {{"lattice", r.lattice}, {"cells", cells}, {"weights", r.weights}};
}

RegionSpec region_from_json(const json& j) {
    const json& r = j.contains("region") ? j.at("region") : j;
    RegionSpec out;
    out.lattice = r.at("lattice").get<std::string>();
    if (out.lattice != "square" && out.lattice != "honeycomb")
        throw std::invalid_argument("region: lattice must be square or honeycomb");
    for (const json& c : r.at("cells")) {
        std::array<int, 3> cell{0, 0, 0};
        cell[0] = c.at(0).get<int>();
        cell[1] = c.at(1).get<int>();
        if (out.lattice == "honeycomb") cell[2] = c.at(2).get<int>() ? 1 : 0;
        out.cells.push_back(cell);
    }
    out.weights = r.at("weights").get<std::vector<std::string>>();
    return out;
}

RegionSpec resolve_region(const RegionOpts& R) {
    RegionSpec spec;
    if (!R.file.empty()) {
        std::ifstream f(R.file);
        if (!f) throw std::invalid_argument("cannot open region file: " + R.file);
        spec = region_from_json(json::parse(f));
    } else if (!R.rect.empty()) {
        spec.lattice = "square";
        std::set<std::pair<int, int>> cut;
        for (const std::string& s : R.removed) {
            auto p = split(s, ',');
            if (p.size() != 2) throw std::invalid_argument("--remove expects x,y");
            cut.insert({std::stoi(p[0]), std::stoi(p[1])});
        }
        for (int x = 0; x < R.rect[0]; ++x)
            for (int y = 0; y < R.rect[1]; ++y)
                if (!cut.count({x, y})) spec.cells.push_back({x, y, 0});
        spec.weights = {"1", "1"};
    } else if (!R.hexagon.empty()) {
        spec.lattice = "honeycomb";
        for (const TriCell& t : hexagon_cells(R.hexagon[0], R.hexagon[1], R.hexagon[2]))
            spec.cells.push_back({t.u, t.v, t.up ? 1 : 0});
        spec.weights = {"1", "1", "1"};
    } else {
        throw std::invalid_argument("no region given: use --rect, --hexagon or --region");
    }
    if (!R.weights.empty()) {
        size_t want = spec.lattice == "square" ? 2 : 3;
        auto ws = parse_rationals(R.weights, want, "--weights");
        spec.weights.clear();
        for (const Rational& q : ws) spec.weights.push_back(to_string(q));
    }
    size_t want = spec.lattice == "square" ? 2 : 3;
    if (spec.weights.size() != want)
        throw std::invalid_argument("region: wrong number of weights");
    return spec;
}

PlanarGraph build_graph(const RegionSpec& spec) {
    if (spec.lattice == "square") {
        std::vector<std::pair<int, int>> cells;
        for (const auto& c : spec.cells) cells.push_back({c[0], c[1]});
        SquareWeights wt;
        wt.horizontal = rational_from_string(spec.weights[0]);
        wt.vertical = rational_from_string(spec.weights[1]);
        return square_region(cells, wt);
    }
    std::vector<TriCell> cells;
    for (const auto& c : spec.cells) cells.push_back({c[0], c[1], c[2] != 0});
    HoneycombWeights wt;
    wt.a = rational_from_string(spec.weights[0]);
    wt.b = rational_from_string(spec.weights[1]);
    wt.c = rational_from_string(spec.weights[2]);
    return honeycomb_region(cells, wt);
}

// ---------------------------------------------------------------- models

struct ModelOpts {
    std::string model = "honeycomb";
    std::string weights;
};

void add_model_options(CLI::App* cmd, ModelOpts& M) {
    cmd->add_option("--model", M.model, "fundamental domain: honeycomb | square | square32")
        ->capture_default_str()
        ->check(CLI::IsMember({"honeycomb", "square", "square32"}));
    cmd->add_option("--weights", M.weights,
                    "comma-separated weights: honeycomb a,b,c / square32 a,b,c,d,e");
}

FundamentalDomain build_model(const ModelOpts& M) {
    if (M.model == "honeycomb") {
        if (M.weights.empty()) return honeycomb_unit();
        auto w = parse_rationals(M.weights, 3, "--weights");
        return honeycomb_unit(w[0], w[1], w[2]);
    }
    if (M.model == "square") {
        if (!M.weights.empty())
            throw std::invalid_argument("square model takes no weights");
        return square_unit();
    }
    if (M.weights.empty()) return square_3x2();
    auto w = parse_rationals(M.weights, 5, "--weights");
    return square_3x2(w[0], w[1], w[2], w[3], w[4]);
}

// ------------------------------------------------------------------- svg

struct SvgShape {
    std::vector<Vec2> pts;  // polygon when closed, polyline otherwise
    std::string fill;       // empty = no fill
    std::string stroke;
    bool closed = true;
};

void write_svg(const std::string& path, const std::vector<SvgShape>& shapes, double scale) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const SvgShape& s : shapes)
        for (const Vec2& p : s.pts) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
    if (shapes.empty()) x0 = y0 = 0, x1 = y1 = 1;
    const double margin = 10;
    double W = (x1 - x0) * scale + 2 * margin, H = (y1 - y0) * scale + 2 * margin;
    std::ofstream f = open_out(path);
    char buf[64];
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)std::ceil(W)
      << "\" height=\"" << (int)std::ceil(H) << "\">\n";
    f << "<!-- dimer " << kVersion << " -->\n";
    for (const SvgShape& s : shapes) {
        f << (s.closed ? "<polygon points=\"" : "<polyline points=\"");
        for (const Vec2& p : s.pts) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", (p.x - x0) * scale + margin,
                          (y1 - p.y) * scale + margin);
            f << buf;
        }
        f << "\" fill=\"" << (s.fill.empty() ? "none" : s.fill) << "\" stroke=\""
          << (s.stroke.empty() ? "none" : s.stroke) << "\" stroke-width=\"1\"/>\n";
    }
    f << "</svg>\n";
}

const char* kTypeColor[3] = {"#c9483d", "#4c9e52", "#4a72c4"};

// lozenge of a matched honeycomb edge: union of the white up-triangle and
// the black down-triangle, a rhombus through their shared side
std::vector<Vec2> lozenge(const PlanarGraph& g, const GraphEdge& e) {
    auto [u, v] = g.wcell[e.w];
    auto [p, q] = g.bcell[e.b];
    std::vector<std::pair<int, int>> wc{{u, v}, {u + 1, v}, {u, v + 1}};
    std::vector<std::pair<int, int>> bc{{p + 1, q}, {p, q + 1}, {p + 1, q + 1}};
    std::vector<std::pair<int, int>> shared, oppw, oppb;
    for (auto& c : wc)
        (std::count(bc.begin(), bc.end(), c) ? shared : oppw).push_back(c);
    for (auto& c : bc)
        if (!std::count(wc.begin(), wc.end(), c)) oppb.push_back(c);
    auto emb = [](std::pair<int, int> c) { return tri_embed(c.first, c.second); };
    return {emb(oppw[0]), emb(shared[0]), emb(oppb[0]), emb(shared[1])};
}

void matching_svg(const std::string& path, const PlanarGraph& g, const Matching& m) {
    std::vector<SvgShape> shapes;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (!m.in_m[e]) continue;
        const GraphEdge& ed = g.edges[e];
        SvgShape s;
        s.fill = kTypeColor[ed.type % 3];
        s.stroke = "#222222";
        if (g.lattice == Lattice::Honeycomb) {
            s.pts = lozenge(g, ed);
        } else {
            // domino: the two unit cells centered on the endpoints
            Vec2 a = g.wpos[ed.w], b = g.bpos[ed.b];
            double lx = std::min(a.x, b.x) - 0.5, hx = std::max(a.x, b.x) + 0.5;
            double ly = std::min(a.y, b.y) - 0.5, hy = std::max(a.y, b.y) + 0.5;
            s.pts = {{lx, ly}, {hx, ly}, {hx, hy}, {lx, hy}};
        }
        shapes.push_back(std::move(s));
    }
    write_svg(path, shapes, 24);
}

// ------------------------------------------------------------ subcommands

struct CountCmd {
    RegionOpts R;
    int run() const {
        PlanarGraph g = build_graph(resolve_region(R));
        std::cout << version_line() << "\n" << to_string(partition_function(g)) << "\n";
        return 0;
    }
};

struct TileableCmd {
    RegionOpts R;
    int run() const {
        PlanarGraph g = build_graph(resolve_region(R));
        std::cout << version_line() << "\n" << (tileable(g) ? "true" : "false") << "\n";
        return 0;
    }
};

void require_tileable(const PlanarGraph& g) {
    if (!tileable(g)) throw std::domain_error("region is not tileable");
}

struct HeightCmd {
    RegionOpts R;
    uint64_t seed = 0;
    std::string csv;
    int run() const {
        PlanarGraph g = build_graph(resolve_region(R));
        require_tileable(g);
        Matching m = exact_sample(g, seed);
        HeightField hf = height_function(g, m, default_flow(g));
        std::ostream* out = &std::cout;
        std::ofstream f;
        if (!csv.empty()) f = open_out(csv), out = &f;
        *out << version_line() << "\n";
        *out << "# heights in units of 1/" << hf.quantum << ", anchor face 0\n";
        *out << "face,x,y,h\n";
        char buf[96];
        for (int i = 0; i < g.n_bounded; ++i) {
            std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%lld\n", i, g.faces[i].centroid.x,
                          g.faces[i].centroid.y, hf.h[i]);
            *out << buf;
        }
        return 0;
    }
};

struct SampleCmd {
    RegionOpts R;
    uint64_t seed = 0;
    long long flips = 0;
    std::string svg, jsonfile;
    int run() const {
        RegionSpec spec = resolve_region(R);
        PlanarGraph g = build_graph(spec);
        require_tileable(g);
        Matching m = exact_sample(g, seed);
        if (flips > 0) m = glauber_chain(g, std::move(m), flips, seed);
        if (!svg.empty()) matching_svg(svg, g, m);
        if (!jsonfile.empty()) {
            json edges = json::array();
            for (int w = 0; w < g.nw; ++w) {
                const GraphEdge& e = g.edges[m.edge_of_white[w]];
                edges.push_back({{g.wcell[e.w].first, g.wcell[e.w].second},
                                 {g.bcell[e.b].first, g.bcell[e.b].second}});
            }
            json out = {{"version", kVersion},
                        {"seed", seed},
                        {"region", region_to_json(spec)},
                        {"matching", edges}};
            open_out(jsonfile) << out.dump(1) << "\n";
        }
        int bytype[3] = {0, 0, 0};
        for (size_t e = 0; e < g.edges.size(); ++e)
            if (m.in_m[e]) ++bytype[g.edges[e].type % 3];
        std::cout << version_line() << "\n"
                  << "matched " << g.nw << " edges, by type " << bytype[0] << " " << bytype[1]
                  << " " << bytype[2] << "\n";
        return 0;
    }
};

struct StatsCmd {
    RegionOpts R;
    uint64_t seed = 0;
    int samples = 2000;
    double zmax = 6.0;
    std::string jsonfile;
    int run() const {
        PlanarGraph g = build_graph(resolve_region(R));
        require_tileable(g);
        auto kinv = kasteleyn_inverse(g);
        auto batch = sample_batch_exact(g, samples, seed);
        BatchStats st = collect_stats(g, batch);
        double worst = 0;
        json rows = json::array();
        for (size_t e = 0; e < g.edges.size(); ++e) {
            double p = to_double(edge_probability(g, kinv, (int)e));
            double z = 0;
            if (p > 0 && p < 1)
                z = (st.edge_freq[e] - p) / std::sqrt(p * (1 - p) / samples);
            worst = std::max(worst, std::abs(z));
            rows.push_back({{"edge", e},
                            {"w", {g.wcell[g.edges[e].w].first, g.wcell[g.edges[e].w].second}},
                            {"b", {g.bcell[g.edges[e].b].first, g.bcell[g.edges[e].b].second}},
                            {"type", g.edges[e].type},
                            {"p", p},
                            {"freq", st.edge_freq[e]},
                            {"z", z}});
        }
        if (!jsonfile.empty()) {
            json out = {{"version", kVersion},
                        {"seed", seed},
                        {"samples", samples},
                        {"max_abs_z", worst},
                        {"edges", rows}};
            open_out(jsonfile) << out.dump(1) << "\n";
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "edges %zu samples %d max|z| %.3f", g.edges.size(),
                      samples, worst);
        std::cout << version_line() << "\n" << buf << "\n";
        if (worst > zmax)
            throw ToleranceFailure("edge marginal z-score exceeds --zmax");
        return 0;
    }
};

std::string laurent_term(int i, int j) {
    std::string s;
    if (i) s += " z^" + std::to_string(i);
    if (j) s += " w^" + std::to_string(j);
    return s.empty() ? " 1" : s;
}

struct CharpolyCmd {
    ModelOpts M;
    std::string jsonfile;
    int run() const {
        Laurent2 P = charpoly(build_model(M));
        std::cout << version_line() << "\n";
        json terms = json::array();
        for (const auto& [ij, c] : P) {
            std::cout << to_string(c) << laurent_term(ij.first, ij.second) << "\n";
            terms.push_back({{"zi", ij.first}, {"wj", ij.second}, {"c", to_string(c)}});
        }
        if (!jsonfile.empty())
            open_out(jsonfile) << json{{"version", kVersion}, {"terms", terms}}.dump(1) << "\n";
        return 0;
    }
};

struct TorusZCmd {
    ModelOpts M;
    int n = 2;
    int run() const {
        TorusZ t = torus_partition(build_model(M), n);
        std::cout << version_line() << "\n";
        for (int s = 0; s < 2; ++s)
            for (int tau = 0; tau < 2; ++tau)
                std::cout << "Z" << s << tau << " " << to_string(t.sector[s][tau]) << "\n";
        std::cout << "Z " << to_string(t.combined) << "\n";
        std::cout << "negated_sector " << t.negated_sector << "\n";
        return 0;
    }
};

struct HeightDistCmd {
    int n = 3;
    std::string csv;
    int run() const {
        HeightDistribution d = height_distribution_honeycomb(n);
        GaussianFit fit = fit_height_distribution(d);
        if (!csv.empty()) {
            std::ofstream f = open_out(csv);
            f << version_line() << "\nhx,hy,count,sign\n";
            for (int hx = 0; hx <= n; ++hx)
                for (int hy = 0; hy <= n; ++hy)
                    f << hx << "," << hy << "," << d.count[hx][hy].str() << ","
                      << d.sign[hx][hy] << "\n";
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "peak (%d,%d) r2 %.4f", fit.peak_hx, fit.peak_hy,
                      fit.r2);
        std::cout << version_line() << "\n"
                  << "total " << d.total.str() << "\n"
                  << buf << "\n";
        return 0;
    }
};

struct AmoebaCmd {
    ModelOpts M;
    std::vector<double> window{-3, 3, -3, 3};
    int res = 200;
    std::string svg;
    int harnack = 0;
    uint64_t seed = 0;
    int run() const {
        Laurent2 P = charpoly(build_model(M));
        AmoebaRaster A = amoeba_raster(P, window[0], window[1], window[2], window[3], res, res);
        std::cout << version_line() << "\n";
        int bounded = 0;
        for (const auto& C : A.components) {
            if (C.bounded) ++bounded;
            std::cout << "component " << C.id << (C.bounded ? " bounded" : " unbounded")
                      << " cells " << C.cells << " dual (" << C.dual.first << ","
                      << C.dual.second << ")\n";
        }
        std::cout << "bounded_components " << bounded << "\n";
        if (!svg.empty()) {
            // raster as horizontal runs; amoeba dark, gas components gold
            std::vector<SvgShape> shapes;
            double dx = (window[1] - window[0]) / res, dy = (window[3] - window[2]) / res;
            for (int j = 0; j < res; ++j)
                for (int i = 0; i < res;) {
                    bool mem = A.member[A.idx(i, j)];
                    bool gas = !mem && A.comp[A.idx(i, j)] >= 0 &&
                               A.components[A.comp[A.idx(i, j)]].bounded;
                    if (!mem && !gas) {
                        ++i;
                        continue;
                    }
                    int i0 = i;
                    auto same = [&](int k) {
                        bool m2 = A.member[A.idx(k, j)];
                        bool g2 = !m2 && A.comp[A.idx(k, j)] >= 0 &&
                                  A.components[A.comp[A.idx(k, j)]].bounded;
                        return m2 == mem && g2 == gas;
                    };
                    while (i < res && same(i)) ++i;
                    SvgShape s;
                    double x0 = window[0] + i0 * dx, x1 = window[0] + i * dx;
                    double y0 = window[2] + j * dy, y1 = y0 + dy;
                    s.pts = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
                    s.fill = mem ? "#333333" : "#f2c14e";
                    shapes.push_back(std::move(s));
                }
            SvgShape frame;
            frame.pts = {{window[0], window[2]},
                         {window[1], window[2]},
                         {window[1], window[3]},
                         {window[0], window[3]}};
            frame.stroke = "#222222";
            shapes.push_back(std::move(frame));
            write_svg(svg, shapes, 600.0 / (window[1] - window[0]));
        }
        if (harnack > 0) {
            auto pts = sample_amoeba_points(P, harnack, window[0], window[1], seed);
            HarnackReport rep = harnack_check(P, pts);
            std::cout << "harnack_samples " << rep.samples << " max_fiber " << rep.max_fiber
                      << " violations " << rep.violations << "\n";
            if (rep.violations > 0) throw ToleranceFailure("fiber count exceeds 2");
        }
        return 0;
    }
};

struct RonkinCmd {
    ModelOpts M;
    std::vector<double> at;
    std::vector<double> window{-2, 2, -2, 2};
    int grid = 0;
    std::string csv;
    int run() const {
        Laurent2 P = charpoly(build_model(M));
        std::cout << version_line() << "\n";
        char buf[96];
        if (grid > 0) {
            std::ostream* out = &std::cout;
            std::ofstream f;
            if (!csv.empty()) f = open_out(csv), out = &f, f << version_line() << "\n";
            *out << "X,Y,R\n";
            for (int j = 0; j < grid; ++j)
                for (int i = 0; i < grid; ++i) {
                    double X = window[0] + (i + 0.5) * (window[1] - window[0]) / grid;
                    double Y = window[2] + (j + 0.5) * (window[3] - window[2]) / grid;
                    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9f\n", X, Y, ronkin(P, X, Y));
                    *out << buf;
                }
            return 0;
        }
        if (at.size() != 2)
            throw std::invalid_argument("ronkin: give --at X Y or --grid N");
        std::snprintf(buf, sizeof buf, "%.9f", ronkin(P, at[0], at[1]));
        std::cout << buf << "\n";
        return 0;
    }
};

struct FreeEnergyCmd {
    ModelOpts M;
    int run() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", free_energy(charpoly(build_model(M))));
        std::cout << version_line() << "\n" << buf << "\n";
        return 0;
    }
};

struct SurfaceTensionCmd {
    std::vector<double> slope;
    std::vector<double> at;
    ModelOpts M;
    int run() const {
        std::cout << version_line() << "\n";
        char buf[128];
        if (!slope.empty() && !at.empty())
            throw std::invalid_argument("give either --slope or --at, not both");
        if (!slope.empty()) {
            // closed form for the uniform honeycomb; infeasible slopes exit 2
            std::snprintf(buf, sizeof buf, "%.6f",
                          surface_tension_honeycomb(slope[0], slope[1]));
            std::cout << buf << "\n";
            return 0;
        }
        if (at.empty()) throw std::invalid_argument("give --slope s t or --at X Y");
        LegendrePair lp = legendre_pair(charpoly(build_model(M)), at[0], at[1]);
        std::snprintf(buf, sizeof buf, "s %.6f t %.6f sigma %.6f", lp.s, lp.t, lp.sigma);
        std::cout << buf << "\n";
        return 0;
    }
};

struct PhaseCmd {
    ModelOpts M;
    std::vector<double> slope{0, 0};
    std::vector<double> window{-4, 4, -4, 4};
    int res = 160;
    int run() const {
        Laurent2 P = charpoly(build_model(M));
        AmoebaRaster A = amoeba_raster(P, window[0], window[1], window[2], window[3], res, res);
        PhaseLabel lab = phase_classify(A, newton_polygon(P), slope[0], slope[1]);
        std::cout << version_line() << "\n" << phase_name(lab.phase) << "\n";
        return 0;
    }
};

struct LimitShapeCmd {
    std::vector<int> hexagon{1, 1, 1};
    std::string polygon;
    std::string svg, csv;
    int res = 400;
    int field = 60;
    double tol = 1e-3;
    int run() const {
        std::vector<Vec2> poly;
        if (!polygon.empty()) {
            for (const std::string& pt : split(polygon, ';')) {
                auto xy = split(pt, ',');
                if (xy.size() != 2) throw std::invalid_argument("--polygon expects x,y;x,y;...");
                poly.push_back({std::stod(xy[0]), std::stod(xy[1])});
            }
        } else {
            // hexagon corners, normalized to unit scale around the centroid
            int A = hexagon[0], B = hexagon[1], C = hexagon[2];
            std::vector<std::pair<int, int>> uv{{0, 0},     {A, 0},      {A, B},
                                                {A - C, B + C}, {-C, B + C}, {-C, C}};
            for (auto [u, v] : uv) poly.push_back({double(v), double(-u)});
            Vec2 cen{0, 0};
            for (const Vec2& p : poly) cen = cen + (1.0 / poly.size()) * p;
            double s = 0;
            for (Vec2& p : poly) {
                p = p - cen;
                s = std::max({s, std::abs(p.x), std::abs(p.y)});
            }
            for (Vec2& p : poly) p = (1.0 / s) * p;
        }
        TangencyFit fit = fit_tangency_curve(poly);
        char buf[96];
        std::snprintf(buf, sizeof buf, "residual %.3e kernel_dim %d degree %d", fit.residual,
                      fit.kernel_dim, fit.Q.n);
        std::cout << version_line() << "\n" << buf << "\n";

        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Vec2& p : poly) {
            lo.x = std::min(lo.x, p.x), hi.x = std::max(hi.x, p.x);
            lo.y = std::min(lo.y, p.y), hi.y = std::max(hi.y, p.y);
        }
        Vec2 pad{0.05 * (hi.x - lo.x), 0.05 * (hi.y - lo.y)};
        lo = lo - pad, hi = hi + pad;
        if (!svg.empty()) {
            std::vector<SvgShape> shapes;
            SvgShape outline;
            outline.pts = poly;
            outline.stroke = "#222222";
            shapes.push_back(outline);
            for (auto& seg : frozen_boundary_segments(fit.Q, 0, lo, hi, res)) {
                SvgShape s;
                s.pts = {seg[0], seg[1]};
                s.closed = false;
                s.stroke = "#c9483d";
                shapes.push_back(std::move(s));
            }
            write_svg(svg, shapes, 400.0 / std::max(hi.x - lo.x, hi.y - lo.y));
        }
        if (!csv.empty()) {
            SlopeField f = burgers_field(fit.Q, 0, lo, hi, field, field);
            std::ofstream out = open_out(csv);
            out << version_line() << "\nx,y,liquid,s,t\n";
            for (int i = 0; i <= f.nx; ++i)
                for (int j = 0; j <= f.ny; ++j) {
                    const BurgersPoint& b = f.at(i, j);
                    Vec2 p = f.node(i, j);
                    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d,%.6f,%.6f\n", p.x, p.y,
                                  b.liquid ? 1 : 0, b.s, b.t);
                    out << buf;
                }
        }
        if (fit.residual > tol)
            throw ToleranceFailure("tangency fit residual exceeds --tol");
        return 0;
    }
};

struct FluctuationsCmd {
    std::vector<int> kinv;
    std::string weights = "1,1,1";
    int variance_k = 0;
    double theta = fluct_detail::kPi / 3;
    int kmin = 100, kmax = 10000;
    double tol = 0.05;
    int run() const {
        auto w = parse_rationals(weights, 3, "--weights");
        double a = to_double(w[0]), b = to_double(w[1]), c = to_double(w[2]);
        char buf[96];
        std::cout << version_line() << "\n";
        if (kinv.size() == 2) {
            std::snprintf(buf, sizeof buf, "%.9f", kinv_infinite(kinv[0], kinv[1], a, b, c));
            std::cout << buf << "\n";
            return 0;
        }
        if (variance_k > 0) {
            std::snprintf(buf, sizeof buf, "%.9f", column_variance(theta, variance_k));
            std::cout << buf << "\n";
            return 0;
        }
        // default: check the log-law slope against 1/pi^2
        std::vector<int> ks;
        for (int i = 0; i < 9; ++i)
            ks.push_back((int)std::lround(kmin * std::pow(double(kmax) / kmin, i / 8.0)));
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int k : ks) {
            double x = std::log(double(k)), y = column_variance(theta, k);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        double n = double(ks.size());
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double target = 1 / (fluct_detail::kPi * fluct_detail::kPi);
        double rel = std::abs(slope - target) / target;
        std::snprintf(buf, sizeof buf, "slope %.6f target %.6f rel_err %.2e", slope, target,
                      rel);
        std::cout << buf << "\n";
        if (rel > tol) throw ToleranceFailure("variance slope deviates from 1/pi^2");
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("dimer ") + kVersion +
                 " -- exact counting, sampling and asymptotics for dimer covers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dimer ") + kVersion);
    int threads = 1;
    app.add_option("--threads", threads, "cap on worker parallelism")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    CountCmd count;
    auto* c1 = app.add_subcommand("count", "weighted number of dimer covers");
    add_region_options(c1, count.R);

    TileableCmd tile;
    auto* c2 = app.add_subcommand("tileable", "whether the region admits a cover");
    add_region_options(c2, tile.R);

    HeightCmd height;
    auto* c3 = app.add_subcommand("height", "height function of a sampled cover (CSV)");
    add_region_options(c3, height.R);
    c3->add_option("--seed", height.seed, "RNG seed")->capture_default_str();
    c3->add_option("--csv", height.csv, "write CSV here instead of stdout");

    SampleCmd sample;
    auto* c4 = app.add_subcommand("sample", "draw a random cover");
    add_region_options(c4, sample.R);
    c4->add_option("--seed", sample.seed, "RNG seed")->capture_default_str();
    c4->add_option("--flips", sample.flips, "extra Glauber flip steps after the exact draw")
        ->capture_default_str();
    c4->add_option("--svg", sample.svg, "tiling picture (lozenges / dominoes)");
    c4->add_option("--json", sample.jsonfile, "matching + region as JSON");

    StatsCmd stats;
    auto* c5 = app.add_subcommand("stats", "sampler edge marginals vs exact probabilities");
    add_region_options(c5, stats.R);
    c5->add_option("--seed", stats.seed, "RNG seed")->capture_default_str();
    c5->add_option("--samples", stats.samples, "number of exact samples")->capture_default_str();
    c5->add_option("--zmax", stats.zmax, "tolerated |z|; above this exit 3")
        ->capture_default_str();
    c5->add_option("--json", stats.jsonfile, "per-edge report as JSON");

    CharpolyCmd cp;
    auto* c6 = app.add_subcommand("charpoly", "characteristic polynomial P(z,w)");
    add_model_options(c6, cp.M);
    c6->add_option("--json", cp.jsonfile, "terms as JSON");

    TorusZCmd tz;
    auto* c7 = app.add_subcommand("torus-z", "torus partition function from the four sectors");
    add_model_options(c7, tz.M);
    c7->add_option("-n", tz.n, "torus side (n x n fundamental domains)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    HeightDistCmd hd;
    auto* c8 = app.add_subcommand("height-dist", "honeycomb torus height-change distribution");
    c8->add_option("-n", hd.n, "torus side")->capture_default_str()->check(CLI::PositiveNumber);
    c8->add_option("--csv", hd.csv, "per-class counts as CSV");

    AmoebaCmd am;
    auto* c9 = app.add_subcommand("amoeba", "amoeba raster and complement components");
    add_model_options(c9, am.M);
    c9->add_option("--window", am.window, "Xmin Xmax Ymin Ymax")
        ->expected(4)
        ->capture_default_str();
    c9->add_option("--res", am.res, "raster resolution")->capture_default_str();
    c9->add_option("--svg", am.svg, "raster picture");
    c9->add_option("--harnack", am.harnack, "also fiber-count this many curve points")
        ->capture_default_str();
    c9->add_option("--seed", am.seed, "RNG seed for --harnack")->capture_default_str();

    RonkinCmd ro;
    auto* c10 = app.add_subcommand("ronkin", "Ronkin function values");
    add_model_options(c10, ro.M);
    c10->add_option("--at", ro.at, "evaluation point X Y")->expected(2);
    c10->add_option("--grid", ro.grid, "sample an N x N grid over --window instead")
        ->capture_default_str();
    c10->add_option("--window", ro.window, "Xmin Xmax Ymin Ymax")
        ->expected(4)
        ->capture_default_str();
    c10->add_option("--csv", ro.csv, "write grid CSV here instead of stdout");

    FreeEnergyCmd fe;
    auto* c11 = app.add_subcommand("free-energy", "free energy R(0,0) of the model");
    add_model_options(c11, fe.M);

    SurfaceTensionCmd stn;
    auto* c12 = app.add_subcommand("surface-tension",
                                   "surface tension at a slope or a Ronkin point");
    c12->add_option("--slope", stn.slope, "slope s t (uniform honeycomb closed form)")
        ->expected(2);
    c12->add_option("--at", stn.at, "Ronkin point X Y (Legendre pair for --model)")
        ->expected(2);
    add_model_options(c12, stn.M);

    PhaseCmd ph;
    auto* c13 = app.add_subcommand("phase", "phase of the ergodic measure at a slope");
    add_model_options(c13, ph.M);
    c13->add_option("--slope", ph.slope, "slope s t")->expected(2)->required();
    c13->add_option("--window", ph.window, "amoeba window Xmin Xmax Ymin Ymax")
        ->expected(4)
        ->capture_default_str();
    c13->add_option("--res", ph.res, "raster resolution")->capture_default_str();

    LimitShapeCmd ls;
    auto* c14 = app.add_subcommand("limit-shape", "frozen boundary and slope field");
    c14->add_option("--hexagon", ls.hexagon, "hexagon side lengths A B C")
        ->expected(3)
        ->capture_default_str();
    c14->add_option("--polygon", ls.polygon, "boundary x,y;x,y;... (overrides --hexagon)");
    c14->add_option("--svg", ls.svg, "polygon + frozen boundary picture");
    c14->add_option("--csv", ls.csv, "Burgers slope field CSV");
    c14->add_option("--res", ls.res, "boundary marching resolution")->capture_default_str();
    c14->add_option("--field", ls.field, "slope field grid size")->capture_default_str();
    c14->add_option("--tol", ls.tol, "max tangency residual; above this exit 3")
        ->capture_default_str();

    FluctuationsCmd fl;
    auto* c15 = app.add_subcommand("fluctuations",
                                   "inverse-kernel values and the variance log law");
    c15->add_option("--kinv", fl.kinv, "kernel offset x y")->expected(2);
    c15->add_option("--weights", fl.weights, "edge weights a,b,c")->capture_default_str();
    c15->add_option("--variance", fl.variance_k, "column variance at this length")
        ->capture_default_str();
    c15->add_option("--theta", fl.theta, "column angle parameter")->capture_default_str();
    c15->add_option("--kmin", fl.kmin, "slope check: smallest k")->capture_default_str();
    c15->add_option("--kmax", fl.kmax, "slope check: largest k")->capture_default_str();
    c15->add_option("--tol", fl.tol, "slope check: relative tolerance; above this exit 3")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        if (c1->parsed()) return count.run();
        if (c2->parsed()) return tile.run();
        if (c3->parsed()) return height.run();
        if (c4->parsed()) return sample.run();
        if (c5->parsed()) return stats.run();
        if (c6->parsed()) return cp.run();
        if (c7->parsed()) return tz.run();
        if (c8->parsed()) return hd.run();
        if (c9->parsed()) return am.run();
        if (c10->parsed()) return ro.run();
        if (c11->parsed()) return fe.run();
        if (c12->parsed()) return stn.run();
        if (c13->parsed()) return ph.run();
        if (c14->parsed()) return ls.run();
        if (c15->parsed()) return fl.run();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) ? 1 : 0;
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e) ? 1 : 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ToleranceFailure& e) {
        std::fprintf(stderr, "dimer: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "dimer: infeasible: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "dimer: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dimer: %s\n", e.what());
        return 1;
    }
    return 0;
}
