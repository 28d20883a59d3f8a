// Command-line front end: boundary decompositions, multiscale flatness sums,
// singular-integral evaluation, seminorms, and the experiment suite.
//
// Subcommands
//   decomp    --domain <json> [--depth N] [--window LO:HI] [--check] [--out <csv>]
//   beta      --domain <json> --alpha A --p P [--window LO:HI] [--nodes N] [--out <csv>]
//   transform --domain <json> --points <csv> [--kind pv|d] [--epsilon E]
//             [--budget N] [--tol T] [--outer-radius R] [--out <csv>]
//   norms     --domain <json> --alpha A --p P --kind K [--depth N] [--grid N]
//             [--tol T] [--budget N] [--cache-dir D] [--jobs N] [--out <csv>]
//   verify    --config <json> --out <csv> [--jobs N] [--freeze-goldens]
//             [--cache-dir D] [--timings]
//
// Every subcommand writes CSV to stdout unless --out is given. Exit codes:
// 0 success (for verify: every row VALID), 1 failed check/verification,
// 2 usage or runtime error.

#include <beurlib/beurlib.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace beurlib;

struct Args {
    std::map<std::string, std::string> opts;
    std::vector<std::string> positional;

    bool has(const std::string& k) const { return opts.count(k) != 0; }
    std::string get(const std::string& k, const std::string& fallback = "") const {
        auto it = opts.find(k);
        return it == opts.end() ? fallback : it->second;
    }
    double num(const std::string& k, double fallback) const {
        auto it = opts.find(k);
        return it == opts.end() ? fallback : std::stod(it->second);
    }
    int integer(const std::string& k, int fallback) const {
        auto it = opts.find(k);
        return it == opts.end() ? fallback : std::stoi(it->second);
    }
};

const char* kFlagless[] = {"--check", "--freeze-goldens", "--timings"};

bool takes_no_value(const std::string& flag) {
    for (const char* f : kFlagless)
        if (flag == f) return true;
    return false;
}

Args parse_args(int argc, char** argv, int from) {
    Args a;
    for (int i = from; i < argc; ++i) {
        std::string s = argv[i];
        if (s.rfind("--", 0) == 0) {
            if (takes_no_value(s)) {
                a.opts[s.substr(2)] = "1";
            } else if (i + 1 < argc) {
                a.opts[s.substr(2)] = argv[++i];
            } else {
                throw std::runtime_error("missing value for " + s);
            }
        } else {
            a.positional.push_back(s);
        }
    }
    return a;
}

ScaleWindow parse_window(const std::string& text, ScaleWindow fallback) {
    if (text.empty()) return fallback;
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("window must look like LO:HI");
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

// Output sink: stdout by default, a file when --out is given.
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw std::runtime_error("cannot open output file: " + path);
            os = &file;
        }
    }
    std::ostream& out() { return *os; }
};

Domain domain_arg(const Args& a) {
    std::string path = a.get("domain");
    if (path.empty()) throw std::runtime_error("--domain <file> is required");
    return load_domain(path);
}

// ---------------------------------------------------------------------------
// decomp: dump Whitney squares, collar cells, and dyadic boundary arcs.

int check_decomposition(const Domain& dom, const WhitneyDecomposition& w,
                        const ArcHierarchy& h) {
    int bad = 0;
    auto complain = [&](const std::string& what) {
        std::cerr << "check failed: " << what << "\n";
        ++bad;
    };

    // Squares are pairwise disjoint: no accepted square is an ancestor of
    // another (dyadic squares overlap only through containment).
    std::map<std::tuple<int, long long, long long>, int> keys;
    int j_coarsest = w.cells.empty() ? 0 : w.cells.front().j;
    for (const DyadicSquare& q : w.cells) {
        keys[{q.j, q.k1, q.k2}] = 1;
        j_coarsest = std::min(j_coarsest, q.j);
    }
    if (keys.size() != w.cells.size()) complain("duplicate squares");
    for (const DyadicSquare& q : w.cells) {
        DyadicSquare p = q;
        while (p.j > j_coarsest) {
            p = parent(p);
            if (keys.count({p.j, p.k1, p.k2})) {
                complain("nested squares");
                break;
            }
        }
    }

    // Interior dilate inside, outer dilate meeting the complement.
    for (const DyadicSquare& q : w.cells) {
        if (!detail::dilate13_inside(dom, q)) complain("13-dilate leaves the domain");
        Rect r27 = dilated(q, w.rho);
        bool meets_complement = boundary_intersects_rect(dom, r27) ||
                                !contains(dom, {r27.x0, r27.y0}) ||
                                !contains(dom, {r27.x1, r27.y1});
        if (!meets_complement) complain("outer dilate misses the complement");
    }

    // Arc generations tile the boundary.
    for (int j = h.j_min; j <= h.j_max; ++j) {
        double sum = 0.0;
        for (std::size_t i = h.gen_begin(j); i < h.gen_end(j); ++i)
            sum += length(h.arcs[i]);
        if (std::abs(sum - h.total_length) > 1e-9 * h.total_length)
            complain("generation " + std::to_string(j) + " does not tile the boundary");
    }
    return bad;
}

int cmd_decomp(const Args& a) {
    Domain dom = domain_arg(a);
    int depth = a.integer("depth", 6);
    WhitneyDecomposition w = whitney_decompose(dom, depth);
    ScaleWindow win = parse_window(a.get("window"), {0, depth});
    ArcHierarchy h = dyadic_arcs(dom, win.j_lo, win.j_hi);

    Sink sink(a.get("out"));
    auto& os = sink.out();
    os << "kind,generation,a,b,size\n";
    for (const DyadicSquare& q : w.cells)
        os << "square," << q.j << "," << q.k1 << "," << q.k2 << "," << fmt_double(side(q))
           << "\n";
    for (const CollarCell& c : w.collar)
        os << "collar," << c.sq.j << "," << c.sq.k1 << "," << c.sq.k2 << ","
           << fmt_double(side(c.sq)) << "\n";
    for (const BoundaryArc& p : h.arcs)
        os << "arc," << p.j << "," << fmt_double(p.a) << "," << fmt_double(p.b) << ","
           << fmt_double(length(p)) << "\n";

    if (a.has("check")) {
        int bad = check_decomposition(dom, w, h);
        if (bad != 0) {
            std::cerr << bad << " invariant check(s) failed\n";
            return 1;
        }
        std::cerr << "all invariant checks passed\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// beta: per-arc flatness and its weighted contribution to the multiscale sum.

int cmd_beta(const Args& a) {
    Domain dom = domain_arg(a);
    if (!a.has("alpha") || !a.has("p"))
        throw std::runtime_error("--alpha and --p are required");
    double alpha = a.num("alpha", 0.0);
    double p = a.num("p", 0.0);
    ScaleWindow win = parse_window(a.get("window"), {0, 6});
    int nodes = a.integer("nodes", 129);

    ArcHierarchy h = dyadic_arcs(dom, win.j_lo, win.j_hi);
    Sink sink(a.get("out"));
    auto& os = sink.out();
    os << "arc_id,generation,length,beta1,contribution\n";
    double total = 0.0;
    for (std::size_t i = 0; i < h.arcs.size(); ++i) {
        const BoundaryArc& arc = h.arcs[i];
        double beta = beta1_curve(dom, arc, nodes).value;
        double l = length(arc);
        double contribution =
            beta > 0.0 ? std::pow(beta / std::pow(l, alpha), p) * l : 0.0;
        total += contribution;
        os << i << "," << arc.j << "," << fmt_double(l) << "," << fmt_double(beta) << ","
           << fmt_double(contribution) << "\n";
    }
    os << "total,,,," << fmt_double(total) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// transform: evaluate the singular integral at points listed in a CSV file.

std::vector<PlanePoint> read_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open points file: " + path);
    std::vector<PlanePoint> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string sx, sy;
        if (!std::getline(row, sx, ',') || !std::getline(row, sy, ',')) continue;
        try {
            pts.push_back({std::stod(sx), std::stod(sy)});
        } catch (const std::exception&) {
            // Header or stray text row; skip it.
        }
    }
    if (pts.empty()) throw std::runtime_error("no points parsed from " + path);
    return pts;
}

int cmd_transform(const Args& a) {
    Domain dom = domain_arg(a);
    std::string pts_path = a.get("points");
    if (pts_path.empty()) throw std::runtime_error("--points <csv> is required");
    std::vector<PlanePoint> pts = read_points(pts_path);

    PVQuadratureSpec spec;
    spec.epsilon = a.num("epsilon", spec.epsilon);
    spec.budget = static_cast<long long>(a.num("budget", double(spec.budget)));
    spec.target_tol = a.num("tol", spec.target_tol);
    spec.outer_radius = a.num("outer-radius", spec.outer_radius);
    std::string kind = a.get("kind", "pv");
    if (kind != "pv" && kind != "d")
        throw std::runtime_error("--kind must be pv or d");

    Sink sink(a.get("out"));
    auto& os = sink.out();
    os << "x,y,re,im,est_error,evals\n";
    for (const PlanePoint& z : pts) {
        TransformValue v = kind == "pv" ? pv_beurling(dom, z, spec) : d_beurling(dom, z, spec);
        os << fmt_double(z.x) << "," << fmt_double(z.y) << "," << fmt_double(v.value.real())
           << "," << fmt_double(v.value.imag()) << "," << fmt_double(v.est_error) << ","
           << v.evals << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// norms: one seminorm evaluation as a single CSV row.

int cmd_norms(const Args& a) {
    Domain dom = domain_arg(a);
    if (!a.has("alpha") || !a.has("p") || !a.has("kind"))
        throw std::runtime_error("--alpha, --p, and --kind are required");
    double alpha = a.num("alpha", 0.0);
    double p = a.num("p", 0.0);
    std::string kind = a.get("kind");
    int depth = a.integer("depth", 5);
    int grid = a.integer("grid", 1024);
    int jobs = a.integer("jobs", 1);

    PVQuadratureSpec spec;
    spec.target_tol = a.num("tol", 1e-4);
    spec.budget = static_cast<long long>(a.num("budget", double(spec.budget)));

    FieldCache cache;
    std::string cache_dir = a.get("cache-dir");
    if (!cache_dir.empty()) cache.load(cache_dir);

    SeminormResult r;
    if (kind == "normal") {
        r = besov_normal_curve(dom, alpha, p, grid);
    } else {
        WhitneyDecomposition dec = whitney_decompose(dom, depth);
        if (kind == "grad") {
            r = grad_beurling_lp(dom, p, dec, spec, &cache, 2, jobs);
        } else if (kind == "sobolev" || kind == "besov") {
            TransformField f = transform_field(dom, dec, spec, &cache, 2, jobs);
            r = kind == "sobolev" ? sobolev_frac_seminorm(f, alpha, p)
                                  : besov_diff_domain(f, alpha, p);
        } else {
            throw std::runtime_error("--kind must be grad, sobolev, besov, or normal");
        }
    }
    if (!cache_dir.empty()) cache.save(cache_dir);

    Sink sink(a.get("out"));
    auto& os = sink.out();
    os << "kind,alpha,p,value,tail,collar,nodes\n";
    os << kind << "," << fmt_double(r.alpha) << "," << fmt_double(r.p) << ","
       << fmt_double(r.value) << "," << fmt_double(r.tail) << "," << fmt_double(r.collar)
       << "," << r.nodes << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify: run one experiment from a JSON config and write the report CSV.

int cmd_verify(const Args& a) {
    std::string config_path = a.get("config");
    ExperimentConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config: " + config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        cfg = parse_experiment_config(buf.str());
    } else if (a.has("experiment")) {
        cfg = default_config(experiment_from_name(a.get("experiment")));
    } else {
        throw std::runtime_error("--config <json> (or --experiment <name>) is required");
    }
    if (a.has("jobs")) cfg.jobs = a.integer("jobs", cfg.jobs);
    if (a.has("timings")) cfg.timings = true;
    if (a.has("cache-dir")) cfg.cache_dir = a.get("cache-dir");
    std::string out_path = a.get("out", cfg.out_path);
    if (out_path.empty()) throw std::runtime_error("--out <csv> is required");

    FieldCache cache;
    if (!cfg.cache_dir.empty()) cache.load(cfg.cache_dir);
    Report report = run_experiment(cfg, &cache);
    if (!cfg.cache_dir.empty()) cache.save(cfg.cache_dir);

    {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << report.csv(cfg.timings);
    }
    if (a.has("freeze-goldens")) {
        std::string gpath = out_path + ".goldens.json";
        std::ofstream gout(gpath);
        gout << goldens_json(report) << "\n";
        std::cerr << "goldens written to " << gpath << "\n";
    }

    int valid = 0;
    for (const ReportRow& r : report.rows) valid += r.valid ? 1 : 0;
    std::cerr << experiment_name(cfg.id) << ": " << valid << "/" << report.rows.size()
              << " rows valid, max ratio " << fmt_double(report.max_ratio) << "\n";
    return report.all_valid ? 0 : 1;
}

int usage() {
    std::cerr
        << "usage: bxtool <subcommand> [options]\n"
           "  decomp    --domain <json> [--depth N] [--window LO:HI] [--check] [--out csv]\n"
           "  beta      --domain <json> --alpha A --p P [--window LO:HI] [--nodes N]\n"
           "            [--out csv]\n"
           "  transform --domain <json> --points <csv> [--kind pv|d] [--epsilon E]\n"
           "            [--budget N] [--tol T] [--outer-radius R] [--out csv]\n"
           "  norms     --domain <json> --alpha A --p P --kind grad|sobolev|besov|normal\n"
           "            [--depth N] [--grid N] [--tol T] [--cache-dir D] [--jobs N]\n"
           "            [--out csv]\n"
           "  verify    --config <json> --out <csv> [--jobs N] [--freeze-goldens]\n"
           "            [--cache-dir D] [--timings]\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage();
    std::string cmd = argv[1];
    try {
        Args a = parse_args(argc, argv, 2);
        if (cmd == "decomp") return cmd_decomp(a);
        if (cmd == "beta") return cmd_beta(a);
        if (cmd == "transform") return cmd_transform(a);
        if (cmd == "norms") return cmd_norms(a);
        if (cmd == "verify") return cmd_verify(a);
        return usage();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
