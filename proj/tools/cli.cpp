#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "khg/ebe_solver.hpp"
#include "khg/higgs_divisor.hpp"
#include "khg/transport.hpp"

namespace khg::cli {

using Json = nlohmann::ordered_json;

namespace {

const std::vector<Field> kStrata{
    {"points", "1,3", "thick eigenvalues of the base configuration (comma list, complex as a+bi)"},
    {"N", "2", "thick multiplicity plus one: sl(kN)"},
    {"weight", "1", "per-strand weight lambda, padded with zeros to length N-1"},
    {"partition", "", "Jordan type of the slice; overrides the weights"},
};

std::vector<Field> with_strata(std::vector<Field> f) {
    f.insert(f.begin(), kStrata.begin(), kStrata.end());
    return f;
}

const std::vector<Command> kCommands{
    {"orbit",
     "partition and orbit data of a nilpotent",
     {{"N", "4", "matrix size"},
      {"weight", "", "weight lambda of length N-1; its knot partition is the target"},
      {"partition", "", "target partition when no weight is given (default [N])"},
      {"seed", "1", "recorded only"}}},
    {"slice",
     "Slodowy slice dimensions and fibre solves",
     with_strata({{"samples", "4", "number of fibre points"},
                  {"radius", "1", "sampling ball radius around the diagonal point"},
                  {"seed", "1", "sampler seed"}})},
    {"divisor",
     "divisor of the knot Higgs field",
     {{"lambda", "1,0,0", "knot weight"},
      {"point", "0", "location of the knot"},
      {"line", "", "line vector (default e_1)"},
      {"order_tol", "1e-8", "relative tolerance of vanishing orders"},
      {"seed", "1", "recorded only"}}},
    {"model-check",
     "residual of the closed-form profile under grid refinement",
     {{"lambda", "1", "charge, a non-negative half-integer"},
      {"grids", "17,33,65,129", "nodes per axis, increasing"},
      {"r_min", "0.2", ""},
      {"r_max", "1", ""},
      {"y_min", "0.2", ""},
      {"y_max", "1", ""},
      {"seed", "1", "recorded only"}}},
    {"ebe-solve",
     "Newton solve of the axisymmetric equation with closed-form boundary data",
     {{"lambda", "1", "charge"},
      {"nr", "65", ""},
      {"ny", "65", ""},
      {"r_min", "0.1", ""},
      {"r_max", "2", ""},
      {"y_min", "0.05", ""},
      {"y_max", "2", ""},
      {"tol", "1e-9", "interior sup-norm residual"},
      {"max_iter", "50", ""},
      {"seed", "1", "recorded only"}}},
    {"dkw-correction",
     "order-by-order corrections for a moving strand",
     {{"lambda", "1", "charge"},
      {"motion", "circular", "circular or uniform"},
      {"velocity", "0.3+0.1i", "uniform motion velocity"},
      {"rho", "0.3", "circular motion radius"},
      {"omega", "1", "circular motion angular speed (integer for periodicity)"},
      {"nt", "8", ""},
      {"nx", "11", ""},
      {"ny", "11", ""},
      {"orders", "2", "highest order n"},
      {"q", "1", "series evaluation parameter"},
      {"tol", "1e-9", "Newton tolerance of the zeroth order"},
      {"seed", "1", "recorded only"}}},
    {"transport",
     "horizontal transport of one sampled fibre point along a braid",
     with_strata({{"braid", "k=2; s1", "braid word"},
                  {"radius", "1", "sampling ball radius"},
                  {"tol", "1e-11", "Runge-Kutta local error"},
                  {"fibre_tol", "1e-10", ""},
                  {"clamp_radius", "", "rescaled mode when set"},
                  {"seed", "1", "sampler seed"}})},
    {"fixpoints",
     "monodromy fixed points of a pure braid",
     with_strata({{"braid", "k=2; s1 s1", "pure braid word"},
                  {"samples", "2", "sampler count"},
                  {"radius", "1", "sampling ball radius"},
                  {"tol", "1e-10", "Runge-Kutta local error"},
                  {"fixed_tol", "1e-8", "Newton stopping residual"},
                  {"dedupe_radius", "1e-4", ""},
                  {"seed", "1", "sampler seed"}})},
    {"vanishing",
     "vanishing-cycle membership and Lagrangian sampling for one arc",
     with_strata({{"count", "20", "Lagrangian seeds"},
                  {"eps_sing", "1e-5", "transport stops at 1 - eps_sing"},
                  {"tau_vanish", "1e-2", ""},
                  {"seed", "1", "Haar seed"}})},
    {"generators",
     "intersections of the braided and the plain Lagrangian clouds",
     with_strata({{"braid", "k=2; s1 s1", "braid word on the two matched points"},
                  {"count", "20", "Lagrangian seeds per cloud"},
                  {"eps_sing", "1e-5", ""},
                  {"tau_vanish", "1e-2", ""},
                  {"capture_radius", "0.25", ""},
                  {"match_tol", "1e-6", ""},
                  {"seed", "1", "Haar seed of the first cloud; the second uses seed + 1"}})},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_field(const std::string& key, const std::string& value, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "field '" + key + "': expected " + what + ", got '" + value + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

bool parse_real(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(v);
}

// "2", "-1.5", "2+1i", "0.3-0.1i", "i", "-2i".
bool parse_complex(const std::string& text, Complex& z) {
    std::string s;
    for (char c : text)
        if (c != ' ') s += c;
    if (s.empty()) return false;
    if (s.back() != 'i') {
        double re;
        if (!parse_real(s, re)) return false;
        z = {re, 0.0};
        return true;
    }
    s.pop_back();
    std::size_t cut = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            cut = i;
            break;
        }
    auto imag = [](std::string t, double& v) {
        if (t.empty() || t == "+") t = "1";
        if (t == "-") t = "-1";
        return parse_real(t, v);
    };
    double re = 0.0, im = 0.0;
    if (cut == std::string::npos) {
        if (!imag(s, im)) return false;
    } else if (!parse_real(s.substr(0, cut), re) || !imag(s.substr(cut), im)) {
        return false;
    }
    z = {re, im};
    return true;
}

class Params {
public:
    explicit Params(const std::map<std::string, std::string>& v) : v_(v) {}

    const std::string& str(const std::string& key) const { return v_.at(key); }
    bool has(const std::string& key) const { return !v_.at(key).empty(); }

    long long integer(const std::string& key) const {
        const auto& s = str(key);
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size()) bad_field(key, s, "an integer");
        return v;
    }
    int positive_int(const std::string& key) const {
        const long long v = integer(key);
        if (v < 1 || v > 1000000) bad_field(key, str(key), "a positive integer");
        return static_cast<int>(v);
    }
    double real(const std::string& key) const {
        double v;
        if (!parse_real(str(key), v)) bad_field(key, str(key), "a real number");
        return v;
    }
    double positive(const std::string& key) const {
        const double v = real(key);
        if (!(v > 0)) bad_field(key, str(key), "a positive number");
        return v;
    }
    Complex complex(const std::string& key) const {
        Complex z;
        if (!parse_complex(str(key), z)) bad_field(key, str(key), "a complex number");
        return z;
    }
    std::vector<int> ints(const std::string& key) const {
        std::vector<int> out;
        for (const auto& item : split(str(key), ',')) {
            char* end = nullptr;
            const long v = std::strtol(item.c_str(), &end, 10);
            if (end != item.c_str() + item.size()) bad_field(key, str(key), "a comma-separated integer list");
            out.push_back(static_cast<int>(v));
        }
        return out;
    }
    std::vector<Complex> complexes(const std::string& key) const {
        std::vector<Complex> out;
        for (const auto& item : split(str(key), ',')) {
            Complex z;
            if (!parse_complex(item, z)) bad_field(key, str(key), "a comma-separated complex list");
            out.push_back(z);
        }
        return out;
    }
    std::uint64_t seed() const {
        const long long v = integer("seed");
        if (v < 0) bad_field("seed", str("seed"), "a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

private:
    const std::map<std::string, std::string>& v_;
};

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json coords_json(const std::vector<Complex>& c) {
    Json a = Json::array();
    for (const auto& z : c) a.push_back(complex_json(z));
    return a;
}

class Output {
public:
    explicit Output(std::string dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        require(!ec, ErrorCode::IoError, "cannot create output directory " + dir_);
    }

    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows) {
        std::ofstream os(path(name));
        require(static_cast<bool>(os), ErrorCode::IoError, "cannot open " + path(name));
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n' << std::setprecision(17);
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
        files_.push_back(name);
    }

    void grid(const std::string& name, const GridField& g) {
        g.save_csv(path(name));
        files_.push_back(name);
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

// (point index, coordinate index, re, im) rows.
std::vector<std::vector<double>> cloud_rows(const std::vector<std::vector<Complex>>& pts) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts[i].size(); ++j)
            rows.push_back({static_cast<double>(i), static_cast<double>(j), pts[i][j].real(), pts[i][j].imag()});
    return rows;
}

struct Strata {
    PointConfig base;
    int N = 2;
    Partition pi;
    SlodowySlice slice;
};

Strata strata(const Params& p) {
    Strata s;
    s.base = PointConfig(p.complexes("points"));
    if (s.base.size() == 0) bad_field("points", p.str("points"), "at least one point");
    s.N = p.positive_int("N");
    if (s.N < 2) bad_field("N", p.str("N"), "N >= 2");
    if (p.has("partition")) {
        s.pi = Partition(p.ints("partition"));
    } else {
        std::vector<int> w = p.ints("weight");
        if (static_cast<int>(w.size()) > s.N - 1) bad_field("weight", p.str("weight"), "at most N-1 entries");
        w.resize(static_cast<std::size_t>(s.N - 1), 0);
        const Partition one = weight_to_partition(w);
        s.pi = one;
        for (std::size_t a = 1; a < s.base.size(); ++a) s.pi = s.pi.concat(one);
    }
    require(s.pi.n() == static_cast<int>(s.base.size()) * s.N, ErrorCode::MismatchedN,
            "partition " + s.pi.to_string() + " is not of kN");
    s.slice = slodowy_slice(jordan_nilpotent(s.pi));
    return s;
}

Json strata_json(const Strata& s) {
    Json j;
    j["partition"] = s.pi.parts();
    j["base"] = coords_json(s.base.points);
    j["slice_dim"] = s.slice.dim();
    return j;
}

Json run_orbit(const Params& p, Output& out) {
    const int n = p.positive_int("N");
    Partition target({n});
    Json r;
    if (p.has("weight")) {
        const auto w = p.ints("weight");
        target = weight_to_partition(w);
        r["weight"] = w;
    } else if (p.has("partition")) {
        target = Partition(p.ints("partition"));
    }
    require(target.n() == n, ErrorCode::MismatchedN, "partition " + target.to_string() + " is not of N");
    const SquareMatrixC e = jordan_nilpotent(target);
    const Sl2Triple t = sl2_complete(e);
    const int sl_dim = n * n - 1;
    r["partition"] = target.parts();
    r["orbit_partition"] = orbit_partition(e).parts();
    r["sl2_residual"] = t.residual();
    r["centraliser_dim"] = centraliser_dimension(e);
    r["orbit_dim"] = sl_dim - centraliser_dimension(e);
    r["slice_dim"] = slodowy_slice(e).dim();
    std::vector<std::vector<double>> rows;
    Json all = Json::array();
    for (const auto& pi : partitions_of(n)) {
        const int od = sl_dim - centraliser_dimension(jordan_nilpotent(pi));
        const bool below = dominance_leq(pi, target), above = dominance_leq(target, pi);
        all.push_back({{"partition", pi.parts()}, {"orbit_dim", od}, {"in_closure", below}, {"contains", above}});
        rows.push_back({static_cast<double>(rows.size()), static_cast<double>(od), below ? 1.0 : 0.0, above ? 1.0 : 0.0});
    }
    r["orbits"] = all;
    out.csv("orbits.csv", {"index", "orbit_dim", "in_closure_of_target", "closure_contains_target"}, rows);
    return r;
}

Json run_slice(const Params& p, Output& out) {
    const Strata s = strata(p);
    Json r = strata_json(s);
    std::vector<std::string> failures;
    const auto pts = sample_fibre(s.slice, s.base, s.N, {p.positive_int("samples"), p.positive("radius"), p.seed()},
                                  &failures);
    r["fibre_dim"] = pts.empty() ? Json(nullptr) : Json(fibre_tangent_basis(s.slice, pts.front(), s.N).cols() / 2);
    Json res = Json::array();
    for (const auto& c : pts) res.push_back(fibre_residual(slice_embed(s.slice, c), s.base, s.N));
    r["fibre_points"] = pts.size();
    r["fibre_residuals"] = res;
    r["failures"] = failures;
    out.csv("fibre_points.csv", {"point", "coord", "re", "im"}, cloud_rows(pts));
    return r;
}

Json run_divisor(const Params& p, Output& out) {
    const auto lambda = p.ints("lambda");
    const Complex at = p.complex("point");
    const int n = static_cast<int>(lambda.size()) + 1;
    const PolyMatrix phi = knot_higgs_field(lambda).translated(at);
    VectorC line = VectorC::Zero(n);
    line(0) = 1.0;
    if (p.has("line")) {
        const auto v = p.complexes("line");
        if (static_cast<int>(v.size()) != n) bad_field("line", p.str("line"), std::to_string(n) + " entries");
        for (int i = 0; i < n; ++i) line(i) = v[static_cast<std::size_t>(i)];
    }
    DivisorOptions o;
    o.order_tol = p.positive("order_tol");
    const DivisorData d = divisor_of(phi, line, o);
    Json r;
    Json pts = Json::array();
    std::vector<std::vector<double>> rows;
    for (const auto& q : d.points) {
        pts.push_back({{"point", complex_json(q.p)}, {"lambda", q.lambda}, {"orders", q.orders}});
        std::vector<double> row{q.p.real(), q.p.imag()};
        for (int l : q.lambda) row.push_back(l);
        rows.push_back(row);
    }
    r["points"] = pts;
    r["effective"] = d.effective;
    const Partition jordan = orbit_partition(phi.evaluate(at));
    const Partition expected = weight_to_partition(lambda);
    r["orbit_partition_at_point"] = jordan.parts();
    r["weight_partition"] = expected.parts();
    r["partitions_agree"] = jordan == expected;
    std::vector<std::string> header{"re", "im"};
    for (std::size_t i = 1; i <= lambda.size(); ++i) header.push_back("lambda_" + std::to_string(i));
    out.csv("divisor.csv", header, rows);
    return r;
}

ModelParams model_params(const Params& p) {
    ModelParams m{p.real("lambda"), 1.0};
    m.validate();
    return m;
}

Json run_model_check(const Params& p, Output& out) {
    const ModelParams m = model_params(p);
    const auto grids = p.ints("grids");
    if (grids.empty()) bad_field("grids", p.str("grids"), "a list of grid sizes");
    for (std::size_t i = 0; i < grids.size(); ++i)
        if (grids[i] < 5 || (i && grids[i] <= grids[i - 1]))
            bad_field("grids", p.str("grids"), "increasing sizes of at least 5");
    Json r;
    r["kappa_calibrated"] = calibrate_kappa();
    std::vector<double> ys;
    for (int i = 1; i <= 16; ++i) ys.push_back(0.05 * i);
    double nahm = 0.0;
    for (double v : nahm_residual_1d(ys, 1.0)) nahm = std::max(nahm, std::abs(v));
    r["nahm_residual_1d"] = nahm;
    Json table = Json::array();
    std::vector<std::vector<double>> rows;
    double prev = 0.0;
    for (int n : grids) {
        const GridField dom({Axis::uniform("r", p.real("r_min"), p.real("r_max"), static_cast<std::size_t>(n)),
                             Axis::uniform("y", p.real("y_min"), p.real("y_max"), static_cast<std::size_t>(n))});
        const double e = ebe_residual(m, dom).max_abs();
        Json row{{"n", n}, {"sup_residual", e}};
        row["ratio"] = prev > 0 ? Json(prev / e) : Json(nullptr);
        rows.push_back({static_cast<double>(n), e, prev > 0 ? prev / e : std::nan("")});
        table.push_back(row);
        prev = e;
    }
    r["table"] = table;
    out.csv("residuals.csv", {"n", "sup_residual", "ratio"}, rows);
    return r;
}

Json run_ebe_solve(const Params& p, Output& out) {
    const ModelParams m = model_params(p);
    const std::vector<AxisRole> roles{AxisRole::Radial, AxisRole::Y};
    const auto axes = ebe_axisymmetric_axes(static_cast<std::size_t>(p.positive_int("nr")),
                                            static_cast<std::size_t>(p.positive_int("ny")), p.positive("r_min"),
                                            p.positive("r_max"), p.positive("y_min"), p.positive("y_max"));
    const GridField exact = closed_form_field(m, axes, roles);
    GridField start = exact;
    for (std::size_t k = 0; k < start.size(); ++k)
        if (!start.is_boundary(k)) start[k] = -std::log(start.coords(k)[1]);
    EbeSolveOptions o;
    o.tol = p.positive("tol");
    o.max_iter = p.positive_int("max_iter");
    const auto s = solve_ebe(m, start, roles, o);
    Json r;
    r["iterations"] = s.iterations;
    r["residual"] = s.residual;
    r["history"] = s.history;
    r["roundoff_floor"] = s.roundoff_floor;
    r["line_search_activations"] = s.line_search_activations;
    r["warnings"] = s.warnings;
    r["distance_to_closed_form"] = (s.psi - exact).interior_max_abs();
    out.grid("psi.csv", s.psi);
    s.psi.save_binary(out.path("psi.bin"));
    return r;
}

Json run_dkw(const Params& p, Output& out) {
    const ModelParams m = model_params(p);
    const std::string kind = p.str("motion");
    if (kind != "circular" && kind != "uniform") bad_field("motion", kind, "circular or uniform");
    const bool circ = kind == "circular";
    const auto nt = static_cast<std::size_t>(p.positive_int("nt"));
    const auto axes = homotopy_axes(nt, static_cast<std::size_t>(p.positive_int("nx")),
                                    static_cast<std::size_t>(p.positive_int("ny")), circ,
                                    circ ? 2 * std::numbers::pi : 1.0);
    const StrandMotion motion = circ ? StrandMotion::circular(p.real("rho"), p.real("omega"), axes[0])
                                     : StrandMotion::uniform(p.complex("velocity"), axes[0]);
    const auto roles = homotopy_roles();
    DkwOptions o;
    o.ebe.tol = p.positive("tol");
    const int orders = static_cast<int>(p.integer("orders"));
    if (orders < 0 || orders > 8) bad_field("orders", p.str("orders"), "an order between 0 and 8");
    std::vector<GridField> psi;
    Json per = Json::array();
    for (int n = 0; n <= orders; ++n) {
        const auto s = solve_dkw_order(n, psi, motion, m, n == 0 ? closed_form_field(m, axes, roles) : GridField(),
                                       roles, o);
        psi.push_back(s.psi);
        per.push_back({{"order", n}, {"residual", s.residual}, {"max_abs", s.psi.max_abs()}});
        out.grid("psi_" + std::to_string(n) + ".csv", s.psi);
    }
    const double q = p.real("q");
    Json series = Json::array();
    for (std::size_t c = 1; c <= psi.size(); ++c) {
        const std::vector<GridField> part(psi.begin(), psi.begin() + static_cast<std::ptrdiff_t>(c));
        series.push_back({{"terms", c}, {"residual", series_eval(q, part, motion, m, roles).residual_max}});
    }
    Json r;
    r["orders"] = per;
    r["series"] = series;
    r["motion_inconsistency"] = motion.derivative_inconsistency();
    return r;
}

std::vector<Coords> first_fibre_points(const Strata& s, const Params& p, int count) {
    const auto pts = sample_fibre(s.slice, s.base, s.N, {count, p.positive("radius"), p.seed()});
    require(!pts.empty(), ErrorCode::NoSamplesConverged, "no fibre point could be sampled");
    return pts;
}

Json run_transport(const Params& p, Output& out) {
    const Strata s = strata(p);
    const BraidWord w = BraidWord::parse(p.str("braid"));
    const StrandPaths paths = braid_to_paths(w, s.base);
    TransportOptions o;
    o.tol = p.positive("tol");
    o.fibre_tol = p.positive("fibre_tol");
    if (p.has("clamp_radius")) o.clamp_radius = p.positive("clamp_radius");
    const Coords y0 = first_fibre_points(s, p, 1).front();
    const auto t = parallel_transport(s.slice, y0, paths, s.N, o);
    Json r = strata_json(s);
    r["start"] = coords_json(y0);
    r["end"] = coords_json(t.coords);
    r["end_config"] = coords_json(t.end_config.points);
    r["steps"] = t.steps;
    r["rejected"] = t.rejected;
    r["max_fibre_drift"] = t.max_fibre_drift;
    r["max_fibre_residual"] = t.max_fibre_residual;
    r["clamped"] = t.clamped;
    std::vector<std::vector<double>> rows;
    for (const auto& smp : t.samples) {
        std::vector<double> row{smp.t};
        for (const auto& z : smp.coords) {
            row.push_back(z.real());
            row.push_back(z.imag());
        }
        rows.push_back(row);
    }
    std::vector<std::string> header{"t"};
    for (int i = 0; i < s.slice.dim(); ++i) {
        header.push_back("re_" + std::to_string(i));
        header.push_back("im_" + std::to_string(i));
    }
    out.csv("path.csv", header, rows);
    return r;
}

Json run_fixpoints(const Params& p, Output& out) {
    const Strata s = strata(p);
    FixedPointOptions o;
    o.transport.tol = p.positive("tol");
    o.fixed_tol = p.positive("fixed_tol");
    o.dedupe_radius = p.positive("dedupe_radius");
    const auto rep = monodromy_fixed_points(BraidWord::parse(p.str("braid")), s.base, s.pi, s.N,
                                            {p.positive_int("samples"), p.positive("radius"), p.seed()}, o);
    Json r = strata_json(s);
    r["count"] = rep.count();
    r["continuum_flag"] = rep.continuum_flag;
    r["continuum_points"] = rep.continuum_points.size();
    r["residuals"] = rep.residuals;
    Json samples = Json::array();
    for (const auto& st : rep.samples)
        samples.push_back({{"converged", st.converged},
                           {"isolated", st.isolated},
                           {"iterations", st.iterations},
                           {"nullity", st.nullity},
                           {"residual", st.residual},
                           {"error", st.error}});
    r["samples"] = samples;
    out.csv("fixed_points.csv", {"point", "coord", "re", "im"}, cloud_rows(rep.points));
    out.csv("continuum_points.csv", {"point", "coord", "re", "im"}, cloud_rows(rep.continuum_points));
    return r;
}

VanishingOptions vanishing_options(const Params& p) {
    VanishingOptions v;
    v.eps_sing = p.positive("eps_sing");
    v.tau_vanish = p.positive("tau_vanish");
    return v;
}

CrossinglessMatching one_arc(const Strata& s) {
    require(s.base.size() == 2, ErrorCode::DomainError, "one-arc sampling needs exactly two points");
    return standard_matching(s.base);
}

// Count of singular values above 1e-2 of the largest.
int numerical_dimension(const std::vector<double>& sv) {
    int d = 0;
    for (double v : sv)
        if (!sv.empty() && v > 1e-2 * sv.front()) ++d;
    return d;
}

Json run_vanishing(const Params& p, Output& out) {
    const Strata s = strata(p);
    const auto m = one_arc(s);
    LagrangianOptions lo;
    lo.vanishing = vanishing_options(p);
    lo.seed = p.seed();
    const EntranceStage stage = matching_entrance_path(m, s.base).front();
    const auto diag = vanishing_cycle_check(s.slice, slice_project(s.slice, d_sum(s.base, s.N)), stage, s.N,
                                            lo.vanishing);
    const auto cloud = lagrangian_sample(m, s.base, s.pi, s.N, p.positive_int("count"), lo);
    const auto sv = cloud_singular_values(cloud.points);
    Json r = strata_json(s);
    r["merge_point"] = complex_json(stage.merge_point);
    r["diagonal_verdict"] = to_string(diag.verdict);
    r["diagonal_distance"] = diag.distance.back();
    r["attempted"] = cloud.attempted;
    r["accepted"] = cloud.accepted;
    r["singular_values"] = sv;
    r["numerical_dimension"] = numerical_dimension(sv);
    out.csv("cloud.csv", {"point", "coord", "re", "im"}, cloud_rows(cloud.points));
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < diag.s.size(); ++j) rows.push_back({diag.s[j], diag.distance[j]});
    out.csv("diagonal_distance.csv", {"s", "distance"}, rows);
    return r;
}

Json run_generators(const Params& p, Output& out) {
    const Strata s = strata(p);
    const auto m = one_arc(s);
    const BraidWord w = BraidWord::parse(p.str("braid"));
    LagrangianOptions lo;
    lo.vanishing = vanishing_options(p);
    lo.seed = p.seed();
    const int count = p.positive_int("count");
    const auto minus = lagrangian_sample(m, s.base, s.pi, s.N, count, lo);
    lo.seed = p.seed() + 1;
    const auto plus = lagrangian_sample(m, s.base, s.pi, s.N, count, lo);
    const auto moved = transport_cloud(s.slice, minus.points, braid_to_paths(w, s.base), s.N);
    GeneratorOptions go;
    go.capture_radius = p.positive("capture_radius");
    go.match_tol = p.positive("match_tol");
    const auto rep = intersection_generators(moved, plus.points, go);
    Json r = strata_json(s);
    r["minus_points"] = moved.size();
    r["plus_points"] = plus.points.size();
    r["count"] = rep.count();
    r["continuum_flag"] = rep.continuum_flag;
    r["residuals"] = rep.residuals;
    r["hausdorff"] = hausdorff_distance(moved, plus.points);
    out.csv("generators.csv", {"point", "coord", "re", "im"}, cloud_rows(rep.points));
    return r;
}

using Runner = Json (*)(const Params&, Output&);

Runner runner(const std::string& name) {
    static const std::map<std::string, Runner> table{
        {"orbit", run_orbit},         {"slice", run_slice},           {"divisor", run_divisor},
        {"model-check", run_model_check}, {"ebe-solve", run_ebe_solve}, {"dkw-correction", run_dkw},
        {"transport", run_transport}, {"fixpoints", run_fixpoints},   {"vanishing", run_vanishing},
        {"generators", run_generators},
    };
    return table.at(name);
}

bool is_tolerance(const std::string& key) {
    return key.find("tol") != std::string::npos || key == "eps_sing" || key == "tau_vanish" ||
           key == "dedupe_radius";
}

} // namespace

const std::vector<Command>& commands() { return kCommands; }

const Command& command(const std::string& name) {
    for (const auto& c : kCommands)
        if (c.name == name) return c;
    throw Error(ErrorCode::ConfigError, "unknown command '" + name + "'");
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const Command& cmd) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    for (int no = 1; std::getline(is, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::ConfigError,
                "line " + std::to_string(no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool known = false;
        for (const auto& f : cmd.fields) known = known || f.key == key;
        require(known, ErrorCode::ConfigError,
                "line " + std::to_string(no) + ": unknown field '" + key + "' for " + cmd.name);
        require(!out.count(key), ErrorCode::ConfigError,
                "line " + std::to_string(no) + ": field '" + key + "' given twice");
        out[key] = value;
    }
    return out;
}

RunConfig resolve(const std::string& name, const std::map<std::string, std::string>& overrides,
                  const std::string& out_dir) {
    const Command& cmd = command(name);
    RunConfig cfg;
    cfg.command = name;
    cfg.out_dir = out_dir;
    for (const auto& f : cmd.fields) cfg.params[f.key] = f.fallback;
    for (const auto& [k, v] : overrides) {
        require(cfg.params.count(k), ErrorCode::ConfigError, "unknown field '" + k + "' for " + name);
        cfg.params[k] = trim(v);
    }
    const Params p(cfg.params);
    for (const auto& [k, v] : cfg.params)
        if (is_tolerance(k) && !v.empty()) p.positive(k);
    p.seed();
    return cfg;
}

std::string execute(const RunConfig& cfg) {
    command(cfg.command);
    Output out(cfg.out_dir);
    const Params p(cfg.params);
    Json summary;
    summary["command"] = cfg.command;
    summary["seed"] = p.seed();
    Json config = Json::object();
    for (const auto& [k, v] : cfg.params) config[k] = v;
    summary["config"] = config;
    summary["result"] = runner(cfg.command)(p, out);
    summary["files"] = out.files();
    const std::string text = summary.dump(2) + "\n";
    std::ofstream os(out.path("summary.json"), std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + out.path("summary.json"));
    os << text;
    return text;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knot homology geometry: orbits, slices, divisors, model solutions, transport"};
    app.require_subcommand(1);
    struct Sub {
        CLI::App* app;
        std::string config_file, out_dir = ".";
        std::map<std::string, std::string> flags;
    };
    std::vector<Sub> subs(kCommands.size());
    for (std::size_t i = 0; i < kCommands.size(); ++i) {
        const Command& c = kCommands[i];
        Sub& s = subs[i];
        s.app = app.add_subcommand(c.name, c.help);
        s.app->add_option("--config", s.config_file, "flat key = value file");
        s.app->add_option("--out", s.out_dir, "output directory")->capture_default_str();
        for (const auto& f : c.fields) {
            std::string help = f.help;
            if (!f.fallback.empty()) help += (help.empty() ? "" : " ") + std::string("[default: ") + f.fallback + "]";
            s.app->add_option_function<std::string>(
                "--" + f.key, [&s, key = f.key](const std::string& v) { s.flags[key] = v; }, help);
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_code(ErrorClass::Config);
    }
    for (std::size_t i = 0; i < kCommands.size(); ++i) {
        Sub& s = subs[i];
        if (!s.app->parsed()) continue;
        try {
            std::map<std::string, std::string> merged;
            if (!s.config_file.empty()) {
                std::ifstream is(s.config_file);
                require(static_cast<bool>(is), ErrorCode::IoError, "cannot read " + s.config_file);
                std::stringstream buf;
                buf << is.rdbuf();
                try {
                    merged = parse_config_text(buf.str(), kCommands[i]);
                } catch (const Error& e) {
                    const std::string what = e.what();
                    throw Error(e.code(), s.config_file + ", " + what.substr(to_string(e.code()).size() + 2));
                }
            }
            for (const auto& [k, v] : s.flags) merged[k] = v;
            out << execute(resolve(kCommands[i].name, merged, s.out_dir));
            return 0;
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return exit_code(e.error_class());
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return exit_code(ErrorClass::Config);
}

} // namespace khg::cli
