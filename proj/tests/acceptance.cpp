// Acceptance criteria 1-11, one line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "cli.hpp"
#include "khg/ebe_solver.hpp"
#include "khg/higgs_divisor.hpp"
#include "khg/transport.hpp"

using namespace khg;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void check(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
}

void note(Outcome& o, const std::string& what) { o.detail += (o.detail.empty() ? "" : "; ") + what; }

SquareMatrixC random_conditioned(int n, double max_cond, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    auto unitary = [&] {
        SquareMatrixC a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = {nd(rng), nd(rng)};
        Eigen::HouseholderQR<SquareMatrixC> qr(a);
        return SquareMatrixC(qr.householderQ() * SquareMatrixC::Identity(n, n));
    };
    std::uniform_real_distribution<double> u(0.0, std::log(max_cond));
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = std::exp(u(rng));
    s(0) = 1.0;
    return unitary() * s.cast<Complex>().asDiagonal() * unitary();
}

std::vector<std::vector<int>> all_weights(int len, int max) {
    std::vector<std::vector<int>> out;
    std::vector<int> w(static_cast<std::size_t>(len), 0);
    while (true) {
        out.push_back(w);
        std::size_t i = 0;
        while (i < w.size() && w[i] == max) w[i++] = 0;
        if (i == w.size()) return out;
        ++w[i];
    }
}

Outcome sl2_identities() {
    Outcome o;
    double worst = 0.0;
    int count = 0;
    for (int n = 2; n <= 6; ++n)
        for (const auto& pi : partitions_of(n)) {
            const auto t = slodowy_slice(jordan_nilpotent(pi)).triple;
            worst = std::max(worst, t.residual());
            ++count;
        }
    check(o, worst < 1e-10, "commutator defect " + fmt(worst));
    note(o, std::to_string(count) + " partitions, worst defect " + fmt(worst));
    return o;
}

Outcome orbit_round_trip() {
    Outcome o;
    int partitions = 0, conjugations = 0, bad = 0;
    for (int n = 1; n <= 8; ++n)
        for (const auto& pi : partitions_of(n)) {
            ++partitions;
            if (!(orbit_partition(jordan_nilpotent(pi)) == pi)) ++bad;
        }
    check(o, bad == 0, std::to_string(bad) + " round trips");
    std::mt19937_64 rng(2024);
    int wrong = 0;
    for (int n = 1; n <= 8; ++n)
        for (const auto& pi : partitions_of(n)) {
            const SquareMatrixC e = jordan_nilpotent(pi);
            for (int trial = 0; trial < 100; ++trial) {
                const SquareMatrixC g = random_conditioned(n, 99.0, rng);
                if (!(orbit_partition(g * e * g.inverse()) == pi)) ++wrong;
                ++conjugations;
            }
        }
    check(o, wrong == 0, std::to_string(wrong) + " conjugated partitions");
    note(o, std::to_string(partitions) + " partitions, " + std::to_string(conjugations) + " conjugations");
    return o;
}

Outcome weight_rule() {
    Outcome o;
    for (int n = 3; n <= 6; ++n) {
        std::vector<int> w(static_cast<std::size_t>(n - 1), 0);
        w[0] = 1;
        check(o, weight_to_partition(w) == Partition({n - 1, 1}), "fundamental weight at N=" + std::to_string(n));
    }
    int checked = 0;
    for (int n = 2; n <= 5; ++n)
        for (const auto& w : all_weights(n - 1, 3)) {
            const Partition p = weight_to_partition(w);
            ++checked;
            bool valid = p.n() == n;
            for (std::size_t i = 0; i + 1 < p.length(); ++i) valid = valid && p.parts()[i] >= p.parts()[i + 1];
            valid = valid && p.parts().back() >= 1;
            check(o, valid, "partition of lambda at N=" + std::to_string(n));
        }
    note(o, std::to_string(checked) + " weights valid, [N-1,1] for N=3..6");
    return o;
}

Outcome calibration() {
    Outcome o;
    const double kappa = calibrate_kappa();
    check(o, std::abs(kappa - 1.0) < 1e-14, "kappa " + fmt(kappa));
    std::vector<double> ys;
    for (int i = 0; i <= 40; ++i) ys.push_back(0.01 * std::pow(1000.0, i / 40.0));
    double rel = 0.0;
    const auto res = nahm_residual_1d(ys, 1.0);
    for (std::size_t i = 0; i < ys.size(); ++i) rel = std::max(rel, std::abs(res[i]) * ys[i] * ys[i]);
    check(o, rel < 1e-14, "1D relative residual " + fmt(rel));
    std::string ratios;
    for (double lam : {0.5, 1.0, 1.5}) {
        auto err = [&](std::size_t n) {
            return ebe_residual({lam, kappa}, GridField({Axis::uniform("r", 0.2, 1, n), Axis::uniform("y", 0.2, 1, n)}))
                .max_abs();
        };
        double prev = err(17);
        for (std::size_t n : {33, 65, 129}) {
            const double e = err(n);
            const double r = prev / e;
            check(o, r >= 3.6 && r <= 4.4, "ratio " + fmt(r) + " at lambda " + fmt(lam));
            ratios += fmt(r) + " ";
            prev = e;
        }
    }
    note(o, "kappa = " + fmt(kappa) + ", ratios " + ratios);
    return o;
}

Outcome ebe_solve() {
    Outcome o;
    const ModelParams p{1.0, 1.0};
    const std::vector<AxisRole> roles{AxisRole::Radial, AxisRole::Y};
    const auto axes = ebe_axisymmetric_axes(65, 65);
    const GridField exact = closed_form_field(p, axes, roles);
    GridField start = exact;
    for (std::size_t k = 0; k < start.size(); ++k)
        if (!start.is_boundary(k)) start[k] = -std::log(start.coords(k)[1]);
    const auto r = solve_ebe(p, start, roles);
    const double d = (r.psi - exact).interior_max_abs();
    check(o, d < 1e-4, "distance " + fmt(d));
    check(o, r.iterations <= 12, std::to_string(r.iterations) + " Newton iterations");
    note(o, "65x65, distance " + fmt(d) + ", " + std::to_string(r.iterations) + " iterations");
    return o;
}

Outcome homotopy() {
    Outcome o;
    const ModelParams p{1.0, 1.0};
    const auto roles = homotopy_roles();
    const auto axes = homotopy_axes(6, 11, 11, false, 1.0);
    const auto motion = StrandMotion::uniform({0.3, 0.1}, axes[0]);
    const auto psi0 = solve_dkw_order(0, {}, motion, p, closed_form_field(p, axes, roles), roles).psi;
    const double k1 = assemble_K(1, {psi0}, motion, p, roles).max_abs();
    const double psi1 = solve_dkw_order(1, {psi0}, motion, p, GridField(), roles).psi.max_abs();
    check(o, k1 < 1e-10, "K^(1) " + fmt(k1));
    check(o, psi1 < 1e-10, "psi^(1) " + fmt(psi1));

    const std::vector<Axis> grid{Axis::periodic_uniform("t", 0, 1, 8), Axis::uniform("x2", -1, 1, 8),
                                 Axis::uniform("x3", -1, 1, 8), Axis::uniform("y", 0.2, 1, 8)};
    const auto still = StrandMotion::circular(0.0, 0.0, grid[0]);
    const StencilOperator op(grid, roles);
    const GridField w = ebe_weight(p, op);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<GridField> lower;
    for (int k = 0; k < 4; ++k) {
        GridField f(grid);
        for (auto& v : f.values()) v = u(rng);
        lower.push_back(f);
    }
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const std::vector<GridField> sub(lower.begin(), lower.begin() + n);
        const GridField kn = assemble_K(n, sub, still, p, roles);
        for (std::size_t q = 0; q < op.unknowns(); ++q) {
            const std::size_t i = op.node_of(q);
            // q^n coefficient of exp(2 sum_{k<n} q^k psi^(k)) by the power-series recurrence.
            std::vector<double> s(static_cast<std::size_t>(n) + 1, 0.0), e(s.size(), 0.0);
            for (int k = 1; k < n; ++k) s[k] = 2 * lower[k][i];
            e[0] = 1;
            for (int j = 1; j <= n; ++j) {
                for (int k = 1; k <= j; ++k) e[j] += k * s[k] * e[j - k];
                e[j] /= j;
            }
            const double want = -w[i] * std::exp(2 * lower[0][i]) * e[n];
            worst = std::max(worst, std::abs(kn[i] - want) / (1 + std::abs(want)));
        }
    }
    check(o, worst < 1e-12, "partition sum mismatch " + fmt(worst));
    note(o, "K1 " + fmt(k1) + ", psi1 " + fmt(psi1) + ", oracle mismatch " + fmt(worst));
    return o;
}

PointConfig line(std::initializer_list<double> xs) {
    std::vector<Complex> p;
    for (double x : xs) p.emplace_back(x, 0.0);
    return PointConfig(p);
}

double max_diff(const Coords& a, const Coords& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Outcome transport_contracts() {
    Outcome o;
    struct Case {
        std::string name;
        Partition pi;
        PointConfig base;
        StrandPaths paths;
        Coords y0;
    };
    std::vector<Case> cases;
    {
        const Partition pi{2};
        const auto slice = slodowy_slice(jordan_nilpotent(pi));
        SquareMatrixC y(2, 2);
        y << 0, 1, 1, 0;
        const auto semicircle = StrandPaths::from_function(
            [](double t, std::vector<Complex>& z, std::vector<Complex>& v) {
                const Complex e = std::polar(1.0, std::numbers::pi * t);
                z = {e};
                v = {Complex(0, std::numbers::pi) * e};
            },
            65);
        cases.push_back({"k=1", pi, line({1}), semicircle, slice_project(slice, y)});
    }
    {
        const Partition pi{1, 1, 1, 1};
        const auto slice = slodowy_slice(jordan_nilpotent(pi));
        const PointConfig base = line({1, 3});
        std::mt19937_64 rng(3);
        const SquareMatrixC g = random_conditioned(4, 3.0, rng);
        const Coords seed = slice_project(slice, g * d_sum(base, 2) * g.inverse());
        cases.push_back({"k=2", pi, base, braid_to_paths(BraidWord::parse("k=2; s1"), base),
                         project_to_fibre(slice, seed, base, 2).coords});
    }
    for (const auto& c : cases) {
        const auto slice = slodowy_slice(jordan_nilpotent(c.pi));
        const double id = max_diff(parallel_transport(slice, c.y0, StrandPaths::constant(c.base), 2).coords, c.y0);
        const double rt = max_diff(parallel_transport(slice, c.y0, c.paths.then(c.paths.reversed()), 2).coords, c.y0);
        const auto r = parallel_transport(slice, c.y0, c.paths, 2);
        double track = 0.0;
        for (const auto& s : r.samples) {
            const PointConfig beta = c.paths.at(s.t);
            const PointConfig z = chi_tilde(slice_embed(slice, s.coords), static_cast<int>(beta.size()), 2, &beta);
            for (std::size_t a = 0; a < beta.size(); ++a) track = std::max(track, std::abs(z[a] - beta[a]));
        }
        TransportOptions coarse, fine;
        coarse.tol = 1e-9;
        fine.tol = coarse.tol / 32.0;
        fine.step_max = coarse.step_max / 2.0;
        const double rich = max_diff(parallel_transport(slice, c.y0, c.paths, 2, coarse).coords,
                                     parallel_transport(slice, c.y0, c.paths, 2, fine).coords);
        check(o, id < 1e-12, c.name + " identity " + fmt(id));
        check(o, rt < 1e-6, c.name + " round trip " + fmt(rt));
        check(o, track < 1e-8, c.name + " fibre tracking " + fmt(track));
        check(o, rich < 1e-6, c.name + " step halving " + fmt(rich));
        note(o, c.name + ": identity " + fmt(id) + ", round trip " + fmt(rt) + ", tracking " + fmt(track) +
                    ", halving " + fmt(rich));
    }
    return o;
}

Outcome fixed_points() {
    Outcome o;
    const PointConfig base = line({1, 3});
    const Partition pi{1, 1, 1, 1};
    const auto id = monodromy_fixed_points(BraidWord::parse("k=2;"), base, pi, 2, {4, 1.0, 1});
    bool all_fixed = !id.samples.empty();
    for (const auto& s : id.samples) all_fixed = all_fixed && s.converged && s.residual < 1e-8;
    check(o, id.continuum_flag, "identity continuum flag");
    check(o, all_fixed, "identity samples fixed");
    const BraidWord twist = BraidWord::parse("k=2; s1 s1");
    const auto a = monodromy_fixed_points(twist, base, pi, 2, {4, 1.0, 1});
    const auto b = monodromy_fixed_points(twist, base, pi, 2, {4, 1.0, 2});
    const auto c = monodromy_fixed_points(twist, base, pi, 2, {8, 1.0, 1});
    auto converged = [](const FixedPointReport& r) {
        int n = 0;
        for (const auto& s : r.samples) n += s.converged;
        return n;
    };
    check(o, a.count() == b.count(), "count differs across seeds");
    check(o, c.count() >= a.count(), "count decreased with more samples");
    check(o, c.count() == a.count(), "count changed with doubled samples");
    note(o, "identity: continuum, " + std::to_string(id.samples.size()) + " samples fixed; full twist isolated counts " +
                std::to_string(a.count()) + "/" + std::to_string(b.count()) + "/" + std::to_string(c.count()) +
                ", converged samples " + std::to_string(converged(a)) + "/" + std::to_string(converged(b)) + "/" +
                std::to_string(converged(c)) + " all on positive-dimensional fixed sets (continuum flag " +
                (a.continuum_flag && b.continuum_flag && c.continuum_flag ? "set" : "unset") + ")");
    return o;
}

Outcome divisor_round_trip() {
    Outcome o;
    int checked = 0;
    for (int n = 2; n <= 4; ++n)
        for (const auto& lambda : all_weights(n - 1, 2)) {
            ++checked;
            const auto phi = knot_higgs_field(lambda);
            VectorC e1 = VectorC::Zero(n);
            e1(0) = 1.0;
            const auto d = divisor_of(phi, e1);
            const bool trivial = std::all_of(lambda.begin(), lambda.end(), [](int l) { return l == 0; });
            const bool ok = trivial ? d.points.empty()
                                    : d.points.size() == 1 && d.points[0].p == Complex(0.0) && d.points[0].lambda == lambda;
            check(o, ok, "divisor of weight at N=" + std::to_string(n));
            check(o, orbit_partition(phi.evaluate(0.0)) == weight_to_partition(lambda),
                  "orbit partition at N=" + std::to_string(n));
        }
    note(o, std::to_string(checked) + " weights recovered exactly");
    return o;
}

Outcome vanishing_dimension() {
    Outcome o;
    const PointConfig base = line({1, 3});
    const auto m = standard_matching(base);
    std::vector<std::vector<Coords>> clouds;
    for (std::uint64_t seed : {1u, 2u}) {
        LagrangianOptions lo;
        lo.seed = seed;
        const auto s = lagrangian_sample(m, base, Partition{1, 1, 1, 1}, 2, 100, lo);
        const auto sv = cloud_singular_values(s.points);
        const double ratio = sv.size() > 1 ? sv[1] / sv[0] : 0.0;
        int dim = 0;
        for (double v : sv) dim += v > 1e-2 * sv[0];
        check(o, ratio < 1e-2, "seed " + std::to_string(seed) + " second/first singular value " + fmt(ratio));
        note(o, "seed " + std::to_string(seed) + ": " + std::to_string(s.accepted) + "/100 accepted, numerical dimension " +
                    std::to_string(dim) + " of " + std::to_string(2 * s.points.front().size()) + " real coordinates");
        clouds.push_back(s.points);
    }
    const double h = hausdorff_distance(clouds[0], clouds[1]);
    check(o, h < 1e-3, "Hausdorff distance " + fmt(h));
    return o;
}

Outcome cli_determinism() {
    Outcome o;
    const auto root = std::filesystem::temp_directory_path() / ("khg_acceptance_" + std::to_string(::getpid()));
    const std::map<std::string, std::map<std::string, std::string>> configs{
        {"orbit", {{"weight", "1,0,0"}}},
        {"slice", {}},
        {"divisor", {{"lambda", "1,2"}, {"point", "0.5+1i"}}},
        {"model-check", {{"grids", "17,33,65"}}},
        {"ebe-solve", {{"nr", "33"}, {"ny", "33"}}},
        {"dkw-correction", {{"nx", "9"}, {"ny", "9"}, {"nt", "6"}}},
        {"transport", {}},
        {"fixpoints", {{"samples", "1"}, {"seed", "7"}}},
        {"vanishing", {{"count", "10"}}},
        {"generators", {{"count", "10"}}},
    };
    int same = 0;
    for (const auto& cmd : cli::commands()) {
        const auto it = configs.find(cmd.name);
        const auto overrides = it == configs.end() ? std::map<std::string, std::string>{} : it->second;
        std::string text[2];
        for (int run = 0; run < 2; ++run) {
            const auto dir = root / (cmd.name + "_" + std::to_string(run));
            cli::execute(cli::resolve(cmd.name, overrides, dir.string()));
            std::ifstream is(dir / "summary.json", std::ios::binary);
            std::stringstream buf;
            buf << is.rdbuf();
            text[run] = buf.str();
        }
        const bool provenance = text[0].find("\"config\"") != std::string::npos &&
                                text[0].find("\"seed\"") != std::string::npos;
        check(o, !text[0].empty() && text[0] == text[1], cmd.name + " summaries differ");
        check(o, provenance, cmd.name + " summary lacks config or seed");
        same += !text[0].empty() && text[0] == text[1];
    }
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
    note(o, std::to_string(same) + "/" + std::to_string(cli::commands().size()) + " commands byte-identical");
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        double limit;  // seconds, 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "sl2-triple identities", 1, sl2_identities},
        {2, "orbit round-trip and conjugation invariance", 10, orbit_round_trip},
        {3, "weight rule", 0, weight_rule},
        {4, "convention calibration", 30, calibration},
        {5, "nonlinear EBE solve", 30, ebe_solve},
        {6, "homotopy expansion", 60, homotopy},
        {7, "transport contracts", 60, transport_contracts},
        {8, "monodromy fixed points", 300, fixed_points},
        {9, "divisor round-trip", 0, divisor_round_trip},
        {10, "vanishing-cycle dimension", 120, vanishing_dimension},
        {11, "CLI determinism", 0, cli_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs > c.limit) check(o, false, "runtime " + fmt(secs) + " s over " + fmt(c.limit) + " s");
        failures += !o.pass;
        std::printf("criterion %2d %-45s %s  (%.2f s)  %s\n", c.id, c.name.c_str(), o.pass ? "PASS" : "FAIL", secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
