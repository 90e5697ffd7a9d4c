#include "khg/braids.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace khg {

namespace {

[[noreturn]] void bad_braid(const std::string& text, const std::string& why) {
    fail(ErrorCode::InvalidBraid, "cannot parse braid \"" + text + "\": " + why);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& text, const std::string& digits) {
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        bad_braid(text, "expected a number, got \"" + digits + "\"");
    if (digits.size() > 6) bad_braid(text, "number too large");
    return std::stoi(digits);
}

} // namespace

BraidWord BraidWord::parse(const std::string& text) {
    const auto semi = text.find(';');
    const std::string head = trim(text.substr(0, semi));
    if (head.size() < 3 || head[0] != 'k') bad_braid(text, "missing \"k=<strands>\"");
    const auto eq = head.find('=');
    if (eq == std::string::npos || trim(head.substr(1, eq - 1)) != "") bad_braid(text, "missing \"k=<strands>\"");
    BraidWord w;
    w.strands = parse_int(text, trim(head.substr(eq + 1)));
    if (semi != std::string::npos) {
        std::istringstream letters(text.substr(semi + 1));
        std::string tok;
        while (letters >> tok) {
            if (tok[0] != 's' && tok[0] != 'S') bad_braid(text, "letters look like s2 or s2^-1");
            BraidLetter l;
            const auto caret = tok.find('^');
            l.index = parse_int(text, tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
            if (caret != std::string::npos) {
                const std::string e = tok.substr(caret + 1);
                if (e == "-1") l.sign = -1;
                else if (e != "1" && e != "+1") bad_braid(text, "exponent must be 1 or -1");
            }
            w.letters.push_back(l);
        }
    }
    try {
        w.validate();
    } catch (const Error& e) {
        bad_braid(text, e.what());
    }
    return w;
}

std::string BraidWord::to_string() const {
    std::string s = "k=" + std::to_string(strands) + ";";
    for (const auto& l : letters) s += " s" + std::to_string(l.index) + (l.sign < 0 ? "^-1" : "");
    return s;
}

void BraidWord::validate() const {
    require(strands >= 1, ErrorCode::InvalidBraid, "a braid needs at least one strand");
    for (const auto& l : letters) {
        require(l.index >= 1 && l.index < strands, ErrorCode::InvalidBraid,
                "generator s" + std::to_string(l.index) + " out of range for " + std::to_string(strands) + " strands");
        require(l.sign == 1 || l.sign == -1, ErrorCode::InvalidBraid, "letter signs are +-1");
    }
}

std::vector<int> BraidWord::permutation() const {
    validate();
    std::vector<int> strand_at(static_cast<std::size_t>(strands));
    std::iota(strand_at.begin(), strand_at.end(), 0);
    for (const auto& l : letters) std::swap(strand_at[static_cast<std::size_t>(l.index - 1)], strand_at[static_cast<std::size_t>(l.index)]);
    std::vector<int> perm(strand_at.size());
    for (std::size_t slot = 0; slot < strand_at.size(); ++slot) perm[static_cast<std::size_t>(strand_at[slot])] = static_cast<int>(slot);
    return perm;
}

bool BraidWord::is_pure() const {
    const auto p = permutation();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != static_cast<int>(i)) return false;
    return true;
}

BraidWord BraidWord::inverse() const {
    BraidWord w{strands, {}};
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back({it->index, -it->sign});
    return w;
}

BraidWord operator*(const BraidWord& a, const BraidWord& b) {
    require(a.strands == b.strands, ErrorCode::InvalidBraid, "braids on different strand counts");
    BraidWord w = a;
    w.letters.insert(w.letters.end(), b.letters.begin(), b.letters.end());
    return w;
}

BraidWord bipartite_extend(const BraidWord& word) {
    word.validate();
    BraidWord w = word;
    w.strands = 2 * word.strands;
    return w;
}

void StrandPaths::eval(double time, std::vector<Complex>& pos, std::vector<Complex>& vel) const {
    require(!t.empty(), ErrorCode::DomainError, "empty strand paths");
    time = std::clamp(time, 0.0, 1.0);
    if (exact) {
        exact(time, pos, vel);
        return;
    }
    const std::size_t n = strands();
    pos.resize(n);
    vel.resize(n);
    if (t.size() == 1) {
        pos = z[0].points;
        vel = zdot[0];
        return;
    }
    std::size_t j = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), time) - t.begin());
    j = std::clamp<std::size_t>(j, 1, t.size() - 1) - 1;
    const double h = t[j + 1] - t[j];
    const double s = (time - t[j]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s), h01 = s * s * (3 - 2 * s),
                 h11 = s * s * (s - 1);
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1, d01 = -d00, d11 = 3 * s * s - 2 * s;
    for (std::size_t a = 0; a < n; ++a) {
        const Complex p0 = z[j][a], p1 = z[j + 1][a], m0 = zdot[j][a] * h, m1 = zdot[j + 1][a] * h;
        pos[a] = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
        vel[a] = (d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1) / h;
    }
}

PointConfig StrandPaths::at(double time) const {
    std::vector<Complex> p, v;
    eval(time, p, v);
    return PointConfig(p);
}

StrandPaths StrandPaths::from_function(std::function<void(double, std::vector<Complex>&, std::vector<Complex>&)> f,
                                       std::size_t samples) {
    require(samples >= 2, ErrorCode::DomainError, "paths need at least two samples");
    StrandPaths s;
    s.exact = std::move(f);
    s.min_separation = INFINITY;
    std::vector<Complex> p, v;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = i + 1 == samples ? 1.0 : static_cast<double>(i) / static_cast<double>(samples - 1);
        s.exact(t, p, v);
        s.t.push_back(t);
        s.z.emplace_back(p);
        s.zdot.push_back(v);
        s.min_separation = std::min(s.min_separation, s.z.back().separation());
    }
    return s;
}

StrandPaths StrandPaths::constant(const PointConfig& base, std::size_t samples) {
    return from_function(
        [base](double, std::vector<Complex>& p, std::vector<Complex>& v) {
            p = base.points;
            v.assign(base.size(), Complex(0.0, 0.0));
        },
        samples);
}

StrandPaths StrandPaths::reversed() const {
    StrandPaths r;
    r.min_separation = min_separation;
    for (std::size_t i = t.size(); i-- > 0;) {
        r.t.push_back(1.0 - t[i]);
        r.z.push_back(z[i]);
        std::vector<Complex> v = zdot[i];
        for (auto& x : v) x = -x;
        r.zdot.push_back(std::move(v));
    }
    r.t.front() = 0.0;
    r.t.back() = 1.0;
    if (exact) {
        auto f = exact;
        r.exact = [f](double time, std::vector<Complex>& p, std::vector<Complex>& v) {
            f(1.0 - time, p, v);
            for (auto& x : v) x = -x;
        };
    }
    return r;
}

StrandPaths StrandPaths::then(const StrandPaths& next) const {
    require(strands() == next.strands(), ErrorCode::LengthMismatch, "paths on different strand counts");
    for (std::size_t a = 0; a < strands(); ++a)
        require(std::abs(end()[a] - next.start()[a]) < 1e-12, ErrorCode::DomainError, "paths do not join up");
    StrandPaths r;
    r.min_separation = std::min(min_separation, next.min_separation);
    auto push = [&](const StrandPaths& p, double offset, bool skip_first) {
        for (std::size_t i = skip_first ? 1 : 0; i < p.t.size(); ++i) {
            r.t.push_back(offset + 0.5 * p.t[i]);
            r.z.push_back(p.z[i]);
            std::vector<Complex> v = p.zdot[i];
            for (auto& x : v) x *= 2.0;
            r.zdot.push_back(std::move(v));
        }
    };
    push(*this, 0.0, false);
    push(next, 0.5, true);
    r.t.back() = 1.0;
    if (exact && next.exact) {
        auto f = exact, g = next.exact;
        r.exact = [f, g](double time, std::vector<Complex>& p, std::vector<Complex>& v) {
            if (time <= 0.5) f(2.0 * time, p, v);
            else g(2.0 * time - 1.0, p, v);
            for (auto& x : v) x *= 2.0;
        };
    }
    return r;
}

StrandPaths braid_to_paths(const BraidWord& word, const PointConfig& base, int steps_per_letter, double tau_sep) {
    word.validate();
    require(static_cast<int>(base.size()) == word.strands, ErrorCode::LengthMismatch,
            "base configuration must have one point per strand");
    require(steps_per_letter >= 1, ErrorCode::DomainError, "steps_per_letter must be positive");
    require(base.distinct(tau_sep), ErrorCode::CollisionDetected, "base configuration has colliding points");
    const std::size_t letters = word.letters.size();
    if (letters == 0) return StrandPaths::constant(base, static_cast<std::size_t>(steps_per_letter) + 1);
    // strand_at[j][slot] before letter j
    std::vector<std::vector<int>> strand_at(letters + 1, std::vector<int>(base.size()));
    std::iota(strand_at[0].begin(), strand_at[0].end(), 0);
    for (std::size_t j = 0; j < letters; ++j) {
        strand_at[j + 1] = strand_at[j];
        const auto i = static_cast<std::size_t>(word.letters[j].index);
        std::swap(strand_at[j + 1][i - 1], strand_at[j + 1][i]);
    }
    const auto pts = base.points;
    const auto lw = word.letters;
    auto f = [pts, lw, strand_at](double t, std::vector<Complex>& p, std::vector<Complex>& v) {
        const std::size_t L = lw.size();
        const double u = t * static_cast<double>(L);
        const std::size_t j = std::min(L - 1, static_cast<std::size_t>(std::floor(u)));
        const double tau = u - static_cast<double>(j);
        p.resize(pts.size());
        v.assign(pts.size(), Complex(0.0, 0.0));
        const auto& slots = tau >= 1.0 ? strand_at[j + 1] : strand_at[j];
        for (std::size_t s = 0; s < pts.size(); ++s) p[static_cast<std::size_t>(slots[s])] = pts[s];
        const auto i = static_cast<std::size_t>(lw[j].index);
        const Complex a = pts[i - 1], b = pts[i], m = 0.5 * (a + b);
        const auto sa = static_cast<std::size_t>(strand_at[j][i - 1]), sb = static_cast<std::size_t>(strand_at[j][i]);
        const double omega = lw[j].sign * M_PI;
        const Complex rot = std::polar(1.0, omega * tau), spin(0.0, omega * static_cast<double>(L));
        if (tau > 0.0 && tau < 1.0) {
            p[sa] = m + (a - m) * rot;
            p[sb] = m + (b - m) * rot;
        }
        v[sa] = spin * (p[sa] - m);
        v[sb] = spin * (p[sb] - m);
    };
    StrandPaths paths = StrandPaths::from_function(f, letters * static_cast<std::size_t>(steps_per_letter) + 1);
    require(paths.min_separation > tau_sep, ErrorCode::CollisionDetected,
            "strands collide (separation " + std::to_string(paths.min_separation) + ")");
    return paths;
}

Complex Arc::at(double s) const {
    if (s <= 0.0) return p;
    if (s >= 1.0) return q;
    const Complex c = 0.5 * (p + q);
    return c + (p - c) * std::polar(1.0, -M_PI * s * side);
}

Complex Arc::velocity(double s) const {
    const Complex c = 0.5 * (p + q);
    return (p - c) * Complex(0.0, -M_PI * side) * std::polar(1.0, -M_PI * s * side);
}

namespace {

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(Complex a, Complex b, Complex c, Complex d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a), d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::vector<Complex> sample_arc(const Arc& a, std::size_t n) {
    std::vector<Complex> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = a.at(static_cast<double>(i) / static_cast<double>(n - 1));
    return s;
}

} // namespace

void CrossinglessMatching::validate(const PointConfig& config, double tau) const {
    require(config.size() == points && points == 2 * arcs.size(), ErrorCode::LengthMismatch,
            "a matching of 2k points needs k arcs");
    std::vector<int> used(points, 0);
    for (const auto& a : arcs) {
        require(a.first < points && a.second < points && a.first != a.second, ErrorCode::DomainError,
                "arc endpoints must be two distinct points");
        require(std::abs(a.p - config[a.first]) < 1e-12 && std::abs(a.q - config[a.second]) < 1e-12,
                ErrorCode::DomainError, "arc endpoints do not match the configuration");
        ++used[a.first];
        ++used[a.second];
    }
    for (int u : used) require(u == 1, ErrorCode::ArcsNotDisjoint, "arcs share an endpoint");
    constexpr std::size_t n = 513;
    std::vector<std::vector<Complex>> samples;
    for (const auto& a : arcs) samples.push_back(sample_arc(a, n));
    for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = i + 1; j < arcs.size(); ++j) {
            double dmin = INFINITY;
            for (const auto& x : samples[i])
                for (const auto& y : samples[j]) dmin = std::min(dmin, std::abs(x - y));
            require(dmin > tau, ErrorCode::ArcsNotDisjoint, "arcs touch");
            for (std::size_t a = 0; a + 1 < n; ++a)
                for (std::size_t b = 0; b + 1 < n; ++b)
                    require(!segments_cross(samples[i][a], samples[i][a + 1], samples[j][b], samples[j][b + 1]),
                            ErrorCode::ArcsNotDisjoint, "arcs cross");
        }
}

CrossinglessMatching matching_from_pairs(const PointConfig& points,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs, int side) {
    CrossinglessMatching m;
    m.points = points.size();
    for (const auto& [i, j] : pairs) {
        require(i < points.size() && j < points.size(), ErrorCode::DomainError, "matched point index out of range");
        m.arcs.push_back({i, j, points[i], points[j], side});
    }
    m.validate(points);
    return m;
}

CrossinglessMatching standard_matching(const PointConfig& points) {
    require(points.size() % 2 == 0 && !points.points.empty(), ErrorCode::LengthMismatch,
            "a matching needs an even, positive number of points");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n / 2; ++i) pairs.emplace_back(i, n - 1 - i);
    return matching_from_pairs(points, pairs, 1);
}

std::vector<EntranceStage> matching_entrance_path(const CrossinglessMatching& m, const PointConfig& config,
                                                  int samples_per_arc, double tau_merge) {
    m.validate(config);
    require(samples_per_arc >= 2, ErrorCode::DomainError, "need at least two samples per arc");
    std::vector<std::size_t> order(m.arcs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.arcs[a].radius() < m.arcs[b].radius(); });
    std::vector<std::size_t> labels(config.size());
    std::iota(labels.begin(), labels.end(), 0);
    std::vector<EntranceStage> stages;
    for (std::size_t ai : order) {
        const Arc arc = m.arcs[ai];
        EntranceStage st;
        st.arc = ai;
        st.labels = labels;
        st.pair_first = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), arc.first) - labels.begin());
        st.pair_second = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), arc.second) - labels.begin());
        const double rho = arc.radius();
        st.merge_time = 2.0 * rho <= tau_merge ? 0.0 : 1.0 - (2.0 / M_PI) * std::asin(tau_merge / (2.0 * rho));
        st.merge_point = arc.midpoint();
        std::vector<Complex> fixed;
        for (std::size_t l : labels) fixed.push_back(config[l]);
        const double tm = st.merge_time;
        const std::size_t pf = st.pair_first, ps = st.pair_second;
        st.path = StrandPaths::from_function(
            [fixed, arc, tm, pf, ps](double u, std::vector<Complex>& p, std::vector<Complex>& v) {
                const double t = u * tm;
                p = fixed;
                v.assign(fixed.size(), Complex(0.0, 0.0));
                p[pf] = arc.at(0.5 * t);
                p[ps] = arc.at(1.0 - 0.5 * t);
                v[pf] = 0.5 * tm * arc.velocity(0.5 * t);
                v[ps] = -0.5 * tm * arc.velocity(1.0 - 0.5 * t);
            },
            static_cast<std::size_t>(samples_per_arc) + 1);
        require(st.path.min_separation > std::min(kSeparationTol, 0.5 * tau_merge), ErrorCode::ArcsNotDisjoint,
                "configuration collides before the pair merges");
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(std::max(pf, ps)));
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(std::min(pf, ps)));
        stages.push_back(std::move(st));
    }
    return stages;
}

} // namespace khg
