#include "pretzel/apoly.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "pretzel/chebyshev.hpp"
#include "pretzel/errors.hpp"
#include "pretzel/rational.hpp"
#include "pretzel/rng.hpp"

namespace pretzel {

namespace {

MultiPoly c(long v) { return MultiPoly::from_long(v); }

} // namespace

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

long GroupWord::exponent_sum() const {
    long s = 0;
    for (const auto& letter : letters) s += letter.second;
    return s;
}

namespace {

// Appends (g_a g_b^{-1})^m expanded into single letters of exponent ±1.
void append_block(std::vector<std::pair<int, long>>& out, int a, int b, long m) {
    if (m < 0) {
        std::swap(a, b);
        m = -m;
    }
    for (long i = 0; i < m; ++i) {
        out.emplace_back(a, 1L);
        out.emplace_back(b, -1L);
    }
}

} // namespace

GroupWord longitude_word(const PretzelParams& params) {
    const long k1 = params.k1, k2 = params.k2, k3 = params.k3;
    GroupWord word;
    word.letters.reserve(static_cast<std::size_t>(4 * (k1 + k2 + k3 + 1)));
    append_block(word.letters, 1, 2, -k3);
    append_block(word.letters, 3, 1, k2);
    append_block(word.letters, 2, 3, -(k1 + 1));
    append_block(word.letters, 1, 2, k3);
    append_block(word.letters, 2, 3, -k1);
    append_block(word.letters, 3, 1, k2 + 1);
    return word;
}

Mat2 evaluate_word(const GroupWord& word, const RepTriple& rep) {
    Mat2 acc = Mat2::identity();
    for (const auto& [g, e] : word.letters) {
        const Mat2* m = nullptr;
        switch (g) {
            case 1: m = &rep.x1; break;
            case 2: m = &rep.x2; break;
            case 3: m = &rep.x3; break;
            default: throw domain_error("evaluate_word: generator index outside {1, 2, 3}");
        }
        acc = acc * sl2_power(*m, e);
    }
    return acc;
}

Mat2 longitude_matrix(const RepTriple& rep) {
    const Mat2 y1 = rep.x2 * rep.x3.inverse();
    const Mat2 y2 = rep.x3 * rep.x1.inverse();
    const Mat2 y3 = rep.x1 * rep.x2.inverse();
    const long k1 = rep.params.k1, k2 = rep.params.k2, k3 = rep.params.k3;
    return sl2_power(y3, -k3) * sl2_power(y2, k2) * sl2_power(y1, -k1 - 1) * sl2_power(y3, k3) *
           sl2_power(y1, -k1) * sl2_power(y2, k2 + 1);
}

double commutation_residual(const RepTriple& rep) {
    const Mat2 l = longitude_matrix(rep);
    const Mat2& m = rep.x1;
    return distance_max(l * m, m * l) / std::max(1.0, l.norm_max() * m.norm_max());
}

// ---------------------------------------------------------------------------
// Peripheral eigenvalues
// ---------------------------------------------------------------------------

PeripheralPair peripheral_pair(const RepTriple& rep, double tol) {
    const Mat2& m = rep.x1;
    const Mat2 id = Mat2::identity();
    if (distance_max(m, id) < 1e-10 || distance_max(m, cdouble(-1.0) * id) < 1e-10)
        throw domain_error("peripheral_pair: the meridian image is ±I");

    const cdouble t = m.trace();
    const cdouble disc = std::sqrt(t * t - 4.0);
    cdouble u = 0.5 * (t + disc);
    cdouble uinv = 0.5 * (t - disc);
    // The eigenvalue product is det = 1; recompute the smaller root from the
    // larger one to dodge cancellation.
    if (std::abs(u) >= std::abs(uinv))
        uinv = 1.0 / u;
    else
        u = 1.0 / uinv;
    if (std::abs(u - 1.0) < 1e-8 || std::abs(u + 1.0) < 1e-8)
        throw domain_error("peripheral_pair: parabolic meridian (u = ±1), the longitude "
                           "reconstruction denominator vanishes");

    const Mat2 l = longitude_matrix(rep);
    const double comm = distance_max(l * m, m * l) / std::max(1.0, l.norm_max() * m.norm_max());
    if (!(comm < tol))
        throw domain_error("peripheral_pair: the longitude image does not commute with the "
                           "meridian image");

    // Change of basis: columns are eigenvectors for u and 1/u.
    const double scale = m.norm_max();
    Mat2 basis;
    if (std::abs(m.b) >= std::abs(m.c) && std::abs(m.b) > 1e-14 * scale) {
        basis = {m.b, m.b, u - m.a, uinv - m.a};
    } else if (std::abs(m.c) > 1e-14 * scale) {
        basis = {u - m.d, uinv - m.d, m.c, m.c};
    } else {
        // Already diagonal; order the axes to put u first.
        basis = (std::abs(m.a - u) <= std::abs(m.d - u)) ? id : Mat2{0.0, 1.0, 1.0, 0.0};
    }
    const double n1 = std::max(std::abs(basis.a), std::abs(basis.c));
    const double n2 = std::max(std::abs(basis.b), std::abs(basis.d));
    basis.a /= n1;
    basis.c /= n1;
    basis.b /= n2;
    basis.d /= n2;

    const Mat2 basis_inv = basis.inverse();
    const Mat2 mdiag = basis_inv * m * basis;
    const Mat2 ldiag = basis_inv * l * basis;
    cdouble uu = mdiag.a;
    cdouble ww = ldiag.a;
    if (!(std::abs(ww) > 0.0))
        throw domain_error("peripheral_pair: vanishing longitude eigenvalue");

    // Verify the linear reconstruction of the longitude from the meridian.
    const cdouble den = uu - 1.0 / uu;
    const cdouble c1 = (ww - 1.0 / ww) / den;
    const cdouble c0 = (uu / ww - ww / uu) / den;
    const Mat2 recon = c1 * mdiag + c0 * id;
    const double l1res = distance_max(recon, ldiag) / std::max(1.0, ldiag.norm_max());
    if (!(l1res < tol))
        throw domain_error("peripheral_pair: the longitude reconstruction from the meridian "
                           "missed its tolerance");

    // Canonical choice between (u, w) and (1/u, 1/w): larger |u|, and on the
    // unit circle the root in the upper half plane.
    const double au = std::abs(uu);
    bool invert = false;
    if (au < 1.0 - 1e-9)
        invert = true;
    else if (au <= 1.0 + 1e-9 && uu.imag() < 0.0)
        invert = true;
    if (invert) {
        uu = 1.0 / uu;
        ww = 1.0 / ww;
    }
    return {uu, ww};
}

double peripheral_equation_residual(const RepTriple& rep, const PeripheralPair& pair) {
    const B3Traces tr = b3_traces_direct(rep);
    const cdouble lhs = (pair.w + 1.0) * tr.trB3X2inv;
    const cdouble rhs = (pair.u + pair.w / pair.u) * tr.trB3;
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double ap4_residual(const CharPoint& p, const PeripheralPair& pair) {
    const Invariants inv = point_invariants(p);
    const cdouble t = p.t, lam = inv.lambda, sig1 = inv.sigma1;
    const cdouble lhs = (pair.w + 1.0) * t * (sig1 + 2.0 - lam - t * t);
    const cdouble rhs = (pair.u + pair.w / pair.u) * (sig1 + 2.0 - 2.0 * t * t);
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

std::vector<PeripheralPair> sample_peripheral_pairs(const PretzelParams& params, int count,
                                                    std::uint64_t seed, double tol,
                                                    int* n_failed) {
    const std::vector<CharPoint> pts = sample_x3(params, count, seed, tol);
    std::vector<PeripheralPair> out;
    out.reserve(pts.size());
    int failed = 0;
    for (const CharPoint& p : pts) {
        const std::optional<RepTriple> rep = try_build_representation(p, params, tol);
        if (!rep) {
            ++failed;
            continue;
        }
        try {
            out.push_back(peripheral_pair(*rep, tol));
        } catch (const domain_error&) {
            ++failed;
        }
    }
    if (n_failed) *n_failed = failed;
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form traces of B3
// ---------------------------------------------------------------------------

B3Traces b3_traces_closed(const CharPoint& p, const PretzelParams& params) {
    const Invariants inv = point_invariants(p);
    const cdouble t = p.t, lam = inv.lambda;
    const cdouble d1 = lam - 2.0 - p.s1, d2 = lam - 2.0 - p.s2;
    if (std::abs(d1) < 1e-12 || std::abs(d2) < 1e-12)
        throw domain_error("b3_traces_closed: a denominator factor lambda-2-s_j vanishes");
    const cdouble b1 = omega_eval(params.k1, p.s1);
    const cdouble b2 = omega_eval(params.k2, p.s2);
    const cdouble front = b1 * b2 * inv.kappa / (d1 * d2);
    B3Traces r;
    r.trB3X2inv = t * front * (inv.sigma1 + 2.0 - lam - t * t);
    r.trB3X1 = t * front * (lam - t * t);
    r.trB3 = front * (inv.sigma1 + 2.0 - 2.0 * t * t);
    return r;
}

B3Traces b3_traces_direct(const RepTriple& rep) {
    const Mat2 y1 = rep.x2 * rep.x3.inverse();
    const Mat2 y2 = rep.x3 * rep.x1.inverse();
    const Mat2 b3 = sl2_power(y1, -rep.params.k1) * sl2_power(y2, rep.params.k2 + 1);
    B3Traces r;
    r.trB3X2inv = (b3 * rep.x2.inverse()).trace();
    r.trB3X1 = (b3 * rep.x1).trace();
    r.trB3 = b3.trace();
    return r;
}

// ---------------------------------------------------------------------------
// The defining system
// ---------------------------------------------------------------------------

MultiPoly clear_meridian_trace(const MultiPoly& p) {
    if (!p.has_var("t")) return p;
    const int d = p.degree("t");
    const std::vector<MultiPoly> cs = p.coeffs_in("t");
    const MultiPoly u = MultiPoly::var("u");
    const MultiPoly num = u * u + c(1);
    MultiPoly acc;
    for (int k = 0; k <= d; ++k) {
        if (cs[static_cast<std::size_t>(k)].is_zero()) continue;
        acc += cs[static_cast<std::size_t>(k)] * num.pow(k) * u.pow(d - k);
    }
    if (acc.is_zero()) return acc;
    const int iu = acc.var_index("u");
    if (iu < 0) return acc;
    std::uint32_t minexp = std::numeric_limits<std::uint32_t>::max();
    for (const auto& [e, coeff] : acc.terms()) minexp = std::min(minexp, e[static_cast<std::size_t>(iu)]);
    if (minexp > 0) acc = divide_exact(acc, u.pow(minexp));
    return acc;
}

std::vector<MultiPoly> ap_system(const PretzelParams& params) {
    const MultiPoly u = MultiPoly::var("u"), w = MultiPoly::var("w"), t = MultiPoly::var("t");
    const MultiPoly lam = MultiPoly::var("lambda");
    const MultiPoly s1 = MultiPoly::var("s1"), s2 = MultiPoly::var("s2"),
                    s3 = MultiPoly::var("s3");
    const MultiPoly sig1 = s1 + s2 + s3;
    const MultiPoly sig2 = s1 * s2 + s2 * s3 + s3 * s1;
    const MultiPoly sig3 = s1 * s2 * s3;
    const MultiPoly delta = c(4) + sig3 + c(2) * sig2 - sig1 * sig1;

    // kappa = delta written in (t, lambda): tau = t lambda divides t^2 out of kappa.
    const MultiPoly ap3_t = t * t * (lam * lam - (sig1 + c(2)) * lam + sig2 + c(4)) - delta;
    // The peripheral equation, multiplied through by u once so the u^{-1} w
    // term is polynomial before t-clearing.
    const MultiPoly ap4_t = (w + c(1)) * t * u * (sig1 + c(2) - lam - t * t) -
                            (u * u + w) * (sig1 + c(2) - c(2) * t * t);

    return {x3_equation(params, 1), x3_equation(params, 2), x3_equation(params, 3),
            clear_meridian_trace(ap3_t), clear_meridian_trace(ap4_t)};
}

// ---------------------------------------------------------------------------
// Resultant elimination
// ---------------------------------------------------------------------------

nlohmann::json StepInfo::to_json() const {
    nlohmann::json j;
    j["variable"] = variable;
    j["pivot_degree"] = pivot_degree;
    j["pivot_terms"] = pivot_terms;
    j["partner_degrees"] = partner_degrees;
    j["contents_removed"] = contents_removed;
    j["square_free_applied"] = square_free_applied;
    j["passthrough"] = passthrough;
    j["output_degrees"] = output_degrees;
    j["output_terms"] = output_terms;
    j["notes"] = notes;
    return j;
}

StepInfo StepInfo::from_json(const nlohmann::json& j) {
    try {
        StepInfo s;
        s.variable = j.at("variable").get<std::string>();
        s.pivot_degree = j.value("pivot_degree", -1);
        s.pivot_terms = j.value("pivot_terms", std::size_t{0});
        s.partner_degrees = j.value("partner_degrees", std::vector<int>{});
        s.contents_removed = j.value("contents_removed", std::vector<std::string>{});
        s.square_free_applied = j.value("square_free_applied", 0);
        s.passthrough = j.value("passthrough", std::size_t{0});
        s.output_degrees = j.value("output_degrees", std::vector<int>{});
        s.output_terms = j.value("output_terms", std::vector<std::size_t>{});
        s.notes = j.value("notes", std::vector<std::string>{});
        return s;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("StepInfo::from_json: ") + e.what());
    }
}

namespace {

// Divides out pure powers of u and w from a stage output. Both are eigenvalue
// coordinates (of the meridian and the longitude), nonzero wherever the system
// is defined, so such a factor carries no solutions and only inflates the
// degrees of everything downstream.
MultiPoly strip_unit_monomials(MultiPoly p, StepInfo& info) {
    for (const char* name : {"u", "w"}) {
        const int idx = p.var_index(name);
        if (idx < 0) continue;
        std::uint32_t low = std::numeric_limits<std::uint32_t>::max();
        for (const auto& [e, coeff] : p.terms())
            low = std::min(low, e[static_cast<std::size_t>(idx)]);
        if (low == 0) continue;
        p = divide_exact(p, MultiPoly::var(name, low));
        std::ostringstream note;
        note << "monomial factor " << name << "^" << low << " removed (" << name
             << " is a nonzero eigenvalue coordinate)";
        info.notes.push_back(note.str());
    }
    return p;
}

} // namespace

MultiPoly eliminate_chain(const std::vector<MultiPoly>& system,
                          const std::vector<std::string>& order, std::vector<StepInfo>* steps,
                          bool divide_common_factors) {
    {
        std::set<std::string> seen;
        for (const std::string& v : order)
            if (v.empty() || !seen.insert(v).second)
                throw domain_error(
                    "eliminate_chain: the elimination order must list distinct variable names");
    }
    std::vector<MultiPoly> cur;
    cur.reserve(system.size());
    for (const MultiPoly& p : system)
        if (!p.is_zero()) cur.push_back(p);

    for (std::size_t si = 0; si < order.size(); ++si) {
        const std::string& v = order[si];
        std::vector<MultiPoly> havers, pass;
        for (MultiPoly& p : cur) (p.has_var(v) ? havers : pass).push_back(std::move(p));

        StepInfo info;
        info.variable = v;
        info.passthrough = pass.size();
        if (havers.empty()) {
            info.notes.push_back("variable already absent; stage skipped");
            cur = std::move(pass);
            if (steps) steps->push_back(std::move(info));
            continue;
        }

        // A zero resultant exposes a factor shared by the pair — a degenerate
        // component planted in the whole system. With recovery enabled the
        // factor is divided out of every member that carries it and the stage
        // restarts on the reduced system; each round lowers the pivot's
        // v-degree, so the loop terminates.
        std::vector<MultiPoly> results;
        while (true) {
            if (havers.size() == 1)
                throw elimination_error("eliminating " + v +
                                            ": only one polynomial involves it, nothing to pair",
                                        v, si);

            std::size_t piv = 0;
            for (std::size_t i = 1; i < havers.size(); ++i) {
                const int da = havers[i].degree(v), db = havers[piv].degree(v);
                if (da < db || (da == db && havers[i].term_count() < havers[piv].term_count()))
                    piv = i;
            }
            const MultiPoly& pivot = havers[piv];
            info.pivot_degree = pivot.degree(v);
            info.pivot_terms = pivot.term_count();
            info.partner_degrees.clear();
            std::vector<std::size_t> partner_idx;
            for (std::size_t i = 0; i < havers.size(); ++i)
                if (i != piv) {
                    partner_idx.push_back(i);
                    info.partner_degrees.push_back(havers[i].degree(v));
                }

            // One resultant per partner, in parallel; collected in partner
            // order so the outcome is independent of scheduling.
            std::vector<std::future<MultiPoly>> futs;
            futs.reserve(partner_idx.size());
            for (std::size_t i : partner_idx) {
                const MultiPoly& q = havers[i];
                futs.push_back(std::async(std::launch::async,
                                          [&pivot, &q, &v] { return resultant_uni(pivot, q, v); }));
            }
            results.clear();
            std::ptrdiff_t zero_at = -1;
            for (std::size_t i = 0; i < futs.size(); ++i) {
                MultiPoly r = futs[i].get();
                if (r.is_zero() && zero_at < 0) zero_at = static_cast<std::ptrdiff_t>(i);
                results.push_back(std::move(r));
            }
            if (zero_at < 0) break; // every resultant is usable

            const std::size_t zi = static_cast<std::size_t>(zero_at);
            MultiPoly g = divide_common_factors
                              ? poly_gcd(pivot, havers[partner_idx[zi]])
                              : MultiPoly::from_long(1);
            if (g.is_constant())
                throw elimination_error("eliminating " + v + ": the resultant with partner " +
                                            std::to_string(zi) +
                                            " vanished identically (common factor)",
                                        v, si);
            info.notes.push_back("common factor divided out of the system: " + g.to_text());
            std::vector<MultiPoly> reduced;
            reduced.reserve(havers.size());
            for (MultiPoly& p : havers) {
                while (std::optional<MultiPoly> q = try_divide_exact(p, g)) p = std::move(*q);
                if (p.is_constant())
                    throw elimination_error(
                        "eliminating " + v +
                            ": a member collapsed to a constant after factor division",
                        v, si);
                (p.has_var(v) ? reduced : pass).push_back(std::move(p));
            }
            havers = std::move(reduced);
            info.passthrough = pass.size();
            if (havers.empty()) {
                info.notes.push_back("the stage variable was carried entirely by the factor");
                results.clear();
                break;
            }
        }

        std::vector<MultiPoly> next = std::move(pass);
        for (std::size_t i = 0; i < results.size(); ++i) {
            MultiPoly r = std::move(results[i]);
            ContentPrimitive cp = content_primitive(r);
            info.contents_removed.push_back(to_string(cp.content));
            r = strip_unit_monomials(std::move(cp.primitive), info);
            if (r.is_constant())
                throw elimination_error("eliminating " + v + ": the resultant with partner " +
                                            std::to_string(i) +
                                            " collapsed to a constant (incompatible pair)",
                                        v, si);
            if (!probably_square_free(r)) {
                r = primitive_part(square_free_part(r));
                ++info.square_free_applied;
            }
            bool dup = false;
            for (const MultiPoly& q : next) dup = dup || (q == r);
            if (dup) {
                info.notes.push_back("duplicate output dropped");
                continue;
            }
            info.output_degrees.push_back(r.total_degree());
            info.output_terms.push_back(r.term_count());
            next.push_back(std::move(r));
        }
        cur = std::move(next);
        if (steps) steps->push_back(std::move(info));
        if (cur.empty())
            throw elimination_error("eliminating " + v + ": no polynomials remain", v, si);
    }

    MultiPoly result = std::move(cur[0]);
    if (cur.size() > 1) {
        StepInfo info;
        info.variable = "(final)";
        info.notes.push_back("multiple polynomials remained; folded by gcd");
        for (std::size_t i = 1; i < cur.size(); ++i) result = poly_gcd(result, cur[i]);
        if (steps) steps->push_back(std::move(info));
    }
    const std::string last = order.empty() ? std::string() : order.back();
    if (result.is_zero())
        throw elimination_error("elimination produced the zero polynomial", last, order.size());
    if (!probably_square_free(result)) result = square_free_part(result);
    result = content_primitive(result).primitive;
    if (result.is_constant())
        throw elimination_error("elimination collapsed to a constant", last, order.size());
    return result;
}

// ---------------------------------------------------------------------------
// The hard part
// ---------------------------------------------------------------------------

const std::vector<std::vector<std::string>>& default_elimination_orders() {
    static const std::vector<std::vector<std::string>> orders = {
        {"s1", "s2", "s3", "lambda"},
        {"s3", "s1", "s2", "lambda"},
        {"lambda", "s1", "s2", "s3"},
        {"s2", "s1", "s3", "lambda"},
    };
    return orders;
}

std::string resolve_cache_dir(const std::string& cache_dir) {
    if (!cache_dir.empty()) return cache_dir;
    if (const char* env = std::getenv("APOLY_CACHE_DIR"); env && *env) return env;
    return (std::filesystem::temp_directory_path() / "pretzelcv-apoly").string();
}

namespace {

std::string order_key(const std::vector<std::string>& order) {
    std::string s;
    for (const std::string& v : order) {
        if (!s.empty()) s += ',';
        s += v;
    }
    return s;
}

std::string cache_file_name(const PretzelParams& params, const std::vector<std::string>& order) {
    std::ostringstream key;
    key << params.k1 << '|' << params.k2 << '|' << params.k3 << '|' << order_key(order);
    std::ostringstream name;
    name << "apoly-" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(key.str())
         << ".json";
    return name.str();
}

std::optional<APolyResult> load_cached(const std::filesystem::path& file,
                                       const PretzelParams& params,
                                       const std::vector<std::string>& order) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        APolyResult res = APolyResult::from_json(j);
        if (res.knot.k1 != params.k1 || res.knot.k2 != params.k2 || res.knot.k3 != params.k3)
            return std::nullopt;
        if (res.elimination_order != order) return std::nullopt;
        res.from_cache = true;
        return res;
    } catch (...) {
        return std::nullopt; // unreadable cache entries are recomputed
    }
}

void store_cached(const std::filesystem::path& dir, const std::filesystem::path& file,
                  const APolyResult& res) {
    // Caching is best-effort: failures fall back to recomputation later.
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return;
    static std::atomic<unsigned> counter{0};
    std::ostringstream suffix;
    suffix << ".tmp-" << std::chrono::steady_clock::now().time_since_epoch().count() << '-'
           << counter.fetch_add(1);
    const std::filesystem::path tmp = file.string() + suffix.str();
    {
        std::ofstream out(tmp);
        if (!out) return;
        out << res.to_json().dump(1) << '\n';
        if (!out) {
            std::error_code ec2;
            std::filesystem::remove(tmp, ec2);
            return;
        }
    }
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
        std::error_code ec2;
        std::filesystem::remove(tmp, ec2);
    }
}

const std::vector<std::pair<std::string, MultiPoly>>& small_factor_table() {
    static const std::vector<std::pair<std::string, MultiPoly>> table = [] {
        const MultiPoly u = MultiPoly::var("u"), w = MultiPoly::var("w");
        return std::vector<std::pair<std::string, MultiPoly>>{
            {"u", u},         {"w", w},         {"u-1", u - c(1)},
            {"u+1", u + c(1)}, {"w-1", w - c(1)}, {"w+1", w + c(1)},
        };
    }();
    return table;
}

std::vector<std::string> small_factor_scan(const MultiPoly& p) {
    std::vector<std::string> out;
    for (const auto& [name, f] : small_factor_table())
        if (try_divide_exact(p, f)) out.push_back(name);
    return out;
}

MultiPoly small_factor_poly(const std::string& name) {
    for (const auto& [fname, f] : small_factor_table())
        if (fname == name) return f;
    throw domain_error("verify_apoly: unknown small factor name " + name);
}

// Work allowance for one elimination order, in the term-product units charged
// by polynomial multiplication (see BudgetScope). Sized at several times the
// cost of the most expensive order that actually finishes inside the envelope,
// so productive orders always complete while a blowing-up order is abandoned
// after a bounded amount of work. An explicitly requested order gets a much
// larger allowance: the caller asked for that one specifically, so it deserves
// a real try even if it is expensive.
constexpr std::uint64_t kOrderWorkBudget = 40'000'000;
constexpr std::uint64_t kExplicitOrderWorkBudget = 8 * kOrderWorkBudget;

} // namespace

nlohmann::json APolyResult::to_json() const {
    nlohmann::json j;
    j["knot"] = {{"k1", knot.k1}, {"k2", knot.k2}, {"k3", knot.k3}, {"name", knot.name()}};
    j["order"] = elimination_order;
    j["poly"] = poly.to_json();
    j["poly_text"] = poly.to_text();
    nlohmann::json steps_j = nlohmann::json::array();
    for (const StepInfo& s : steps) steps_j.push_back(s.to_json());
    j["steps"] = std::move(steps_j);
    j["small_factors"] = small_factors;
    return j;
}

APolyResult APolyResult::from_json(const nlohmann::json& j) {
    try {
        APolyResult res;
        const nlohmann::json& k = j.at("knot");
        res.knot =
            PretzelParams(k.at("k1").get<long>(), k.at("k2").get<long>(), k.at("k3").get<long>());
        res.elimination_order = j.at("order").get<std::vector<std::string>>();
        res.poly = MultiPoly::from_json(j.at("poly"));
        for (const nlohmann::json& s : j.at("steps")) res.steps.push_back(StepInfo::from_json(s));
        res.small_factors = j.value("small_factors", std::vector<std::string>{});
        return res;
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("APolyResult::from_json: ") + e.what());
    }
}

APolyResult hard_apoly(const PretzelParams& params, std::optional<std::vector<std::string>> order,
                       const std::string& cache_dir) {
    if (params.k1 > 2 || params.k2 > 2 || params.k3 > 2) {
        std::ostringstream os;
        os << "hard_apoly: " << params.name()
           << " lies outside the supported size envelope (k1, k2 <= 2 and k3 <= 2); the "
              "resultant degree estimate is prohibitive";
        throw domain_error(os.str());
    }
    std::vector<std::vector<std::string>> orders;
    if (order) {
        std::vector<std::string> sorted = *order;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != std::vector<std::string>{"lambda", "s1", "s2", "s3"})
            throw domain_error(
                "hard_apoly: the elimination order must be a permutation of {s1, s2, s3, lambda}");
        orders.push_back(*order);
    } else {
        orders = default_elimination_orders();
    }

    const std::filesystem::path dir = resolve_cache_dir(cache_dir);
    const std::uint64_t budget = order ? kExplicitOrderWorkBudget : kOrderWorkBudget;
    std::vector<std::string> failures;
    for (const std::vector<std::string>& ord : orders) {
        const std::filesystem::path file = dir / cache_file_name(params, ord);
        if (std::optional<APolyResult> cached = load_cached(file, params, ord)) return *cached;
        try {
            // Zero resultants (a pair sharing a degenerate component) are
            // recovered in-stage by dividing out the common factor; the work
            // budget abandons an order whose intermediates blow up, so the
            // tour reaches a cheap order in bounded, machine-independent time.
            std::vector<StepInfo> steps;
            MultiPoly poly;
            {
                BudgetScope scope(budget);
                poly = eliminate_chain(ap_system(params), ord, &steps, true);
            }
            for (const std::string& v : poly.vars())
                if (v != "u" && v != "w")
                    throw elimination_error("final polynomial still involves " + v, v, ord.size());
            for (const auto& [e, q] : poly.terms())
                if (q.get_den() != 1)
                    throw domain_error("hard_apoly: a non-integer coefficient survived");
            APolyResult res;
            res.poly = std::move(poly);
            res.elimination_order = ord;
            res.steps = std::move(steps);
            res.knot = params;
            res.small_factors = small_factor_scan(res.poly);
            res.from_cache = false;
            store_cached(dir, file, res);
            return res;
        } catch (const domain_error& e) { // includes budget_exceeded, elimination_error
            failures.push_back("[" + order_key(ord) + "] " + e.what());
        }
    }
    std::string msg = "hard_apoly: every elimination order failed for " + params.name() + ":";
    for (const std::string& f : failures) msg += "\n  " + f;
    throw domain_error(msg);
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

double scaled_point_residual(const MultiPoly& p, const std::map<std::string, cdouble>& point) {
    if (p.is_zero()) return 0.0;
    const std::vector<std::string>& vars = p.vars();
    std::vector<double> logmag(vars.size()), argv(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto it = point.find(vars[i]);
        if (it == point.end())
            throw domain_error("scaled_point_residual: the point does not cover variable " +
                               vars[i]);
        logmag[i] = std::log2(std::abs(it->second));
        argv[i] = std::arg(it->second);
    }
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> lterm;
    lterm.reserve(p.term_count());
    double top = ninf;
    for (const auto& [e, coeff] : p.terms()) {
        const ScaledDouble sd = to_scaled_double(coeff);
        double lg = std::log2(std::abs(sd.mantissa)) + static_cast<double>(sd.exp2);
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (e[i] > 0) lg += static_cast<double>(e[i]) * logmag[i];
        lterm.push_back(lg);
        top = std::max(top, lg);
    }
    if (!(top > ninf)) return 0.0; // every term is exactly zero at the point
    cdouble acc = 0.0;
    std::size_t idx = 0;
    for (const auto& [e, coeff] : p.terms()) {
        double phase = 0.0;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (e[i] > 0) phase += static_cast<double>(e[i]) * argv[i];
        const double mag = std::exp2(lterm[idx++] - top);
        const double sgn = coeff < 0 ? -1.0 : 1.0;
        acc += sgn * mag * std::polar(1.0, phase);
    }
    return std::abs(acc);
}

double scaled_residual(const MultiPoly& p, cdouble u, cdouble w) {
    return scaled_point_residual(p, {{"u", u}, {"w", w}});
}

VerificationReport verify_apoly(const APolyResult& result,
                                const std::vector<PeripheralPair>& samples, double tol) {
    VerificationReport rep;
    for (const PeripheralPair& s : samples) {
        SampleResidual r;
        r.pair = s;
        r.scaled_residual = scaled_residual(result.poly, s.u, s.w);
        r.pass = r.scaled_residual < tol;
        rep.max_scaled_residual = std::max(rep.max_scaled_residual, r.scaled_residual);
        (r.pass ? rep.n_pass : rep.n_fail)++;
        rep.samples.push_back(r);
    }
    if (!samples.empty()) {
        for (const std::string& name : result.small_factors) {
            const MultiPoly f = small_factor_poly(name);
            bool supported = false;
            for (const PeripheralPair& s : samples)
                supported = supported || scaled_residual(f, s.u, s.w) < tol;
            if (!supported) rep.unsupported_factors.push_back(name);
        }
    }
    return rep;
}

} // namespace pretzel
