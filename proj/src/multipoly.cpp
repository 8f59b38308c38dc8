#include "pretzel/multipoly.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>
#include <utility>

namespace pretzel {

namespace {

const std::vector<std::string>& canonical_names() {
    static const std::vector<std::string> names = {"u", "w", "t", "s1", "s2", "s3", "lambda", "tau"};
    return names;
}

const MultiPoly& one_poly() {
    static const MultiPoly one = MultiPoly::from_long(1);
    return one;
}

// Work budget shared by every thread of the process. Disarmed (limit 0) the
// charge is a single relaxed load; armed, each multiplication adds its term
// product to the counter and throws once the limit is passed. The total work
// a computation performs is a fixed function of its inputs, so whether it
// trips the budget does not depend on thread interleaving.
std::atomic<std::uint64_t> g_budget_limit{0};
std::atomic<std::uint64_t> g_budget_used{0};

void budget_charge(std::uint64_t amount) {
    const std::uint64_t limit = g_budget_limit.load(std::memory_order_relaxed);
    if (limit == 0) return;
    const std::uint64_t used = g_budget_used.fetch_add(amount, std::memory_order_relaxed) + amount;
    if (used > limit)
        throw budget_exceeded("the arithmetic work budget for this attempt is exhausted");
}

} // namespace

BudgetScope::BudgetScope(std::uint64_t limit) {
    if (limit == 0) throw domain_error("BudgetScope: the limit must be positive");
    std::uint64_t expected = 0;
    g_budget_used.store(0, std::memory_order_relaxed);
    if (!g_budget_limit.compare_exchange_strong(expected, limit, std::memory_order_relaxed))
        throw domain_error("BudgetScope: a budget is already armed (scopes do not nest)");
}

BudgetScope::~BudgetScope() {
    g_budget_limit.store(0, std::memory_order_relaxed);
    g_budget_used.store(0, std::memory_order_relaxed);
}

std::uint64_t BudgetScope::used() { return g_budget_used.load(std::memory_order_relaxed); }

int canonical_var_rank(const std::string& name) {
    const auto& names = canonical_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

bool var_precedes(const std::string& a, const std::string& b) {
    int ra = canonical_var_rank(a), rb = canonical_var_rank(b);
    if (ra >= 0 && rb >= 0) return ra < rb;
    if (ra >= 0) return true;
    if (rb >= 0) return false;
    return a < b;
}

bool GradedLexDesc::operator()(const Exponents& a, const Exponents& b) const {
    std::uint64_t da = 0, db = 0;
    for (auto e : a) da += e;
    for (auto e : b) db += e;
    if (da != db) return da > db;
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t ea = i < a.size() ? a[i] : 0;
        std::uint32_t eb = i < b.size() ? b[i] : 0;
        if (ea != eb) return ea > eb;
    }
    return false;
}

void MultiPoly::prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second == 0)
            it = terms_.erase(it);
        else
            ++it;
    }
    if (terms_.empty()) {
        vars_.clear();
        return;
    }
    std::vector<bool> used(vars_.size(), false);
    for (const auto& [e, c] : terms_)
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) used[i] = true;
    if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) return;

    std::vector<std::string> nv;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (used[i]) {
            nv.push_back(vars_[i]);
            keep.push_back(i);
        }
    TermMap nt;
    for (const auto& [e, c] : terms_) {
        Exponents ne(keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j) ne[j] = e[keep[j]];
        nt.emplace(std::move(ne), c);
    }
    vars_ = std::move(nv);
    terms_ = std::move(nt);
}

MultiPoly MultiPoly::constant(const Rational& c) {
    // mpq_class arithmetic preserves canonical form but raw construction
    // does not; normalize at the entry point.
    Rational cc = c;
    cc.canonicalize();
    MultiPoly p;
    if (cc != 0) p.terms_.emplace(Exponents{}, std::move(cc));
    return p;
}

MultiPoly MultiPoly::from_long(long v) { return constant(Rational(v)); }

MultiPoly MultiPoly::var(const std::string& name, std::uint32_t power) {
    if (power == 0) return from_long(1);
    MultiPoly p;
    p.vars_ = {name};
    p.terms_.emplace(Exponents{power}, Rational(1));
    return p;
}

MultiPoly MultiPoly::from_terms(std::vector<std::string> vars,
                                std::vector<std::pair<Exponents, Rational>> terms) {
    // Deduplicate / order the variable list, remap exponent tuples, merge
    // duplicate monomials. Accepts arbitrary input order.
    std::vector<std::size_t> perm(vars.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return var_precedes(vars[a], vars[b]); });
    for (std::size_t i = 1; i < perm.size(); ++i)
        if (vars[perm[i]] == vars[perm[i - 1]])
            throw std::invalid_argument("MultiPoly: duplicate variable " + vars[perm[i]]);

    MultiPoly p;
    p.vars_.reserve(vars.size());
    for (std::size_t i : perm) p.vars_.push_back(vars[i]);
    for (auto& [e, c] : terms) {
        if (e.size() != vars.size())
            throw std::invalid_argument("MultiPoly: exponent tuple length mismatch");
        c.canonicalize();
        Exponents ne(perm.size());
        for (std::size_t j = 0; j < perm.size(); ++j) ne[j] = e[perm[j]];
        auto [it, fresh] = p.terms_.emplace(std::move(ne), c);
        if (!fresh) it->second += c;
    }
    p.prune();
    return p;
}

Rational MultiPoly::constant_value() const {
    if (is_zero()) return Rational(0);
    if (!is_constant()) throw domain_error("constant_value: polynomial is not constant");
    return terms_.begin()->second;
}

bool MultiPoly::has_var(const std::string& v) const { return var_index(v) >= 0; }

int MultiPoly::var_index(const std::string& v) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == v) return static_cast<int>(i);
    return -1;
}

int MultiPoly::degree(const std::string& v) const {
    if (is_zero()) return -1;
    int idx = var_index(v);
    if (idx < 0) return 0;
    std::uint32_t d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[idx]);
    return static_cast<int>(d);
}

int MultiPoly::total_degree() const {
    if (is_zero()) return -1;
    // graded order: the first key has maximal total degree
    const Exponents& e = terms_.begin()->first;
    std::uint64_t d = 0;
    for (auto x : e) d += x;
    return static_cast<int>(d);
}

const Rational& MultiPoly::leading_coeff() const {
    if (is_zero()) throw domain_error("leading_coeff: zero polynomial");
    return terms_.begin()->second;
}

namespace {

struct Merged {
    std::vector<std::string> vars;
    std::vector<std::size_t> map_a, map_b;
};

Merged merge_vars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    Merged m;
    m.vars.reserve(a.size() + b.size());
    m.map_a.resize(a.size());
    m.map_b.resize(b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && var_precedes(a[i], b[j]))) {
            m.map_a[i] = m.vars.size();
            m.vars.push_back(a[i]);
            ++i;
        } else if (i == a.size() || var_precedes(b[j], a[i])) {
            m.map_b[j] = m.vars.size();
            m.vars.push_back(b[j]);
            ++j;
        } else {
            m.map_a[i] = m.vars.size();
            m.map_b[j] = m.vars.size();
            m.vars.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    return m;
}

Exponents remap_exps(const Exponents& e, const std::vector<std::size_t>& map, std::size_t n) {
    Exponents r(n, 0);
    for (std::size_t i = 0; i < e.size(); ++i) r[map[i]] = e[i];
    return r;
}

} // namespace

MultiPoly MultiPoly::operator-() const {
    MultiPoly p = *this;
    for (auto& [e, c] : p.terms_) c = -c;
    return p;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) {
        *this = o;
        return *this;
    }
    Merged m = merge_vars(vars_, o.vars_);
    TermMap nt;
    for (const auto& [e, c] : terms_) nt.emplace(remap_exps(e, m.map_a, m.vars.size()), c);
    for (const auto& [e, c] : o.terms_) {
        Exponents ne = remap_exps(e, m.map_b, m.vars.size());
        auto [it, fresh] = nt.emplace(std::move(ne), c);
        if (!fresh) it->second += c;
    }
    vars_ = std::move(m.vars);
    terms_ = std::move(nt);
    prune();
    return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) { return *this += -o; }

MultiPoly& MultiPoly::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
        vars_.clear();
        return *this;
    }
    for (auto& [e, v] : terms_) v *= c;
    return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    if (a.is_zero() || b.is_zero()) return MultiPoly();
    budget_charge(static_cast<std::uint64_t>(a.terms_.size()) * b.terms_.size());
    Merged m = merge_vars(a.vars_, b.vars_);
    std::vector<std::pair<Exponents, Rational>> ta, tb;
    ta.reserve(a.terms_.size());
    tb.reserve(b.terms_.size());
    for (const auto& [e, c] : a.terms_) ta.emplace_back(remap_exps(e, m.map_a, m.vars.size()), c);
    for (const auto& [e, c] : b.terms_) tb.emplace_back(remap_exps(e, m.map_b, m.vars.size()), c);

    MultiPoly r;
    r.vars_ = std::move(m.vars);
    Rational prod;
    Exponents sum(r.vars_.size());
    for (const auto& [ea, ca] : ta)
        for (const auto& [eb, cb] : tb) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ea[i] + eb[i];
            prod = ca * cb;
            auto [it, fresh] = r.terms_.emplace(sum, prod);
            if (!fresh) it->second += prod;
        }
    r.prune();
    return r;
}

bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
}

MultiPoly MultiPoly::pow(long k) const {
    if (k < 0) throw domain_error("pow: negative exponent");
    MultiPoly result = from_long(1);
    MultiPoly base = *this;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

std::vector<MultiPoly> MultiPoly::coeffs_in(const std::string& v) const {
    int idx = var_index(v);
    if (idx < 0) return {*this};
    std::size_t d = static_cast<std::size_t>(degree(v));
    std::vector<MultiPoly> cs(d + 1);
    std::vector<std::string> rest_vars;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (static_cast<int>(i) != idx) rest_vars.push_back(vars_[i]);
    for (auto& c : cs) c.vars_ = rest_vars;
    for (const auto& [e, c] : terms_) {
        Exponents ne;
        ne.reserve(e.size() - 1);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (static_cast<int>(i) != idx) ne.push_back(e[i]);
        cs[e[static_cast<std::size_t>(idx)]].terms_.emplace(std::move(ne), c);
    }
    for (auto& c : cs) c.prune();
    return cs;
}

MultiPoly MultiPoly::coeff_of(const std::string& v, std::uint32_t power) const {
    int idx = var_index(v);
    if (idx < 0) return power == 0 ? *this : MultiPoly();
    std::vector<std::string> rest_vars;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (static_cast<int>(i) != idx) rest_vars.push_back(vars_[i]);
    MultiPoly c;
    c.vars_ = rest_vars;
    for (const auto& [e, coef] : terms_) {
        if (e[static_cast<std::size_t>(idx)] != power) continue;
        Exponents ne;
        ne.reserve(e.size() - 1);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (static_cast<int>(i) != idx) ne.push_back(e[i]);
        c.terms_.emplace(std::move(ne), coef);
    }
    c.prune();
    return c;
}

MultiPoly MultiPoly::from_coeffs(const std::vector<MultiPoly>& cs, const std::string& v) {
    MultiPoly r;
    for (std::size_t k = 0; k < cs.size(); ++k)
        if (!cs[k].is_zero()) r += cs[k] * var(v, static_cast<std::uint32_t>(k));
    return r;
}

MultiPoly MultiPoly::substitute(const std::string& v, const MultiPoly& value) const {
    if (!has_var(v)) return *this;
    auto cs = coeffs_in(v);
    MultiPoly acc = cs.back();
    for (std::size_t k = cs.size() - 1; k-- > 0;) acc = acc * value + cs[k];
    return acc;
}

MultiPoly MultiPoly::derivative(const std::string& v) const {
    int idx = var_index(v);
    if (idx < 0) return MultiPoly();
    MultiPoly r;
    r.vars_ = vars_;
    for (const auto& [e, c] : terms_) {
        std::uint32_t k = e[static_cast<std::size_t>(idx)];
        if (k == 0) continue;
        Exponents ne = e;
        ne[static_cast<std::size_t>(idx)] = k - 1;
        r.terms_.emplace(std::move(ne), c * Rational(static_cast<long>(k)));
    }
    r.prune();
    return r;
}

std::complex<double> MultiPoly::evaluate(
    const std::map<std::string, std::complex<double>>& point) const {
    if (is_zero()) return {0.0, 0.0};
    if (is_constant()) return {to_double(constant_value()), 0.0};
    const std::string& v = vars_.front();
    auto it = point.find(v);
    if (it == point.end()) throw std::invalid_argument("evaluate: no value for variable " + v);
    auto cs = coeffs_in(v);
    std::complex<double> z = it->second;
    std::complex<double> acc = cs.back().evaluate(point);
    for (std::size_t k = cs.size() - 1; k-- > 0;) acc = acc * z + cs[k].evaluate(point);
    return acc;
}

BigInt MultiPoly::evaluate_int(const std::map<std::string, BigInt>& point) const {
    // power tables per variable
    std::vector<std::vector<BigInt>> pows(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = point.find(vars_[i]);
        if (it == point.end())
            throw std::invalid_argument("evaluate_int: no value for variable " + vars_[i]);
        std::uint32_t maxe = 0;
        for (const auto& [e, c] : terms_) maxe = std::max(maxe, e[i]);
        pows[i].resize(maxe + 1);
        pows[i][0] = 1;
        for (std::uint32_t k = 1; k <= maxe; ++k) pows[i][k] = pows[i][k - 1] * it->second;
    }
    BigInt acc = 0;
    for (const auto& [e, c] : terms_) {
        if (c.get_den() != 1)
            throw domain_error("evaluate_int: non-integer coefficient");
        BigInt term = c.get_num();
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) term *= pows[i][e[i]];
        acc += term;
    }
    return acc;
}

std::string MultiPoly::to_text() const {
    if (is_zero()) return "0";
    BigInt L = 1;
    for (const auto& [e, c] : terms_) L = lcm(L, BigInt(c.get_den()));
    std::ostringstream out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        Rational scaled = c * Rational(L);
        BigInt n = scaled.get_num();
        bool neg = n < 0;
        BigInt an = abs(n);
        std::string mono;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += vars_[i];
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        std::string body;
        if (mono.empty())
            body = an.get_str();
        else if (an == 1)
            body = mono;
        else
            body = an.get_str() + "*" + mono;
        if (first) {
            out << (neg ? "-" : "") << body;
            first = false;
        } else {
            out << (neg ? " - " : " + ") << body;
        }
    }
    return out.str();
}

nlohmann::json MultiPoly::to_json() const {
    nlohmann::json j;
    j["vars"] = vars_;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [e, c] : terms_) {
        nlohmann::json t;
        t["exp"] = e;
        t["num"] = c.get_num().get_str();
        t["den"] = c.get_den().get_str();
        terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    return j;
}

MultiPoly MultiPoly::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vars") || !j.contains("terms"))
        throw std::invalid_argument("MultiPoly JSON: expected object with vars/terms");
    const auto& jv = j.at("vars");
    const auto& jt = j.at("terms");
    if (!jv.is_array() || !jt.is_array())
        throw std::invalid_argument("MultiPoly JSON: vars/terms must be arrays");
    std::vector<std::string> vars;
    for (const auto& v : jv) {
        if (!v.is_string()) throw std::invalid_argument("MultiPoly JSON: variable names must be strings");
        vars.push_back(v.get<std::string>());
    }
    std::vector<std::pair<Exponents, Rational>> terms;
    for (const auto& t : jt) {
        if (!t.is_object() || !t.contains("exp") || !t.contains("num") || !t.contains("den"))
            throw std::invalid_argument("MultiPoly JSON: term needs exp/num/den");
        Exponents e;
        for (const auto& x : t.at("exp")) {
            if (!x.is_number_unsigned() && !x.is_number_integer())
                throw std::invalid_argument("MultiPoly JSON: exponents must be integers");
            long v = x.get<long>();
            if (v < 0) throw std::invalid_argument("MultiPoly JSON: negative exponent");
            e.push_back(static_cast<std::uint32_t>(v));
        }
        BigInt num, den;
        try {
            num = BigInt(t.at("num").get<std::string>());
            den = BigInt(t.at("den").get<std::string>());
        } catch (const std::exception&) {
            throw std::invalid_argument("MultiPoly JSON: num/den must be decimal integer strings");
        }
        if (den == 0) throw std::invalid_argument("MultiPoly JSON: zero denominator");
        Rational c(num, den);
        c.canonicalize();
        terms.emplace_back(std::move(e), std::move(c));
    }
    return from_terms(std::move(vars), std::move(terms));
}

ContentPrimitive content_primitive(const MultiPoly& p) {
    if (p.is_zero()) return {Rational(0), MultiPoly()};
    BigInt g = 0, l = 1;
    for (const auto& [e, c] : p.terms()) {
        g = gcd(g, BigInt(c.get_num()));
        l = lcm(l, BigInt(c.get_den()));
    }
    Rational content(g, l);
    content.canonicalize();
    if (p.leading_coeff() < 0) content = -content;
    MultiPoly prim = p * (Rational(1) / content);
    return {content, prim};
}

MultiPoly primitive_part(const MultiPoly& p) {
    if (p.is_zero()) return p;
    return content_primitive(p).primitive;
}

std::optional<MultiPoly> try_divide_exact(const MultiPoly& n, const MultiPoly& d) {
    if (d.is_zero()) throw domain_error("divide_exact: division by zero polynomial");
    if (n.is_zero()) return MultiPoly();
    if (d.is_constant()) return n * (Rational(1) / d.constant_value());

    Merged m = merge_vars(n.vars(), d.vars());
    MultiPoly::TermMap rem;
    for (const auto& [e, c] : n.terms()) rem.emplace(remap_exps(e, m.map_a, m.vars.size()), c);
    std::vector<std::pair<Exponents, Rational>> dterms;
    dterms.reserve(d.terms().size());
    for (const auto& [e, c] : d.terms()) dterms.emplace_back(remap_exps(e, m.map_b, m.vars.size()), c);
    const Exponents& de = dterms.front().first;
    const Rational& dc = dterms.front().second;

    std::vector<std::pair<Exponents, Rational>> quot;
    while (!rem.empty()) {
        const Exponents& le = rem.begin()->first;
        const Rational& lc = rem.begin()->second;
        Exponents qe(le.size());
        for (std::size_t i = 0; i < le.size(); ++i) {
            if (le[i] < de[i]) return std::nullopt;
            qe[i] = le[i] - de[i];
        }
        Rational qc = lc / dc;
        // subtract (qc * x^qe) * d from the remainder
        for (const auto& [te, tc] : dterms) {
            Exponents se(qe.size());
            for (std::size_t i = 0; i < se.size(); ++i) se[i] = qe[i] + te[i];
            Rational sub = qc * tc;
            auto it = rem.find(se);
            if (it == rem.end()) {
                rem.emplace(std::move(se), -sub);
            } else {
                it->second -= sub;
                if (it->second == 0) rem.erase(it);
            }
        }
        quot.emplace_back(std::move(qe), std::move(qc));
    }
    return MultiPoly::from_terms(m.vars, std::move(quot));
}

MultiPoly divide_exact(const MultiPoly& n, const MultiPoly& d) {
    auto q = try_divide_exact(n, d);
    if (!q) throw domain_error("divide_exact: inexact division");
    return *q;
}

MonomialSplit strip_monomial(const MultiPoly& p) {
    if (p.is_zero()) return {{}, p};
    Exponents mins(p.vars().size(), std::numeric_limits<std::uint32_t>::max());
    for (const auto& [e, c] : p.terms())
        for (std::size_t i = 0; i < e.size(); ++i) mins[i] = std::min(mins[i], e[i]);
    bool trivial = std::all_of(mins.begin(), mins.end(), [](std::uint32_t x) { return x == 0; });
    if (trivial) return {mins, p};
    std::vector<std::pair<Exponents, Rational>> terms;
    terms.reserve(p.term_count());
    for (const auto& [e, c] : p.terms()) {
        Exponents ne(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) ne[i] = e[i] - mins[i];
        terms.emplace_back(std::move(ne), c);
    }
    return {mins, MultiPoly::from_terms(p.vars(), std::move(terms))};
}

namespace {

MultiPoly leading_coeff_in(const MultiPoly& p, const std::string& v) {
    return p.coeff_of(v, static_cast<std::uint32_t>(p.degree(v)));
}

// gcd of the coefficient polynomials of p viewed in v (the v-content),
// integer-primitive with positive leading coefficient. Returns 1 quickly
// when the chain collapses to a constant.
MultiPoly content_wrt(const MultiPoly& p, const std::string& v) {
    MultiPoly g;
    for (const auto& c : p.coeffs_in(v)) {
        if (c.is_zero()) continue;
        g = poly_gcd(g, c);
        if (!g.is_zero() && g.is_constant()) return one_poly();
    }
    return g.is_zero() ? one_poly() : g;
}

// Canonical pseudo-remainder: lc(B)^(deg A - deg B + 1) * A reduced mod B.
MultiPoly prem(const MultiPoly& A, const MultiPoly& B, const std::string& v) {
    int dB = B.degree(v);
    MultiPoly lcB = leading_coeff_in(B, v);
    MultiPoly R = A;
    long e = A.degree(v) - dB + 1;
    while (!R.is_zero() && R.degree(v) >= dB) {
        int dR = R.degree(v);
        MultiPoly T = leading_coeff_in(R, v) * MultiPoly::var(v, static_cast<std::uint32_t>(dR - dB)) * B;
        R = lcB * R - T;
        --e;
    }
    if (e > 0 && !R.is_zero()) R = lcB.pow(e) * R;
    return R;
}

MultiPoly gcd_primitive(const MultiPoly& A, const MultiPoly& B);

// Subresultant polynomial remainder sequence on v-primitive inputs; the
// beta divisors keep intermediate coefficient growth polynomial while every
// division stays exact.
MultiPoly gcd_prs(MultiPoly A, MultiPoly B, const std::string& v) {
    if (A.degree(v) < B.degree(v)) std::swap(A, B);
    MultiPoly g = one_poly(), h = one_poly();
    while (true) {
        if (B.degree(v) == 0) return one_poly();
        long delta = A.degree(v) - B.degree(v);
        MultiPoly R = prem(A, B, v);
        if (R.is_zero()) {
            MultiPoly c = content_wrt(B, v);
            MultiPoly q = c.is_constant() ? B : divide_exact(B, c);
            return primitive_part(q);
        }
        MultiPoly next = divide_exact(R, g * h.pow(delta));
        A = std::move(B);
        B = std::move(next);
        g = leading_coeff_in(A, v);
        if (delta == 1)
            h = g;
        else if (delta > 1)
            h = divide_exact(g.pow(delta), h.pow(delta - 1));
    }
}

MultiPoly gcd_primitive(const MultiPoly& A, const MultiPoly& B) {
    // inputs integer-primitive, nonzero, positive leading coefficient
    if (A == B) return A;
    if (A.is_constant() || B.is_constant()) return one_poly();

    MonomialSplit sa = strip_monomial(A);
    MonomialSplit sb = strip_monomial(B);
    MultiPoly mono = one_poly();
    for (std::size_t i = 0; i < A.vars().size(); ++i) {
        if (sa.exponents[i] == 0) continue;
        int j = B.var_index(A.vars()[i]);
        if (j >= 0 && sb.exponents[static_cast<std::size_t>(j)] > 0)
            mono = mono * MultiPoly::var(A.vars()[i],
                                         std::min(sa.exponents[i],
                                                  sb.exponents[static_cast<std::size_t>(j)]));
    }
    const MultiPoly& Ar = sa.rest;
    const MultiPoly& Br = sb.rest;
    // Choose the shared variable of least combined degree: the PRS length and
    // the size of its pseudo-remainders grow with the main-variable degree,
    // so a low-degree main variable is dramatically cheaper on skewed inputs.
    std::string vmain;
    long best = std::numeric_limits<long>::max();
    for (const auto& v : Ar.vars()) {
        if (!Br.has_var(v)) continue;
        long d = static_cast<long>(Ar.degree(v)) + Br.degree(v);
        if (d < best) {
            best = d;
            vmain = v;
        }
    }
    if (vmain.empty()) return mono;

    MultiPoly cA = content_wrt(Ar, vmain);
    MultiPoly cB = content_wrt(Br, vmain);
    MultiPoly ppA = cA.is_constant() ? Ar : divide_exact(Ar, cA);
    MultiPoly ppB = cB.is_constant() ? Br : divide_exact(Br, cB);
    MultiPoly cont_gcd =
        (cA.is_constant() || cB.is_constant()) ? one_poly() : gcd_primitive(cA, cB);
    MultiPoly pp_gcd = gcd_prs(std::move(ppA), std::move(ppB), vmain);
    return primitive_part(mono * cont_gcd * pp_gcd);
}

} // namespace

MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b) {
    if (a.is_zero()) return primitive_part(b);
    if (b.is_zero()) return primitive_part(a);
    return gcd_primitive(primitive_part(a), primitive_part(b));
}

MultiPoly resultant_uni(const MultiPoly& p, const MultiPoly& q, const std::string& v) {
    if (p.is_zero() || q.is_zero()) throw domain_error("resultant_uni: zero polynomial operand");
    int m = p.degree(v), n = q.degree(v);
    if (m == 0 && n == 0) return MultiPoly::from_long(1);
    if (m == 0) return p.pow(n);
    if (n == 0) return q.pow(m);

    auto pc = p.coeffs_in(v);
    auto qc = q.coeffs_in(v);
    int N = m + n;
    std::vector<std::vector<MultiPoly>> M(static_cast<std::size_t>(N),
                                          std::vector<MultiPoly>(static_cast<std::size_t>(N)));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= m; ++k) M[i][i + k] = pc[static_cast<std::size_t>(m - k)];
    for (int i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k) M[n + i][i + k] = qc[static_cast<std::size_t>(n - k)];

    // Bareiss fraction-free elimination; every division is exact because the
    // working entries are minors of the (row-permuted) Sylvester matrix.
    MultiPoly prev = MultiPoly::from_long(1);
    bool prev_is_one = true;
    int sign = 1;
    for (int k = 0; k + 1 < N; ++k) {
        if (M[k][k].is_zero()) {
            int r = -1;
            for (int i = k + 1; i < N; ++i)
                if (!M[i][k].is_zero()) {
                    r = i;
                    break;
                }
            if (r < 0) return MultiPoly(); // singular: resultant is zero
            std::swap(M[k], M[r]);
            sign = -sign;
        }
        for (int i = k + 1; i < N; ++i) {
            for (int j = k + 1; j < N; ++j) {
                MultiPoly num = M[k][k] * M[i][j] - M[i][k] * M[k][j];
                M[i][j] = prev_is_one ? std::move(num) : divide_exact(num, prev);
            }
            M[i][k] = MultiPoly();
        }
        prev = M[k][k];
        prev_is_one = false;
    }
    MultiPoly det = M[static_cast<std::size_t>(N - 1)][static_cast<std::size_t>(N - 1)];
    return sign < 0 ? -det : det;
}

MultiPoly square_free(const MultiPoly& p, const std::string& v) {
    if (p.is_zero()) throw domain_error("square_free: zero polynomial");
    if (p.degree(v) == 0) return primitive_part(p);
    MultiPoly g = poly_gcd(p, p.derivative(v));
    if (g.is_constant()) return primitive_part(p);
    return primitive_part(divide_exact(p, g));
}

bool probably_square_free(const MultiPoly& p) {
    if (p.is_zero()) throw domain_error("probably_square_free: zero polynomial");
    std::vector<std::string> present;
    for (const auto& v : p.vars())
        if (p.has_var(v)) present.push_back(v);
    if (present.empty()) return true;

    for (const std::string& v : present) {
        bool settled = false;
        // Two fixed specializations; a degree drop means the point was
        // unlucky (leading coefficient vanished), so try the other one.
        for (long base : {3L, 7L}) {
            MultiPoly q = p;
            long val = base;
            for (const std::string& u : present) {
                if (u == v) continue;
                q = q.substitute(u, MultiPoly::from_long(val));
                val += 2;
            }
            if (q.is_zero() || q.degree(v) != p.degree(v)) continue;
            if (!poly_gcd(q, q.derivative(v)).is_constant()) return false;
            settled = true;
            break;
        }
        if (!settled) return false; // both points degenerate: let the exact path decide
    }
    return true;
}

MultiPoly square_free_part(const MultiPoly& p) {
    if (p.is_zero()) throw domain_error("square_free_part: zero polynomial");
    MultiPoly q = primitive_part(p);
    if (q.is_constant()) return MultiPoly::from_long(1);
    MonomialSplit s = strip_monomial(q);
    MultiPoly mono = one_poly();
    for (std::size_t i = 0; i < q.vars().size(); ++i)
        if (s.exponents[i] > 0) mono = mono * MultiPoly::var(q.vars()[i], 1);
    const MultiPoly& r = s.rest;
    if (r.is_constant()) return mono;

    // r has no monomial factor, so the v-primitive part below carries every
    // factor involving v and the v-content carries the rest; recurse on it.
    // Take the variable of least degree (canonical form keeps only variables
    // that actually occur): the gcd below runs a PRS in v, whose cost grows
    // steeply with the v-degree.
    std::string v = r.vars().front();
    for (const auto& cand : r.vars())
        if (r.degree(cand) < r.degree(v)) v = cand;
    MultiPoly c = content_wrt(r, v);
    MultiPoly pp = c.is_constant() ? r : divide_exact(r, c);
    MultiPoly g = poly_gcd(pp, pp.derivative(v));
    MultiPoly sf = g.is_constant() ? pp : divide_exact(pp, g);
    MultiPoly rest = c.is_constant() ? one_poly() : square_free_part(c);
    return primitive_part(mono * rest * sf);
}

} // namespace pretzel
