#include "covshap/ordering.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "covshap/common.hpp"
#include "covshap/rng.hpp"

namespace covshap {

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream ss;
        ss << "ordering parse error at position " << pos << ": " << msg;
        throw ValidationError(ss.str());
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    std::string symbol() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected a feature symbol");
        return text.substr(start, pos - start);
    }
};

}  // namespace

CausalOrdering::CausalOrdering(std::vector<ChainComponent> components,
                               std::vector<std::string> universe)
    : components_(std::move(components)), universe_(std::move(universe)) {
    validate();
}

void CausalOrdering::validate() const {
    if (components_.empty()) throw ValidationError("ordering must have at least one component");
    std::set<std::string> seen;
    for (const auto& c : components_) {
        if (c.features.empty()) throw ValidationError("ordering component must be nonempty");
        for (const auto& f : c.features) {
            if (std::find(universe_.begin(), universe_.end(), f) == universe_.end())
                throw ValidationError("unknown feature symbol: " + f);
            if (!seen.insert(f).second)
                throw ValidationError("duplicate feature symbol: " + f);
        }
    }
    if (seen.size() != universe_.size()) {
        std::string missing;
        for (const auto& u : universe_) {
            if (!seen.count(u)) {
                if (!missing.empty()) missing += ", ";
                missing += u;
            }
        }
        throw ValidationError("ordering does not cover the feature universe; missing: " + missing);
    }
}

CausalOrdering CausalOrdering::parse(const std::string& text,
                                     const std::vector<std::string>& universe) {
    Parser p(text);
    if (!p.eat('[')) p.fail("expected '[' opening the ordering");
    std::vector<ChainComponent> comps;
    if (p.peek() == ']') p.fail("ordering is empty");
    while (true) {
        ChainComponent comp;
        if (p.eat('[')) {
            if (p.peek() == ']') p.fail("component group is empty");
            while (true) {
                comp.features.push_back(p.symbol());
                if (p.eat(',')) continue;
                if (p.eat(']')) break;
                p.fail("expected ',' or ']' in component group");
            }
            if (p.eat('!')) comp.confounded = true;
        } else {
            comp.features.push_back(p.symbol());
        }
        comps.push_back(std::move(comp));
        if (p.eat(',')) continue;
        if (p.eat(']')) break;
        p.fail("expected ',' or ']' after component");
    }
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters after closing ']'");

    // Symbol-level diagnostics before the structural check so messages name
    // the offending symbol rather than the aggregate.
    std::set<std::string> uni(universe.begin(), universe.end());
    std::set<std::string> seen;
    for (const auto& c : comps) {
        for (const auto& f : c.features) {
            if (!uni.count(f)) throw ValidationError("unknown feature symbol: " + f);
            if (!seen.insert(f).second) throw ValidationError("duplicate feature symbol: " + f);
        }
    }
    return CausalOrdering(std::move(comps), universe);
}

std::string CausalOrdering::print() const {
    std::ostringstream ss;
    ss << '[';
    for (size_t i = 0; i < components_.size(); ++i) {
        if (i) ss << ", ";
        const auto& c = components_[i];
        if (c.features.size() == 1 && !c.confounded) {
            ss << c.features[0];
        } else {
            ss << '[';
            for (size_t j = 0; j < c.features.size(); ++j) {
                if (j) ss << ", ";
                ss << c.features[j];
            }
            ss << ']';
            if (c.confounded) ss << '!';
        }
    }
    ss << ']';
    return ss.str();
}

std::vector<std::pair<std::vector<int>, bool>> CausalOrdering::component_indices() const {
    std::vector<std::pair<std::vector<int>, bool>> out;
    out.reserve(components_.size());
    for (const auto& c : components_) {
        std::vector<int> idx;
        idx.reserve(c.features.size());
        for (const auto& f : c.features) {
            auto it = std::find(universe_.begin(), universe_.end(), f);
            idx.push_back(static_cast<int>(it - universe_.begin()));
        }
        std::sort(idx.begin(), idx.end());
        out.emplace_back(std::move(idx), c.confounded);
    }
    return out;
}

bool CausalOrdering::equal_components(const CausalOrdering& o) const {
    if (components_.size() != o.components_.size()) return false;
    for (size_t i = 0; i < components_.size(); ++i) {
        if (components_[i].confounded != o.components_[i].confounded) return false;
        if (components_[i].features != o.components_[i].features) return false;
    }
    return true;
}

const std::map<std::string, CausalOrdering>& builtin_orderings() {
    static const std::map<std::string, CausalOrdering> orderings = [] {
        std::vector<std::string> uni(metric_names().begin(), metric_names().end());
        std::map<std::string, CausalOrdering> m;
        m.emplace("CO1", CausalOrdering::parse(
                             "[NW, [SC, Emp, Uemp], [Inc, Lab], [Uins, Com, Pov, GI], "
                             "[Den, MC, Tran]]",
                             uni));
        m.emplace("CO2", CausalOrdering::parse(
                             "[[Emp, Uemp], [Inc, Lab], SC, NW, [Uins, Com, Pov, GI], "
                             "[Den, MC, Tran]]",
                             uni));
        m.emplace("CO3", CausalOrdering::parse(
                             "[SC, NW, [Emp, Uemp, Inc, Lab], [Uins, Com, Pov, GI], "
                             "[Den, MC, Tran]]",
                             uni));
        return m;
    }();
    return orderings;
}

std::vector<CausalOrdering> shuffle_components(const CausalOrdering& ordering,
                                               int n_perms, uint64_t seed) {
    if (n_perms < 1) throw ValidationError("n_perms must be >= 1");
    const auto& comps = ordering.components();
    const size_t k = comps.size();

    std::vector<CausalOrdering> out;
    out.reserve(n_perms);
    if (k == 1) {
        std::cerr << "warning: single-component ordering, returning " << n_perms
                  << " identical copies\n";
        for (int i = 0; i < n_perms; ++i) out.push_back(ordering);
        return out;
    }

    double log_nperm = 0.0;
    for (size_t i = 2; i <= k; ++i) log_nperm += std::log(static_cast<double>(i));
    bool space_allows_distinct =
        log_nperm >= std::log(static_cast<double>(n_perms)) - 1e-12;
    if (!space_allows_distinct)
        std::cerr << "warning: requested " << n_perms << " permutations but only "
                  << std::exp(log_nperm) << " exist; sampling with replacement\n";

    auto gen = make_stream(seed, 0x0c0500f71eULL);
    std::set<std::vector<int>> used;
    std::vector<int> perm(k);
    for (int draw = 0; draw < n_perms; ++draw) {
        int attempts = 0;
        while (true) {
            std::iota(perm.begin(), perm.end(), 0);
            // Fisher-Yates
            for (size_t i = k - 1; i > 0; --i) {
                size_t j = static_cast<size_t>(gen() % (i + 1));
                std::swap(perm[i], perm[j]);
            }
            if (!space_allows_distinct || used.insert(perm).second) break;
            if (++attempts > 100000)
                throw NumericError("could not sample distinct permutations");
        }
        std::vector<ChainComponent> shuffled;
        shuffled.reserve(k);
        for (int idx : perm) shuffled.push_back(comps[idx]);
        out.emplace_back(std::move(shuffled), ordering.universe());
    }
    return out;
}

}  // namespace covshap
