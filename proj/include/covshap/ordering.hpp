#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace covshap {

// One group of a partial causal ordering. Features inside a group have no
// specified causal order among themselves; `confounded` marks within-group
// dependence as driven by latent common causes.
struct ChainComponent {
    std::vector<std::string> features;
    bool confounded = false;
};

// An ordered sequence of chain components that partitions a feature universe.
class CausalOrdering {
public:
    CausalOrdering(std::vector<ChainComponent> components,
                   std::vector<std::string> universe);

    // Nested-bracket notation: "[NW, [SC, Emp], ...]". A group suffixed with
    // '!' is confounded. Singleton symbols are unconfounded components.
    static CausalOrdering parse(const std::string& text,
                                const std::vector<std::string>& universe);

    std::string print() const;

    const std::vector<ChainComponent>& components() const { return components_; }
    const std::vector<std::string>& universe() const { return universe_; }

    // Per component: indices into the universe, plus the confounded flag.
    std::vector<std::pair<std::vector<int>, bool>> component_indices() const;

    bool operator==(const CausalOrdering& o) const {
        return universe_ == o.universe_ && equal_components(o);
    }

private:
    bool equal_components(const CausalOrdering& o) const;
    void validate() const;

    std::vector<ChainComponent> components_;
    std::vector<std::string> universe_;
};

// The paper's three primary orderings over the 13-metric universe,
// keyed "CO1", "CO2", "CO3".
const std::map<std::string, CausalOrdering>& builtin_orderings();

// Random permutations of the component order; feature groups and confounding
// flags are untouched. Distinct permutations when n_perms <= K!, otherwise
// sampled with replacement (with a warning to stderr).
std::vector<CausalOrdering> shuffle_components(const CausalOrdering& ordering,
                                               int n_perms, uint64_t seed);

}  // namespace covshap
