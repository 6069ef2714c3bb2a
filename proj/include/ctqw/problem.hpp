// problem.hpp — The search-problem record: chain size, marked nodes,
// coupling model, and the marked-node energy eta.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "ctqw/coupling.hpp"

namespace ctqw {

struct SearchProblem {
    int n = 0;                // number of atoms (graph vertices)
    std::vector<int> targets; // marked nodes, 1-based indices into 1..n
    CouplingModel model;
    double eta = 0.0;         // relative strength of the target projector

    void validate() const {
        if (n < 1) throw std::invalid_argument("SearchProblem: n must be >= 1");
        if (targets.empty() || static_cast<int>(targets.size()) > n)
            throw std::invalid_argument("SearchProblem: need 1..n marked nodes");
        for (int t : targets)
            if (t < 1 || t > n)
                throw std::invalid_argument("SearchProblem: target index out of range");
        auto sorted = targets;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("SearchProblem: duplicate target index");
        if (eta < 0.0) throw std::invalid_argument("SearchProblem: eta must be >= 0");
        model.validate();
    }

    SearchProblem with_eta(double new_eta) const {
        SearchProblem p = *this;
        p.eta = new_eta;
        return p;
    }
};

} // namespace ctqw
