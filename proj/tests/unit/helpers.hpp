#pragma once

#include <cmath>
#include <vector>

#include "model.hpp"

namespace msrd::test {

inline Reaction reaction(ReactionClass cls, int gc, int gd, std::vector<Monomial> terms, const char* label = "r") {
    Reaction r;
    r.label = label;
    r.cls = cls;
    r.gamma_c = gc;
    r.gamma_d = gd;
    r.rate.terms = std::move(terms);
    return r;
}

inline NetworkSpec empty_network(Kernel k = Kernel::constant_box()) {
    NetworkSpec s;
    s.name = "test";
    s.kernel = std::move(k);
    return s;
}

// Birth k1 and death k2·u_C, both FastC.
inline NetworkSpec linear_fast_network(double k1, double k2) {
    NetworkSpec s = empty_network();
    s.reactions = {reaction(ReactionClass::FastC, +1, 0, {{k1, 0, 0}}, "birth"),
                   reaction(ReactionClass::FastC, -1, 0, {{k2, 1, 0}}, "death")};
    return s;
}

}  // namespace msrd::test
