#pragma once

#include "pec/linalg.hpp"

#include <vector>

namespace pec {

using YoungDiagram = std::vector<int>; // weakly decreasing rows

std::vector<YoungDiagram> enumerate_young(int n, int d);
long sn_irrep_dim(const YoungDiagram &lambda);         // hook length formula
long gl_irrep_dim(const YoungDiagram &lambda, int d);  // hook content formula
long sn_character(const YoungDiagram &lambda, const std::vector<int> &cycle_type);
std::vector<int> cycle_type(const std::vector<int> &perm);

// Qudit k is moved to position perm[k].
CMat permutation_operator(int d, const std::vector<int> &perm);

struct IsotypicBlock {
    YoungDiagram diagram;
    CMat projector;
    long dimU = 0;
    long dimV = 0;
};

// Memoized per (n, d). CapacityError when d^n > 4096 or n > 7.
const std::vector<IsotypicBlock> &build_isotypic_blocks(int n, int d);
CMat universal_symmetric_state(int n, int d);

// x is a string over {0..k-1}; each symbol's block gets sigma_{U,m}.
CMat sigma_for_string(const std::vector<int> &x, int d);
// Uniform mixture of sigma_x over the type class with the given counts.
CMat sigma_type_average(const std::vector<int> &counts, int d);

std::vector<int> type_of(const std::vector<int> &x, int k);
std::vector<std::vector<int>> enumerate_types(int n, int k);
double class_size(const std::vector<int> &counts);
// s with s[i] = position of x_i in the stable sort of x.
std::vector<int> sorting_permutation(const std::vector<int> &x);
double empirical_entropy(const std::vector<int> &x, int k);

double domination_factor(int n, int d); // (n+1)^{(d+2)(d-1)/2}

} // namespace pec
