#pragma once

#include "autodiff.hpp"
#include "checks.hpp"
#include "dual.hpp"
#include "errors.hpp"
#include "inference.hpp"
#include "linalg.hpp"
#include "matrix_maps.hpp"
#include "param_tree.hpp"
#include "scalar_maps.hpp"
#include "special.hpp"
#include "spec_grammar.hpp"
#include "stat_oracles.hpp"
#include "tensor.hpp"
#include "vector_maps.hpp"
