#pragma once

#include "lsfem/assembly.hpp"
#include "lsfem/core.hpp"
#include "lsfem/cutfem_geom.hpp"
#include "lsfem/elasticity.hpp"
#include "lsfem/fem_spaces.hpp"
#include "lsfem/ghost_penalty.hpp"
#include "lsfem/interface.hpp"
#include "lsfem/jet.hpp"
#include "lsfem/linalg.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/parallel.hpp"
#include "lsfem/polynomial.hpp"
#include "lsfem/quadrature.hpp"
#include "lsfem/study.hpp"
