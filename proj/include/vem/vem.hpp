#pragma once

#include "vem/quadrature.hpp"
#include "vem/geometry.hpp"
#include "vem/mesh.hpp"
#include "vem/mesh_generators.hpp"
#include "vem/mesh_io.hpp"
#include "vem/vem_core.hpp"
#include "vem/assembly.hpp"
#include "vem/krylov_schur.hpp"
#include "vem/solvers.hpp"
#include "vem/analysis.hpp"
#include "vem/expression.hpp"
#include "vem/problems.hpp"
#include "vem/experiment.hpp"
