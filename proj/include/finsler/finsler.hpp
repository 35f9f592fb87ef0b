#pragma once

// Finite-dimensional Finsler modules over block C*-algebras.

#include "finsler/error.hpp"
#include "finsler/rng.hpp"
#include "finsler/linalg.hpp"
#include "finsler/algebra.hpp"
#include "finsler/json_io.hpp"
#include "finsler/module.hpp"
#include "finsler/families.hpp"
#include "finsler/pullback.hpp"
#include "finsler/verdict.hpp"
#include "finsler/checks.hpp"
#include "finsler/akemann.hpp"
#include "finsler/hilbert.hpp"
#include "finsler/structure.hpp"
#include "finsler/gen.hpp"
#include "finsler/serialize.hpp"
#include "finsler/scenario.hpp"
