#pragma once

#include "gitstrat/errors.hpp"
#include "gitstrat/rational.hpp"
#include "gitstrat/simplex.hpp"
#include "gitstrat/polytope.hpp"
#include "gitstrat/lattice.hpp"
#include "gitstrat/torus_rep.hpp"
#include "gitstrat/stability.hpp"
#include "gitstrat/kempf_ness.hpp"
#include "gitstrat/stratify.hpp"
#include "gitstrat/shb_model.hpp"
#include "gitstrat/graded_kuranishi.hpp"
#include "gitstrat/conformal_bridge.hpp"
#include "gitstrat/random_instances.hpp"
