#pragma once

// Multi-class traffic assignment and equilibrium-efficiency toolkit:
// Wardrop user equilibria, welfare-optimal assignments under utilitarian,
// Nash-product and max-min comparability classes, and the invariant Price of
// Anarchy with its affine-transformation guarantees.

#include "ipoa/access_link.hpp"
#include "ipoa/equilibrium.hpp"
#include "ipoa/finite_game.hpp"
#include "ipoa/frank_wolfe.hpp"
#include "ipoa/instance_io.hpp"
#include "ipoa/latency.hpp"
#include "ipoa/network.hpp"
#include "ipoa/oracle.hpp"
#include "ipoa/poa.hpp"
#include "ipoa/shortest_path.hpp"
#include "ipoa/social_optimum.hpp"
#include "ipoa/synthetic_city.hpp"
#include "ipoa/welfare.hpp"
