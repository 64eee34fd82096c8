#pragma once

// Umbrella header: random walks with absorbing states on finite simplicial
// complexes, higher-order Laplacian spectra, homology detection from walk
// limits, and semi-supervised label propagation on oriented edges.

#include "hodgewalk/simplicial_complex.hpp"
#include "hodgewalk/homology.hpp"
#include "hodgewalk/walks.hpp"
#include "hodgewalk/montecarlo.hpp"
#include "hodgewalk/label_propagation.hpp"
#include "hodgewalk/io.hpp"
