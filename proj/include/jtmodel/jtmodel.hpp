#pragma once

#include "jtmodel/errors.hpp"
#include "jtmodel/hilbert.hpp"
#include "jtmodel/hamiltonian.hpp"
#include "jtmodel/meanfield.hpp"
#include "jtmodel/spectral.hpp"
#include "jtmodel/convergence.hpp"
#include "jtmodel/ensembles.hpp"
#include "jtmodel/dynamics.hpp"
#include "jtmodel/io/config.hpp"
#include "jtmodel/io/table.hpp"
#include "jtmodel/io/drivers.hpp"
