#pragma once

#include "atomlight/dynamics.hpp"
#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/medium.hpp"
#include "atomlight/modes.hpp"
#include "atomlight/philox.hpp"
#include "atomlight/pointgas.hpp"
#include "atomlight/propagator.hpp"
#include "atomlight/qops.hpp"
#include "atomlight/quadrature.hpp"
#include "atomlight/regime.hpp"
#include "atomlight/spinfield.hpp"
#include "atomlight/version.hpp"
