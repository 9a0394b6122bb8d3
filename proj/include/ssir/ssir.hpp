#pragma once

// Core library. File formats live in ssir/io.hpp, which also needs the
// JSON and TOML single headers on the include path.

#include "ssir/attractor.hpp"
#include "ssir/equilibria.hpp"
#include "ssir/errors.hpp"
#include "ssir/forcing.hpp"
#include "ssir/integrate.hpp"
#include "ssir/model.hpp"
#include "ssir/point.hpp"
#include "ssir/sweep.hpp"
