#pragma once

#include "ekramers/error.hpp"
#include "ekramers/linalg.hpp"
#include "ekramers/model.hpp"
#include "ekramers/registry.hpp"
#include "ekramers/ode.hpp"
#include "ekramers/path.hpp"
#include "ekramers/saddle_data.hpp"
#include "ekramers/dynamics.hpp"
#include "ekramers/lyapunov.hpp"
#include "ekramers/landscape.hpp"
#include "ekramers/saddle.hpp"
#include "ekramers/random.hpp"
#include "ekramers/montecarlo.hpp"
#include "ekramers/json.hpp"
#include "ekramers/validate.hpp"
