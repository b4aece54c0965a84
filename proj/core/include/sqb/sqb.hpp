#pragma once

#include "sqb/bound.hpp"
#include "sqb/curvature.hpp"
#include "sqb/data_io.hpp"
#include "sqb/errors.hpp"
#include "sqb/experiment.hpp"
#include "sqb/model.hpp"
#include "sqb/optimizer.hpp"
#include "sqb/sampling.hpp"
