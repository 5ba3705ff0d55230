#pragma once

#include "dpi/casimir.hpp"
#include "dpi/commutator.hpp"
#include "dpi/mc.hpp"
#include "dpi/oscillator.hpp"
#include "dpi/paths.hpp"
#include "dpi/special.hpp"
#include "dpi/velocity.hpp"
