#pragma once

#include "twlab/errors.hpp"
#include "twlab/seqspace.hpp"
#include "twlab/random.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/signavg.hpp"
#include "twlab/cstruct.hpp"
#include "twlab/trivdist.hpp"
#include "twlab/interpscale.hpp"
#include "twlab/io.hpp"
