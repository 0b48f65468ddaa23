#ifndef MRW_MRW_HPP
#define MRW_MRW_HPP

#include "mrw/analysis.hpp"
#include "mrw/chain.hpp"
#include "mrw/core.hpp"
#include "mrw/dynamics.hpp"
#include "mrw/model.hpp"
#include "mrw/rng.hpp"

#endif  // MRW_MRW_HPP
