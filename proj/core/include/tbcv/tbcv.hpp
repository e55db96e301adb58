#pragma once

#include "tbcv/channel.hpp"
#include "tbcv/decoy.hpp"
#include "tbcv/error.hpp"
#include "tbcv/finite_size.hpp"
#include "tbcv/keyrate.hpp"
#include "tbcv/optimizer.hpp"
#include "tbcv/rng.hpp"
#include "tbcv/rounds.hpp"
#include "tbcv/simplex.hpp"
#include "tbcv/specfun.hpp"
#include "tbcv/tomo.hpp"
#include "tbcv/version.hpp"
#include "tbcv/yields.hpp"
