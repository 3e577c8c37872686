#pragma once

#include "binary.hpp"
#include "channel.hpp"
#include "elias.hpp"
#include "error.hpp"
#include "io.hpp"
#include "oracle.hpp"
#include "representation.hpp"
#include "theta.hpp"
