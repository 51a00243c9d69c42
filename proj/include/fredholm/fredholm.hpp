#pragma once

#include "fredholm/errors.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/first_kind.hpp"
#include "fredholm/classical.hpp"
#include "fredholm/second_kind.hpp"
#include "fredholm/transform.hpp"
#include "fredholm/reduction.hpp"
