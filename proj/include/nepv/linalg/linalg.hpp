#pragma once

#include "nepv/linalg/dense.hpp"
#include "nepv/linalg/gep.hpp"
#include "nepv/linalg/qz.hpp"
#include "nepv/linalg/sylvester.hpp"
#include "nepv/linalg/types.hpp"
