#pragma once

#include "nepv/arnoldi.hpp"
#include "nepv/errors.hpp"
#include "nepv/generators.hpp"
#include "nepv/io.hpp"
#include "nepv/linalg/linalg.hpp"
#include "nepv/linearization.hpp"
#include "nepv/log.hpp"
#include "nepv/oracle.hpp"
#include "nepv/problem.hpp"
#include "nepv/random.hpp"
