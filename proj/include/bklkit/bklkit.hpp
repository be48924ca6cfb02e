#pragma once

#include "bklkit/analyzer.hpp"
#include "bklkit/bkl_check.hpp"
#include "bklkit/constructors.hpp"
#include "bklkit/exact/models.hpp"
#include "bklkit/frame.hpp"
#include "bklkit/io.hpp"
#include "bklkit/solver.hpp"
#include "bklkit/torsion.hpp"
