#pragma once

#include "ltei/assembly.hpp"
#include "ltei/basis.hpp"
#include "ltei/chebyshev.hpp"
#include "ltei/compression.hpp"
#include "ltei/errors.hpp"
#include "ltei/fmm.hpp"
#include "ltei/io.hpp"
#include "ltei/quadrature.hpp"
#include "ltei/reference.hpp"
#include "ltei/ta.hpp"
#include "ltei/tensor_algebra.hpp"
