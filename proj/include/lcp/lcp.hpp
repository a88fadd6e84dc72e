#pragma once

#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/kdtree.hpp"
#include "lcp/index.hpp"
#include "lcp/result.hpp"
#include "lcp/verify.hpp"
#include "lcp/exact.hpp"
#include "lcp/sampling.hpp"
#include "lcp/oracle.hpp"
#include "lcp/da.hpp"
#include "lcp/io.hpp"
