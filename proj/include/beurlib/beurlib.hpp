// Umbrella header: pulls in the whole library.
#pragma once

#include <beurlib/arcs.hpp>
#include <beurlib/beta.hpp>
#include <beurlib/common.hpp>
#include <beurlib/domain_io.hpp>
#include <beurlib/errors.hpp>
#include <beurlib/geometry.hpp>
#include <beurlib/harness.hpp>
#include <beurlib/l1fit.hpp>
#include <beurlib/maps.hpp>
#include <beurlib/norms.hpp>
#include <beurlib/transform.hpp>
#include <beurlib/whitney.hpp>
