#pragma once

#include "uwhl/chart.hpp"
#include "uwhl/config.hpp"
#include "uwhl/forward_model.hpp"
#include "uwhl/haze_lines.hpp"
#include "uwhl/image.hpp"
#include "uwhl/image_io.hpp"
#include "uwhl/metrics.hpp"
#include "uwhl/restoration.hpp"
#include "uwhl/transmission.hpp"
#include "uwhl/veiling_light.hpp"
#include "uwhl/water_types.hpp"
