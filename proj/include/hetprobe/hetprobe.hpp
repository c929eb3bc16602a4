#pragma once

#include "hetprobe/atomics.hpp"
#include "hetprobe/cloudsim.hpp"
#include "hetprobe/config.hpp"
#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"
#include "hetprobe/estimators.hpp"
#include "hetprobe/losses.hpp"
#include "hetprobe/merit.hpp"
#include "hetprobe/parallel.hpp"
#include "hetprobe/photodetect.hpp"
#include "hetprobe/random.hpp"
#include "hetprobe/response.hpp"
#include "hetprobe/runner.hpp"
#include "hetprobe/version.hpp"
