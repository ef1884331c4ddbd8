#ifndef GREEDYFOOL_GREEDYFOOL_HPP
#define GREEDYFOOL_GREEDYFOOL_HPP

#include "greedyfool/attack.hpp"
#include "greedyfool/errors.hpp"
#include "greedyfool/evolution.hpp"
#include "greedyfool/image.hpp"
#include "greedyfool/oracle.hpp"
#include "greedyfool/perceptual_metrics.hpp"
#include "greedyfool/png_io.hpp"
#include "greedyfool/remote_oracle.hpp"
#include "greedyfool/report.hpp"

#endif // GREEDYFOOL_GREEDYFOOL_HPP
