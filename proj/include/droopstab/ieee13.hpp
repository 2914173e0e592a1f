#pragma once

#include "droopstab/grid_model.hpp"

namespace droopstab {

/// Reduced 13-bus feeder with ten droop-controlled inverters and uniform
/// gains. Bus 650 is the feeder; 634 is merged into 633 and 692 into 671.
GridSpec build_ieee13(double kq, double kp);

}  // namespace droopstab
