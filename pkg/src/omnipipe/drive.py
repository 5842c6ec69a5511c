"""Crawler drive-direction model.

Each module translates by running a crawler chain whose lugs give it a
circular cross-section.  When the whole robot rolls about the pipe axis
the modules counter-rotate about their own axes; once a module has turned
past 90 deg its upper and lower chain runs cancel and it stops driving,
and past that its drive direction reverses.  This module captures that as
a pure sign function of the accumulated self-rotation alpha, plus the
rolling ratio that couples robot roll to module self-rotation.
"""

from __future__ import annotations

import math

from .kinematics import RobotGeometry

# alpha on the no-motion line within +-deadband produces no translation
MAX_DEADBAND_RAD = math.radians(10.0)
DEFAULT_DEADBAND_RAD = math.radians(1.0)


def drive_sign(alpha: float, deadband: float = DEFAULT_DEADBAND_RAD) -> int:
    """Direction a module translates for positive chain drive.

    ``alpha`` is the module's cumulative self-rotation (rad); ``deadband``
    (rad, within [0, 10 deg]) widens the 90 deg no-motion line into a band
    where the sign is 0.  Elsewhere the sign is sign(cos alpha): upright
    and near-upright modules drive forward, modules past 90 deg drive
    backward, with period 360 deg.
    """
    if not 0.0 <= deadband <= MAX_DEADBAND_RAD + 1e-12:
        raise ValueError(f"deadband must lie in [0, 10 deg], got {deadband}")
    if abs(math.fmod(abs(alpha), math.pi) - math.pi / 2.0) <= deadband:
        return 0
    return 1 if math.cos(alpha) > 0.0 else -1


def rolling_gain(d_mm: float, geom: RobotGeometry) -> float:
    """Module self-rotation per unit robot roll, rolling without slip.

    A module of outer radius rho rolling on a wall at distance D/2 from
    the pipe axis turns (D/2)/rho times as fast as the robot rolls, in
    the opposite sense.
    """
    return (d_mm / 2.0) / geom.module_outer_radius


def self_rotation_rate(theta_dot_4: float, d_mm: float,
                       geom: RobotGeometry) -> float:
    """alpha rate (rad/s) induced by robot roll rate theta_dot_4."""
    return -theta_dot_4 * rolling_gain(d_mm, geom)
