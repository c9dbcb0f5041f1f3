"""Unit conventions and conversions.

Internally every energy and rate is an angular frequency in rad/s, times are
in seconds and magnetic fields in tesla.  User-facing I/O follows the usual
atomic-physics habit of quoting frequencies as nu = omega/2pi in MHz, fields
in gauss and times in ns.
"""

import math

TWO_PI = 2.0 * math.pi

MHZ = TWO_PI * 1e6          # rad/s per "MHz over 2pi"
GHZ = TWO_PI * 1e9
NS = 1e-9                   # seconds per nanosecond
US = 1e-6
GAUSS = 1e-4                # tesla per gauss


def mhz_to_angular(value_mhz: float) -> float:
    """omega [rad/s] from a frequency quoted as value/2pi in MHz."""
    return value_mhz * MHZ


def angular_to_mhz(omega: float) -> float:
    """Frequency in MHz (omega/2pi convention) from rad/s."""
    return omega / MHZ


def gauss_to_tesla(b_gauss: float) -> float:
    return b_gauss * GAUSS


def tesla_to_gauss(b_tesla: float) -> float:
    return b_tesla / GAUSS
