"""A log-volume measure makes period and frequency descriptions agree."""

import math

import numpy as np
from scipy.special import ndtr

from measurecalc import CellMapping, GridMeasure, log_interval_space, pushforward

T = np.array([0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
omega = np.sort(2 * math.pi / T)
t_space, w_space = log_interval_space(T), log_interval_space(omega)
print("period volumes   ", t_space.volumes)
print("frequency volumes", w_space.volumes[::-1])

# Lognormal period law with median 3 and log-spread 0.8.
p = np.diff(ndtr(np.log(T / 3.0) / 0.8))
period_law = GridMeasure.from_masses(t_space, p)

# omega = 2 pi / T reverses the order of the cells.
phi = CellMapping(t_space, w_space, np.arange(len(t_space))[::-1])
pushed = pushforward(period_law, phi)
direct = np.diff(ndtr(np.log(omega / (2 * math.pi / 3.0)) / 0.8))
print("pushed to omega  ", pushed.masses)
print("lognormal omega  ", direct)
print("density ratio is constant in log space:", pushed.density / period_law.density[::-1])
