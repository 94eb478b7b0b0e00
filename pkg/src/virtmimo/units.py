import numpy as np


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(watt):
    return 10.0 * np.log10(np.asarray(watt, dtype=float)) + 30.0


def noise_power_dbm(n0_dbm_hz=-174.0, bandwidth_hz=15e3, noise_figure_db=10.0):
    """Thermal noise power over a band, including the receiver noise figure."""
    return n0_dbm_hz + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def noise_power_watt(n0_dbm_hz=-174.0, bandwidth_hz=15e3, noise_figure_db=10.0):
    return float(dbm_to_watt(noise_power_dbm(n0_dbm_hz, bandwidth_hz, noise_figure_db)))
